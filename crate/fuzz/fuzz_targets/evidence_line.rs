#![no_main]

use libfuzzer_sys::fuzz_target;
use oalens::ingest::parse_evidence_line;
use oalens::normalize_doi;

fuzz_target!(|data: &[u8]| {
    if let Ok(Some(record)) = parse_evidence_line(data, "fuzz", 1) {
        let doi = record.doi.as_str();
        assert_eq!(normalize_doi(doi).as_deref(), Some(doi));
    }
});
