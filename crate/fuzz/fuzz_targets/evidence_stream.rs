#![no_main]

use libfuzzer_sys::fuzz_target;
use oalens::ingest::{parse_evidence_stream, EvidenceItem};

// Plain or gzip input; the reader sniffs the magic bytes.
fuzz_target!(|data: &[u8]| {
    let Ok(mut stream) = parse_evidence_stream(data, "fuzz") else {
        return;
    };
    let mut issues = 0;
    for item in stream.by_ref() {
        match item {
            Ok(EvidenceItem::Issue(i)) => {
                assert!(i.line_no >= 1);
                issues += 1;
            }
            Ok(EvidenceItem::Record(_)) => {}
            Err(_) => return,
        }
    }
    assert_eq!(stream.rejected(), issues);
    assert!(stream.rejected() <= stream.lines_read());
});
