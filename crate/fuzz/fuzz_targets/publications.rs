#![no_main]

use libfuzzer_sys::fuzz_target;
use oalens::ingest::{parse_publications, TableFormat};

// The first byte picks the format.
fuzz_target!(|data: &[u8]| {
    let Some((&selector, body)) = data.split_first() else {
        return;
    };
    let format = if selector % 2 == 0 {
        TableFormat::Csv
    } else {
        TableFormat::JsonLines
    };
    if let Ok(t) = parse_publications(body, format, &(2014..=2017), "fuzz") {
        for p in &t.records {
            assert!((2014..=2017).contains(&p.year));
            assert!(!p.field_ids.is_empty());
        }
    }
});
