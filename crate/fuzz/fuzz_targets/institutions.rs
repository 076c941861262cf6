#![no_main]

use libfuzzer_sys::fuzz_target;
use oalens::ingest::{parse_institutions, TableFormat};

fuzz_target!(|data: &[u8]| {
    let Some((&selector, body)) = data.split_first() else {
        return;
    };
    let format = if selector % 2 == 0 {
        TableFormat::Csv
    } else {
        TableFormat::JsonLines
    };
    if let Ok(t) = parse_institutions(body, format, "fuzz") {
        for i in &t.records {
            assert!(!i.regions.is_empty());
        }
    }
});
