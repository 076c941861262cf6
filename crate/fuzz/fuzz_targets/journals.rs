#![no_main]

use libfuzzer_sys::fuzz_target;
use oalens::ingest::{parse_journals, TableFormat};

fuzz_target!(|data: &[u8]| {
    let Some((&selector, body)) = data.split_first() else {
        return;
    };
    let format = if selector % 2 == 0 {
        TableFormat::Csv
    } else {
        TableFormat::JsonLines
    };
    let _ = parse_journals(body, format, "fuzz");
});
