#![no_main]

use libfuzzer_sys::fuzz_target;
use oalens::report::parse_report;
use oalens::ReportFormat;

fuzz_target!(|data: &[u8]| {
    let Some((&selector, body)) = data.split_first() else {
        return;
    };
    let format = if selector % 2 == 0 {
        ReportFormat::Csv
    } else {
        ReportFormat::JsonLines
    };
    if let Ok((columns, rows)) = parse_report(body, format) {
        assert!(rows.iter().all(|r| r.len() == columns.len()));
    }
});
