#![no_main]

use libfuzzer_sys::fuzz_target;
use oalens::model::parse_period;

fuzz_target!(|raw: &str| {
    if let Ok(p) = parse_period(raw) {
        assert!(p.start() <= p.end());
    }
});
