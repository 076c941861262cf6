#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use oalens::gold::{resolve_journal_country, CountryLookup};

static LOOKUP: OnceLock<CountryLookup> = OnceLock::new();

fuzz_target!(|address: &str| {
    let lookup = LOOKUP.get_or_init(CountryLookup::builtin);
    if let Some(code) = resolve_journal_country(address, lookup) {
        assert_eq!(code.len(), 2);
    }
});
