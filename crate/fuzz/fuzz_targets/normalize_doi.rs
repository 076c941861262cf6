#![no_main]

use libfuzzer_sys::fuzz_target;
use oalens::normalize_doi;

fuzz_target!(|raw: &str| {
    if let Some(doi) = normalize_doi(raw) {
        assert!(doi.starts_with("10."));
        assert_eq!(normalize_doi(&doi).as_deref(), Some(doi.as_str()));
    }
});
