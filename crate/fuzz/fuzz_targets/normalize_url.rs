#![no_main]

use libfuzzer_sys::fuzz_target;
use oalens::repo::normalize_url;

fuzz_target!(|raw: &str| {
    let once = normalize_url(raw);
    assert_eq!(normalize_url(&once), once);
});
