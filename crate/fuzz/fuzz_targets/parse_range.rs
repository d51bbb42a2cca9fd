#![no_main]

use libfuzzer_sys::fuzz_target;
use mor_core::config::parse_range;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((lo, hi)) = parse_range(text) {
        assert!(lo > 0.0 && hi > lo && hi.is_finite());
    }
});
