#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use mor_core::config::{parse_config, Format};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(text, Format::Json, Path::new("fuzz.json")) {
        let again = parse_config(&cfg.to_json(), Format::Json, Path::new("fuzz.json")).expect("emitted config parses");
        assert_eq!(again, cfg);
    }
});
