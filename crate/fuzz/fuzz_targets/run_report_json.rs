#![no_main]

use libfuzzer_sys::fuzz_target;
use mor_core::pipeline::RunReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = RunReport::from_json(text) {
        let _ = RunReport::from_json(&report.to_json()).expect("emitted report parses");
    }
});
