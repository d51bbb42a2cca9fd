#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use mor_core::mtx;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(parsed) = mtx::parse_mtx(text, Path::new("fuzz.mtx")) {
        assert!(parsed.entries.iter().all(|&(i, j, _)| i < parsed.nrows && j < parsed.ncols));
        // keep dense conversion bounded
        if parsed.nrows.saturating_mul(parsed.ncols) <= 1 << 16 {
            let _ = parsed.to_dense();
        }
        if parsed.nrows <= 1 << 16 && parsed.ncols <= 1 << 16 {
            let _ = parsed.to_sparse();
        }
    }
});
