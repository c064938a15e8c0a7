#![no_main]

use kuenneth::descriptor::{instantiate, raw_from_toml_str};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(raw) = raw_from_toml_str(src) {
        for p in [2, 3] {
            let _ = instantiate(&raw, p, Some(12));
        }
    }
});
