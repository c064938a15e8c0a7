#![no_main]

use kuenneth::descriptor::{presentation_from_json_str, presentation_from_toml_str};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let _ = presentation_from_toml_str(src);
    let _ = presentation_from_json_str(src);
});
