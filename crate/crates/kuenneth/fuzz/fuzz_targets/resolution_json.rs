#![no_main]

use kuenneth::resolution::{resolution_from_raw, RawResolution, RingRef};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(raw) = serde_json::from_str::<RawResolution>(src) else { return };
    // skip path-valued ring-refs so the fuzzer never touches the filesystem
    if matches!(raw.ring_ref, RingRef::Path(_)) {
        return;
    }
    let _ = resolution_from_raw(&raw, None);
});
