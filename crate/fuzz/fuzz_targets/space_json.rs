#![no_main]

use libfuzzer_sys::fuzz_target;
use modcube_core::harness::SpaceDoc;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(space) = SpaceDoc::from_json(text) {
        if space.radii.len() <= 500 {
            let _ = space.surface();
        }
    }
});
