#![no_main]

use libfuzzer_sys::fuzz_target;
use modcube_core::hydro::lut_file::{lut_to_string, read_lut};

fuzz_target!(|data: &[u8]| {
    if let Ok(lut) = read_lut(data) {
        let text = lut_to_string(&lut).expect("serialise parsed table");
        let again = read_lut(text.as_bytes()).expect("reparse serialised table");
        assert_eq!(lut, again);
    }
});
