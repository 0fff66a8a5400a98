#![no_main]

use libfuzzer_sys::fuzz_target;
use modcube_core::control::build_allocation;
use modcube_core::vehicle::compose_mass_properties;
use modcube_core::vehicle::schema::parse_assembly;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(assembly) = parse_assembly(text) {
        let props = compose_mass_properties(&assembly);
        let _ = build_allocation(&assembly, &props);
    }
});
