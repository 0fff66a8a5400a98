#![no_main]

use libfuzzer_sys::fuzz_target;
use modcube_core::harness::{Scenario, ScenarioDoc};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = ScenarioDoc::from_json(text) else { return };
    // Keep drag table construction cheap.
    if doc.plant.samples > 2_000 || doc.plant.n_s > 50 || doc.bodies.len() > 4 {
        return;
    }
    let _ = Scenario::resolve(&doc, None);
});
