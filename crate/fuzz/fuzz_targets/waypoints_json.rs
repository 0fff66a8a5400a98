#![no_main]

use libfuzzer_sys::fuzz_target;
use modcube_core::planner::{plan_min_snap, WaypointsDoc};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = WaypointsDoc::from_json(text) else { return };
    if doc.points.len() > 64 {
        return;
    }
    if let Ok(times) = doc.resolve_times() {
        let _ = plan_min_snap(&doc.positions(), &times);
    }
});
