#![no_main]

use libfuzzer_sys::fuzz_target;
use plurinorm::scenario::{parse_scenario, ScenarioBody};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(scenario) = parse_scenario(text) else {
        return;
    };
    // the combinatorial evaluations are cheap enough to run on every accepted input
    if let ScenarioBody::Resolution(r) = &scenario.body {
        let _ = r.model.characteristic_indicatrix();
        let _ = r.model.indicatrix_from_strata();
        for a in &r.audits {
            let _ = r.model.mult_bound_check(&a.point, a.mult, a.n);
        }
    }
});
