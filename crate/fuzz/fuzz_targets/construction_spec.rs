#![no_main]

use graph_selftest::bell::{build_inequality, ConstructionSpec, Family};
use graph_selftest::graph::generators;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = ConstructionSpec::from_json(text) else {
        return;
    };
    for family in [Family::Ghz, Family::Cluster] {
        if let Ok(ineq) = build_inequality(&generators(&family.graph()), &spec, "fuzz") {
            assert!(ineq.classical_bound < ineq.quantum_bound);
        }
    }
});
