#![no_main]

use graph_selftest::robustness::{bound_curve, certify, RobustnessCoefficients};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(coeffs) = RobustnessCoefficients::from_json(text) else {
        return;
    };
    let _ = certify(coeffs.beta_q, 0.01, &coeffs);
    let _ = bound_curve(&coeffs, 11);
});
