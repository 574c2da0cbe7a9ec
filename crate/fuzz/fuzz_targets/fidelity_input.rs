#![no_main]

use graph_selftest::experiment::FidelityInput;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(input) = FidelityInput::from_json(text) {
        let _ = input.estimate();
    }
});
