#![no_main]

use graph_selftest::experiment::StateFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(state) = StateFile::from_json(text) {
        assert!((state.norm_sqr() - 1.0).abs() < 1e-9);
    }
});
