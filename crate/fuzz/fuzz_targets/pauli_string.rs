#![no_main]

use graph_selftest::graph::{multiply, PauliString};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = text.parse::<PauliString>() {
        let _ = p.to_string();
        let square = multiply(&p, &p).unwrap();
        assert!(square.is_identity() && !square.is_negative());
    }
});
