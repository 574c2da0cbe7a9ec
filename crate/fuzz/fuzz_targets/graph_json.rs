#![no_main]

use graph_selftest::graph::{generators, Graph};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = Graph::from_json(text) {
        assert_eq!(Graph::from_json(&g.to_json()).unwrap(), g);
        if g.n_vertices() <= 64 {
            assert_eq!(generators(&g).len(), g.n_vertices());
        }
    }
});
