#![no_main]

use graph_selftest::bell::Preset;
use graph_selftest::experiment::{bell_value_from_counts, estimate_correlator, CountsRecord};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(record) = CountsRecord::from_json(text) else {
        return;
    };
    if let Some(n) = record.n_parties() {
        let all: Vec<usize> = (1..=n).collect();
        if let Ok(e) = estimate_correlator(&record, &all) {
            assert!(e.value.abs() <= 1.0 + 1e-12);
        }
    }
    let _ = bell_value_from_counts(std::slice::from_ref(&record), &Preset::B1.build().unwrap());
});
