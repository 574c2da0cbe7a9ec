use std::collections::BTreeSet;
use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use graph_selftest::bell::{Family, Preset};
use graph_selftest::experiment::{
    cluster_fidelity, coherence_observable, estimate_correlator, ghz_fidelity,
    ghz_fidelity_from_estimates, noisy_state, outcome_distribution, parse_setting_label,
    required_settings, sample_counts, setting_label, simulate_ghz_fidelity_counts, CountsRecord,
    NoiseSpec, Outcome,
};
use graph_selftest::graph::{canonical_state, generators, CanonicalState, Graph};
use graph_selftest::linalg::{expectation, kron_all, paulis, ComplexMatrix, DensityState, C64};

fn random_density(n_qubits: usize, seed: u64) -> DensityState {
    let d = 1 << n_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<C64> = (0..d * d)
        .map(|_| {
            C64::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            )
        })
        .collect();
    let g = ComplexMatrix::from_row_major(d, d, &entries).unwrap();
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let mut rho = m.scale(1.0 / tr);
    for r in 0..d {
        for c in r + 1..d {
            rho.set(c, r, rho.get(r, c).conj());
        }
    }
    DensityState::new(rho).unwrap()
}

/// `n·σ` for a unit vector given in spherical angles.
fn bloch_observable(polar: f64, azimuth: f64) -> ComplexMatrix {
    let x = paulis::x().scale(polar.sin() * azimuth.cos());
    let y = paulis::y().scale(polar.sin() * azimuth.sin());
    let z = paulis::z().scale(polar.cos());
    &(&x + &y) + &z
}

fn arb_observable() -> impl Strategy<Value = ComplexMatrix> {
    (0.0..PI, 0.0..2.0 * PI).prop_map(|(p, a)| bloch_observable(p, a))
}

fn ghz_exact_inputs(rho: &DensityState) -> ((f64, f64), Vec<(f64, f64)>) {
    // Projector onto span{|0000>, |1111>}.
    let mut proj = ComplexMatrix::zeros(16, 16);
    proj.set(0, 0, C64::new(1.0, 0.0));
    proj.set(15, 15, C64::new(1.0, 0.0));
    let population = expectation(rho, &proj).unwrap();
    let coherence = (0..4)
        .map(|k| {
            let m = coherence_observable(k as f64 * PI / 4.0);
            (expectation(rho, &kron_all(vec![&m; 4])).unwrap(), 0.0)
        })
        .collect();
    ((population, 0.0), coherence)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn marginals_do_not_depend_on_remote_settings(
        seed in any::<u64>(),
        local in proptest::collection::vec(arb_observable(), 2),
        remote_a in proptest::collection::vec(arb_observable(), 2),
        remote_b in proptest::collection::vec(arb_observable(), 2),
    ) {
        let rho = random_density(4, seed);
        let first: Vec<ComplexMatrix> = local.iter().chain(&remote_a).cloned().collect();
        let second: Vec<ComplexMatrix> = local.iter().chain(&remote_b).cloned().collect();
        let m1 = outcome_distribution(&rho, &first).unwrap().marginal(&[1, 2]);
        let m2 = outcome_distribution(&rho, &second).unwrap().marginal(&[1, 2]);
        for (a, b) in m1.iter().zip(&m2) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn outcome_probabilities_reproduce_correlators(
        seed in any::<u64>(),
        observables in proptest::collection::vec(arb_observable(), 4),
    ) {
        let rho = random_density(4, seed);
        let dist = outcome_distribution(&rho, &observables).unwrap();
        prop_assert!((dist.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(dist.probabilities().iter().all(|&p| p >= -1e-12));
        let from_probs: f64 = dist.iter().map(|(o, p)| p * (1..=4).map(|i| o.sign(i)).product::<f64>()).sum();
        let direct = expectation(&rho, &kron_all(observables.iter())).unwrap();
        prop_assert!((from_probs - direct).abs() < 1e-10);
    }

    #[test]
    fn ghz_estimator_equals_the_fidelity(seed in any::<u64>()) {
        let rho = random_density(4, seed);
        let (population, coherence) = ghz_exact_inputs(&rho);
        let (f, _) = ghz_fidelity_from_estimates(population, &coherence, 4).unwrap();
        let exact = rho.fidelity_to(&canonical_state(CanonicalState::Ghz4)).unwrap();
        prop_assert!((f - exact).abs() < 1e-10);
    }

    #[test]
    fn cluster_estimator_equals_the_fidelity(seed in any::<u64>()) {
        let rho = random_density(4, seed);
        let sites: BTreeSet<usize> = [1, 4].into_iter().collect();
        let stabilizers = generators(&Graph::line(4)).conjugate_by_hadamard(&sites).all_elements();
        let values: Vec<(f64, f64)> =
            stabilizers.iter().map(|s| (expectation(&rho, &s.to_matrix()).unwrap(), 0.0)).collect();
        let (f, _) = cluster_fidelity(&values).unwrap();
        let exact = rho.fidelity_to(&canonical_state(CanonicalState::Cluster4)).unwrap();
        prop_assert!((f - exact).abs() < 1e-10);
    }

    #[test]
    fn counts_round_trip_through_json(counts in proptest::collection::vec(0u64..1_000_000, 16)) {
        let map = (0..16).map(|i| (Outcome::from_index(4, i).to_string(), counts[i])).collect();
        let record = CountsRecord::new("A1 B2 B3 B4", map).unwrap();
        prop_assert_eq!(CountsRecord::from_json(&record.to_json()).unwrap(), record);
    }

    #[test]
    fn outcome_labels_round_trip(index in 0usize..64) {
        let o = Outcome::from_index(6, index);
        prop_assert_eq!(o.to_string().parse::<Outcome>().unwrap(), o);
    }
}

#[test]
fn setting_labels_round_trip() {
    for p in Preset::ALL {
        for choice in required_settings(&p.build().unwrap()) {
            assert_eq!(
                parse_setting_label(&setting_label(&choice)).unwrap(),
                choice
            );
        }
    }
}

#[test]
fn sigma_scales_as_inverse_root_events() {
    let rho = DensityState::from_pure(&canonical_state(CanonicalState::Ghz4));
    let m = coherence_observable(PI / 8.0);
    let dist = outcome_distribution(&rho, &vec![m; 4]).unwrap();
    let scaled: Vec<f64> = [1e3, 1e4, 1e5]
        .iter()
        .map(|&t| {
            let e = estimate_correlator(&sample_counts(&dist, t, 7, "M").unwrap(), &[1, 2, 3, 4])
                .unwrap();
            e.sigma * t.sqrt()
        })
        .collect();
    let reference = scaled[2];
    for s in &scaled {
        assert!((s / reference - 1.0).abs() < 0.2, "{scaled:?}");
    }
}

#[test]
fn seed_spread_matches_the_reported_sigma() {
    let rho = DensityState::from_pure(&canonical_state(CanonicalState::Ghz4));
    let dist = outcome_distribution(&rho, &vec![coherence_observable(PI / 8.0); 4]).unwrap();
    let estimates: Vec<_> = (0..10)
        .map(|seed| {
            estimate_correlator(
                &sample_counts(&dist, 1e5, seed, "M").unwrap(),
                &[1, 2, 3, 4],
            )
            .unwrap()
        })
        .collect();
    let mean = estimates.iter().map(|e| e.value).sum::<f64>() / 10.0;
    let spread = (estimates
        .iter()
        .map(|e| (e.value - mean).powi(2))
        .sum::<f64>()
        / 9.0)
        .sqrt();
    let sigma = estimates.iter().map(|e| e.sigma).sum::<f64>() / 10.0;
    assert!(
        spread / sigma > 0.5 && spread / sigma < 2.0,
        "spread {spread}, sigma {sigma}"
    );
}

#[test]
fn simulated_ghz_fidelity_is_unbiased() {
    let rho = noisy_state(
        &canonical_state(CanonicalState::Ghz4),
        &NoiseSpec::preset(Family::Ghz, 0.2, false).unwrap(),
    )
    .unwrap();
    let exact = rho
        .fidelity_to(&canonical_state(CanonicalState::Ghz4))
        .unwrap();
    let (pop, coherence) = simulate_ghz_fidelity_counts(&rho, 1e5, 3).unwrap();
    let (f, sigma) = ghz_fidelity(&pop, &coherence).unwrap();
    assert!((f - exact).abs() <= 3.0 * sigma, "{f} vs {exact} ({sigma})");
}

#[test]
fn noisy_fidelity_follows_the_mixing_formula() {
    // Overlap of the two-pair noise with each target, computed by hand:
    // 1/2 for GHZ and ((√3 - 1)/4)^2 for the cluster state.
    let overlaps = [
        (Family::Ghz, 0.5),
        (Family::Cluster, ((3f64.sqrt() - 1.0) / 4.0).powi(2)),
    ];
    for (family, overlap) in overlaps {
        let target = canonical_state(family.canonical_state());
        for p in [0.0, 0.1, 0.2, 1.0, 3.5] {
            let rho = noisy_state(&target, &NoiseSpec::preset(family, p, false).unwrap()).unwrap();
            let want = (1.0 + p * overlap) / (1.0 + p);
            assert!(
                (rho.fidelity_to(&target).unwrap() - want).abs() < 1e-12,
                "{family:?} p={p}"
            );
        }
    }
}

#[test]
fn dephased_ghz_has_full_population_and_no_coherence() {
    let rho = DensityState::from_pure(&canonical_state(CanonicalState::Ghz4)).dephased();
    let (population, coherence) = ghz_exact_inputs(&rho);
    assert!((population.0 - 1.0).abs() < 1e-12);
    assert!(coherence.iter().all(|(c, _)| c.abs() < 1e-12));
    let (f, _) = ghz_fidelity_from_estimates(population, &coherence, 4).unwrap();
    assert!((f - 0.5).abs() < 1e-12);
}

#[test]
fn heavy_noise_approaches_the_noise_state() {
    for family in [Family::Ghz, Family::Cluster] {
        let spec = NoiseSpec::preset(family, 1e6, false).unwrap();
        let rho = noisy_state(&canonical_state(family.canonical_state()), &spec).unwrap();
        assert!(rho.trace_distance(spec.noise_state()).unwrap() < 1e-5);
    }
    assert!(NoiseSpec::preset(Family::Ghz, -0.1, false).is_err());
}
