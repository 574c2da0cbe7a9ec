//! Published numbers the library must reproduce.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::SQRT_2;

use graph_selftest::bell::{
    build_inequality, map_stabilizer, quantum_bound_search, ConstructionSpec, Preset,
};
use graph_selftest::experiment::{
    bell_value_from_correlators, cluster_fidelity, correlator_label, ghz_fidelity_from_estimates,
};
use graph_selftest::graph::{generators, multiply, stabilizer_element, Graph, PauliString};
use graph_selftest::report::format_uncertain;
use graph_selftest::robustness::{certify, published_coefficients, RobustnessProblem, Verdict};

fn ps(text: &str) -> PauliString {
    text.parse().unwrap()
}

#[test]
fn star_and_line_generators() {
    let star: Vec<String> = generators(&Graph::star(4))
        .generators()
        .iter()
        .map(ToString::to_string)
        .collect();
    assert_eq!(star, ["X1Z2Z3Z4", "Z1X2", "Z1X3", "Z1X4"]);
    let line: Vec<String> = generators(&Graph::line(4))
        .generators()
        .iter()
        .map(ToString::to_string)
        .collect();
    assert_eq!(line, ["X1Z2", "Z1X2Z3", "Z2X3Z4", "Z3X4"]);
}

#[test]
fn stabilizer_products() {
    let star = generators(&Graph::star(4));
    assert_eq!(
        multiply(star.generator(2), star.generator(3)).unwrap(),
        ps("IXXI")
    );
    let lab = generators(&Graph::line(4)).conjugate_by_hadamard(&[1, 4].into_iter().collect());
    assert_eq!(
        multiply(lab.generator(1), lab.generator(2)).unwrap(),
        ps("-YYZI")
    );
    assert_eq!(stabilizer_element(&lab, &[1, 2, 3, 4]).unwrap(), ps("YXXY"));
    assert_eq!(stabilizer_element(&lab, &[1, 4]).unwrap(), ps("ZZZZ"));
}

#[test]
fn stabilizer_substitution() {
    let ac1: BTreeSet<usize> = [1].into_iter().collect();
    let ac2: BTreeSet<usize> = [2].into_iter().collect();
    assert_eq!(
        map_stabilizer(&ps("XZZZ"), &ac1).unwrap().to_string(),
        "(A1+B1)B2B3B4"
    );
    assert_eq!(
        map_stabilizer(&ps("ZXZI"), &ac2).unwrap().to_string(),
        "B1(A2+B2)B3"
    );
    assert_eq!(
        map_stabilizer(&ps("IXXI"), &ac1).unwrap().to_string(),
        "A2A3"
    );
}

#[test]
fn construction_examples() {
    let star = generators(&Graph::star(4));
    let b1 = Preset::B1.spec();
    let ineq = build_inequality(&star, &b1, "b1").unwrap();
    assert_eq!((ineq.classical_bound, ineq.ac_set.len()), (4.0, 1));
    assert!((ineq.quantum_bound - (2.0 + 2.0 * SQRT_2)).abs() < 1e-9);

    let line = generators(&Graph::line(4));
    let b5 = build_inequality(&line, &Preset::B5.spec(), "b5").unwrap();
    assert_eq!(b5.classical_bound, 5.0);
    assert!((b5.quantum_bound - (1.0 + 4.0 * SQRT_2)).abs() < 1e-9);
    assert!(b5
        .terms
        .iter()
        .any(|t| t.coefficient == 2.0 && t.to_string() == "2B1(A2+B2)B3"));

    let b6 = build_inequality(&line, &Preset::B6.spec(), "b6").unwrap();
    assert_eq!(b6.classical_bound, 4.0);
    assert!((b6.quantum_bound - 4.0 * SQRT_2).abs() < 1e-9);

    let json = r#"{"stabilizers": [[1], [2]], "ac": [1], "pairs": [[1, 2]], "remainder": []}"#;
    let spec = ConstructionSpec::from_json(json).unwrap();
    assert!(build_inequality(&star, &spec, "pair").is_ok());
}

#[test]
fn bounds_of_all_presets() {
    let want = [
        (4.0, 2.0 + 2.0 * SQRT_2),
        (5.0, 1.0 + 4.0 * SQRT_2),
        (6.0, 6.0 * SQRT_2),
        (4.0, 2.0 + 2.0 * SQRT_2),
        (5.0, 1.0 + 4.0 * SQRT_2),
        (4.0, 4.0 * SQRT_2),
    ];
    for (p, (c, q)) in Preset::ALL.into_iter().zip(want) {
        let ineq = p.build().unwrap();
        assert_eq!(ineq.classical_bound, c, "{p}");
        assert!((ineq.quantum_bound - q).abs() < 1e-9, "{p}");
    }
}

#[test]
fn search_reaches_the_quantum_bound() {
    let ineq = Preset::B5.build().unwrap();
    let found = quantum_bound_search(&ineq, 25).unwrap();
    assert!((found.value - (1.0 + 4.0 * SQRT_2)).abs() < 1e-3);
    let coarse = quantum_bound_search(&ineq, 2).unwrap();
    assert!(coarse.value <= ineq.quantum_bound + 1e-9);
}

#[test]
fn mu_at_tabulated_slopes() {
    let b1 = RobustnessProblem::for_preset(Preset::B1)
        .unwrap()
        .mu_of_s(1.0, 25)
        .unwrap();
    assert!((b1.mu - (-1.0 - 2.0 * SQRT_2)).abs() <= 0.02, "{}", b1.mu);
    let b6 = RobustnessProblem::for_preset(Preset::B6)
        .unwrap()
        .mu_of_s(0.62, 25)
        .unwrap();
    assert!((b6.mu - (-2.5071)).abs() <= 0.02, "{}", b6.mu);
}

#[test]
fn measured_certificates() {
    let cases = [
        (Preset::B1, 4.738, 0.021, "0.91(2)"),
        (Preset::B3, 8.266, 0.053, "0.89(3)"),
        (Preset::B6, 5.431, 0.062, "0.86(4)"),
    ];
    for (p, value, sigma, shown) in cases {
        let cert = certify(value, sigma, &published_coefficients(p)).unwrap();
        assert_eq!(
            format_uncertain(cert.fidelity_bound, cert.fidelity_sigma),
            shown,
            "{p}"
        );
        assert_eq!(cert.verdict, Verdict::GenuineEntanglement);
    }
    // Published as 0.84(6); the tabulated coefficients give 0.835.
    let b5 = certify(6.434, 0.077, &published_coefficients(Preset::B5)).unwrap();
    assert!((b5.fidelity_bound - 0.84).abs() <= 0.01);
    assert!((b5.fidelity_sigma - 0.06).abs() < 0.005);
}

#[test]
fn measured_correlators_combine_to_the_bell_value() {
    // Graph-frame correlators of B1 with the sign each takes at the optimum.
    let table: BTreeMap<&str, (f64, f64)> = [
        ("A1B2B3B4", (0.656, 0.011)),
        ("B1B2B3B4", (0.680, 0.011)),
        ("A1A2", (0.739, 0.010)),
        ("B1A2", (-0.681, 0.011)),
        ("A2A3", (0.992, 0.002)),
        ("A2A4", (0.991, 0.002)),
    ]
    .into_iter()
    .collect();
    let ineq = Preset::B1.build().unwrap();
    let (value, sigma) = bell_value_from_correlators(&ineq, |choices| {
        table.get(correlator_label(choices).as_str()).copied()
    })
    .unwrap();
    assert!((value - 4.738).abs() <= 0.0015, "{value}");
    assert!((sigma - 0.021).abs() <= 0.001, "{sigma}");
}

#[test]
fn direct_fidelities() {
    let (ghz, _) = ghz_fidelity_from_estimates(
        (0.994, 0.002),
        &[(0.918, 0.0), (-0.924, 0.0), (0.916, 0.0), (-0.920, 0.0)],
        4,
    )
    .unwrap();
    assert!((ghz - 0.957).abs() <= 0.001);
    let values = [
        0.993, 0.930, 0.931, 0.993, 0.933, 0.927, 0.986, 0.932, 0.932, 0.944, 0.920, 0.924, 0.942,
        0.924, 0.916, 1.0,
    ];
    let (cluster, _) = cluster_fidelity(&values.map(|v| (v, 0.0))).unwrap();
    assert!((cluster - 0.945).abs() <= 0.001);
}
