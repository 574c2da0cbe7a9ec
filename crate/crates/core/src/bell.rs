//! Stabilizer-based Bell inequalities.
//!
//! An inequality is built from a subset `ST` of stabilizers, a set of
//! anticommuting pairs `P`, a remainder `R` and a set `AC` of rotated
//! parties. Each stabilizer is mapped to a correlator by substituting
//! `X -> A + B`, `Z -> A - B` on `AC` parties and `X -> A`, `Z -> B`
//! elsewhere; the Bell expression is the multiset sum over the pairs and the
//! remainder.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{generators, stabilizer_element, GeneratorSet, Graph, Pauli, PauliString};
use crate::linalg::{
    expectation, hermitian_eigen, kron_all, paulis, symmetric_eigenvalues, ComplexMatrix,
    QuantumState,
};
use crate::search::{coordinate_descent, AngleGrid, Refinement};
use crate::tolerance::TOL;

/// Parties beyond this make the `4^N` classical enumeration impractical.
pub const MAX_CLASSICAL_PARTIES: usize = 10;

/// Default points per axis for angle sweeps.
pub const DEFAULT_GRID_RESOLUTION: usize = 25;

/// Local observable entering one site of a correlator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SiteLabel {
    Identity,
    A,
    B,
    APlusB,
    AMinusB,
}

impl SiteLabel {
    /// Value under a deterministic assignment `A = a`, `B = b`.
    pub fn deterministic_value(self, a: i32, b: i32) -> i32 {
        match self {
            SiteLabel::Identity => 1,
            SiteLabel::A => a,
            SiteLabel::B => b,
            SiteLabel::APlusB => a + b,
            SiteLabel::AMinusB => a - b,
        }
    }

    /// Expansion into single-setting choices with signs.
    pub fn expansion(self) -> &'static [(Option<Setting>, f64)] {
        match self {
            SiteLabel::Identity => &[(None, 1.0)],
            SiteLabel::A => &[(Some(Setting::A), 1.0)],
            SiteLabel::B => &[(Some(Setting::B), 1.0)],
            SiteLabel::APlusB => &[(Some(Setting::A), 1.0), (Some(Setting::B), 1.0)],
            SiteLabel::AMinusB => &[(Some(Setting::A), 1.0), (Some(Setting::B), -1.0)],
        }
    }
}

/// Measurement choice of one party in one round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setting {
    A,
    B,
}

impl Setting {
    pub fn symbol(self) -> char {
        match self {
            Setting::A => 'A',
            Setting::B => 'B',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellTerm {
    pub coefficient: f64,
    pub labels: Vec<SiteLabel>,
}

impl BellTerm {
    /// Parties (1-based) that enter the correlator.
    pub fn support(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l != SiteLabel::Identity)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

impl fmt::Display for BellTerm {
    /// Paper-style rendering, e.g. `2(A1+B1)B2B3B4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficient != 1.0 {
            write!(f, "{}", self.coefficient)?;
        }
        for (i, l) in self.labels.iter().enumerate() {
            let p = i + 1;
            match l {
                SiteLabel::Identity => {}
                SiteLabel::A => write!(f, "A{p}")?,
                SiteLabel::B => write!(f, "B{p}")?,
                SiteLabel::APlusB => write!(f, "(A{p}+B{p})")?,
                SiteLabel::AMinusB => write!(f, "(A{p}-B{p})")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Observables act on the graph state itself.
    Graph,
    /// Observables rotated to act on the Hadamard-transformed lab state.
    Experimental,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellInequality {
    pub name: String,
    pub terms: Vec<BellTerm>,
    pub ac_set: BTreeSet<usize>,
    pub classical_bound: f64,
    pub quantum_bound: f64,
    pub frame: Frame,
}

impl BellInequality {
    pub fn n_parties(&self) -> usize {
        self.terms.first().map_or(0, |t| t.labels.len())
    }

    pub fn term_strings(&self) -> Vec<String> {
        self.terms.iter().map(ToString::to_string).collect()
    }

    /// Bell expression under a deterministic local strategy, one `(a_i, b_i)`
    /// pair of `±1` outcomes per party.
    pub fn deterministic_value(&self, strategy: &[(i32, i32)]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let prod: i32 = t
                    .labels
                    .iter()
                    .zip(strategy)
                    .map(|(l, &(a, b))| l.deterministic_value(a, b))
                    .product();
                t.coefficient * prod as f64
            })
            .sum()
    }
}

impl fmt::Display for BellInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.term_strings().join(" + "))
    }
}

/// The `(ST, AC, P, R)` description of an inequality. Indices in `pairs` and
/// `remainder` are 1-based positions in `stabilizers`; each stabilizer is a
/// list of 1-based generator indices whose product it is.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionSpec {
    pub stabilizers: Vec<Vec<usize>>,
    pub ac: Vec<usize>,
    pub pairs: Vec<[usize; 2]>,
    pub remainder: Vec<usize>,
}

impl ConstructionSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    fn ac_set(&self) -> BTreeSet<usize> {
        self.ac.iter().copied().collect()
    }
}

/// Graph family an inequality targets; selects the lab frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ghz,
    Cluster,
}

impl Family {
    pub fn graph(self) -> Graph {
        match self {
            Family::Ghz => Graph::star(4),
            Family::Cluster => Graph::line(4),
        }
    }

    /// Hadamard sites mapping the graph state to the lab state.
    pub fn hadamard_sites(self) -> BTreeSet<usize> {
        match self {
            Family::Ghz => [2, 3, 4].into_iter().collect(),
            Family::Cluster => [1, 4].into_iter().collect(),
        }
    }

    pub fn canonical_state(self) -> crate::graph::CanonicalState {
        match self {
            Family::Ghz => crate::graph::CanonicalState::Ghz4,
            Family::Cluster => crate::graph::CanonicalState::Cluster4,
        }
    }
}

/// The six four-party inequalities: B1-B3 for GHZ, B4-B6 for the linear
/// cluster state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::B1,
        Preset::B2,
        Preset::B3,
        Preset::B4,
        Preset::B5,
        Preset::B6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::B1 => "b1",
            Preset::B2 => "b2",
            Preset::B3 => "b3",
            Preset::B4 => "b4",
            Preset::B5 => "b5",
            Preset::B6 => "b6",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Preset::B1 | Preset::B2 | Preset::B3 => Family::Ghz,
            _ => Family::Cluster,
        }
    }

    pub fn spec(self) -> ConstructionSpec {
        // GHZ: S1..S4 = G1..G4, S5 = G2G3, S6 = G2G4.
        // Cluster: S1..S4 = G1..G4, S5 = G1G3, S6 = G2G4.
        let st = match self.family() {
            Family::Ghz => vec![vec![1], vec![2], vec![3], vec![4], vec![2, 3], vec![2, 4]],
            Family::Cluster => vec![vec![1], vec![2], vec![3], vec![4], vec![1, 3], vec![2, 4]],
        };
        let (ac, pairs, remainder): (Vec<usize>, Vec<[usize; 2]>, Vec<usize>) = match self {
            Preset::B1 => (vec![1], vec![[1, 2]], vec![5, 6]),
            Preset::B2 => (vec![1], vec![[1, 2], [1, 3]], vec![6]),
            Preset::B3 => (vec![1], vec![[1, 2], [1, 3], [1, 4]], vec![]),
            Preset::B4 => (vec![1], vec![[1, 2]], vec![3, 4]),
            Preset::B5 => (vec![2], vec![[1, 2], [2, 3]], vec![4]),
            Preset::B6 => (vec![2], vec![[1, 2], [3, 6]], vec![]),
        };
        ConstructionSpec {
            stabilizers: st,
            ac,
            pairs,
            remainder,
        }
    }

    /// Graph-frame inequality built from the recipe.
    pub fn build(self) -> Result<BellInequality> {
        let gs = generators(&self.family().graph());
        build_inequality(&gs, &self.spec(), self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or(Error::UnknownInequality(key))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Maps a stabilizer to its correlator term with coefficient one.
pub fn map_stabilizer(s: &PauliString, ac: &BTreeSet<usize>) -> Result<BellTerm> {
    if s.is_negative() || s.letters().contains(&Pauli::Y) {
        return Err(Error::UnsupportedStabilizer(s.to_string()));
    }
    let labels = s
        .letters()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let rotated = ac.contains(&(i + 1));
            match (p, rotated) {
                (Pauli::I, _) => SiteLabel::Identity,
                (Pauli::X, true) => SiteLabel::APlusB,
                (Pauli::Z, true) => SiteLabel::AMinusB,
                (Pauli::X, false) => SiteLabel::A,
                (Pauli::Z, false) => SiteLabel::B,
                (Pauli::Y, _) => unreachable!(),
            }
        })
        .collect();
    Ok(BellTerm {
        coefficient: 1.0,
        labels,
    })
}

/// Builds the inequality, filling both bounds: the classical one by
/// exhaustive enumeration and the quantum one as the top eigenvalue of the
/// Bell operator at the optimal angles.
pub fn build_inequality(
    gs: &GeneratorSet,
    spec: &ConstructionSpec,
    name: &str,
) -> Result<BellInequality> {
    let n = gs.len();
    let ac = spec.ac_set();
    if let Some(&bad) = ac.iter().find(|&&p| p == 0 || p > n) {
        return Err(Error::InvalidSpec(format!(
            "AC party {bad} outside 1..={n}"
        )));
    }
    let stabilizers = spec
        .stabilizers
        .iter()
        .map(|subset| stabilizer_element(gs, subset))
        .collect::<Result<Vec<_>>>()?;
    let check_index = |i: usize| {
        if i == 0 || i > stabilizers.len() {
            Err(Error::InvalidSpec(format!(
                "stabilizer index {i} outside 1..={}",
                stabilizers.len()
            )))
        } else {
            Ok(i)
        }
    };

    let mut paired = BTreeSet::new();
    for &[l, k] in &spec.pairs {
        check_index(l)?;
        check_index(k)?;
        if l >= k {
            return Err(Error::InvalidSpec(format!(
                "pair ({l}, {k}) must satisfy l < k"
            )));
        }
        let in_ac = stabilizers[l - 1]
            .anticommuting_sites(&stabilizers[k - 1])
            .into_iter()
            .any(|site| ac.contains(&site));
        if !in_ac {
            return Err(Error::NotPairable { l, k });
        }
        paired.insert(l);
        paired.insert(k);
    }
    for &r in &spec.remainder {
        check_index(r)?;
        if paired.contains(&r) {
            return Err(Error::InvalidSpec(format!(
                "remainder index {r} also appears in a pair"
            )));
        }
    }

    let order = spec
        .pairs
        .iter()
        .flat_map(|&[l, k]| [l, k])
        .chain(spec.remainder.iter().copied());
    let mut terms: Vec<BellTerm> = Vec::new();
    for idx in order {
        let term = map_stabilizer(&stabilizers[idx - 1], &ac)?;
        match terms.iter_mut().find(|t| t.labels == term.labels) {
            Some(existing) => existing.coefficient += term.coefficient,
            None => terms.push(term),
        }
    }
    if terms.is_empty() {
        return Err(Error::InvalidSpec("no terms".into()));
    }

    let mut ineq = BellInequality {
        name: name.to_string(),
        terms,
        ac_set: ac,
        classical_bound: f64::NAN,
        quantum_bound: f64::NAN,
        frame: Frame::Graph,
    };
    ineq.classical_bound = classical_bound(&ineq)?;
    let optimal = MeasurementAngles::optimal(n, &ineq.ac_set);
    ineq.quantum_bound = hermitian_eigen(&bell_operator(&ineq, &optimal)?)?.max();
    if ineq.quantum_bound <= ineq.classical_bound + TOL.violation {
        return Err(Error::InvalidSpec(format!(
            "no quantum violation: classical bound {} is not below {}",
            ineq.classical_bound, ineq.quantum_bound
        )));
    }
    Ok(ineq)
}

/// Maximum of the Bell expression over all `4^N` deterministic local
/// strategies. Local hidden variable models are convex mixtures of these,
/// so the maximum is the classical bound.
pub fn classical_bound(ineq: &BellInequality) -> Result<f64> {
    let n = ineq.n_parties();
    if n > MAX_CLASSICAL_PARTIES {
        return Err(Error::ResourceGuard {
            what: "classical enumeration parties",
            requested: n,
            limit: MAX_CLASSICAL_PARTIES,
        });
    }
    const CHOICES: [(i32, i32); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
    let mut strategy = vec![(1, 1); n];
    let mut best = f64::NEG_INFINITY;
    for code in 0..1usize << (2 * n) {
        for (p, slot) in strategy.iter_mut().enumerate() {
            *slot = CHOICES[(code >> (2 * p)) & 3];
        }
        best = best.max(ineq.deterministic_value(&strategy));
    }
    Ok(best)
}

/// One Jordan angle per party, each in `[0, pi/2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementAngles {
    theta: Vec<f64>,
    ac_set: BTreeSet<usize>,
}

impl MeasurementAngles {
    pub fn new(theta: Vec<f64>, ac_set: BTreeSet<usize>) -> Result<Self> {
        for (i, &t) in theta.iter().enumerate() {
            if !(-TOL.angle..=FRAC_PI_2 + TOL.angle).contains(&t) {
                return Err(Error::AngleOutOfRange {
                    party: i + 1,
                    angle: t,
                });
            }
        }
        Ok(Self { theta, ac_set })
    }

    /// All angles `pi/4`.
    pub fn optimal(n: usize, ac_set: &BTreeSet<usize>) -> Self {
        Self {
            theta: vec![FRAC_PI_4; n],
            ac_set: ac_set.clone(),
        }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn ac_set(&self) -> &BTreeSet<usize> {
        &self.ac_set
    }
}

/// A pair of dichotomic observables `(A_i, B_i)` per party.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub parties: Vec<[ComplexMatrix; 2]>,
}

impl Settings {
    pub fn n_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn observable(&self, party: usize, setting: Setting) -> &ComplexMatrix {
        let pair = &self.parties[party - 1];
        match setting {
            Setting::A => &pair[0],
            Setting::B => &pair[1],
        }
    }

    fn label_matrix(&self, party: usize, label: SiteLabel) -> ComplexMatrix {
        let [a, b] = &self.parties[party - 1];
        match label {
            SiteLabel::Identity => paulis::identity(),
            SiteLabel::A => a.clone(),
            SiteLabel::B => b.clone(),
            SiteLabel::APlusB => a + b,
            SiteLabel::AMinusB => a - b,
        }
    }

    /// Observables seen after Hadamards on `sites`: `O -> H O H`.
    pub fn conjugate_by_hadamard(&self, sites: &BTreeSet<usize>) -> Settings {
        let h = paulis::hadamard();
        let parties = self
            .parties
            .iter()
            .enumerate()
            .map(|(i, pair)| {
                if sites.contains(&(i + 1)) {
                    [&(&h * &pair[0]) * &h, &(&h * &pair[1]) * &h]
                } else {
                    pair.clone()
                }
            })
            .collect();
        Settings { parties }
    }

    /// Human-readable `A_i = ..., B_i = ...` lines.
    pub fn describe(&self) -> Vec<String> {
        self.parties
            .iter()
            .enumerate()
            .map(|(i, [a, b])| {
                format!(
                    "A{p} = {}, B{p} = {}",
                    describe_observable(a),
                    describe_observable(b),
                    p = i + 1
                )
            })
            .collect()
    }
}

/// Renders a real combination `x X + z Z` compactly, e.g. `(X-Z)/√2`.
pub fn describe_observable(m: &ComplexMatrix) -> String {
    let x = 0.5 * (m.get(0, 1) + m.get(1, 0)).re;
    let y = 0.5 * (m.get(1, 0) - m.get(0, 1)).im;
    let z = 0.5 * (m.get(0, 0) - m.get(1, 1)).re;
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    let sign = |v: f64| if v < 0.0 { "-" } else { "+" };
    if close(y, 0.0) && close(x.abs(), FRAC_1_SQRT_2) && close(z.abs(), FRAC_1_SQRT_2) {
        // Put the positive letter first, matching the usual (Z-X)/√2 style.
        return if x > 0.0 || z < 0.0 {
            format!("({}X{}Z)/√2", if x < 0.0 { "-" } else { "" }, sign(z))
        } else {
            "(Z-X)/√2".to_string()
        };
    }
    let mut parts = Vec::new();
    for (c, letter) in [(x, 'X'), (y, 'Y'), (z, 'Z')] {
        if close(c, 0.0) {
            continue;
        }
        let coef = if close(c.abs(), 1.0) {
            String::new()
        } else {
            format!("{:.4}", c.abs())
        };
        parts.push(format!("{}{coef}{letter}", sign(c)));
    }
    let joined = parts.concat();
    joined.strip_prefix('+').unwrap_or(&joined).to_string()
}

/// Jordan-lemma parametrization. On `AC` parties
/// `A = cos θ X + sin θ Z`, `B = cos θ X - sin θ Z`; elsewhere the same with
/// `X, Z` replaced by `H' = (X+Z)/√2` and `V' = (X-Z)/√2`.
pub fn observables_from_angles(angles: &MeasurementAngles) -> Settings {
    let parties = angles
        .theta
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (u, w) = if angles.ac_set.contains(&(i + 1)) {
                (paulis::x(), paulis::z())
            } else {
                (paulis::hadamard(), paulis::v_prime())
            };
            let (c, s) = (t.cos(), t.sin());
            [&u.scale(c) + &w.scale(s), &u.scale(c) - &w.scale(s)]
        })
        .collect();
    Settings { parties }
}

/// Bell operator with explicit local observables substituted.
pub fn bell_operator_for(ineq: &BellInequality, settings: &Settings) -> Result<ComplexMatrix> {
    let n = ineq.n_parties();
    if settings.n_parties() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: settings.n_parties(),
        });
    }
    let dim = 1usize << n;
    let mut total = ComplexMatrix::zeros(dim, dim);
    for term in &ineq.terms {
        let factors: Vec<ComplexMatrix> = term
            .labels
            .iter()
            .enumerate()
            .map(|(i, &l)| settings.label_matrix(i + 1, l))
            .collect();
        total = &total + &kron_all(&factors).scale(term.coefficient);
    }
    Ok(total)
}

/// Bell operator at the given Jordan angles.
pub fn bell_operator(ineq: &BellInequality, angles: &MeasurementAngles) -> Result<ComplexMatrix> {
    bell_operator_for(ineq, &observables_from_angles(angles))
}

pub fn quantum_value<S: QuantumState + ?Sized>(
    state: &S,
    ineq: &BellInequality,
    angles: &MeasurementAngles,
) -> Result<f64> {
    expectation(state, &bell_operator(ineq, angles)?)
}

pub fn quantum_value_for<S: QuantumState + ?Sized>(
    state: &S,
    ineq: &BellInequality,
    settings: &Settings,
) -> Result<f64> {
    expectation(state, &bell_operator_for(ineq, settings)?)
}

/// Graph-frame settings achieving the quantum bound.
pub fn optimal_settings(ineq: &BellInequality) -> Settings {
    observables_from_angles(&MeasurementAngles::optimal(ineq.n_parties(), &ineq.ac_set))
}

/// The inequality re-expressed for the Hadamard-rotated lab state, together
/// with the rotated optimal settings.
pub fn experimental_frame(ineq: &BellInequality) -> Result<(BellInequality, Settings)> {
    let preset: Preset = ineq.name.parse()?;
    let settings = optimal_settings(ineq).conjugate_by_hadamard(&preset.family().hadamard_sites());
    let mut rotated = ineq.clone();
    rotated.frame = Frame::Experimental;
    Ok((rotated, settings))
}

/// Real-valued Bell operator family over the Jordan angles. Every operator
/// in the family is real symmetric, which the sweeps exploit.
#[derive(Clone, Debug)]
pub struct JordanFamily {
    n: usize,
    terms: Vec<(f64, Vec<SiteLabel>)>,
    rotated: Vec<bool>,
}

type Real2 = [[f64; 2]; 2];

const R_I: Real2 = [[1.0, 0.0], [0.0, 1.0]];
const R_X: Real2 = [[0.0, 1.0], [1.0, 0.0]];
const R_Z: Real2 = [[1.0, 0.0], [0.0, -1.0]];
const R_H: Real2 = [
    [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
    [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
];
const R_V: Real2 = [
    [-FRAC_1_SQRT_2, FRAC_1_SQRT_2],
    [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
];

fn lin2(a: f64, p: &Real2, b: f64, q: &Real2) -> Real2 {
    let mut out = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a * p[r][c] + b * q[r][c];
        }
    }
    out
}

/// `⊗ factors` as a dense real matrix, first factor most significant.
pub(crate) fn kron_real(factors: &[Real2]) -> DMatrix<f64> {
    let mut data = vec![1.0f64];
    let mut dim = 1usize;
    for f in factors {
        let nd = dim * 2;
        let mut next = vec![0.0; nd * nd];
        for r in 0..dim {
            for c in 0..dim {
                let v = data[r * dim + c];
                if v == 0.0 {
                    continue;
                }
                for fr in 0..2 {
                    for fc in 0..2 {
                        next[(2 * r + fr) * nd + 2 * c + fc] = v * f[fr][fc];
                    }
                }
            }
        }
        data = next;
        dim = nd;
    }
    DMatrix::from_row_slice(dim, dim, &data)
}

impl JordanFamily {
    pub fn new(ineq: &BellInequality) -> Self {
        let n = ineq.n_parties();
        Self {
            n,
            terms: ineq
                .terms
                .iter()
                .map(|t| (t.coefficient, t.labels.clone()))
                .collect(),
            rotated: (1..=n).map(|p| ineq.ac_set.contains(&p)).collect(),
        }
    }

    pub fn n_parties(&self) -> usize {
        self.n
    }

    pub fn is_rotated(&self, party: usize) -> bool {
        self.rotated[party - 1]
    }

    /// Axes `(U, W)` so that `A = cos θ U + sin θ W`, `B = cos θ U - sin θ W`.
    pub(crate) fn axes(&self, party: usize) -> (&'static Real2, &'static Real2) {
        if self.rotated[party - 1] {
            (&R_X, &R_Z)
        } else {
            (&R_H, &R_V)
        }
    }

    pub fn operator(&self, theta: &[f64]) -> DMatrix<f64> {
        let dim = 1usize << self.n;
        let per_party: Vec<[Real2; 5]> = theta
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let (u, w) = self.axes(i + 1);
                let (c, s) = (t.cos(), t.sin());
                [
                    R_I,
                    lin2(c, u, s, w),
                    lin2(c, u, -s, w),
                    lin2(2.0 * c, u, 0.0, w),
                    lin2(0.0, u, 2.0 * s, w),
                ]
            })
            .collect();
        let mut total = DMatrix::zeros(dim, dim);
        let mut factors = Vec::with_capacity(self.n);
        for (coef, labels) in &self.terms {
            factors.clear();
            for (i, l) in labels.iter().enumerate() {
                let slot = match l {
                    SiteLabel::Identity => 0,
                    SiteLabel::A => 1,
                    SiteLabel::B => 2,
                    SiteLabel::APlusB => 3,
                    SiteLabel::AMinusB => 4,
                };
                factors.push(per_party[i][slot]);
            }
            total += kron_real(&factors) * *coef;
        }
        total
    }

    pub fn max_eigenvalue(&self, theta: &[f64]) -> f64 {
        *symmetric_eigenvalues(&self.operator(theta))
            .last()
            .expect("non-empty")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantumBoundSearch {
    pub value: f64,
    pub angles: Vec<f64>,
    pub grid_resolution: usize,
}

/// Largest eigenvalue of the Bell operator over the angle grid, refined by
/// coordinate descent from the best grid point.
pub fn quantum_bound_search(
    ineq: &BellInequality,
    grid_resolution: usize,
) -> Result<QuantumBoundSearch> {
    if grid_resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least 2, got {grid_resolution}"
        )));
    }
    let family = JordanFamily::new(ineq);
    let grid = AngleGrid::new(family.n_parties(), grid_resolution);
    let objective = |t: &[f64]| -family.max_eigenvalue(t);
    let (_, idx) = grid.argmin(objective);
    let (neg, angles) =
        coordinate_descent(objective, &grid.point(idx), &Refinement::for_grid(&grid));
    Ok(QuantumBoundSearch {
        value: -neg,
        angles,
        grid_resolution,
    })
}

/// Enumerates every expanded single-setting correlator of the inequality:
/// per-party choice (`None` for parties outside the term) and its weight.
pub fn expanded_correlators(ineq: &BellInequality) -> Vec<(Vec<Option<Setting>>, f64)> {
    let mut out: Vec<(Vec<Option<Setting>>, f64)> = Vec::new();
    for term in &ineq.terms {
        let mut partial: Vec<(Vec<Option<Setting>>, f64)> = vec![(Vec::new(), term.coefficient)];
        for label in &term.labels {
            partial = partial
                .into_iter()
                .flat_map(|(choices, w)| {
                    label.expansion().iter().map(move |&(c, sign)| {
                        let mut next = choices.clone();
                        next.push(c);
                        (next, w * sign)
                    })
                })
                .collect();
        }
        for (choices, w) in partial {
            match out.iter_mut().find(|(c, _)| *c == choices) {
                Some(existing) => existing.1 += w,
                None => out.push((choices, w)),
            }
        }
    }
    out
}
