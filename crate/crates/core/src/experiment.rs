//! Noisy state preparation, Poissonian counting and estimators built on
//! counts: correlators, Bell values and direct fidelities.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::bell::{expanded_correlators, BellInequality, Family, Setting, Settings};
use crate::error::{Error, Result};
use crate::graph::canonical_state;
use crate::linalg::{
    hermitian_eigen, kron, kron_all, paulis, ComplexMatrix, DensityState, StateVector, C64,
};
use crate::tolerance::TOL;

/// Largest register for which outcome distributions are tabulated.
pub const MAX_MEASURED_QUBITS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    p: f64,
    noise_state: DensityState,
}

impl NoiseSpec {
    pub fn new(p: f64, noise_state: DensityState) -> Result<Self> {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::NegativeNoise(p));
        }
        Ok(Self { p, noise_state })
    }

    /// The two-pair noise of the given family. With `dephased` the pair
    /// product is replaced by its computational-basis diagonal.
    pub fn preset(family: Family, p: f64, dephased: bool) -> Result<Self> {
        let rho = preset_noise(family);
        Self::new(p, if dephased { rho.dephased() } else { rho })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn noise_state(&self) -> &DensityState {
        &self.noise_state
    }
}

/// `|Ψ⟩` for one emitted pair: `(|00⟩+|11⟩)/√2` for GHZ, `(|00⟩+√3|11⟩)/2`
/// for the cluster source.
pub fn noise_pair(family: Family) -> StateVector {
    let amps = match family {
        Family::Ghz => [1.0, 0.0, 0.0, 1.0].map(|a| a / 2f64.sqrt()),
        Family::Cluster => [0.5, 0.0, 0.0, 3f64.sqrt() / 2.0],
    };
    StateVector::normalized(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
        .expect("pair state is normalized")
}

/// `|Ψ_12⟩⟨Ψ_12| ⊗ |Ψ_34⟩⟨Ψ_34|`.
pub fn preset_noise(family: Family) -> DensityState {
    let pair = noise_pair(family).projector();
    DensityState::new(kron(&pair, &pair)).expect("product of pure pairs is a state")
}

/// `ρ = (|ψ⟩⟨ψ| + p ρ_noise) / (1 + p)`.
pub fn noisy_state(pure: &StateVector, noise: &NoiseSpec) -> Result<DensityState> {
    if pure.dimension() != noise.noise_state.dimension() {
        return Err(Error::DimensionMismatch {
            expected: pure.dimension(),
            found: noise.noise_state.dimension(),
        });
    }
    let w = 1.0 / (1.0 + noise.p);
    DensityState::mixture(&[
        (w, &DensityState::from_pure(pure)),
        (noise.p * w, &noise.noise_state),
    ])
}

/// A `±1` outcome per party, first party first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome(pub Vec<bool>);

impl Outcome {
    /// `true` entries mean the party saw `-1`.
    pub fn from_index(n: usize, index: usize) -> Self {
        Outcome((0..n).map(|i| index >> (n - 1 - i) & 1 == 1).collect())
    }

    pub fn sign(&self, party: usize) -> f64 {
        if self.0[party - 1] {
            -1.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &minus in &self.0 {
            f.write_str(if minus { "-" } else { "+" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("empty outcome".into()));
        }
        s.chars()
            .map(|c| match c {
                '+' => Ok(false),
                '-' => Ok(true),
                other => Err(Error::Parse(format!("outcome symbol {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Outcome)
    }
}

/// Probabilities of all `2^N` outcomes, indexed as in [`Outcome::from_index`].
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    n_parties: usize,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(n_parties: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1usize << n_parties {
            return Err(Error::LengthMismatch(1 << n_parties, probs.len()));
        }
        if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidArgument("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TOL.trace {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { n_parties, probs })
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, outcome: &Outcome) -> f64 {
        let idx = outcome.0.iter().fold(0, |acc, &m| acc << 1 | m as usize);
        self.probs[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (Outcome::from_index(self.n_parties, i), p))
    }

    /// Marginal over a subset of parties (1-based, in the given order).
    pub fn marginal(&self, parties: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << parties.len()];
        for (o, p) in self.iter() {
            let idx = parties
                .iter()
                .fold(0, |acc, &q| acc << 1 | o.0[q - 1] as usize);
            out[idx] += p;
        }
        out
    }
}

/// `P(o) = Tr(ρ Π^1_{o_1} ⊗ … ⊗ Π^N_{o_N})` for dichotomic observables.
pub fn outcome_distribution(
    state: &DensityState,
    observables: &[ComplexMatrix],
) -> Result<OutcomeDistribution> {
    let n = state.n_qubits();
    if observables.len() != n {
        return Err(Error::LengthMismatch(n, observables.len()));
    }
    if n > MAX_MEASURED_QUBITS {
        return Err(Error::ResourceGuard {
            what: "measured qubits",
            requested: n,
            limit: MAX_MEASURED_QUBITS,
        });
    }
    // Rotate into the product eigenbasis; the diagonal then holds the
    // probabilities of the eigenvector labels.
    let mut bases = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    for (i, o) in observables.iter().enumerate() {
        if o.rows() != 2 || o.cols() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: o.rows(),
            });
        }
        let eig = hermitian_eigen(o)?;
        let ev = [eig.eigenvalues[0], eig.eigenvalues[1]];
        if ev.iter().any(|&e| (e.abs() - 1.0).abs() > TOL.dichotomic) {
            return Err(Error::NotDichotomic {
                party: i + 1,
                eigenvalues: ev,
            });
        }
        signs.push([ev[0] < 0.0, ev[1] < 0.0]);
        bases.push(eig.eigenvectors);
    }
    let u = kron_all(&bases);
    let rotated = &(&u.adjoint() * state.matrix()) * &u;
    let mut probs = vec![0.0; 1 << n];
    for k in 0..1usize << n {
        let mut idx = 0;
        for (i, s) in signs.iter().enumerate() {
            let which = k >> (n - 1 - i) & 1;
            idx = idx << 1 | s[which] as usize;
        }
        probs[idx] += rotated.get(k, k).re.max(0.0);
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > TOL.trace {
        return Err(Error::InvalidDensity(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    OutcomeDistribution::new(n, probs)
}

/// Raw counts for one measurement setting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsRecord {
    /// Per-party observable names separated by spaces, e.g. `A1 B2 B3 B4`.
    pub setting: String,
    /// Counts keyed by `+`/`-` outcome strings in party order.
    pub counts: BTreeMap<String, u64>,
}

impl CountsRecord {
    pub fn new(setting: impl Into<String>, counts: BTreeMap<String, u64>) -> Result<Self> {
        let record = Self {
            setting: setting.into(),
            counts,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: CountsRecord = serde_json::from_str(text)?;
        record.validate()?;
        Ok(record)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("counts serialize")
    }

    fn validate(&self) -> Result<()> {
        let mut width = None;
        for key in self.counts.keys() {
            let o: Outcome = key.parse()?;
            match width {
                None => width = Some(o.0.len()),
                Some(w) if w != o.0.len() => {
                    return Err(Error::Parse(format!(
                        "outcome {key:?} has {} parties, expected {w}",
                        o.0.len()
                    )))
                }
                _ => {}
            }
        }
        // Labels of other bases (fidelity records) are free-form.
        if let (Some(w), Ok(settings)) = (width, self.settings()) {
            if settings.len() != w {
                return Err(Error::Parse(format!(
                    "setting {:?} names {} parties but outcomes have {w}",
                    self.setting,
                    settings.len()
                )));
            }
        }
        Ok(())
    }

    pub fn n_parties(&self) -> Option<usize> {
        self.counts.keys().next().map(|k| k.len())
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Parses the setting label as one `A`/`B` choice per party.
    pub fn settings(&self) -> Result<Vec<Setting>> {
        parse_setting_label(&self.setting)
    }

    fn outcomes(&self) -> impl Iterator<Item = (Outcome, u64)> + '_ {
        self.counts
            .iter()
            .map(|(k, &n)| (k.parse().expect("validated outcome"), n))
    }
}

/// `A1 B2 B3 B4` for the given choices.
pub fn setting_label(settings: &[Setting]) -> String {
    settings
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}{}", s.symbol(), i + 1))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_setting_label(label: &str) -> Result<Vec<Setting>> {
    label
        .split_whitespace()
        .enumerate()
        .map(|(i, tok)| {
            let (letter, party) = tok.split_at(1);
            if party.parse::<usize>().ok() != Some(i + 1) {
                return Err(Error::Parse(format!(
                    "setting token {tok:?} at position {}",
                    i + 1
                )));
            }
            match letter {
                "A" => Ok(Setting::A),
                "B" => Ok(Setting::B),
                _ => Err(Error::Parse(format!("setting token {tok:?}"))),
            }
        })
        .collect()
}

/// Draws each cell independently from `Poisson(mean_total · P(o))`.
pub fn sample_counts_with(
    dist: &OutcomeDistribution,
    mean_total: f64,
    setting: &str,
    rng: &mut ChaCha8Rng,
) -> Result<CountsRecord> {
    if !(mean_total.is_finite() && mean_total > 0.0) {
        return Err(Error::InvalidArgument(format!("mean total {mean_total}")));
    }
    let mut counts = BTreeMap::new();
    for (o, p) in dist.iter() {
        let lambda = mean_total * p;
        let n = if lambda > 0.0 {
            Poisson::new(lambda)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .sample(rng) as u64
        } else {
            0
        };
        counts.insert(o.to_string(), n);
    }
    CountsRecord::new(setting, counts)
}

pub fn sample_counts(
    dist: &OutcomeDistribution,
    mean_total: f64,
    seed: u64,
    setting: &str,
) -> Result<CountsRecord> {
    sample_counts_with(
        dist,
        mean_total,
        setting,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorEstimate {
    pub value: f64,
    pub sigma: f64,
    pub n_events: u64,
}

/// Linear estimator `L = Σ_k f_k n_k / T` with delta-method uncertainty
/// `σ² = Σ_k ((f_k - L)/T)² n_k`.
fn linear_estimate<F>(record: &CountsRecord, f: F) -> Result<CorrelatorEstimate>
where
    F: Fn(&Outcome) -> f64,
{
    let total = record.total();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    let t = total as f64;
    let weighted: Vec<(f64, f64)> = record.outcomes().map(|(o, n)| (f(&o), n as f64)).collect();
    let value = weighted.iter().map(|(v, n)| v * n).sum::<f64>() / t;
    let var = weighted
        .iter()
        .map(|(v, n)| ((v - value) / t).powi(2) * n)
        .sum::<f64>();
    Ok(CorrelatorEstimate {
        value,
        sigma: var.sqrt(),
        n_events: total,
    })
}

/// `E = ⟨∏_{i∈parties} o_i⟩` from raw counts.
pub fn estimate_correlator(record: &CountsRecord, parties: &[usize]) -> Result<CorrelatorEstimate> {
    if let (Some(n), Some(&bad)) = (
        record.n_parties(),
        parties
            .iter()
            .find(|&&p| p == 0 || p > record.n_parties().unwrap_or(0)),
    ) {
        return Err(Error::InvalidArgument(format!(
            "party {bad} outside 1..={n}"
        )));
    }
    linear_estimate(record, |o| parties.iter().map(|&p| o.sign(p)).product())
}

/// Settings that must be measured for the inequality; parties outside a
/// correlator's support measure `A`.
pub fn required_settings(ineq: &BellInequality) -> Vec<Vec<Setting>> {
    let mut out: Vec<Vec<Setting>> = Vec::new();
    for (choices, _) in expanded_correlators(ineq) {
        let full: Vec<Setting> = choices.iter().map(|c| c.unwrap_or(Setting::A)).collect();
        if !out.contains(&full) {
            out.push(full);
        }
    }
    out
}

fn find_record<'a>(
    records: &'a [(Vec<Setting>, &'a CountsRecord)],
    choices: &[Option<Setting>],
) -> Option<usize> {
    let exact: Vec<Setting> = choices.iter().map(|c| c.unwrap_or(Setting::A)).collect();
    records.iter().position(|(s, _)| *s == exact).or_else(|| {
        records.iter().position(|(s, _)| {
            s.len() == choices.len()
                && choices
                    .iter()
                    .zip(s)
                    .all(|(c, s)| c.is_none_or(|c| c == *s))
        })
    })
}

/// Bell value from one counts record per required setting. Correlators
/// sharing a record are combined before propagating its uncertainty;
/// records are independent and add in quadrature.
pub fn bell_value_from_counts(
    records: &[CountsRecord],
    ineq: &BellInequality,
) -> Result<(f64, f64)> {
    let parsed: Vec<(Vec<Setting>, &CountsRecord)> = records
        .iter()
        .map(|r| Ok((r.settings()?, r)))
        .collect::<Result<_>>()?;
    let mut per_record: BTreeMap<usize, Vec<(Vec<usize>, f64)>> = BTreeMap::new();
    for (choices, weight) in expanded_correlators(ineq) {
        let idx = find_record(&parsed, &choices).ok_or_else(|| {
            Error::MissingSetting(setting_label(
                &choices
                    .iter()
                    .map(|c| c.unwrap_or(Setting::A))
                    .collect::<Vec<_>>(),
            ))
        })?;
        let support = choices
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_some())
            .map(|(i, _)| i + 1)
            .collect();
        per_record.entry(idx).or_default().push((support, weight));
    }
    let (mut value, mut var) = (0.0, 0.0);
    for (idx, parts) in per_record {
        let est = linear_estimate(parsed[idx].1, |o| {
            parts
                .iter()
                .map(|(support, w)| w * support.iter().map(|&p| o.sign(p)).product::<f64>())
                .sum()
        })?;
        value += est.value;
        var += est.sigma.powi(2);
    }
    Ok((value, var.sqrt()))
}

/// Bell value from independently estimated single-setting correlators,
/// looked up by per-party choice (`None` outside the support).
pub fn bell_value_from_correlators<F>(ineq: &BellInequality, mut lookup: F) -> Result<(f64, f64)>
where
    F: FnMut(&[Option<Setting>]) -> Option<(f64, f64)>,
{
    let (mut value, mut var) = (0.0, 0.0);
    for (choices, weight) in expanded_correlators(ineq) {
        let (e, s) =
            lookup(&choices).ok_or_else(|| Error::MissingSetting(correlator_label(&choices)))?;
        value += weight * e;
        var += (weight * s).powi(2);
    }
    Ok((value, var.sqrt()))
}

/// `A1B2` style name of a correlator.
pub fn correlator_label(choices: &[Option<Setting>]) -> String {
    choices
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|s| format!("{}{}", s.symbol(), i + 1)))
        .collect()
}

/// Simulated counts for every required setting. Each setting draws from
/// its own ChaCha stream of `seed`, so records are independent of order.
pub fn simulate_bell_counts(
    state: &DensityState,
    ineq: &BellInequality,
    settings: &Settings,
    mean_total: f64,
    seed: u64,
) -> Result<Vec<CountsRecord>> {
    required_settings(ineq)
        .into_iter()
        .enumerate()
        .map(|(k, choice)| {
            let observables: Vec<ComplexMatrix> = choice
                .iter()
                .enumerate()
                .map(|(i, &c)| settings.observable(i + 1, c).clone())
                .collect();
            let dist = outcome_distribution(state, &observables)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            sample_counts_with(&dist, mean_total, &setting_label(&choice), &mut rng)
        })
        .collect()
}

/// `M_φ = cos φ X + sin φ Y`.
pub fn coherence_observable(phi: f64) -> ComplexMatrix {
    &paulis::x().scale(phi.cos()) + &paulis::y().scale(phi.sin())
}

/// GHZ fidelity `F = (P + C)/2` from population and coherence estimates,
/// with `C = (1/N) Σ_k (-1)^k ⟨M_{kπ/N}^{⊗N}⟩` over `N` coherence values.
pub fn ghz_fidelity_from_estimates(
    population: (f64, f64),
    coherence: &[(f64, f64)],
    n_parties: usize,
) -> Result<(f64, f64)> {
    if coherence.len() != n_parties {
        return Err(Error::WrongCount {
            what: "coherence settings",
            expected: n_parties,
            found: coherence.len(),
        });
    }
    let n = n_parties as f64;
    let c: f64 = coherence
        .iter()
        .enumerate()
        .map(|(k, (v, _))| if k % 2 == 0 { *v } else { -*v })
        .sum::<f64>()
        / n;
    let c_var: f64 = coherence.iter().map(|(_, s)| s * s).sum::<f64>() / (n * n);
    let f = 0.5 * (population.0 + c);
    Ok((f, 0.5 * (population.1.powi(2) + c_var).sqrt()))
}

/// GHZ fidelity from a computational-basis record and one record per
/// coherence angle `kπ/N`, `k = 0..N`.
pub fn ghz_fidelity(population: &CountsRecord, coherence: &[CountsRecord]) -> Result<(f64, f64)> {
    let n = population.n_parties().ok_or(Error::EmptyCounts)?;
    let pop = linear_estimate(population, |o| {
        let first = o.0[0];
        if o.0.iter().all(|&m| m == first) {
            1.0
        } else {
            0.0
        }
    })?;
    let all: Vec<usize> = (1..=n).collect();
    let coh = coherence
        .iter()
        .map(|r| estimate_correlator(r, &all).map(|e| (e.value, e.sigma)))
        .collect::<Result<Vec<_>>>()?;
    ghz_fidelity_from_estimates((pop.value, pop.sigma), &coh, n)
}

/// Number of stabilizer expectations the cluster estimator averages.
pub const CLUSTER_STABILIZERS: usize = 16;

/// Cluster fidelity as the mean of all sixteen stabilizer expectations,
/// identity included.
pub fn cluster_fidelity(expectations: &[(f64, f64)]) -> Result<(f64, f64)> {
    if expectations.len() != CLUSTER_STABILIZERS {
        return Err(Error::WrongCount {
            what: "stabilizer expectations",
            expected: CLUSTER_STABILIZERS,
            found: expectations.len(),
        });
    }
    let m = CLUSTER_STABILIZERS as f64;
    let f = expectations.iter().map(|(v, _)| v).sum::<f64>() / m;
    let s = expectations.iter().map(|(_, s)| s * s).sum::<f64>().sqrt() / m;
    Ok((f, s))
}

/// Simulated inputs for [`ghz_fidelity`]: a `Z` basis record and `N`
/// coherence records.
pub fn simulate_ghz_fidelity_counts(
    state: &DensityState,
    mean_total: f64,
    seed: u64,
) -> Result<(CountsRecord, Vec<CountsRecord>)> {
    let n = state.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = vec![paulis::z(); n];
    let pop = sample_counts_with(
        &outcome_distribution(state, &z)?,
        mean_total,
        &vec!["Z"; n].join(" "),
        &mut rng,
    )?;
    let coherence = (0..n)
        .map(|k| {
            let m = coherence_observable(k as f64 * PI / n as f64);
            let label = format!("M{k}");
            sample_counts_with(
                &outcome_distribution(state, &vec![m; n])?,
                mean_total,
                &label,
                &mut rng,
            )
        })
        .collect::<Result<_>>()?;
    Ok((pop, coherence))
}

/// A measured value given either bare or with its uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Measured {
    Bare(f64),
    WithSigma { value: f64, sigma: f64 },
}

impl Measured {
    pub fn pair(self) -> (f64, f64) {
        match self {
            Measured::Bare(v) => (v, 0.0),
            Measured::WithSigma { value, sigma } => (value, sigma),
        }
    }
}

/// Input file of the direct fidelity estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FidelityInput {
    Ghz {
        population: Measured,
        coherence: Vec<Measured>,
    },
    GhzCounts {
        population: CountsRecord,
        coherence: Vec<CountsRecord>,
    },
    Cluster {
        expectations: Vec<Measured>,
    },
}

impl FidelityInput {
    pub fn from_json(text: &str) -> Result<Self> {
        let input: FidelityInput = serde_json::from_str(text)?;
        if let FidelityInput::GhzCounts {
            population,
            coherence,
        } = &input
        {
            population.validate()?;
            for r in coherence {
                r.validate()?;
            }
        }
        Ok(input)
    }

    pub fn estimate(&self) -> Result<(f64, f64)> {
        match self {
            FidelityInput::Ghz {
                population,
                coherence,
            } => {
                let c: Vec<(f64, f64)> = coherence.iter().map(|m| m.pair()).collect();
                ghz_fidelity_from_estimates(population.pair(), &c, c.len())
            }
            FidelityInput::GhzCounts {
                population,
                coherence,
            } => ghz_fidelity(population, coherence),
            FidelityInput::Cluster { expectations } => {
                cluster_fidelity(&expectations.iter().map(|m| m.pair()).collect::<Vec<_>>())
            }
        }
    }
}

/// State file: `{"amplitudes": [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_json(text: &str) -> Result<StateVector> {
        let file: StateFile = serde_json::from_str(text)?;
        if file.amplitudes.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite amplitude".into()));
        }
        StateVector::new(
            file.amplitudes
                .iter()
                .map(|&[re, im]| C64::new(re, im))
                .collect(),
        )
    }

    pub fn from_state(state: &StateVector) -> Self {
        Self {
            amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

/// Simulation config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// `ghz4`, `cluster4` or a path to a state file.
    pub state: String,
    #[serde(default)]
    pub noise_p: f64,
    pub events_per_setting: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub dephased: bool,
}

/// The lab state of a family: GHZ4 or the four-qubit linear cluster state.
pub fn family_lab_state(family: Family) -> StateVector {
    canonical_state(family.canonical_state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{experimental_frame, Preset};
    use crate::graph::CanonicalState;
    use approx::assert_abs_diff_eq;

    fn record(pairs: &[(&str, u64)]) -> CountsRecord {
        CountsRecord::new(
            "A1 A2 A3 A4",
            pairs.iter().map(|&(k, n)| (k.to_string(), n)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn correlator_examples() {
        let e = estimate_correlator(&record(&[("++++", 100)]), &[1, 2, 3, 4]).unwrap();
        assert_eq!((e.value, e.sigma, e.n_events), (1.0, 0.0, 100));
        let e = estimate_correlator(&record(&[("++++", 50), ("-+++", 50)]), &[1, 2, 3, 4]).unwrap();
        assert_abs_diff_eq!(e.value, 0.0);
        assert_abs_diff_eq!(e.sigma, 0.1, epsilon = 1e-15);
        assert!(matches!(
            estimate_correlator(&record(&[("++++", 0)]), &[1]),
            Err(Error::EmptyCounts)
        ));
    }

    #[test]
    fn ghz_distributions() {
        let ghz = DensityState::from_pure(&canonical_state(CanonicalState::Ghz4));
        let z = outcome_distribution(&ghz, &vec![paulis::z(); 4]).unwrap();
        assert_abs_diff_eq!(
            z.probability(&"++++".parse().unwrap()),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            z.probability(&"----".parse().unwrap()),
            0.5,
            epsilon = 1e-12
        );
        let x = outcome_distribution(&ghz, &vec![paulis::x(); 4]).unwrap();
        for (o, p) in x.iter() {
            let even = o.0.iter().filter(|&&m| m).count() % 2 == 0;
            assert_abs_diff_eq!(p, if even { 0.125 } else { 0.0 }, epsilon = 1e-12);
        }
        let mixed = outcome_distribution(
            &DensityState::maximally_mixed(4),
            &vec![paulis::hadamard(); 4],
        )
        .unwrap();
        assert!(mixed
            .probabilities()
            .iter()
            .all(|&p| (p - 1.0 / 16.0).abs() < 1e-12));
    }

    #[test]
    fn non_dichotomic_rejected() {
        let ghz = DensityState::from_pure(&canonical_state(CanonicalState::Ghz4));
        let obs = vec![
            paulis::z(),
            paulis::z(),
            paulis::z(),
            paulis::z().scale(0.5),
        ];
        assert!(matches!(
            outcome_distribution(&ghz, &obs),
            Err(Error::NotDichotomic { party: 4, .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let ghz = DensityState::from_pure(&canonical_state(CanonicalState::Ghz4));
        let dist = outcome_distribution(&ghz, &vec![paulis::z(); 4]).unwrap();
        let a = sample_counts(&dist, 1000.0, 3, "Z Z Z Z").unwrap();
        let b = sample_counts(&dist, 1000.0, 3, "Z Z Z Z").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.iter().filter(|(_, &n)| n > 0).count(), 2);
    }

    #[test]
    fn noisy_mixture() {
        let ghz = canonical_state(CanonicalState::Ghz4);
        let rho = noisy_state(&ghz, &NoiseSpec::preset(Family::Ghz, 0.0, false).unwrap()).unwrap();
        assert!((rho.matrix() - &ghz.projector()).max_abs() < 1e-15);
        assert!(matches!(
            NoiseSpec::new(-0.1, preset_noise(Family::Ghz)),
            Err(Error::NegativeNoise(_))
        ));
        assert_abs_diff_eq!(noise_pair(Family::Cluster).norm_sqr(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn settings_labels() {
        let s = vec![Setting::A, Setting::B, Setting::B, Setting::A];
        assert_eq!(setting_label(&s), "A1 B2 B3 A4");
        assert_eq!(parse_setting_label("A1 B2 B3 A4").unwrap(), s);
        assert!(parse_setting_label("A2 B1").is_err());
        assert!(parse_setting_label("C1").is_err());
    }

    #[test]
    fn required_settings_of_b1() {
        let req = required_settings(&Preset::B1.build().unwrap());
        let labels: Vec<String> = req.iter().map(|s| setting_label(s)).collect();
        assert_eq!(
            labels,
            ["A1 B2 B3 B4", "B1 B2 B3 B4", "A1 A2 A3 A4", "B1 A2 A3 A4"]
        );
    }

    #[test]
    fn missing_setting_is_named() {
        let ineq = Preset::B1.build().unwrap();
        let only = record(&[("++++", 10)]);
        match bell_value_from_counts(&[only], &ineq) {
            Err(Error::MissingSetting(label)) => assert_eq!(label, "A1 B2 B3 B4"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ideal_counts_give_quantum_bound() {
        let ineq = Preset::B1.build().unwrap();
        let (_, settings) = experimental_frame(&ineq).unwrap();
        let rho = DensityState::from_pure(&family_lab_state(Family::Ghz));
        let records = simulate_bell_counts(&rho, &ineq, &settings, 1e6, 1).unwrap();
        let (v, s) = bell_value_from_counts(&records, &ineq).unwrap();
        assert!((v - ineq.quantum_bound).abs() < 3.0 * s, "{v} ± {s}");
    }

    #[test]
    fn ghz_fidelity_examples() {
        let (f, _) = ghz_fidelity_from_estimates(
            (0.994, 0.0),
            &[(0.918, 0.0), (-0.924, 0.0), (0.916, 0.0), (-0.920, 0.0)],
            4,
        )
        .unwrap();
        assert_abs_diff_eq!(f, 0.95675, epsilon = 1e-12);
        assert!(matches!(
            ghz_fidelity_from_estimates((1.0, 0.0), &[(1.0, 0.0)], 4),
            Err(Error::WrongCount { .. })
        ));
    }

    #[test]
    fn cluster_fidelity_examples() {
        assert_eq!(cluster_fidelity(&[(1.0, 0.0); 16]).unwrap().0, 1.0);
        let mut only_identity = vec![(0.0, 0.0); 16];
        only_identity[15] = (1.0, 0.0);
        assert_eq!(cluster_fidelity(&only_identity).unwrap().0, 1.0 / 16.0);
        assert!(cluster_fidelity(&[(1.0, 0.0); 15]).is_err());
    }

    #[test]
    fn counts_json_round_trip() {
        let r = record(&[("++++", 3), ("+-+-", 4)]);
        assert_eq!(CountsRecord::from_json(&r.to_json()).unwrap(), r);
        assert!(CountsRecord::from_json(r#"{"setting":"A1","counts":{"+x":1}}"#).is_err());
        assert!(CountsRecord::from_json(r#"{"setting":"A1","counts":{"+":1,"++":1}}"#).is_err());
    }

    #[test]
    fn fidelity_input_forms() {
        let ghz = r#"{"kind":"ghz","population":{"value":0.994,"sigma":0.002},
                      "coherence":[0.918,-0.924,0.916,-0.920]}"#;
        let (f, s) = FidelityInput::from_json(ghz).unwrap().estimate().unwrap();
        assert_abs_diff_eq!(f, 0.95675, epsilon = 1e-12);
        assert_abs_diff_eq!(s, 0.001, epsilon = 1e-12);
        let bad = r#"{"kind":"cluster","expectations":[1,1]}"#;
        assert!(FidelityInput::from_json(bad).unwrap().estimate().is_err());
    }

    #[test]
    fn state_file_round_trip() {
        let psi = canonical_state(CanonicalState::Cluster4);
        let text = serde_json::to_string(&StateFile::from_state(&psi)).unwrap();
        assert_eq!(StateFile::from_json(&text).unwrap(), psi);
        assert!(StateFile::from_json(r#"{"amplitudes":[[1,0],[1,0]]}"#).is_err());
    }
}
