//! Robust self-testing coefficients and fidelity certificates.
//!
//! For a Bell operator `B(θ)` and the extraction operator
//! `K(θ) = (Λ_1 ⊗ … ⊗ Λ_N)(|ψ⟩⟨ψ|)` we look for the smallest `s` such that
//! `K(θ) - s B(θ) ≥ (1 - s β_Q) I` over the sampled angle family. The
//! extractable fidelity is then bounded by `F ≥ s ⟨B⟩ + μ` with
//! `μ = 1 - s β_Q`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{
    BellInequality, JordanFamily, MeasurementAngles, Preset, DEFAULT_GRID_RESOLUTION,
};
use crate::error::{Error, Result};
use crate::linalg::{kron_all, paulis, symmetric_eigenvalues, ComplexMatrix, StateVector};
use crate::report::format_uncertain;
use crate::search::{coordinate_descent, AngleGrid, Refinement};
use crate::tolerance::TOL;

/// Upper end of the `s` search interval.
pub const S_MAX: f64 = 2.0;
/// Width of the final `s` bracket.
pub const S_RESOLUTION: f64 = 1e-3;
/// Grid points whose `λ_min` lies this far above the threshold are skipped
/// without an eigensolve.
const CANDIDATE_MARGIN: f64 = 0.05;
/// Refinement seeds taken from the lowest grid minima.
const MAX_SEEDS: usize = 8;

/// `g(x) = (1 + √2)(sin x + cos x - 1)`, which runs from 0 at the endpoints
/// to 1 at `π/4`.
pub fn trade_off_g(x: f64) -> Result<f64> {
    if !(-TOL.angle..=FRAC_PI_2 + TOL.angle).contains(&x) {
        return Err(Error::AngleOutOfRange { party: 0, angle: x });
    }
    Ok((1.0 + SQRT_2) * (x.sin() + x.cos() - 1.0))
}

/// Mixing weights `((1+g)/2, (1-g)/2)` of the local channel.
pub fn channel_weights(x: f64) -> Result<(f64, f64)> {
    let g = trade_off_g(x)?;
    Ok(((1.0 + g) / 2.0, (1.0 - g) / 2.0))
}

/// Extraction operator `Γ_i(x)`: `X`/`Z` on rotated parties, `H'`/`V'`
/// elsewhere, switching at `x = π/4`.
pub fn extraction_gamma(x: f64, rotated: bool) -> ComplexMatrix {
    match (rotated, x < FRAC_PI_4) {
        (true, true) => paulis::x(),
        (true, false) => paulis::z(),
        (false, true) => paulis::hadamard(),
        (false, false) => paulis::v_prime(),
    }
}

/// `K(θ)` by direct application of the local channels to the target
/// projector.
pub fn extraction_operator_k(
    angles: &MeasurementAngles,
    target: &StateVector,
) -> Result<ComplexMatrix> {
    let n = angles.theta().len();
    if target.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: target.n_qubits(),
        });
    }
    let mut rho = target.projector();
    for (i, &x) in angles.theta().iter().enumerate() {
        let (keep, flip) = channel_weights(x)?;
        let gamma = extraction_gamma(x, angles.ac_set().contains(&(i + 1)));
        let factors: Vec<ComplexMatrix> = (0..n)
            .map(|j| {
                if j == i {
                    gamma.clone()
                } else {
                    paulis::identity()
                }
            })
            .collect();
        let full = kron_all(&factors);
        let twisted = &(&full * &rho) * &full;
        rho = &rho.scale(keep) + &twisted.scale(flip);
    }
    Ok(rho)
}

/// Real-arithmetic evaluation of `K(θ)` and `B(θ)` for one inequality and
/// target state.
#[derive(Clone, Debug)]
pub struct RobustnessProblem {
    family: JordanFamily,
    projector: Vec<f64>,
    dim: usize,
    beta_c: f64,
    beta_q: f64,
    name: String,
}

type Real2 = [[f64; 2]; 2];

/// Candidate points, or the first point found below the violation level.
type ScanResult = std::result::Result<Vec<(usize, f64)>, (usize, f64)>;

impl RobustnessProblem {
    /// The target must have real amplitudes, as every graph state does.
    pub fn new(ineq: &BellInequality, target: &StateVector) -> Result<Self> {
        let n = ineq.n_parties();
        if target.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: target.n_qubits(),
            });
        }
        let worst_im = target
            .amplitudes()
            .iter()
            .map(|a| a.im.abs())
            .fold(0.0, f64::max);
        if worst_im > TOL.imaginary_residue {
            return Err(Error::ImaginaryResidue(worst_im));
        }
        let amps: Vec<f64> = target.amplitudes().iter().map(|a| a.re).collect();
        let dim = amps.len();
        let mut projector = vec![0.0; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                projector[r * dim + c] = amps[r] * amps[c];
            }
        }
        Ok(Self {
            family: JordanFamily::new(ineq),
            projector,
            dim,
            beta_c: ineq.classical_bound,
            beta_q: ineq.quantum_bound,
            name: ineq.name.clone(),
        })
    }

    /// Problem for a named preset with its graph-state target.
    pub fn for_preset(preset: Preset) -> Result<Self> {
        let ineq = preset.build()?;
        let target = crate::graph::build_graph_state(&preset.family().graph())?;
        Self::new(&ineq, &target)
    }

    pub fn n_parties(&self) -> usize {
        self.family.n_parties()
    }

    pub fn beta_q(&self) -> f64 {
        self.beta_q
    }

    pub fn beta_c(&self) -> f64 {
        self.beta_c
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `K(θ)` as a real symmetric matrix.
    pub fn k_matrix(&self, theta: &[f64]) -> DMatrix<f64> {
        let n = self.n_parties();
        let mut rho = self.projector.clone();
        let mut scratch = vec![0.0; rho.len()];
        for (i, &x) in theta.iter().enumerate() {
            let x = x.clamp(0.0, FRAC_PI_2);
            let g = (1.0 + SQRT_2) * (x.sin() + x.cos() - 1.0);
            let (keep, flip) = ((1.0 + g) / 2.0, (1.0 - g) / 2.0);
            if flip == 0.0 {
                continue;
            }
            let (u, w) = self.family.axes(i + 1);
            let gamma = if x < FRAC_PI_4 { u } else { w };
            let bit = 1usize << (n - 1 - i);
            conjugate_local(&rho, &mut scratch, self.dim, bit, gamma);
            for (r, t) in rho.iter_mut().zip(&scratch) {
                *r = keep * *r + flip * t;
            }
        }
        DMatrix::from_row_slice(self.dim, self.dim, &rho)
    }

    pub fn b_matrix(&self, theta: &[f64]) -> DMatrix<f64> {
        self.family.operator(theta)
    }

    /// `K(θ) - s B(θ)`.
    pub fn shifted(&self, theta: &[f64], s: f64) -> DMatrix<f64> {
        let mut m = self.k_matrix(theta);
        if s != 0.0 {
            m -= self.b_matrix(theta) * s;
        }
        m
    }

    /// `λ_min(K(θ) - s B(θ))`.
    pub fn lambda_min(&self, theta: &[f64], s: f64) -> f64 {
        symmetric_eigenvalues(&self.shifted(theta, s))[0]
    }

    /// Grid points where `λ_min(K - sB)` may lie below `candidate_level`,
    /// with their exact values. Stops with `Err` on the first point whose
    /// value drops below `violation_level`.
    fn scan(
        &self,
        grid: &AngleGrid,
        s: f64,
        candidate_level: f64,
        violation_level: Option<f64>,
    ) -> ScanResult {
        let dim = self.dim;
        let found: std::result::Result<Vec<_>, _> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let m = self.shifted(&grid.point(idx), s);
                let safe = {
                    let mut probe = m.clone();
                    for d in 0..dim {
                        probe[(d, d)] -= candidate_level;
                    }
                    probe.cholesky().is_some()
                };
                if safe {
                    return Ok(None);
                }
                let lam = symmetric_eigenvalues(&m)[0];
                match violation_level {
                    Some(v) if lam < v => Err((idx, lam)),
                    _ => Ok(Some((idx, lam))),
                }
            })
            .collect();
        found.map(|v| {
            let mut c: Vec<(usize, f64)> = v.into_iter().flatten().collect();
            c.sort_by_key(|&(i, _)| i);
            c
        })
    }

    /// Local minima among scanned candidates; non-candidates count as
    /// larger than every candidate.
    fn seeds(grid: &AngleGrid, candidates: &[(usize, f64)]) -> Vec<usize> {
        let values: HashMap<usize, f64> = candidates.iter().copied().collect();
        let mut minima: Vec<(usize, f64)> = candidates
            .iter()
            .copied()
            .filter(|&(idx, v)| {
                grid.neighbors(idx)
                    .into_iter()
                    .all(|nb| values.get(&nb).is_none_or(|&w| v <= w))
            })
            .collect();
        minima.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        minima.into_iter().take(MAX_SEEDS).map(|(i, _)| i).collect()
    }

    fn refine(&self, grid: &AngleGrid, s: f64, seeds: &[usize]) -> (f64, Vec<f64>) {
        let cfg = Refinement::for_grid(grid);
        let f = |t: &[f64]| self.lambda_min(t, s);
        seeds
            .iter()
            .map(|&idx| coordinate_descent(f, &grid.point(idx), &cfg))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap_or((f64::INFINITY, Vec::new()))
    }

    /// `μ(s)`: the smallest eigenvalue of `K - sB` over the grid, refined by
    /// coordinate descent from the lowest grid minima.
    pub fn mu_of_s(&self, s: f64, grid_resolution: usize) -> Result<MuSearch> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "s must be non-negative, got {s}"
            )));
        }
        let grid = checked_grid(self.n_parties(), grid_resolution)?;
        let centre = vec![FRAC_PI_4; self.n_parties()];
        let level = self.lambda_min(&centre, s) + CANDIDATE_MARGIN;
        let candidates = self
            .scan(&grid, s, level, None)
            .expect("scan without violation level cannot fail");
        let (grid_best, grid_idx) = candidates
            .iter()
            .map(|&(i, v)| (v, i))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .expect("centre region is always a candidate");
        let (refined, at) = self.refine(&grid, s, &Self::seeds(&grid, &candidates));
        Ok(if refined < grid_best {
            MuSearch {
                mu: refined,
                angles: at,
            }
        } else {
            MuSearch {
                mu: grid_best,
                angles: grid.point(grid_idx),
            }
        })
    }

    /// Whether `K - sB ≥ (1 - s β_Q - tol) I` holds at every grid point and
    /// at the refined minima.
    pub fn is_feasible(&self, s: f64, grid_resolution: usize) -> Result<bool> {
        let grid = checked_grid(self.n_parties(), grid_resolution)?;
        let floor = 1.0 - s * self.beta_q - TOL.feasibility;
        let Ok(candidates) = self.scan(&grid, s, floor + CANDIDATE_MARGIN, Some(floor)) else {
            return Ok(false);
        };
        let (refined, _) = self.refine(&grid, s, &Self::seeds(&grid, &candidates));
        Ok(refined >= floor)
    }

    /// Smallest feasible `s` in `(0, S_MAX]`, located by bisection to
    /// [`S_RESOLUTION`]. Feasibility is monotone in `s` because
    /// `B(θ) ≤ β_Q I`, so the feasible set is an interval.
    pub fn optimize_s(&self, grid_resolution: usize) -> Result<RobustnessCoefficients> {
        if !self.is_feasible(S_MAX, grid_resolution)? {
            return Err(Error::Infeasible { s_max: S_MAX });
        }
        let (mut lo, mut hi) = (0.0, S_MAX);
        while hi - lo > S_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if self.is_feasible(mid, grid_resolution)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let found = self.mu_of_s(hi, grid_resolution)?;
        let mu = 1.0 - hi * self.beta_q;
        Ok(RobustnessCoefficients {
            inequality: self.name.clone(),
            s: hi,
            mu,
            beta_c: self.beta_c,
            beta_q: self.beta_q,
            grid: Some(grid_resolution),
            residual: (hi * self.beta_q + found.mu - 1.0).abs(),
        })
    }
}

fn checked_grid(dims: usize, resolution: usize) -> Result<AngleGrid> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least 2, got {resolution}"
        )));
    }
    Ok(AngleGrid::new(dims, resolution))
}

/// `out = Γ_bit ρ Γ_bit` for a real symmetric single-qubit `Γ`.
fn conjugate_local(rho: &[f64], out: &mut [f64], dim: usize, bit: usize, g: &Real2) {
    for r0 in (0..dim).filter(|r| r & bit == 0) {
        let r1 = r0 | bit;
        for c in 0..dim {
            let (a, b) = (rho[r0 * dim + c], rho[r1 * dim + c]);
            out[r0 * dim + c] = g[0][0] * a + g[0][1] * b;
            out[r1 * dim + c] = g[1][0] * a + g[1][1] * b;
        }
    }
    for r in 0..dim {
        let row = &mut out[r * dim..(r + 1) * dim];
        for c0 in (0..dim).filter(|c| c & bit == 0) {
            let c1 = c0 | bit;
            let (a, b) = (row[c0], row[c1]);
            row[c0] = a * g[0][0] + b * g[1][0];
            row[c1] = a * g[0][1] + b * g[1][1];
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuSearch {
    pub mu: f64,
    pub angles: Vec<f64>,
}

/// `μ(s)` for an inequality and target at the given grid resolution.
pub fn mu_of_s(
    ineq: &BellInequality,
    s: f64,
    target: &StateVector,
    grid_resolution: usize,
) -> Result<f64> {
    Ok(RobustnessProblem::new(ineq, target)?
        .mu_of_s(s, grid_resolution)?
        .mu)
}

pub fn optimize_s(
    ineq: &BellInequality,
    target: &StateVector,
    grid_resolution: usize,
) -> Result<RobustnessCoefficients> {
    RobustnessProblem::new(ineq, target)?.optimize_s(grid_resolution)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCoefficients {
    pub inequality: String,
    pub s: f64,
    pub mu: f64,
    pub beta_c: f64,
    pub beta_q: f64,
    /// Points per axis of the search grid; `None` for externally supplied
    /// values.
    pub grid: Option<usize>,
    /// `|s β_Q + μ_search - 1|`, where `μ_search` is the minimum found before
    /// fixing `μ = 1 - s β_Q`.
    #[serde(default)]
    pub residual: f64,
}

impl RobustnessCoefficients {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn fidelity_at(&self, bell_value: f64) -> f64 {
        self.s * bell_value + self.mu
    }

    fn fixed(preset: Preset, s: f64, mu: f64, grid: Option<usize>) -> Self {
        let (beta_c, beta_q) = preset_bounds(preset);
        Self {
            inequality: preset.name().to_string(),
            s,
            mu,
            beta_c,
            beta_q,
            grid,
            residual: (s * beta_q + mu - 1.0).abs(),
        }
    }
}

fn preset_bounds(preset: Preset) -> (f64, f64) {
    match preset {
        Preset::B1 | Preset::B4 => (4.0, 2.0 + 2.0 * SQRT_2),
        Preset::B2 => (5.0, 1.0 + 4.0 * SQRT_2),
        Preset::B3 => (6.0, 6.0 * SQRT_2),
        Preset::B5 => (5.0, 1.0 + 4.0 * SQRT_2),
        Preset::B6 => (4.0, 4.0 * SQRT_2),
    }
}

/// Published `(s, μ)` for the six presets.
pub fn published_coefficients(preset: Preset) -> RobustnessCoefficients {
    let (s, mu) = match preset {
        Preset::B1 | Preset::B4 => (1.0, -1.0 - 2.0 * SQRT_2),
        Preset::B2 => (0.69, -3.5931),
        Preset::B3 => (0.49, -3.1578),
        Preset::B5 => (0.74, -3.9262),
        Preset::B6 => (0.62, -2.5071),
    };
    RobustnessCoefficients::fixed(preset, s, mu, None)
}

/// `s` values from [`optimize_s`] at the default grid, stored so that
/// certification does not need to rerun the search.
pub fn cached_coefficients(preset: Preset) -> RobustnessCoefficients {
    let s = match preset {
        Preset::B1 => 0.9921875,
        Preset::B2 => 0.6904296875,
        Preset::B3 => 0.490234375,
        Preset::B4 => 0.9921875,
        Preset::B5 => 0.7470703125,
        Preset::B6 => 0.6171875,
    };
    let (_, beta_q) = preset_bounds(preset);
    RobustnessCoefficients::fixed(preset, s, 1.0 - s * beta_q, Some(DEFAULT_GRID_RESOLUTION))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    GenuineEntanglement,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::GenuineEntanglement => "GENUINE_ENTANGLEMENT",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityCertificate {
    pub inequality: String,
    pub bell_value: f64,
    pub bell_sigma: f64,
    pub s: f64,
    pub mu: f64,
    pub beta_c: f64,
    pub beta_q: f64,
    pub grid: Option<usize>,
    pub fidelity_bound: f64,
    pub fidelity_sigma: f64,
    pub verdict: Verdict,
}

impl FidelityCertificate {
    /// `F ≥ 0.91(2)` style summary.
    pub fn summary(&self) -> String {
        format!(
            "F ≥ {}, {}",
            format_uncertain(self.fidelity_bound, self.fidelity_sigma),
            self.verdict
        )
    }
}

/// Slack on `⟨B⟩ ≤ β_Q + 3σ` for values computed in floating point.
const BELL_VALUE_SLACK: f64 = 1e-9;

pub fn certify(
    bell_value: f64,
    bell_sigma: f64,
    coeffs: &RobustnessCoefficients,
) -> Result<FidelityCertificate> {
    if !bell_value.is_finite() || bell_sigma.is_nan() || bell_sigma < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Bell value {bell_value} with sigma {bell_sigma}"
        )));
    }
    if bell_value > coeffs.beta_q + 3.0 * bell_sigma + BELL_VALUE_SLACK {
        return Err(Error::InconsistentBellValue {
            value: bell_value,
            beta_q: coeffs.beta_q,
            sigma: bell_sigma,
        });
    }
    let fidelity_bound = coeffs.fidelity_at(bell_value);
    Ok(FidelityCertificate {
        inequality: coeffs.inequality.clone(),
        bell_value,
        bell_sigma,
        s: coeffs.s,
        mu: coeffs.mu,
        beta_c: coeffs.beta_c,
        beta_q: coeffs.beta_q,
        grid: coeffs.grid,
        fidelity_bound,
        fidelity_sigma: coeffs.s * bell_sigma,
        verdict: if fidelity_bound > 0.5 {
            Verdict::GenuineEntanglement
        } else {
            Verdict::Inconclusive
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCurve {
    pub points: Vec<(f64, f64)>,
    /// Bell value at which the bound reaches `1/2`, if inside `[β_C, β_Q]`.
    pub crossing: Option<f64>,
}

impl BoundCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bell_value,fidelity_bound\n");
        for (b, f) in &self.points {
            out.push_str(&format!("{b:.6},{f:.6}\n"));
        }
        out
    }
}

/// Samples `F(β) = sβ + μ` on `[β_C, β_Q]`, clipped to `[0, 1]`.
pub fn bound_curve(coeffs: &RobustnessCoefficients, n_points: usize) -> Result<BoundCurve> {
    if n_points < 2 {
        return Err(Error::InvalidArgument(format!(
            "curve needs at least 2 points, got {n_points}"
        )));
    }
    let (a, b) = (coeffs.beta_c, coeffs.beta_q);
    let points = (0..n_points)
        .map(|k| {
            let beta = if k + 1 == n_points {
                b
            } else {
                a + (b - a) * k as f64 / (n_points - 1) as f64
            };
            (beta, coeffs.fidelity_at(beta).clamp(0.0, 1.0))
        })
        .collect();
    let cross = (0.5 - coeffs.mu) / coeffs.s;
    Ok(BoundCurve {
        points,
        crossing: (a..=b).contains(&cross).then_some(cross),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph_state;
    use crate::linalg::hermitian_eigen;
    use approx::assert_abs_diff_eq;

    #[test]
    fn g_values() {
        assert_abs_diff_eq!(trade_off_g(0.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(trade_off_g(FRAC_PI_4).unwrap(), 1.0, epsilon = 1e-14);
        let mid = trade_off_g(std::f64::consts::PI / 8.0).unwrap();
        assert!(mid > 0.0 && mid < 1.0);
        assert!(trade_off_g(1.6).is_err());
        assert!(trade_off_g(-0.01).is_err());
    }

    #[test]
    fn identity_channel_at_optimum() {
        let p = Preset::B2;
        let ineq = p.build().unwrap();
        let psi = build_graph_state(&p.family().graph()).unwrap();
        let k = extraction_operator_k(&MeasurementAngles::optimal(4, &ineq.ac_set), &psi).unwrap();
        assert!((&k - &psi.projector()).max_abs() < 1e-12);
    }

    #[test]
    fn real_kernel_matches_direct_channel() {
        let p = Preset::B5;
        let ineq = p.build().unwrap();
        let psi = build_graph_state(&p.family().graph()).unwrap();
        let problem = RobustnessProblem::new(&ineq, &psi).unwrap();
        for theta in [[0.0, 0.3, 1.0, FRAC_PI_2], [0.2, FRAC_PI_4, 0.9, 1.2]] {
            let direct = extraction_operator_k(
                &MeasurementAngles::new(theta.to_vec(), ineq.ac_set.clone()).unwrap(),
                &psi,
            )
            .unwrap();
            let fast = ComplexMatrix::from_real(&problem.k_matrix(&theta));
            assert!((&direct - &fast).max_abs() < 1e-12);
            let spectrum = hermitian_eigen(&direct).unwrap();
            assert!(spectrum.min() > -1e-12);
            assert_abs_diff_eq!(direct.trace().re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn mu_at_zero_is_nonnegative() {
        let problem = RobustnessProblem::for_preset(Preset::B1).unwrap();
        let mu = problem.mu_of_s(0.0, 5).unwrap().mu;
        assert!(mu >= -1e-12, "{mu}");
    }

    #[test]
    fn certificate_arithmetic() {
        let c = certify(4.738, 0.021, &published_coefficients(Preset::B1)).unwrap();
        assert_abs_diff_eq!(
            c.fidelity_bound,
            4.738 - 1.0 - 2.0 * SQRT_2,
            epsilon = 1e-12
        );
        assert_eq!(c.verdict, Verdict::GenuineEntanglement);
        assert_eq!(c.summary(), "F ≥ 0.91(2), GENUINE_ENTANGLEMENT");
        let c = certify(4.0, 0.0, &published_coefficients(Preset::B1)).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(matches!(
            certify(5.0, 0.01, &published_coefficients(Preset::B1)),
            Err(Error::InconsistentBellValue { .. })
        ));
    }

    #[test]
    fn verdict_boundary_is_strict() {
        let coeffs = RobustnessCoefficients {
            inequality: "t".into(),
            s: 1.0,
            mu: -3.5,
            beta_c: 3.0,
            beta_q: 5.0,
            grid: None,
            residual: 0.0,
        };
        assert_eq!(
            certify(4.0, 0.0, &coeffs).unwrap().verdict,
            Verdict::Inconclusive
        );
        assert_eq!(
            certify(4.0001, 0.0, &coeffs).unwrap().verdict,
            Verdict::GenuineEntanglement
        );
    }

    #[test]
    fn curve_endpoints() {
        let coeffs = published_coefficients(Preset::B1);
        let curve = bound_curve(&coeffs, 11).unwrap();
        assert_abs_diff_eq!(curve.points.last().unwrap().1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            curve.crossing.unwrap(),
            0.5 + 1.0 + 2.0 * SQRT_2,
            epsilon = 1e-12
        );
        let b4 = bound_curve(&published_coefficients(Preset::B4), 2).unwrap();
        assert_abs_diff_eq!(b4.points[0].1, 3.0 - 2.0 * SQRT_2, epsilon = 1e-12);
        assert!(bound_curve(&coeffs, 1).is_err());
    }

    #[test]
    fn coefficients_json_round_trip() {
        let c = cached_coefficients(Preset::B3);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RobustnessCoefficients::from_json(&text).unwrap(), c);
    }
}
