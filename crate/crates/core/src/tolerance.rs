//! Numeric tolerances shared by every module.

/// All comparison thresholds in one place. [`TOL`] holds the defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Entrywise `|M - M^dagger|`, scaled by `max(1, max|M_ij|)`.
    pub hermitian: f64,
    /// `| |psi|^2 - 1 |` for state vectors.
    pub norm: f64,
    /// Imaginary part of an expectation value that may be silently dropped.
    pub imaginary_residue: f64,
    /// `|Tr rho - 1|` for density matrices.
    pub trace: f64,
    /// Most negative eigenvalue tolerated in a density matrix.
    pub psd: f64,
    /// Eigenvalue deviation from +/-1 for a measurement observable.
    pub dichotomic: f64,
    /// Angle slack when validating `[0, pi/2]` ranges.
    pub angle: f64,
    /// Allowed violation of `K - sB >= (1 - s beta_Q) I` when scanning s.
    pub feasibility: f64,
    /// Minimum gap `beta_Q - beta_C` for a built inequality.
    pub violation: f64,
}

pub const TOL: Tolerances = Tolerances {
    hermitian: 1e-12,
    norm: 1e-12,
    imaginary_residue: 1e-10,
    trace: 1e-10,
    psd: 1e-10,
    dichotomic: 1e-8,
    angle: 1e-12,
    feasibility: 1e-7,
    violation: 1e-9,
};

impl Default for Tolerances {
    fn default() -> Self {
        TOL
    }
}
