use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("expectation value has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("{what}: requested {requested}, limit is {limit}")]
    ResourceGuard {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("Pauli strings have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("product of anticommuting Pauli strings has imaginary phase")]
    ImaginaryPhase,

    #[error("stabilizer {0} is not supported by the construction (Y letter or negative phase)")]
    UnsupportedStabilizer(String),

    #[error("stabilizers {l} and {k} are not pairable inside the AC set")]
    NotPairable { l: usize, k: usize },

    #[error("invalid construction: {0}")]
    InvalidSpec(String),

    #[error("angle {angle} for party {party} is outside [0, pi/2]")]
    AngleOutOfRange { party: usize, angle: f64 },

    #[error("unknown inequality '{0}' (expected b1..b6)")]
    UnknownInequality(String),

    #[error("unknown state '{0}' (expected ghz4 or cluster4)")]
    UnknownState(String),

    #[error("no feasible s in [0, {s_max}]")]
    Infeasible { s_max: f64 },

    #[error(
        "Bell value {value} exceeds the quantum bound {beta_q} by more than 3 sigma (sigma = {sigma})"
    )]
    InconsistentBellValue { value: f64, beta_q: f64, sigma: f64 },

    #[error("noise proportion must be non-negative, got {0}")]
    NegativeNoise(f64),

    #[error("observable for party {party} is not dichotomic (eigenvalues {eigenvalues:?})")]
    NotDichotomic { party: usize, eigenvalues: [f64; 2] },

    #[error("missing counts record for setting {0}")]
    MissingSetting(String),

    #[error("counts record has zero total events")]
    EmptyCounts,

    #[error("expected {expected} {what}, found {found}")]
    WrongCount {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
