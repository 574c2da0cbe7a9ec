//! Dense complex linear algebra: matrices, pure and mixed states, Kronecker
//! products, Hermitian eigendecomposition and expectation values.
//!
//! Qubit ordering: party 1 is the most significant tensor factor, so basis
//! index `b = b_1 b_2 ... b_N` read as a binary number.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::TOL;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::from_element(rows, cols, ZERO),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    /// Builds a matrix from entries given in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, entries),
        })
    }

    pub fn from_real_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let entries: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_major(rows, cols, &entries)
    }

    pub fn from_real(m: &DMatrix<f64>) -> Self {
        Self {
            inner: m.map(|x| C64::new(x, 0.0)),
        }
    }

    pub fn from_inner(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.inner[(row, col)] = value;
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                out.push(self.inner[(r, c)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            inner: &self.inner * C64::new(factor, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation `|M_ij - conj(M_ji)|`; infinite for
    /// non-square matrices.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                let d = (self.inner[(r, c)] - self.inner[(c, r)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Hermiticity within [`TOL`], scaled by the largest entry.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= TOL.hermitian * self.max_abs().max(1.0)
    }

    /// Real part, if every imaginary part is negligible.
    pub fn to_real(&self) -> Option<DMatrix<f64>> {
        let scale = self.max_abs().max(1.0);
        if self
            .inner
            .iter()
            .any(|z| z.im.abs() > TOL.hermitian * scale)
        {
            return None;
        }
        Some(self.inner.map(|z| z.re))
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                found: v.len(),
            });
        }
        let out = &self.inner * DVector::from_column_slice(v);
        Ok(out.iter().copied().collect())
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Result<C64> {
        if self.cols() != other.rows() || self.rows() != other.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                found: other.rows(),
            });
        }
        let mut acc = ZERO;
        for i in 0..self.rows() {
            for k in 0..self.cols() {
                acc += self.inner[(i, k)] * other.inner[(k, i)];
            }
        }
        Ok(acc)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

/// Single-qubit operators.
pub mod paulis {
    use super::{ComplexMatrix, C64};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn real2(a: f64, b: f64, c: f64, d: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_row_major(2, 2, &[a, b, c, d]).expect("2x2")
    }

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        real2(0.0, 1.0, 1.0, 0.0)
    }

    pub fn y() -> ComplexMatrix {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        ComplexMatrix::from_row_major(2, 2, &[z, -i, i, z]).expect("2x2")
    }

    pub fn z() -> ComplexMatrix {
        real2(1.0, 0.0, 0.0, -1.0)
    }

    /// `H = (X + Z)/sqrt(2)`, which is also the `H'` axis of the Jordan
    /// parametrization.
    pub fn hadamard() -> ComplexMatrix {
        real2(FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2)
    }

    /// `V' = (X - Z)/sqrt(2)`.
    pub fn v_prime() -> ComplexMatrix {
        real2(-FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = (a.rows(), a.cols());
    let (br, bc) = (b.rows(), b.cols());
    let mut out = DMatrix::from_element(ar * br, ac * bc, ZERO);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a.inner[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b.inner[(k, l)];
                }
            }
        }
    }
    ComplexMatrix { inner: out }
}

/// Kronecker product of a list of factors, first factor most significant.
pub fn kron_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// Eigenvalues in ascending order with the matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Column `k` of the eigenvector matrix.
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.inner.column(k).iter().copied().collect()
    }

    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors.inner;
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&x| C64::new(x, 0.0)),
        ));
        ComplexMatrix {
            inner: v * d * v.adjoint(),
        }
    }
}

pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_hermitian() {
        return Err(Error::NonHermitian {
            deviation: m.hermitian_deviation(),
        });
    }
    let eig = SymmetricEigen::new(m.inner.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let n = m.rows();
    let mut vectors = DMatrix::from_element(n, n, ZERO);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors: ComplexMatrix { inner: vectors },
    })
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

fn qubit_count(dim: usize) -> Option<usize> {
    (dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}

/// A normalized pure state on `N` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Accepts amplitudes that already have unit norm.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if qubit_count(amplitudes.len()).is_none() {
            return Err(Error::InvalidArgument(format!(
                "state dimension {} is not a power of two",
                amplitudes.len()
            )));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > TOL.norm {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm_sqr: norm * norm,
            });
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    pub fn projector(&self) -> ComplexMatrix {
        let v = DVector::from_column_slice(&self.amplitudes);
        ComplexMatrix {
            inner: &v * v.adjoint(),
        }
    }

    /// Applies an operator and returns the renormalized image.
    pub fn apply(&self, op: &ComplexMatrix) -> Result<StateVector> {
        StateVector::normalized(op.mul_vec(&self.amplitudes)?)
    }

    /// Applies a single-qubit operator to `site` (1-based).
    pub fn apply_local(&self, site: usize, op: &ComplexMatrix) -> Result<StateVector> {
        let n = self.n_qubits();
        if site == 0 || site > n {
            return Err(Error::InvalidArgument(format!(
                "site {site} outside 1..={n}"
            )));
        }
        let bit = 1usize << (n - site);
        let mut out = self.amplitudes.clone();
        for idx in 0..self.dimension() {
            if idx & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amplitudes[idx], self.amplitudes[idx | bit]);
            out[idx] = op.get(0, 0) * a0 + op.get(0, 1) * a1;
            out[idx | bit] = op.get(1, 0) * a0 + op.get(1, 1) * a1;
        }
        StateVector::normalized(out)
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    matrix: ComplexMatrix,
}

impl DensityState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || qubit_count(matrix.rows()).is_none() {
            return Err(Error::InvalidDensity(format!(
                "shape {}x{} is not a square power of two",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix.hermitian_deviation() > TOL.hermitian * matrix.max_abs().max(1.0) {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (deviation {:.3e})",
                matrix.hermitian_deviation()
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL.trace || tr.im.abs() > TOL.trace {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = hermitian_eigen(&matrix)?.min();
        if min < -TOL.psd {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        Self {
            matrix: state.projector(),
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        Self {
            matrix: ComplexMatrix::identity(d).scale(1.0 / d as f64),
        }
    }

    /// Convex combination `sum_k w_k rho_k`; weights must sum to one.
    pub fn mixture(parts: &[(f64, &DensityState)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidDensity("empty mixture".into()))?;
        let mut acc = ComplexMatrix::zeros(first.1.dimension(), first.1.dimension());
        for (w, rho) in parts {
            if rho.dimension() != acc.rows() {
                return Err(Error::DimensionMismatch {
                    expected: acc.rows(),
                    found: rho.dimension(),
                });
            }
            acc = &acc + &rho.matrix.scale(*w);
        }
        Self::new(acc)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dimension().trailing_zeros() as usize
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity_to(&self, target: &StateVector) -> Result<f64> {
        expectation(self, &target.projector())
    }

    /// `½ ||rho - sigma||_1`.
    pub fn trace_distance(&self, other: &DensityState) -> Result<f64> {
        let diff = &self.matrix - &other.matrix;
        let eig = hermitian_eigen(&diff)?;
        Ok(0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
    }

    /// Keeps only the computational-basis diagonal.
    pub fn dephased(&self) -> Self {
        let d = self.dimension();
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            m.set(i, i, self.matrix.get(i, i));
        }
        Self { matrix: m }
    }
}

/// Anything an observable can be evaluated against.
pub trait QuantumState {
    fn dimension(&self) -> usize;

    /// Unchecked complex expectation value.
    fn raw_expectation(&self, observable: &ComplexMatrix) -> C64;
}

impl QuantumState for StateVector {
    fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    fn raw_expectation(&self, observable: &ComplexMatrix) -> C64 {
        let v = DVector::from_column_slice(&self.amplitudes);
        (v.adjoint() * &observable.inner * &v)[(0, 0)]
    }
}

impl QuantumState for DensityState {
    fn dimension(&self) -> usize {
        self.matrix.rows()
    }

    fn raw_expectation(&self, observable: &ComplexMatrix) -> C64 {
        self.matrix
            .trace_product(observable)
            .expect("dimensions checked by caller")
    }
}

/// `<psi|O|psi>` or `Tr(rho O)` for a Hermitian observable.
pub fn expectation<S: QuantumState + ?Sized>(state: &S, observable: &ComplexMatrix) -> Result<f64> {
    if !observable.is_square() || observable.rows() != state.dimension() {
        return Err(Error::DimensionMismatch {
            expected: state.dimension(),
            found: observable.rows(),
        });
    }
    if !observable.is_hermitian() {
        return Err(Error::NonHermitian {
            deviation: observable.hermitian_deviation(),
        });
    }
    let z = state.raw_expectation(observable);
    if z.im.abs() > TOL.imaginary_residue * observable.max_abs().max(1.0) {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}
