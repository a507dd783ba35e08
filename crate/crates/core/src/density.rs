//! Validated quantum-state and gate wrappers.
//!
//! [`Density`] and [`Unitary`] are newtypes over [`Matrix`] whose constructors
//! enforce the defining properties, so downstream code can assume a valid
//! state or gate once one of these exists. Positivity of a density matrix is
//! checked spectrally for small systems; for large registers (where Jacobi
//! sweeps would dominate runtime) the Hermiticity and trace gates still apply
//! and positivity is preserved by construction along every evolution path in
//! this crate.

use serde::{Deserialize, Serialize};

use crate::eig::eigenvalues_hermitian;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{creal, czero, C, Scalar};

/// Which tensor factor of a bipartite system an operation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

/// Largest dimension at which constructors run a full spectral positivity check.
const PSD_CHECK_LIMIT: usize = 64;

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix<T>", into = "Matrix<T>")]
pub struct Density<T: Scalar> {
    matrix: Matrix<T>,
}

impl<T: Scalar> Density<T> {
    /// Validate and wrap a candidate density matrix.
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        let tol = T::from_f64(crate::TOL_STRUCT);
        if !matrix.is_square() {
            return Err(Error::NotDensity(format!(
                "state must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.all_finite() {
            return Err(Error::NotDensity("non-finite entry".into()));
        }
        let herm = matrix.hermiticity_deviation();
        if herm > tol {
            return Err(Error::NotDensity(format!(
                "Hermiticity deviation {:e} exceeds tolerance",
                herm.as_f64()
            )));
        }
        let trace = matrix.trace();
        let trace_err = (trace - creal(1.0)).norm();
        if trace_err > tol {
            return Err(Error::NotDensity(format!(
                "trace deviates from one by {:e}",
                trace_err.as_f64()
            )));
        }
        if matrix.dim() <= PSD_CHECK_LIMIT {
            let min = eigenvalues_hermitian(&matrix)?
                .into_iter()
                .fold(T::infinity(), T::min);
            if min < -T::from_f64(crate::TOL_EIG) {
                return Err(Error::NotDensity(format!(
                    "negative eigenvalue {:e}",
                    min.as_f64()
                )));
            }
        }
        Ok(Density { matrix })
    }

    /// Wrap without re-validating; for results of trace-preserving maps
    /// applied to already-validated states.
    pub(crate) fn trusted(matrix: Matrix<T>) -> Self {
        Density { matrix }
    }

    /// Normalized pure state |psi><psi| from a column vector.
    pub fn from_ket(ket: &Matrix<T>) -> Result<Self> {
        if ket.cols() != 1 {
            return Err(Error::InvalidArgument(format!(
                "ket must be a column vector, got {}x{}",
                ket.rows(),
                ket.cols()
            )));
        }
        let norm_sqr: T = ket.data().iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr <= T::from_f64(1e-200) {
            return Err(Error::InvalidArgument("zero ket".into()));
        }
        let n = ket.rows();
        let inv = T::one() / norm_sqr;
        let matrix = Matrix::from_fn(n, n, |i, j| {
            ket[(i, 0)] * ket[(j, 0)].conj() * C::new(inv, T::zero())
        });
        Ok(Density { matrix })
    }

    /// The maximally mixed state 1/n.
    pub fn maximally_mixed(n: usize) -> Self {
        let inv = 1.0 / n as f64;
        Density {
            matrix: Matrix::from_fn(n, n, |i, j| if i == j { creal(inv) } else { czero() }),
        }
    }

    /// Pure basis state |k><k|.
    pub fn basis_state(n: usize, k: usize) -> Self {
        Density {
            matrix: Matrix::basis_projector(n, k),
        }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Expectation value Tr(rho * op). Real part of a Hermitian observable's
    /// expectation is the physical value; the imaginary part is returned so
    /// callers can bound convention errors.
    pub fn expectation(&self, op: &Matrix<T>) -> Result<C<T>> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "observable is {}x{} but state has dimension {}",
                op.rows(),
                op.cols(),
                self.dim()
            )));
        }
        let n = self.dim();
        let mut acc = czero();
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * op[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Tr(rho^2).
    pub fn purity(&self) -> T {
        self.matrix.data().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Tensor product of two states.
    pub fn tensor(&self, other: &Density<T>) -> Result<Density<T>> {
        Ok(Density {
            matrix: self.matrix.tensor(&other.matrix)?,
        })
    }
}

impl<T: Scalar> TryFrom<Matrix<T>> for Density<T> {
    type Error = Error;

    fn try_from(m: Matrix<T>) -> Result<Self> {
        Density::new(m)
    }
}

impl<T: Scalar> From<Density<T>> for Matrix<T> {
    fn from(d: Density<T>) -> Matrix<T> {
        d.matrix
    }
}

/// A unitary operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix<T>", into = "Matrix<T>")]
pub struct Unitary<T: Scalar> {
    matrix: Matrix<T>,
}

impl<T: Scalar> Unitary<T> {
    /// Validate and wrap a candidate unitary.
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "unitary must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.all_finite() {
            return Err(Error::InvalidArgument("non-finite entry in unitary".into()));
        }
        let dev = matrix.unitarity_deviation();
        if dev > T::from_f64(crate::TOL_STRUCT) {
            return Err(Error::NotUnitary(dev.as_f64()));
        }
        Ok(Unitary { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Unitary {
            matrix: Matrix::identity(n),
        }
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn dagger(&self) -> Unitary<T> {
        Unitary {
            matrix: self.matrix.dagger(),
        }
    }

    pub fn tensor(&self, other: &Unitary<T>) -> Result<Unitary<T>> {
        Ok(Unitary {
            matrix: self.matrix.tensor(&other.matrix)?,
        })
    }

    /// U * A * U^dagger.
    pub fn conjugate(&self, a: &Matrix<T>) -> Result<Matrix<T>> {
        if a.rows() != self.dim() || a.cols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{} but unitary has dimension {}",
                a.rows(),
                a.cols(),
                self.dim()
            )));
        }
        Ok(&(&self.matrix * a) * &self.matrix.dagger())
    }

    /// Evolve a state: U rho U^dagger.
    pub fn apply_to_density(&self, rho: &Density<T>) -> Result<Density<T>> {
        Ok(Density::trusted(self.conjugate(rho.matrix())?))
    }
}

impl<T: Scalar> TryFrom<Matrix<T>> for Unitary<T> {
    type Error = Error;

    fn try_from(m: Matrix<T>) -> Result<Self> {
        Unitary::new(m)
    }
}

impl<T: Scalar> From<Unitary<T>> for Matrix<T> {
    fn from(u: Unitary<T>) -> Matrix<T> {
        u.matrix
    }
}

/// Trace out the complement of `keep` from an operator on a tensor product of
/// subsystems with dimensions `dims` (subsystem 0 is the leftmost factor).
/// Kept subsystems stay in their original relative order.
pub fn partial_trace_matrix<T: Scalar>(
    m: &Matrix<T>,
    dims: &[usize],
    keep: &[usize],
) -> Result<Matrix<T>> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidArgument("empty or zero subsystem list".into()));
    }
    if !m.is_square() || m.dim() != total {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but the subsystem dimensions multiply to {total}",
            m.rows(),
            m.cols()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(Error::InvalidArgument("duplicate subsystem in keep set".into()));
    }
    if kept.is_empty() {
        return Err(Error::InvalidArgument("keep set must be non-empty".into()));
    }
    if *kept.last().expect("non-empty") >= dims.len() {
        return Err(Error::IndexOutOfRange(format!(
            "keep set references subsystem {} of {}",
            kept.last().expect("non-empty"),
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|j| !kept.contains(j)).collect();

    // Row-major strides of each subsystem inside the global index.
    let mut strides = vec![1usize; dims.len()];
    for j in (0..dims.len().saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * dims[j + 1];
    }
    let offsets = |subsystems: &[usize]| -> Vec<usize> {
        // Global index offset of every multi-index over the given subsystems.
        let mut offs = vec![0usize];
        for &j in subsystems {
            let mut next = Vec::with_capacity(offs.len() * dims[j]);
            for &base in &offs {
                for digit in 0..dims[j] {
                    next.push(base + digit * strides[j]);
                }
            }
            offs = next;
        }
        offs
    };
    let kept_offsets = offsets(&kept);
    let traced_offsets = offsets(&traced);

    let out_dim = kept_offsets.len();
    let mut out = Matrix::zeros(out_dim, out_dim);
    for (a, &ra) in kept_offsets.iter().enumerate() {
        for (b, &rb) in kept_offsets.iter().enumerate() {
            let mut acc = czero();
            for &t in &traced_offsets {
                acc += m[(ra + t, rb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Reduced density matrix over the kept subsystems.
pub fn partial_trace<T: Scalar>(
    rho: &Density<T>,
    dims: &[usize],
    keep: &[usize],
) -> Result<Density<T>> {
    Ok(Density::trusted(partial_trace_matrix(
        rho.matrix(),
        dims,
        keep,
    )?))
}

/// Reduced state of one site in a register of `num_sites` subsystems of equal
/// local dimension.
pub fn single_site_marginal<T: Scalar>(
    rho: &Density<T>,
    local_dim: usize,
    num_sites: usize,
    site: usize,
) -> Result<Density<T>> {
    if site >= num_sites {
        return Err(Error::IndexOutOfRange(format!(
            "site {site} out of range for {num_sites} sites"
        )));
    }
    partial_trace(rho, &vec![local_dim; num_sites], &[site])
}
