//! Hermitian eigendecomposition via cyclic Jacobi rotations.
//!
//! The toolkit only ever diagonalizes small Hermitian operators (observables
//! and their tensor squares), so a dependency-free Jacobi sweep is plenty:
//! it converges quadratically and keeps the eigenvector matrix explicitly
//! unitary by construction.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{czero, C, Scalar};

/// Eigendecomposition of a Hermitian matrix: `A = V diag(values) V^dagger`.
///
/// Eigenvalues are sorted in descending order; column `k` of `vectors` is the
/// eigenvector for `values[k]`.
#[derive(Clone, Debug)]
pub struct Eig<T: Scalar> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Scalar> Eig<T> {
    /// Rebuild the operator from its spectral data.
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.values.len();
        let d = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                C::new(self.values[i], T::zero())
            } else {
                czero()
            }
        });
        &(&self.vectors * &d) * &self.vectors.dagger()
    }
}

/// Diagonalize a Hermitian matrix.
///
/// Rejects inputs whose Hermiticity deviation exceeds a small multiple of the
/// matrix scale, then runs cyclic Jacobi sweeps on the symmetrized copy until
/// the off-diagonal mass is at working precision.
pub fn eig_hermitian<T: Scalar>(m: &Matrix<T>) -> Result<Eig<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let herm_dev = m.hermiticity_deviation();
    if herm_dev > T::from_f64(crate::TOL_STRUCT) {
        return Err(Error::NotHermitian(herm_dev.as_f64()));
    }

    let n = m.dim();
    // Symmetrize so that rounding noise in the input cannot bias the sweep.
    let mut a = Matrix::from_fn(n, n, |i, j| {
        (m[(i, j)] + m[(j, i)].conj()) * C::new(T::from_f64(0.5), T::zero())
    });
    let mut v = Matrix::identity(n);

    let eps = T::epsilon() * T::from_f64(100.0);
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        if off_diagonal_mass(&a) <= eps * frobenius(&a).max(T::one()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = a[(p, q)];
                let r = z.norm();
                if r <= T::from_f64(1e-200) {
                    continue;
                }
                // Phase that makes the (p, q) entry real, then a real Jacobi
                // rotation on the (p, q) plane.
                let phase = z / C::new(r, T::zero());
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (r + r);
                let t = {
                    let root = (T::one() + tau * tau).sqrt();
                    if tau >= T::zero() {
                        T::one() / (tau + root)
                    } else {
                        T::one() / (tau - root)
                    }
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;

                // Column rotation on the right: R[p,p] = c, R[p,q] = s,
                // R[q,p] = -s * conj(phase), R[q,q] = c * conj(phase).
                let cc = C::new(c, T::zero());
                let ss = C::new(s, T::zero());
                let w = phase.conj();
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * cc - aiq * ss * w;
                    a[(i, q)] = aip * ss + aiq * cc * w;
                }
                // Matching row rotation on the left by R^dagger.
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * cc - aqj * ss * phase;
                    a[(q, j)] = apj * ss + aqj * cc * phase;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * cc - viq * ss * w;
                    v[(i, q)] = vip * ss + viq * cc * w;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).expect("finite eigenvalues"));
    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Eig { values, vectors })
}

/// Just the eigenvalues, descending.
pub fn eigenvalues_hermitian<T: Scalar>(m: &Matrix<T>) -> Result<Vec<T>> {
    Ok(eig_hermitian(m)?.values)
}

fn off_diagonal_mass<T: Scalar>(a: &Matrix<T>) -> T {
    let n = a.dim();
    let mut sum = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn frobenius<T: Scalar>(a: &Matrix<T>) -> T {
    a.data().iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}
