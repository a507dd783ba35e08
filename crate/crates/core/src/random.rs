//! Deterministic random ensembles for verification trials.
//!
//! Sampling is built directly on a counter-based stream cipher generator so
//! that a seed pins the exact byte stream across platforms and dependency
//! updates. Gaussian variates come from a Box-Muller transform over that
//! stream; higher-level draws (states, gates) are composed from those, so
//! every ensemble is reproducible from a single `u64` seed.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::density::{Density, Unitary};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{C, Scalar};

/// Seed used when neither a flag nor the environment provides one.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Deterministic sampler for states and gates.
pub struct StateSampler {
    rng: ChaCha8Rng,
    cached_normal: Option<f64>,
}

impl StateSampler {
    pub fn new(seed: u64) -> Self {
        StateSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            cached_normal: None,
        }
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw via Box-Muller; pairs are cached.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        // Offset keeps u1 strictly positive so the logarithm is finite.
        let u1 = ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.cached_normal = Some(r * angle.sin());
        r * angle.cos()
    }

    /// Complex matrix with independent standard-normal real and imaginary parts.
    pub fn ginibre<T: Scalar>(&mut self, rows: usize, cols: usize) -> Matrix<T> {
        Matrix::from_fn(rows, cols, |_, _| {
            C::new(
                T::from_f64(self.standard_normal()),
                T::from_f64(self.standard_normal()),
            )
        })
    }

    /// Full-rank random density matrix G G^dagger / Tr(G G^dagger).
    pub fn random_density<T: Scalar>(&mut self, n: usize) -> Density<T> {
        let g: Matrix<T> = self.ginibre(n, n);
        let gram = &g * &g.dagger();
        let trace = gram.trace().re;
        let normalized = gram.scale(C::new(T::one() / trace, T::zero()));
        Density::new(normalized).expect("Gram construction yields a valid state")
    }

    /// Random pure state as a density matrix.
    pub fn random_pure<T: Scalar>(&mut self, n: usize) -> Density<T> {
        let ket: Matrix<T> = self.ginibre(n, 1);
        Density::from_ket(&ket).expect("Gaussian ket is nonzero almost surely")
    }

    /// Haar-style random unitary from orthonormalized Gaussian columns.
    pub fn random_unitary<T: Scalar>(&mut self, n: usize) -> Result<Unitary<T>> {
        let g: Matrix<T> = self.ginibre(n, n);
        let q = orthonormalize(&g)?;
        Unitary::new(q)
    }

    /// Random real diagonal observable with entries uniform in [-1, 1).
    pub fn random_diagonal_observable<T: Scalar>(&mut self, n: usize) -> Matrix<T> {
        let entries: Vec<f64> = (0..n).map(|_| 2.0 * self.uniform() - 1.0).collect();
        Matrix::diagonal_real(&entries)
    }
}

/// Modified Gram-Schmidt with a second pass for numerical orthogonality.
fn orthonormalize<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let n = m.dim();
    let mut cols: Vec<Vec<C<T>>> = (0..n)
        .map(|j| (0..n).map(|i| m[(i, j)]).collect())
        .collect();
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let mut overlap = C::new(T::zero(), T::zero());
                for i in 0..n {
                    overlap += cols[k][i].conj() * cols[j][i];
                }
                for i in 0..n {
                    let corr = cols[k][i] * overlap;
                    cols[j][i] -= corr;
                }
            }
        }
        let norm: T = cols[j].iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm < T::from_f64(1e-12) {
            return Err(Error::InvalidArgument(
                "rank-deficient matrix in orthonormalization".into(),
            ));
        }
        let inv = C::new(T::one() / norm, T::zero());
        for z in cols[j].iter_mut() {
            *z = *z * inv;
        }
    }
    Ok(Matrix::from_fn(n, n, |i, j| cols[j][i]))
}
