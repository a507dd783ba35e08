//! Observables transmitted by basis-copying cloners.
//!
//! Two families matter here. Diagonal observables are copied onto every
//! individual. Antidiagonal 0/1 observables (exchange-type patterns) are
//! transmitted globally: the expectation of tau (x) tau in the two-individual
//! output equals the expectation of tau in the input. This module builds
//! those observables, searches for the transmitted patterns of a given
//! cloner, checks the characteristic spectrum of the full exchange pattern,
//! and provides the integer degeneracy bookkeeping plus the block-sorting
//! flip permutation used in the spectral argument.

use serde::{Deserialize, Serialize};

use crate::cloning::CloningUnitary;
use crate::density::Unitary;
use crate::eig::eigenvalues_hermitian;
use crate::error::{Error, Result};
use crate::matrix::{Matrix, MAX_DIM};
use crate::random::{StateSampler, DEFAULT_SEED};
use crate::scalar::{cone, Scalar};
use crate::{TOL_STRUCT, TOL_VERIFY};

/// Number of random states used by the transmitted-pattern search.
const SEARCH_ENSEMBLE: usize = 50;

/// Largest off-lattice residue tolerated when rounding exchange spectra.
pub const SPECTRUM_ROUNDING_TOL: f64 = 1e-8;

/// A matched pair of observables for one cloner: a diagonal observable
/// copied to each individual and an antidiagonal 0/1 pattern transmitted
/// globally.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservablePair<T: Scalar> {
    theta: Matrix<T>,
    tau: Matrix<T>,
    dim: usize,
}

impl<T: Scalar> ObservablePair<T> {
    pub fn new(theta: Matrix<T>, tau: Matrix<T>) -> Result<Self> {
        if !theta.is_square() || !tau.is_square() || theta.dim() != tau.dim() {
            return Err(Error::DimensionMismatch(format!(
                "observable pair needs equal square shapes, got {}x{} and {}x{}",
                theta.rows(),
                theta.cols(),
                tau.rows(),
                tau.cols()
            )));
        }
        let n = theta.dim();
        let tol = T::from_f64(TOL_STRUCT);
        for i in 0..n {
            for j in 0..n {
                let t = theta[(i, j)];
                if i == j {
                    if t.im.abs() > tol {
                        return Err(Error::NotHermitian(t.im.abs().as_f64()));
                    }
                } else if (t.re.abs() > tol) || (t.im.abs() > tol) {
                    return Err(Error::InvalidArgument(
                        "copied observable must be diagonal".into(),
                    ));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let e = tau[(i, j)];
                if j == n - 1 - i {
                    let re = e.re.as_f64();
                    if e.im.abs() > tol || ((re - 0.0).abs() > TOL_STRUCT && (re - 1.0).abs() > TOL_STRUCT)
                    {
                        return Err(Error::InvalidArgument(
                            "exchange pattern entries must be 0 or 1".into(),
                        ));
                    }
                } else if e.re.abs() > tol || e.im.abs() > tol {
                    return Err(Error::InvalidArgument(
                        "exchange pattern may only populate the antidiagonal".into(),
                    ));
                }
            }
        }
        // Hermiticity of the pattern: entries (i, n-1-i) and (n-1-i, i) match.
        for i in 0..n {
            let a = tau[(i, n - 1 - i)].re.as_f64();
            let b = tau[(n - 1 - i, i)].re.as_f64();
            if (a - b).abs() > TOL_STRUCT {
                return Err(Error::NotHermitian((a - b).abs()));
            }
        }
        Ok(ObservablePair { theta, tau, dim: n })
    }

    pub fn theta(&self) -> &Matrix<T> {
        &self.theta
    }

    pub fn tau(&self) -> &Matrix<T> {
        &self.tau
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// The all-ones antidiagonal exchange observable in dimension n.
pub fn exchange_tau<T: Scalar>(n: usize) -> Matrix<T> {
    Matrix::from_fn(n, n, |i, j| {
        if j == n - 1 - i {
            cone()
        } else {
            crate::scalar::czero()
        }
    })
}

/// Antidiagonal 0/1 matrix from a pattern of bits read top row to bottom row
/// (entry (i, n-1-i) is bits[i]).
pub fn antidiagonal_pattern<T: Scalar>(bits: &[bool]) -> Matrix<T> {
    let n = bits.len();
    Matrix::from_fn(n, n, |i, j| {
        if j == n - 1 - i && bits[i] {
            cone()
        } else {
            crate::scalar::czero()
        }
    })
}

fn pattern_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// One transmitted pattern found by [`search_tau`]: the bit string of the
/// antidiagonal (top row first) and the observable in the cloner's working
/// basis (conjugated by the basis rotation when one is attached).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauCandidate<T: Scalar> {
    pub pattern: String,
    pub tau: Matrix<T>,
}

/// Search all nonzero palindromic antidiagonal 0/1 patterns of size n for
/// those transmitted by the cloner: for a fixed deterministic ensemble of
/// random states, the global expectation of tau (x) tau in the cloner output
/// must match the input expectation of tau. The trivial all-zero pattern is
/// excluded. Results are sorted by pattern string.
pub fn search_tau<T: Scalar>(u: &CloningUnitary<T>, n: usize) -> Result<Vec<TauCandidate<T>>> {
    if n != u.local_dim() {
        return Err(Error::DimensionMismatch(format!(
            "search dimension {n} does not match the cloner's individual dimension {}",
            u.local_dim()
        )));
    }
    let mut sampler = StateSampler::new(DEFAULT_SEED);
    let states: Vec<_> = (0..SEARCH_ENSEMBLE)
        .map(|_| sampler.random_density::<T>(n))
        .collect();
    let half = n.div_ceil(2);
    let tol = T::from_f64(TOL_VERIFY);

    let mut found = Vec::new();
    for mask in 1u32..(1u32 << half) {
        let mut bits = vec![false; n];
        for i in 0..half {
            let b = (mask >> i) & 1 == 1;
            bits[i] = b;
            bits[n - 1 - i] = b;
        }
        let base = antidiagonal_pattern::<T>(&bits);
        let tau = match &u.basis_rotation {
            None => base,
            Some(r) => &(&r.matrix().dagger() * &base) * r.matrix(),
        };
        let pair = tau.tensor(&tau)?;
        let mut transmitted = true;
        for rho in &states {
            let out = u.clone_state(rho)?;
            let lhs = out.expectation(&pair)?.re;
            let rhs = rho.expectation(&tau)?.re;
            if (lhs - rhs).abs() > tol {
                transmitted = false;
                break;
            }
        }
        if transmitted {
            found.push(TauCandidate {
                pattern: pattern_string(&bits),
                tau,
            });
        }
    }
    found.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    Ok(found)
}

/// Multiplicities of the rounded spectrum of an exchange-type observable,
/// and whether it shows the even-split degeneracy (+1 and -1 each d/2 times,
/// no zero eigenvalue).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauSpectrumReport {
    pub dim: usize,
    pub plus_one: usize,
    pub zero: usize,
    pub minus_one: usize,
    pub max_rounding_error: f64,
    pub satisfies_lemma: bool,
}

/// Diagonalize a Hermitian exchange-type observable and round its spectrum
/// onto {-1, 0, +1}. The report flags whether the spectrum is the even split
/// with no kernel, which is what makes the global pattern a faithful carrier.
pub fn lemma_spectrum_check<T: Scalar>(tau: &Matrix<T>) -> Result<TauSpectrumReport> {
    let values = eigenvalues_hermitian(tau)?;
    let d = tau.dim();
    let mut plus = 0usize;
    let mut zero = 0usize;
    let mut minus = 0usize;
    let mut max_err = 0.0f64;
    for v in &values {
        let x = v.as_f64();
        let (nearest, err) = [(-1.0, (x + 1.0).abs()), (0.0, x.abs()), (1.0, (x - 1.0).abs())]
            .into_iter()
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite eigenvalues"))
            .expect("nonempty lattice");
        max_err = max_err.max(err);
        if nearest < -0.5 {
            minus += 1;
        } else if nearest > 0.5 {
            plus += 1;
        } else {
            zero += 1;
        }
    }
    let rounded_ok = max_err <= SPECTRUM_ROUNDING_TOL;
    let satisfies =
        rounded_ok && d % 2 == 0 && zero == 0 && plus == d / 2 && minus == d / 2;
    Ok(TauSpectrumReport {
        dim: d,
        plus_one: plus,
        zero,
        minus_one: minus,
        max_rounding_error: max_err,
        satisfies_lemma: satisfies,
    })
}

/// Exact integer check of the three degeneracy equations that the
/// multiplicities (m_plus, m_zero, m_minus) of a transmitted exchange
/// spectrum must satisfy in dimension d:
///   d*m_plus  = m_plus^2 + m_minus^2
///   d*m_zero  = m_zero*(2d - m_zero)
///   d*m_minus = 2*m_plus*m_minus
pub fn verify_degeneracy_equations(
    m_plus: usize,
    m_zero: usize,
    m_minus: usize,
    d: usize,
) -> Result<bool> {
    if m_plus + m_zero + m_minus != d {
        return Err(Error::InvalidArgument(format!(
            "multiplicities {m_plus}+{m_zero}+{m_minus} do not sum to the dimension {d}"
        )));
    }
    let (p, z, m, d) = (m_plus as u64, m_zero as u64, m_minus as u64, d as u64);
    let eq1 = d * p == p * p + m * m;
    let eq2 = d * z == z * (2 * d - z);
    let eq3 = d * m == 2 * p * m;
    Ok(eq1 && eq2 && eq3)
}

/// Exhaustive scan of all multiplicity triples summing to d that satisfy the
/// degeneracy equations, in lexicographic (m_plus, m_zero) order.
pub fn scan_degeneracy_solutions(d: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for p in 0..=d {
        for z in 0..=(d - p) {
            let m = d - p - z;
            if verify_degeneracy_equations(p, z, m, d).expect("sum holds by construction") {
                out.push((p, z, m));
            }
        }
    }
    out
}

/// Permutation that sorts the product-sign basis of a two-factor register
/// into sign blocks: basis vectors where the two half-space signs multiply
/// to +1 are moved (in increasing index order) to the first half, the rest
/// to the second half. Conjugating the product sign observable by this flip
/// yields the plain half-space sign observable on the doubled register.
pub fn build_flip_operator<T: Scalar>(d: usize) -> Result<Unitary<T>> {
    if d < 2 || d % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "flip operator needs an even dimension of at least 2, got {d}"
        )));
    }
    if d * d > MAX_DIM {
        return Err(Error::CapacityExceeded(format!(
            "flip operator acts on dimension {}, beyond the {MAX_DIM} cap",
            d * d
        )));
    }
    let sign = |k: usize| if k < d / 2 { 1i32 } else { -1i32 };
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for c in 0..d * d {
        let (a, b) = (c / d, c % d);
        if sign(a) * sign(b) > 0 {
            positive.push(c);
        } else {
            negative.push(c);
        }
    }
    let mut f = Matrix::zeros(d * d, d * d);
    for (row, &col) in positive.iter().chain(negative.iter()).enumerate() {
        f[(row, col)] = cone();
    }
    Unitary::new(f)
}

/// The half-space sign observable diag(+1 x n/2, -1 x n/2).
pub fn half_space_sign<T: Scalar>(n: usize) -> Result<Matrix<T>> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "sign observable needs an even dimension, got {n}"
        )));
    }
    let values: Vec<f64> = (0..n).map(|k| if k < n / 2 { 1.0 } else { -1.0 }).collect();
    Ok(Matrix::diagonal_real(&values))
}

/// Check that a cloner transmits a given global pattern over an ensemble of
/// random states; returns the largest deviation observed.
pub fn transmission_deviation<T: Scalar>(
    u: &CloningUnitary<T>,
    tau: &Matrix<T>,
    seed: u64,
    trials: usize,
) -> Result<f64> {
    let n = u.local_dim();
    if tau.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "pattern dimension {} does not match individuals of dimension {n}",
            tau.dim()
        )));
    }
    let mut sampler = StateSampler::new(seed);
    let pair = tau.tensor(tau)?;
    let mut max_dev = 0.0f64;
    for _ in 0..trials {
        let rho = sampler.random_density::<T>(n);
        let out = u.clone_state(&rho)?;
        let lhs = out.expectation(&pair)?.re.as_f64();
        let rhs = rho.expectation(tau)?.re.as_f64();
        max_dev = max_dev.max((lhs - rhs).abs());
    }
    Ok(max_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloning::build_un;

    #[test]
    fn exchange_pattern_is_all_ones_antidiagonal() {
        let t = exchange_tau::<f64>(4);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if j == 3 - i { 1.0 } else { 0.0 };
                assert_eq!(t[(i, j)].re, expected);
                assert_eq!(t[(i, j)].im, 0.0);
            }
        }
    }

    #[test]
    fn pair_validation_rules() {
        let theta = Matrix::<f64>::diagonal_real(&[0.2, -0.4]);
        let tau = exchange_tau::<f64>(2);
        assert!(ObservablePair::new(theta.clone(), tau.clone()).is_ok());
        assert!(ObservablePair::new(Matrix::pauli_x(), tau).is_err());
        assert!(ObservablePair::new(theta.clone(), Matrix::pauli_z()).is_err());
        let half = exchange_tau::<f64>(2).scale(crate::scalar::creal(0.5));
        assert!(ObservablePair::new(theta, half).is_err());
    }

    #[test]
    fn even_exchange_spectrum_splits_evenly() {
        for d in [2usize, 4, 6, 8] {
            let report = lemma_spectrum_check(&exchange_tau::<f64>(d)).unwrap();
            assert_eq!(report.plus_one, d / 2);
            assert_eq!(report.minus_one, d / 2);
            assert_eq!(report.zero, 0);
            assert!(report.satisfies_lemma, "d={d}");
            assert!(report.max_rounding_error < 1e-10);
        }
    }

    #[test]
    fn odd_exchange_spectrum_is_rejected() {
        let report = lemma_spectrum_check(&exchange_tau::<f64>(5)).unwrap();
        assert_eq!(
            (report.plus_one, report.zero, report.minus_one),
            (3, 0, 2)
        );
        assert!(!report.satisfies_lemma);
    }

    #[test]
    fn interior_zero_patterns_are_rejected() {
        let report =
            lemma_spectrum_check(&antidiagonal_pattern::<f64>(&[true, false, false, true]))
                .unwrap();
        assert_eq!(
            (report.plus_one, report.zero, report.minus_one),
            (1, 2, 1)
        );
        assert!(!report.satisfies_lemma);
    }

    #[test]
    fn spectrum_check_rejects_non_hermitian_input() {
        let mut m = Matrix::<f64>::zeros(2, 2);
        m[(0, 1)] = crate::scalar::creal(1.0);
        assert!(matches!(
            lemma_spectrum_check(&m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn degeneracy_equations_exact_solutions() {
        for d in [2usize, 4, 6, 8] {
            let sols = scan_degeneracy_solutions(d);
            assert_eq!(sols, vec![(0, d, 0), (d / 2, 0, d / 2), (d, 0, 0)], "d={d}");
        }
    }

    #[test]
    fn degeneracy_equations_need_consistent_sum() {
        assert!(verify_degeneracy_equations(1, 1, 1, 4).is_err());
        assert!(verify_degeneracy_equations(2, 0, 2, 4).unwrap());
        assert!(!verify_degeneracy_equations(1, 2, 1, 4).unwrap());
    }

    #[test]
    fn transmitted_patterns_for_small_machines() {
        let u3 = build_un::<f64>(3).unwrap();
        let found = search_tau(&u3, 3).unwrap();
        let patterns: Vec<&str> = found.iter().map(|c| c.pattern.as_str()).collect();
        assert_eq!(patterns, vec!["010", "101", "111"]);

        let u4 = build_un::<f64>(4).unwrap();
        let found = search_tau(&u4, 4).unwrap();
        let patterns: Vec<&str> = found.iter().map(|c| c.pattern.as_str()).collect();
        assert_eq!(patterns, vec!["0110", "1001", "1111"]);
    }

    #[test]
    fn search_rejects_mismatched_dimension() {
        let u3 = build_un::<f64>(3).unwrap();
        assert!(search_tau(&u3, 4).is_err());
    }

    #[test]
    fn flip_sorts_product_signs() {
        for d in [2usize, 4] {
            let f = build_flip_operator::<f64>(d).unwrap();
            let s = half_space_sign::<f64>(d).unwrap();
            let product = s.tensor(&s).unwrap();
            let sorted = f.conjugate(&product).unwrap();
            let expected = half_space_sign::<f64>(d * d).unwrap();
            assert!(sorted.approx_eq(&expected, 1e-14), "d={d}");
        }
    }

    #[test]
    fn flip_rejects_odd_or_large_dimensions() {
        assert!(build_flip_operator::<f64>(3).is_err());
        assert!(build_flip_operator::<f64>(18).is_err());
    }

    #[test]
    fn full_exchange_is_transmitted() {
        for n in [2usize, 4] {
            let u = build_un::<f64>(n).unwrap();
            let dev = transmission_deviation(&u, &exchange_tau(n), 21, 20).unwrap();
            assert!(dev < 1e-12, "n={n}, dev={dev}");
        }
    }
}
