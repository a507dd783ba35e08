//! Deciding whether a cloning operation stays classical.
//!
//! A unitary acting on basis states is classical when it is monomial: each
//! column carries exactly one nonzero entry, so basis states map to basis
//! states (up to phase) and no superpositions are created. The module also
//! extracts the reduced channel seen by either output of a cloner, as a
//! Kraus set, so that its action can be compared against partial traces and
//! its fixed-point space counted through the transfer matrix.

use serde::{Deserialize, Serialize};

use crate::cloning::CloningUnitary;
use crate::density::{Density, Subsystem, Unitary};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Scalar, C};
use crate::TOL_VERIFY;

/// Entry threshold below which a matrix element counts as zero for the
/// monomial column test.
pub const MONOMIAL_TOL: f64 = 1e-10;

/// Completeness tolerance for extracted Kraus sets.
pub const KRAUS_COMPLETENESS_TOL: f64 = 1e-9;

/// Numerical rank threshold for the fixed-point computation.
pub const FIXED_POINT_RANK_TOL: f64 = 1e-8;

/// Result of the monomial-column classification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalityVerdict {
    /// True when every column has exactly one significant entry.
    pub is_classical: bool,
    /// First column holding two or more significant entries, if any.
    pub witness: Option<usize>,
    /// Which basis the test was performed in.
    pub pointer_basis_note: String,
}

/// Classify a unitary as classical (monomial: permutation times phases) or
/// genuinely quantum (some column spreads over several basis states).
pub fn classify_operation<T: Scalar>(u: &Unitary<T>) -> ClassicalityVerdict {
    let n = u.dim();
    let tol = T::from_f64(MONOMIAL_TOL);
    let mut witness = None;
    for j in 0..n {
        let mut significant = 0usize;
        for i in 0..n {
            if u.matrix()[(i, j)].norm() > tol {
                significant += 1;
            }
        }
        if significant != 1 {
            witness = Some(j);
            break;
        }
    }
    ClassicalityVerdict {
        is_classical: witness.is_none(),
        witness,
        pointer_basis_note: "computational pointer basis".into(),
    }
}

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausSet<T: Scalar> {
    operators: Vec<Matrix<T>>,
    input_dim: usize,
}

impl<T: Scalar> KrausSet<T> {
    /// Validate shapes and the completeness relation sum K^dag K = 1.
    pub fn new(operators: Vec<Matrix<T>>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidArgument(
                "a channel needs at least one Kraus operator".into(),
            ));
        };
        if !first.is_square() {
            return Err(Error::DimensionMismatch(
                "Kraus operators must be square".into(),
            ));
        }
        let n = first.dim();
        let mut sum = Matrix::<T>::zeros(n, n);
        for k in &operators {
            if !k.is_square() || k.dim() != n {
                return Err(Error::DimensionMismatch(
                    "all Kraus operators must share one square shape".into(),
                ));
            }
            sum = &sum + &(&k.dagger() * k);
        }
        let dev = sum.max_abs_diff(&Matrix::identity(n)).as_f64();
        if dev > KRAUS_COMPLETENESS_TOL {
            return Err(Error::ConventionFailure(format!(
                "Kraus completeness violated by {dev:.3e}"
            )));
        }
        Ok(KrausSet {
            operators,
            input_dim: n,
        })
    }

    pub fn operators(&self) -> &[Matrix<T>] {
        &self.operators
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Number of operators that are not numerically zero.
    pub fn count_nonzero(&self) -> usize {
        let tol = T::from_f64(MONOMIAL_TOL);
        self.operators
            .iter()
            .filter(|k| k.max_abs() > tol)
            .count()
    }

    /// Apply the channel: rho maps to sum K rho K^dag.
    pub fn apply(&self, rho: &Density<T>) -> Result<Density<T>> {
        if rho.dim() != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} does not match channel dimension {}",
                rho.dim(),
                self.input_dim
            )));
        }
        let mut out = Matrix::<T>::zeros(self.input_dim, self.input_dim);
        for k in &self.operators {
            out = &out + &(&(k * rho.matrix()) * &k.dagger());
        }
        Density::new(out)
    }

    /// Transfer matrix on row-major vectorized states: sum K (x) conj(K),
    /// so that vec(K rho K^dag) = (K (x) conj(K)) vec(rho).
    pub fn transfer_matrix(&self) -> Matrix<T> {
        let n2 = self.input_dim * self.input_dim;
        let mut t = Matrix::<T>::zeros(n2, n2);
        for k in &self.operators {
            let term = k
                .tensor(&k.conj())
                .expect("dimension already bounded by construction");
            t = &t + &term;
        }
        t
    }

    /// Dimension of the fixed-point space: the kernel dimension of T - 1
    /// where T is the transfer matrix.
    pub fn fixed_point_dimension(&self) -> usize {
        let n2 = self.input_dim * self.input_dim;
        let shifted = &self.transfer_matrix() - &Matrix::identity(n2);
        n2 - matrix_rank(&shifted, FIXED_POINT_RANK_TOL)
    }
}

/// Numerical rank by Gaussian elimination with partial pivoting.
fn matrix_rank<T: Scalar>(m: &Matrix<T>, tol: f64) -> usize {
    let rows = m.rows();
    let cols = m.cols();
    let mut a: Vec<Vec<C<T>>> = (0..rows)
        .map(|i| (0..cols).map(|j| m[(i, j)]).collect())
        .collect();
    let threshold = T::from_f64(tol);
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..cols {
        let mut pivot = row;
        let mut best = T::zero();
        for r in row..rows {
            let mag = a[r][col].norm();
            if mag > best {
                best = mag;
                pivot = r;
            }
        }
        if best <= threshold {
            continue;
        }
        a.swap(row, pivot);
        let inv = cone_div(a[row][col]);
        for c in col..cols {
            a[row][c] = a[row][c] * inv;
        }
        for r in 0..rows {
            if r != row {
                let factor = a[r][col];
                if factor.norm() > T::zero() {
                    for c in col..cols {
                        let sub = factor * a[row][c];
                        a[r][c] = a[r][c] - sub;
                    }
                }
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

fn cone_div<T: Scalar>(z: C<T>) -> C<T> {
    let d = z.norm_sqr();
    C::new(z.re / d, -z.im / d)
}

/// Extract the channel seen by one output of a cloner: feed (rho (x) blank)
/// through the effective unitary and trace out the other output. The Kraus
/// operators are the blank-column blocks of the unitary indexed by the
/// discarded output's basis.
pub fn extract_reduced_channel<T: Scalar>(
    u: &CloningUnitary<T>,
    keep: Subsystem,
) -> Result<KrausSet<T>> {
    let n = u.local_dim();
    let eff = u.effective_unitary()?;
    if eff.dim() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "register dimension {} is not the square of the individual dimension {n}",
            eff.dim()
        )));
    }
    let um = eff.matrix();
    let mut ops = Vec::with_capacity(n);
    for j in 0..n {
        let k = Matrix::from_fn(n, n, |a, b| match keep {
            Subsystem::First => um[(a * n + j, b * n)],
            Subsystem::Second => um[(j * n + a, b * n)],
        });
        ops.push(k);
    }
    KrausSet::new(ops)
}

/// The fully dephasing channel in dimension n: Kraus operators |j><j|.
pub fn dephasing_channel<T: Scalar>(n: usize) -> Result<KrausSet<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let ops = (0..n).map(|j| Matrix::basis_projector(n, j)).collect();
    KrausSet::new(ops)
}

/// Largest deviation between the extracted channel and the matching partial
/// trace of the full cloner output, over random inputs.
pub fn channel_against_partial_trace<T: Scalar>(
    u: &CloningUnitary<T>,
    keep: Subsystem,
    seed: u64,
    trials: usize,
) -> Result<f64> {
    use crate::density::partial_trace;
    use crate::random::StateSampler;

    let n = u.local_dim();
    let channel = extract_reduced_channel(u, keep)?;
    let mut sampler = StateSampler::new(seed);
    let mut max_dev = 0.0f64;
    for _ in 0..trials {
        let rho = sampler.random_density::<T>(n);
        let via_channel = channel.apply(&rho)?;
        let out = u.clone_state(&rho)?;
        let site = match keep {
            Subsystem::First => 0usize,
            Subsystem::Second => 1usize,
        };
        let via_trace = partial_trace(&out, &[n, n], &[site])?;
        max_dev = max_dev.max(
            via_channel
                .matrix()
                .max_abs_diff(via_trace.matrix())
                .as_f64(),
        );
    }
    Ok(max_dev)
}

/// Check that a channel sends diagonal states to diagonal states.
pub fn preserves_diagonals<T: Scalar>(channel: &KrausSet<T>, seed: u64, trials: usize) -> Result<bool> {
    use crate::random::StateSampler;
    let n = channel.input_dim();
    let mut sampler = StateSampler::new(seed);
    let tol = T::from_f64(TOL_VERIFY);
    for _ in 0..trials {
        let mut weights: Vec<f64> = (0..n).map(|_| sampler.uniform() + 0.05).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let rho = Density::new(Matrix::diagonal_real(&weights))?;
        let out = channel.apply(&rho)?;
        for i in 0..n {
            for j in 0..n {
                if i != j && out.matrix()[(i, j)].norm() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
