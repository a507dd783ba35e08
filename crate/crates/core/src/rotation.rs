//! Working-basis rotations of a cloning setup.
//!
//! The copy basis of a cloner is not privileged: conjugating the machine and
//! its observables by any unitary R of the individual space gives a cloner
//! for the rotated basis. The input and both outputs transform as R^dag . R,
//! the machine becomes (R^dag (x) R^dag) U (R (x) 1) (the blank arrives in
//! the fixed pointer basis and is not rotated), and the copied/transmitted
//! observables become R^dag theta R and R^dag tau R. Both defining
//! identities then hold verbatim with the rotated operators.

use serde::{Deserialize, Serialize};

use crate::cloning::CloningUnitary;
use crate::density::{partial_trace, Unitary};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::observables::ObservablePair;
use crate::random::StateSampler;
use crate::scalar::{creal, Scalar};

/// A cloner together with the conjugated forms of its observable pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatedCloningSetup<T: Scalar> {
    pub cloner: CloningUnitary<T>,
    pub theta: Matrix<T>,
    pub tau: Matrix<T>,
}

/// Conjugate a cloning setup into the working basis given by `r`.
pub fn rotate_setup<T: Scalar>(
    base: &CloningUnitary<T>,
    pair: &ObservablePair<T>,
    r: &Unitary<T>,
) -> Result<RotatedCloningSetup<T>> {
    let n = base.local_dim();
    if pair.dim() != n || r.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "individual dimension {n} does not match observables ({}) or rotation ({})",
            pair.dim(),
            r.dim()
        )));
    }
    let cloner = base.with_rotation(r.clone())?;
    let rd = r.matrix().dagger();
    let theta = &(&rd * pair.theta()) * r.matrix();
    let tau = &(&rd * pair.tau()) * r.matrix();
    Ok(RotatedCloningSetup { cloner, theta, tau })
}

impl<T: Scalar> RotatedCloningSetup<T> {
    /// Largest deviation of the copying identity over random inputs: both
    /// reduced outputs must report the rotated diagonal observable with the
    /// input's expectation value.
    pub fn cloning_deviation(&self, seed: u64, trials: usize) -> Result<f64> {
        let n = self.cloner.local_dim();
        let mut sampler = StateSampler::new(seed);
        let mut max_dev = 0.0f64;
        for _ in 0..trials {
            let rho = sampler.random_density::<T>(n);
            let reference = rho.expectation(&self.theta)?.re.as_f64();
            let out = self.cloner.clone_state(&rho)?;
            for site in 0..2 {
                let reduced = partial_trace(&out, &[n, n], &[site])?;
                let got = reduced.expectation(&self.theta)?.re.as_f64();
                max_dev = max_dev.max((got - reference).abs());
            }
        }
        Ok(max_dev)
    }

    /// Largest deviation of the transmission identity over random inputs:
    /// the global expectation of tau (x) tau in the output equals the input
    /// expectation of tau (all in the rotated basis).
    pub fn transmission_deviation(&self, seed: u64, trials: usize) -> Result<f64> {
        let n = self.cloner.local_dim();
        let pair = self.tau.tensor(&self.tau)?;
        let mut sampler = StateSampler::new(seed);
        let mut max_dev = 0.0f64;
        for _ in 0..trials {
            let rho = sampler.random_density::<T>(n);
            let lhs_rho = self.cloner.clone_state(&rho)?;
            let lhs = lhs_rho.expectation(&pair)?.re.as_f64();
            let rhs = rho.expectation(&self.tau)?.re.as_f64();
            max_dev = max_dev.max((lhs - rhs).abs());
        }
        Ok(max_dev)
    }
}

/// Named rotations for the command line and the test suites: the identity,
/// the qubit Hadamard, or a seeded random unitary.
pub fn preset_rotation<T: Scalar>(name: &str, n: usize, seed: u64) -> Result<Unitary<T>> {
    match name {
        "identity" => Ok(Unitary::identity(n)),
        "hadamard" => {
            if n != 2 {
                return Err(Error::InvalidArgument(format!(
                    "the hadamard rotation is two-dimensional, requested dimension {n}"
                )));
            }
            Unitary::new(Matrix::hadamard())
        }
        "random" => StateSampler::new(seed).random_unitary(n),
        other => Err(Error::InvalidArgument(format!(
            "unknown rotation '{other}' (expected identity, hadamard, or random)"
        ))),
    }
}

/// The two-qubit cloner that copies in the Hadamard basis: the basis-change
/// conjugate of the two-level machine. Its matrix has rows
/// (1,1,0,0), (0,0,1,-1), (0,0,1,1), (1,-1,0,0) over sqrt(2).
pub fn hadamard_basis_cloner<T: Scalar>() -> Result<Unitary<T>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = Matrix::from_fn(4, 4, |i, j| {
        let value = match (i, j) {
            (0, 0) | (0, 1) | (2, 2) | (2, 3) | (1, 2) | (3, 0) => s,
            (1, 3) | (3, 1) => -s,
            _ => 0.0,
        };
        creal(value)
    });
    Unitary::new(m)
}
