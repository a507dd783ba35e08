//! Construction of basis-copying cloning unitaries and the sequential
//! generation engine.
//!
//! The single-step cloner on an n-level system is the block-diagonal sum of
//! cyclic translations: block i applies the shift by i-1, so the machine maps
//! |k>|0> to |k>|k>. Composite cloners tensor two such machines factor-wise,
//! and the multi-qubit pairwise extension applies the two-level cloner between
//! qubit i and qubit i+m/2 of an m-qubit register. Generations double the
//! register by appending blank subsystems and applying all pairwise steps.

use serde::{Deserialize, Serialize};

use crate::density::{Density, Unitary};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, MAX_DIM};
use crate::scalar::{cone, Scalar};

/// How a cloning unitary was constructed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Recipe {
    /// Block-diagonal sum of the n cyclic translations; acts on n x n levels.
    Translation { n: usize },
    /// Factor-wise product of the k-level and l-level machines.
    Composite { k: usize, l: usize },
    /// Product of two-qubit steps on an m-qubit register; `pairs` lists the
    /// (control, target) qubit indices, 1-based.
    Pairwise { m: usize, pairs: Vec<(usize, usize)> },
}

/// A cloning unitary together with its construction recipe and an optional
/// working-basis rotation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloningUnitary<T: Scalar> {
    pub unitary: Unitary<T>,
    pub recipe: Recipe,
    pub basis_rotation: Option<Unitary<T>>,
}

impl<T: Scalar> CloningUnitary<T> {
    /// Dimension of one individual (the input system).
    pub fn local_dim(&self) -> usize {
        match &self.recipe {
            Recipe::Translation { n } => *n,
            Recipe::Composite { k, l } => k * l,
            Recipe::Pairwise { m, .. } => 1usize << (m / 2),
        }
    }

    /// Dimension of the full output register.
    pub fn output_dim(&self) -> usize {
        self.unitary.dim()
    }

    /// Attach a working-basis rotation of the individual space.
    pub fn with_rotation(&self, r: Unitary<T>) -> Result<CloningUnitary<T>> {
        if r.dim() != self.local_dim() {
            return Err(Error::DimensionMismatch(format!(
                "rotation has dimension {} but individuals have dimension {}",
                r.dim(),
                self.local_dim()
            )));
        }
        Ok(CloningUnitary {
            unitary: self.unitary.clone(),
            recipe: self.recipe.clone(),
            basis_rotation: Some(r),
        })
    }

    /// The operator actually applied to (input (x) blank): the bare unitary,
    /// or its basis-rotated form (R^dag (x) R^dag) U (R (x) 1). The blank
    /// factor is intentionally not rotated: the environment supplies it in
    /// the pointer basis regardless of the working basis of the input.
    pub fn effective_unitary(&self) -> Result<Unitary<T>> {
        match &self.basis_rotation {
            None => Ok(self.unitary.clone()),
            Some(r) => {
                let d = r.dim();
                if self.unitary.dim() != d * d {
                    return Err(Error::DimensionMismatch(format!(
                        "rotation dimension {d} does not square to cloner dimension {}",
                        self.unitary.dim()
                    )));
                }
                let rd = r.matrix().dagger();
                let left = rd.tensor(&rd)?;
                let right = r.matrix().tensor(&Matrix::identity(d))?;
                Unitary::new(&(&left * self.unitary.matrix()) * &right)
            }
        }
    }

    /// Apply the cloner: input (x) blank evolves under the effective unitary.
    pub fn clone_state(&self, rho: &Density<T>) -> Result<Density<T>> {
        let u = self.effective_unitary()?;
        let out_dim = u.dim();
        if out_dim % rho.dim() != 0 {
            return Err(Error::DimensionMismatch(format!(
                "input dimension {} does not divide register dimension {out_dim}",
                rho.dim()
            )));
        }
        let blank = blank_state(out_dim / rho.dim());
        u.apply_to_density(&rho.tensor(&blank)?)
    }
}

/// The blank state |0><0| in dimension n.
pub fn blank_state<T: Scalar>(n: usize) -> Density<T> {
    Density::basis_state(n, 0)
}

/// Cyclic shift by i-1 on n levels (1-based block index i).
pub fn translation_generator<T: Scalar>(n: usize, i: usize) -> Result<Unitary<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange(format!(
            "translation index {i} outside 1..={n}"
        )));
    }
    let mut m = Matrix::zeros(n, n);
    for k in 0..n {
        m[((k + i - 1) % n, k)] = cone();
    }
    Unitary::new(m)
}

/// Rank-one projector onto level i (1-based) in dimension n.
pub fn projector<T: Scalar>(n: usize, i: usize) -> Result<Matrix<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange(format!(
            "projector index {i} outside 1..={n}"
        )));
    }
    Ok(Matrix::basis_projector(n, i - 1))
}

/// The single-step n-level cloner: sum over i of projector(i) (x) shift(i),
/// i.e. the block-diagonal matrix of all cyclic translations.
pub fn build_un<T: Scalar>(n: usize) -> Result<CloningUnitary<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "cloner needs at least two levels, got {n}"
        )));
    }
    if n * n > MAX_DIM {
        return Err(Error::CapacityExceeded(format!(
            "cloner on {n} levels needs dimension {}, beyond the {MAX_DIM} cap",
            n * n
        )));
    }
    let mut m = Matrix::zeros(n * n, n * n);
    for i in 1..=n {
        let s = projector::<T>(n, i)?;
        let x = translation_generator::<T>(n, i)?;
        m = &m + &s.tensor(x.matrix())?;
    }
    Ok(CloningUnitary {
        unitary: Unitary::new(m)?,
        recipe: Recipe::Translation { n },
        basis_rotation: None,
    })
}

/// Composite cloner: both factors of a (k x l)-dimensional individual are
/// cloned by their own translation machines. Subsystem order of the output
/// register is (k1, l1, k2, l2) with (k, l) pairs forming the individuals.
pub fn build_composite<T: Scalar>(k: usize, l: usize) -> Result<CloningUnitary<T>> {
    if k < 2 || l < 2 {
        return Err(Error::InvalidArgument(format!(
            "composite factors must each have at least two levels, got ({k}, {l})"
        )));
    }
    let d = k * l;
    if d * d > MAX_DIM {
        return Err(Error::CapacityExceeded(format!(
            "composite cloner needs dimension {}, beyond the {MAX_DIM} cap",
            d * d
        )));
    }
    let mut m = Matrix::zeros(d * d, d * d);
    for i in 1..=k {
        for j in 1..=l {
            let ski = projector::<T>(k, i)?;
            let slj = projector::<T>(l, j)?;
            let xki = translation_generator::<T>(k, i)?;
            let xlj = translation_generator::<T>(l, j)?;
            let term = Matrix::tensor_all(&[&ski, &slj, xki.matrix(), xlj.matrix()])?;
            m = &m + &term;
        }
    }
    Ok(CloningUnitary {
        unitary: Unitary::new(m)?,
        recipe: Recipe::Composite { k, l },
        basis_rotation: None,
    })
}

/// Two-qubit cloning step between qubit i and qubit i+m/2 of an m-qubit
/// register, written as the sum of its two operator strings:
/// one projects qubit i onto |0> and leaves everything alone, the other
/// projects onto |1> and flips qubit i+m/2.
pub fn pairwise_extension<T: Scalar>(m: usize, i: usize) -> Result<Unitary<T>> {
    if m == 0 || m % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "pairwise extension needs an even register, got {m}"
        )));
    }
    if i == 0 || i > m / 2 {
        return Err(Error::IndexOutOfRange(format!(
            "pair index {i} outside 1..={}",
            m / 2
        )));
    }
    if 1usize << m > MAX_DIM {
        return Err(Error::CapacityExceeded(format!(
            "{m} qubits exceed the {MAX_DIM}-dimensional cap"
        )));
    }
    let x1: Matrix<T> = Matrix::identity(2);
    let x2: Matrix<T> = Matrix::pauli_x();
    let s1: Matrix<T> = Matrix::basis_projector(2, 0);
    let s2: Matrix<T> = Matrix::basis_projector(2, 1);

    let mut first: Vec<&Matrix<T>> = Vec::with_capacity(m);
    for _ in 0..(i - 1) {
        first.push(&x1);
    }
    first.push(&s1);
    for _ in 0..(m - i) {
        first.push(&x1);
    }

    let mut second: Vec<&Matrix<T>> = Vec::with_capacity(m);
    for _ in 0..(i - 1) {
        second.push(&x1);
    }
    second.push(&s2);
    for _ in 0..(m / 2 - 1) {
        second.push(&x1);
    }
    second.push(&x2);
    for _ in 0..(m / 2 - i) {
        second.push(&x1);
    }

    let sum = &Matrix::tensor_all(&first)? + &Matrix::tensor_all(&second)?;
    Unitary::new(sum)
}

/// General-dimension analogue of [`pairwise_extension`]: level j of site i
/// selects the shift by j-1 on site i+m/2. Reduces to the qubit form at n=2.
pub fn qudit_pairwise_extension<T: Scalar>(n: usize, m: usize, i: usize) -> Result<Unitary<T>> {
    if m == 0 || m % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "pairwise extension needs an even register, got {m}"
        )));
    }
    if i == 0 || i > m / 2 {
        return Err(Error::IndexOutOfRange(format!(
            "pair index {i} outside 1..={}",
            m / 2
        )));
    }
    let dim = n.checked_pow(m as u32).filter(|&d| d <= MAX_DIM);
    let Some(dim) = dim else {
        return Err(Error::CapacityExceeded(format!(
            "{m} sites of dimension {n} exceed the {MAX_DIM}-dimensional cap"
        )));
    };
    let eye: Matrix<T> = Matrix::identity(n);
    let mut sum = Matrix::zeros(dim, dim);
    for j in 1..=n {
        let s = projector::<T>(n, j)?;
        let x = translation_generator::<T>(n, j)?;
        let mut factors: Vec<&Matrix<T>> = vec![&eye; m];
        factors[i - 1] = &s;
        factors[i - 1 + m / 2] = x.matrix();
        sum = &sum + &Matrix::tensor_all(&factors)?;
    }
    Unitary::new(sum)
}

/// Product of all pairwise steps for one generation doubling on m sites of
/// local dimension n (the factors commute: their control/target supports are
/// disjoint).
pub fn generation_step<T: Scalar>(n: usize, m: usize) -> Result<Unitary<T>> {
    if m == 0 || m % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "generation step needs an even register, got {m}"
        )));
    }
    let mut acc: Option<Matrix<T>> = None;
    for i in 1..=m / 2 {
        let ext = qudit_pairwise_extension::<T>(n, m, i)?;
        acc = Some(match acc {
            None => ext.matrix().clone(),
            Some(a) => &a * ext.matrix(),
        });
    }
    Unitary::new(acc.expect("m/2 >= 1"))
}

/// The register state after g cloning generations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationState<T: Scalar> {
    pub generation: u32,
    pub local_dim: usize,
    pub state: Density<T>,
}

impl<T: Scalar> GenerationState<T> {
    /// Wrap an initial single-individual state as generation zero.
    pub fn initial(local_dim: usize, state: Density<T>) -> Result<Self> {
        if local_dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "local dimension must be at least 2, got {local_dim}"
            )));
        }
        if state.dim() != local_dim {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} does not match local dimension {local_dim}",
                state.dim()
            )));
        }
        Ok(GenerationState {
            generation: 0,
            local_dim,
            state,
        })
    }

    /// Number of individuals in this generation.
    pub fn num_individuals(&self) -> usize {
        1usize << self.generation
    }
}

/// One qubit generation doubling: append blanks, apply all pairwise steps.
pub fn next_generation<T: Scalar>(gs: &GenerationState<T>) -> Result<GenerationState<T>> {
    if gs.local_dim != 2 {
        return Err(Error::InvalidArgument(format!(
            "the sequential engine is qubit-only (local dimension 2), got {}",
            gs.local_dim
        )));
    }
    let sites = gs.num_individuals();
    let new_sites = 2 * sites;
    if new_sites > 8 {
        return Err(Error::CapacityExceeded(format!(
            "{new_sites} qubits exceed the 8-qubit register cap"
        )));
    }
    let blanks = blank_state::<T>(1usize << sites);
    let step = generation_step::<T>(2, new_sites)?;
    let state = step.apply_to_density(&gs.state.tensor(&blanks)?)?;
    Ok(GenerationState {
        generation: gs.generation + 1,
        local_dim: 2,
        state,
    })
}

/// Single-step qudit cloning (generation 0 to 1): one blank qudit and one
/// application of the n-level machine.
pub fn qudit_next_generation<T: Scalar>(
    gs: &GenerationState<T>,
    n: usize,
) -> Result<GenerationState<T>> {
    if gs.local_dim != n {
        return Err(Error::DimensionMismatch(format!(
            "state has local dimension {}, expected {n}",
            gs.local_dim
        )));
    }
    if gs.generation != 0 {
        return Err(Error::InvalidArgument(
            "the qudit engine only supports the first doubling (generation 0 to 1)".into(),
        ));
    }
    if n * n > MAX_DIM {
        return Err(Error::CapacityExceeded(format!(
            "two {n}-level systems exceed the {MAX_DIM}-dimensional cap"
        )));
    }
    let machine = build_un::<T>(n)?;
    let state = machine.clone_state(&gs.state)?;
    Ok(GenerationState {
        generation: 1,
        local_dim: n,
        state,
    })
}

/// The full qubit circuit from generation 0 to generation g on a fixed
/// register of 2^g qubits: earlier steps act on the leading qubits with
/// identity on the not-yet-used blanks.
pub fn generation_circuit_unitary<T: Scalar>(g: u32) -> Result<Unitary<T>> {
    if g == 0 || g > 3 {
        return Err(Error::InvalidArgument(format!(
            "generation must be in 1..=3, got {g}"
        )));
    }
    let total_qubits = 1usize << g;
    let dim = 1usize << total_qubits;
    let mut acc = Matrix::<T>::identity(dim);
    for step_index in 1..=g {
        let used = 1usize << step_index;
        let step = generation_step::<T>(2, used)?;
        let lifted = if used == total_qubits {
            step.matrix().clone()
        } else {
            step.matrix()
                .tensor(&Matrix::identity(1usize << (total_qubits - used)))?
        };
        acc = &lifted * &acc;
    }
    Unitary::new(acc)
}
