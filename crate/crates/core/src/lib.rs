//! Simulation and verification library for observable-copying machines.
//!
//! The library builds the permutation unitaries that copy commuting
//! observables of an n-level system onto two outputs, verifies the copying
//! and transmission identities over random ensembles, searches for the
//! global patterns a machine transmits, classifies the induced channels as
//! classical or quantum, and compiles the two-level machines to trapped-ion
//! pulse sequences whose gate tallies and evaluated unitaries are checked
//! against the abstract circuits.
//!
//! All numerical kernels are generic over the floating-point scalar through
//! [`scalar::Scalar`]; the concrete `f64` aliases at the crate root are the
//! types most callers want.

pub mod classicality;
pub mod cloning;
pub mod density;
pub mod eig;
pub mod error;
pub mod ion;
pub mod matrix;
pub mod observables;
pub mod random;
pub mod rotation;
pub mod scalar;
pub mod verify;

/// Structural gate: hermiticity, unit trace, and unitarity residues must
/// stay below this for an object to be accepted at construction.
pub const TOL_STRUCT: f64 = 1e-12;

/// Verification gate: physics identities over random ensembles must hold to
/// this tolerance.
pub const TOL_VERIFY: f64 = 1e-10;

/// Eigenvalue floor: density spectra may dip this far below zero before the
/// state is rejected.
pub const TOL_EIG: f64 = 1e-10;

pub use classicality::{
    classify_operation, dephasing_channel, extract_reduced_channel, ClassicalityVerdict, KrausSet,
};
pub use cloning::{
    blank_state, build_composite, build_un, generation_circuit_unitary, generation_step,
    next_generation, pairwise_extension, qudit_next_generation, translation_generator,
    CloningUnitary, GenerationState, Recipe,
};
pub use density::{partial_trace, single_site_marginal, Density, Subsystem, Unitary};
pub use eig::{eig_hermitian, eigenvalues_hermitian, Eig};
pub use error::{Error, Result};
pub use ion::{
    build_gate_library, compile_cnot, compile_generation, evaluate_program, resource_table,
    GateLibrary, PulseProgram, PulsePrimitive, RegisterKind, ResourceRow,
};
pub use matrix::{Matrix, MAX_DIM};
pub use observables::{
    exchange_tau, lemma_spectrum_check, scan_degeneracy_solutions, search_tau,
    transmission_deviation, ObservablePair, TauCandidate, TauSpectrumReport,
};
pub use random::{StateSampler, DEFAULT_SEED};
pub use rotation::{hadamard_basis_cloner, preset_rotation, rotate_setup, RotatedCloningSetup};
pub use verify::{
    classify_target, default_suite, merge_reports, named_cloner, CheckRecord,
    ClassicalityRecord, RunConfig, Summary, VerificationReport,
};

/// Complex matrix over `f64`, the default scalar.
pub type ComplexMatrix = Matrix<f64>;
/// Density matrix over `f64`.
pub type DensityMatrix = Density<f64>;
/// Unitary over `f64`.
pub type UnitaryMatrix = Unitary<f64>;
