//! Property tests over randomized structural inputs.

use proptest::prelude::*;

use clonesim_core::cloning::{build_un, pairwise_extension};
use clonesim_core::density::{partial_trace, Unitary};
use clonesim_core::ion::{normalize_angle, PulseProgram, PulsePrimitive};
use clonesim_core::matrix::Matrix;
use clonesim_core::random::StateSampler;
use clonesim_core::scalar::{cphase, creal, C};
use clonesim_core::ComplexMatrix;

/// Small complex matrices with dyadic-rational entries, so products and
/// tensors stay exact in binary floating point.
fn dyadic_matrix(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max_dim).prop_flat_map(move |n| {
        proptest::collection::vec((-8i32..=8, -8i32..=8), n * n).prop_map(move |entries| {
            Matrix::from_fn(n, n, |r, c| {
                let (re, im) = entries[r * n + c];
                C::new(re as f64 / 8.0, im as f64 / 8.0)
            })
        })
    })
}

proptest! {
    #[test]
    fn tensor_is_associative(
        a in dyadic_matrix(3),
        b in dyadic_matrix(3),
        c in dyadic_matrix(3),
    ) {
        let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
        prop_assert_eq!(left.max_abs_diff(&right), 0.0);
    }

    #[test]
    fn trace_multiplies_over_tensor(
        a in dyadic_matrix(4),
        b in dyadic_matrix(4),
    ) {
        let lhs = a.tensor(&b).unwrap().trace();
        let rhs = a.trace() * b.trace();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn partial_trace_composes_in_either_order(seed in 0u64..1_000, site in 0usize..3) {
        let mut sampler = StateSampler::new(seed);
        let rho2 = sampler.random_density::<f64>(2);
        let rho3 = sampler.random_density::<f64>(3);
        let rho2b = sampler.random_density::<f64>(2);
        let joint = rho2.tensor(&rho3).unwrap().tensor(&rho2b).unwrap();
        let dims = [2usize, 3, 2];

        // Reducing straight to one site equals reducing in two steps.
        let direct = partial_trace(&joint, &dims, &[site]).unwrap();
        let keep_two: Vec<usize> = (0..3).filter(|&j| j != (site + 1) % 3).collect();
        let middle = partial_trace(&joint, &dims, &keep_two).unwrap();
        let middle_dims: Vec<usize> = keep_two.iter().map(|&j| dims[j]).collect();
        let pos = keep_two.iter().position(|&j| j == site).unwrap();
        let two_step = partial_trace(&middle, &middle_dims, &[pos]).unwrap();
        prop_assert!(direct.matrix().max_abs_diff(two_step.matrix()) <= 1e-12);
    }

    #[test]
    fn unitary_conjugation_preserves_state_validity(seed in 0u64..1_000, n in 2usize..5) {
        let mut sampler = StateSampler::new(seed);
        let rho = sampler.random_density::<f64>(n);
        let u = sampler.random_unitary::<f64>(n).unwrap();
        // `apply_to_density` revalidates; a panic or error here is a failure.
        let out = u.apply_to_density(&rho).unwrap();
        prop_assert!((out.purity() - rho.purity()).abs() <= 1e-10);
    }

    #[test]
    fn classification_ignores_global_phase(seed in 0u64..1_000, phi in 0.0f64..6.28) {
        let mut sampler = StateSampler::new(seed);
        let u = sampler.random_unitary::<f64>(3).unwrap();
        let phased = Unitary::new(u.matrix().scale(cphase(phi))).unwrap();
        let a = clonesim_core::classify_operation(&u);
        let b = clonesim_core::classify_operation(&phased);
        prop_assert_eq!(a.is_classical, b.is_classical);
    }

    #[test]
    fn pairwise_extensions_commute(m in 1usize..4) {
        let m = m * 2;
        let parts: Vec<ComplexMatrix> = (1..=m / 2)
            .map(|i| pairwise_extension::<f64>(m, i).unwrap().matrix().clone())
            .collect();
        for i in 0..parts.len() {
            for j in (i + 1)..parts.len() {
                let ij = &parts[i] * &parts[j];
                let ji = &parts[j] * &parts[i];
                prop_assert_eq!(ij.max_abs_diff(&ji), 0.0);
            }
        }
    }

    #[test]
    fn machine_blocks_are_permutations(n in 2usize..6) {
        let u = build_un::<f64>(n).unwrap();
        let m = u.unitary.matrix();
        // Every column holds exactly one unit entry: the machine permutes
        // the computational basis.
        for col in 0..m.cols() {
            let mut ones = 0usize;
            for row in 0..m.rows() {
                let v = m[(row, col)];
                if (v - creal::<f64>(1.0)).norm() <= 1e-14 {
                    ones += 1;
                } else {
                    prop_assert!(v.norm() <= 1e-14);
                }
            }
            prop_assert_eq!(ones, 1);
        }
    }

    #[test]
    fn program_counts_survive_serialization(
        ions in 2usize..5,
        thetas in proptest::collection::vec(0.0f64..6.28, 1..10),
    ) {
        let mut program = PulseProgram::new(ions);
        for (k, theta) in thetas.iter().enumerate() {
            let ion = 1 + (k % ions);
            program.push(PulsePrimitive::carrier(ion, *theta, 0.25));
            if ion + 1 <= ions {
                program.push(PulsePrimitive::ms(ion, ion + 1));
            }
        }
        let json = program.to_json_string().unwrap();
        let back = PulseProgram::from_json_str(&json).unwrap();
        prop_assert_eq!(back.counts, program.counts);
        prop_assert_eq!(back.pulses.len(), program.pulses.len());
    }

    #[test]
    fn normalized_angles_land_in_range(x in -1.0e3f64..1.0e3) {
        let y = normalize_angle(x);
        prop_assert!((0.0..std::f64::consts::TAU).contains(&y));
        // The normalized angle differs from the input by a whole number of
        // turns.
        let turns = (x - y) / std::f64::consts::TAU;
        prop_assert!((turns - turns.round()).abs() <= 1e-9);
    }
}
