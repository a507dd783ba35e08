//! Compilation of cloning circuits to trapped-ion pulse sequences.
//!
//! The pulse alphabet has three primitives: a resonant carrier rotation on a
//! single ion, a fixed maximally entangling two-ion interaction, and a global
//! phase. Single-qubit gates expand into one or two carriers plus a phase;
//! the controlled-NOT expands into a fixed eleven-gate product holding two
//! entangling pulses and seventeen carriers. Generation circuits chain those
//! blocks, and [`evaluate_program`] multiplies a program back into a unitary
//! so every compilation can be verified against its abstract target.
//!
//! Convention notes. Product formulas are read left to right in time: the
//! leftmost factor of a written expansion is the first pulse applied. The
//! carrier rotation uses the +i sign, cos(t/2) 1 + i sin(t/2) (cos(f) sx +
//! sin(f) sy); the library construction searches the sign/reading
//! alternatives and fails loudly unless exactly one reproduces all gate
//! expansions, which pins this choice. The entangling pulse is likewise
//! selected from four exponent candidates by requiring the controlled-NOT
//! product to close.
//!
//! The two-level register family is verified end to end by evaluating the
//! emitted pulses. The three-level family is compiled with its standard
//! accounting of two controlled-NOTs (control and target interchanged) per
//! cloning step on each target ion pair; its 12-dimensional embedding block
//! structure is checked exactly, block by block.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use crate::density::Unitary;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{cphase, creal, czero, Scalar, C};
use crate::TOL_VERIFY;

/// Largest register the simulator will evaluate (dimension 2^8 = 256).
pub const MAX_IONS: usize = 8;

/// Reduce an angle into [0, 2*pi).
pub fn normalize_angle(x: f64) -> f64 {
    let mut y = x % TAU;
    if y < 0.0 {
        y += TAU;
    }
    if y >= TAU {
        y -= TAU;
    }
    if y == 0.0 {
        0.0 // collapse -0.0
    } else {
        y
    }
}

/// One hardware pulse. Ion indices are 1-based; angles live in [0, 2*pi).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulsePrimitive {
    /// Resonant single-ion rotation by `theta` about the equatorial axis at
    /// azimuth `phi`.
    Carrier { ion: usize, theta: f64, phi: f64 },
    /// The fixed maximally entangling two-ion pulse.
    Ms { ions: (usize, usize) },
    /// A global phase factor exp(i*phi).
    Phase { phi: f64 },
}

impl PulsePrimitive {
    pub fn carrier(ion: usize, theta: f64, phi: f64) -> Self {
        PulsePrimitive::Carrier {
            ion,
            theta: normalize_angle(theta),
            phi: normalize_angle(phi),
        }
    }

    pub fn ms(a: usize, b: usize) -> Self {
        PulsePrimitive::Ms { ions: (a, b) }
    }

    pub fn phase(phi: f64) -> Self {
        PulsePrimitive::Phase {
            phi: normalize_angle(phi),
        }
    }
}

/// Gate tallies for a pulse program. Global phases are bookkeeping, not
/// gates, and are excluded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub total: usize,
    pub two_qubit: usize,
}

/// A pulse sequence on a fixed ion register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseProgram {
    pub register: usize,
    pub pulses: Vec<PulsePrimitive>,
    pub counts: GateCounts,
}

impl PulseProgram {
    pub fn new(register: usize) -> Self {
        PulseProgram {
            register,
            pulses: Vec::new(),
            counts: GateCounts {
                total: 0,
                two_qubit: 0,
            },
        }
    }

    pub fn push(&mut self, pulse: PulsePrimitive) {
        match pulse {
            PulsePrimitive::Carrier { .. } => self.counts.total += 1,
            PulsePrimitive::Ms { .. } => {
                self.counts.total += 1;
                self.counts.two_qubit += 1;
            }
            PulsePrimitive::Phase { .. } => {}
        }
        self.pulses.push(pulse);
    }

    /// Re-derive the gate tallies from the pulse list.
    pub fn recompute_counts(&self) -> GateCounts {
        let mut counts = GateCounts {
            total: 0,
            two_qubit: 0,
        };
        for p in &self.pulses {
            match p {
                PulsePrimitive::Carrier { .. } => counts.total += 1,
                PulsePrimitive::Ms { .. } => {
                    counts.total += 1;
                    counts.two_qubit += 1;
                }
                PulsePrimitive::Phase { .. } => {}
            }
        }
        counts
    }

    /// Check register bounds, ion indices, angle ranges, and count
    /// consistency.
    pub fn validate(&self) -> Result<()> {
        if self.register == 0 {
            return Err(Error::InvalidArgument("register must hold an ion".into()));
        }
        if self.register > MAX_IONS {
            return Err(Error::CapacityExceeded(format!(
                "register of {} ions exceeds the {MAX_IONS}-ion cap",
                self.register
            )));
        }
        let angle_ok = |x: f64| x.is_finite() && (0.0..TAU).contains(&x);
        for (idx, p) in self.pulses.iter().enumerate() {
            match p {
                PulsePrimitive::Carrier { ion, theta, phi } => {
                    if *ion == 0 || *ion > self.register {
                        return Err(Error::IndexOutOfRange(format!(
                            "pulse {idx}: ion {ion} outside 1..={}",
                            self.register
                        )));
                    }
                    if !angle_ok(*theta) || !angle_ok(*phi) {
                        return Err(Error::InvalidArgument(format!(
                            "pulse {idx}: angles must lie in [0, 2*pi)"
                        )));
                    }
                }
                PulsePrimitive::Ms { ions: (a, b) } => {
                    if *a == 0 || *a > self.register || *b == 0 || *b > self.register {
                        return Err(Error::IndexOutOfRange(format!(
                            "pulse {idx}: ions ({a}, {b}) outside 1..={}",
                            self.register
                        )));
                    }
                    if a == b {
                        return Err(Error::InvalidArgument(format!(
                            "pulse {idx}: entangling pulse needs two distinct ions"
                        )));
                    }
                }
                PulsePrimitive::Phase { phi } => {
                    if !angle_ok(*phi) {
                        return Err(Error::InvalidArgument(format!(
                            "pulse {idx}: phase must lie in [0, 2*pi)"
                        )));
                    }
                }
            }
        }
        if self.counts != self.recompute_counts() {
            return Err(Error::Format(
                "stored gate counts disagree with the pulse list".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let program: PulseProgram =
            serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        program.validate()?;
        Ok(program)
    }
}

/// Matrix of one carrier pulse: cos(t/2) 1 + i sin(t/2) (cos(f) sx + sin(f) sy).
pub fn carrier_matrix<T: Scalar>(theta: f64, phi: f64) -> Matrix<T> {
    carrier_matrix_signed(theta, phi, 1.0)
}

fn carrier_matrix_signed<T: Scalar>(theta: f64, phi: f64, sign: f64) -> Matrix<T> {
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin() * sign;
    let mut m = Matrix::zeros(2, 2);
    m[(0, 0)] = creal(c);
    m[(1, 1)] = creal(c);
    m[(0, 1)] = C::new(T::from_f64(s * phi.sin()), T::from_f64(s * phi.cos()));
    m[(1, 0)] = C::new(T::from_f64(-s * phi.sin()), T::from_f64(s * phi.cos()));
    m
}

/// One single-qubit gate as a global phase plus carrier pulses in temporal
/// order.
#[derive(Clone, Debug)]
struct GateExpansion {
    phase: f64,
    carriers: &'static [(f64, f64)],
}

const EXP_P: GateExpansion = GateExpansion {
    phase: -3.0 * FRAC_PI_4,
    carriers: &[(PI, 0.0), (PI, FRAC_PI_4)],
};
const EXP_P_INV: GateExpansion = GateExpansion {
    phase: 3.0 * FRAC_PI_4,
    carriers: &[(PI, 5.0 * FRAC_PI_4), (PI, PI)],
};
const EXP_H: GateExpansion = GateExpansion {
    phase: -FRAC_PI_2,
    carriers: &[(PI, 0.0), (FRAC_PI_2, FRAC_PI_2)],
};
const EXP_SZ: GateExpansion = GateExpansion {
    phase: -FRAC_PI_2,
    carriers: &[(PI, 0.0), (PI, FRAC_PI_2)],
};
const EXP_SX: GateExpansion = GateExpansion {
    phase: -FRAC_PI_2,
    carriers: &[(PI, 0.0)],
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Reading {
    /// Leftmost written factor acts first in time.
    LeftFirst,
    /// Rightmost written factor acts first (plain matrix-product reading).
    RightFirst,
}

fn expansion_matrix<T: Scalar>(exp: &GateExpansion, sign: f64, reading: Reading) -> Matrix<T> {
    let mut acc = Matrix::<T>::identity(2);
    let apply = |acc: Matrix<T>, (theta, phi): (f64, f64)| -> Matrix<T> {
        &carrier_matrix_signed(theta, phi, sign) * &acc
    };
    match reading {
        Reading::LeftFirst => {
            for &c in exp.carriers {
                acc = apply(acc, c);
            }
        }
        Reading::RightFirst => {
            for &c in exp.carriers.iter().rev() {
                acc = apply(acc, c);
            }
        }
    }
    acc.scale(cphase(T::from_f64(exp.phase)))
}

/// Matrix of the entangling pulse: exp(-i pi/4 sy (x) sy).
pub fn ms_matrix<T: Scalar>() -> Matrix<T> {
    ms_candidate(MsVariant::YyMinus)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MsVariant {
    XxPlus,
    XxMinus,
    YyPlus,
    YyMinus,
}

impl MsVariant {
    fn name(self) -> &'static str {
        match self {
            MsVariant::XxPlus => "exp(+i pi/4 xx)",
            MsVariant::XxMinus => "exp(-i pi/4 xx)",
            MsVariant::YyPlus => "exp(+i pi/4 yy)",
            MsVariant::YyMinus => "exp(-i pi/4 yy)",
        }
    }
}

fn ms_candidate<T: Scalar>(variant: MsVariant) -> Matrix<T> {
    let (axis, sign): (Matrix<T>, f64) = match variant {
        MsVariant::XxPlus => (Matrix::pauli_x(), 1.0),
        MsVariant::XxMinus => (Matrix::pauli_x(), -1.0),
        MsVariant::YyPlus => (Matrix::pauli_y(), 1.0),
        MsVariant::YyMinus => (Matrix::pauli_y(), -1.0),
    };
    // exp(s i pi/4 A (x) A) = cos(pi/4) 1 + s i sin(pi/4) A (x) A for A^2 = 1.
    let aa = axis.tensor(&axis).expect("4x4 fits");
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let eye = Matrix::<T>::identity(4).scale(creal(half));
    let rot = aa.scale(C::new(T::zero(), T::from_f64(sign * half)));
    &eye + &rot
}

/// The recorded outcome of the convention search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionRecord {
    pub carrier_sign: String,
    pub product_reading: String,
    pub ms_variant: String,
    pub cnot_phase_deviation: f64,
    pub notes: Vec<String>,
}

/// The verified gate set: single-qubit gate matrices, the entangling pulse,
/// and the conventions that make every expansion close.
#[derive(Clone, Debug)]
pub struct GateLibrary<T: Scalar> {
    pub p: Matrix<T>,
    pub p_inv: Matrix<T>,
    pub h: Matrix<T>,
    pub sigma_z: Matrix<T>,
    pub sigma_x: Matrix<T>,
    pub ms: Matrix<T>,
    pub conventions: ConventionRecord,
}

fn gate_targets<T: Scalar>() -> [(&'static str, GateExpansion, Matrix<T>); 5] {
    let mut p = Matrix::<T>::identity(2);
    p[(1, 1)] = C::new(T::zero(), T::one());
    let mut p_inv = Matrix::<T>::identity(2);
    p_inv[(1, 1)] = C::new(T::zero(), -T::one());
    [
        ("p", EXP_P, p),
        ("p_inv", EXP_P_INV, p_inv),
        ("h", EXP_H, Matrix::hadamard()),
        ("sigma_z", EXP_SZ, Matrix::pauli_z()),
        ("sigma_x", EXP_SX, Matrix::pauli_x()),
    ]
}

fn cnot_target<T: Scalar>() -> Matrix<T> {
    Matrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
}

/// The written two-ion product formula, as (gate matrix, ion) pairs in
/// written order, leftmost first. Ion 1 is the control, ion 2 the target;
/// `None` marks the entangling pulse on both ions.
fn cnot_formula_factors<'a, T: Scalar>(
    lib: &'a [(&'static str, Matrix<T>)],
    ms: &'a Matrix<T>,
) -> Vec<(Option<usize>, &'a Matrix<T>)> {
    let gate = |name: &str| -> &'a Matrix<T> {
        &lib.iter().find(|(n, _)| *n == name).expect("known gate").1
    };
    vec![
        (Some(1), gate("sigma_x")),
        (Some(2), gate("sigma_z")),
        (Some(1), gate("p")),
        (Some(2), gate("p_inv")),
        (Some(2), gate("h")),
        (None, ms),
        (Some(1), gate("p")),
        (Some(1), gate("h")),
        (Some(1), gate("p")),
        (None, ms),
        (Some(2), gate("p")),
    ]
}

fn embed_on_two_ions<T: Scalar>(gate: &Matrix<T>, ion: usize) -> Matrix<T> {
    let eye = Matrix::<T>::identity(2);
    match ion {
        1 => gate.tensor(&eye).expect("4x4 fits"),
        _ => eye.tensor(gate).expect("4x4 fits"),
    }
}

fn cnot_product<T: Scalar>(
    factors: &[(Option<usize>, &Matrix<T>)],
    reading: Reading,
) -> Matrix<T> {
    let mut acc = Matrix::<T>::identity(4).scale(creal(-1.0));
    let apply = |acc: Matrix<T>, (ion, gate): (Option<usize>, &Matrix<T>)| -> Matrix<T> {
        let full = match ion {
            Some(i) => embed_on_two_ions(gate, i),
            None => gate.clone(),
        };
        &full * &acc
    };
    match reading {
        Reading::LeftFirst => {
            for &(ion, gate) in factors {
                acc = apply(acc, (ion, gate));
            }
        }
        Reading::RightFirst => {
            for &(ion, gate) in factors.iter().rev() {
                acc = apply(acc, (ion, gate));
            }
        }
    }
    acc
}

/// Build and verify the gate set. The construction searches the carrier
/// sign and reading alternatives, requires that exactly one combination
/// reproduces every single-qubit expansion, then selects the entangling
/// variant whose product formula closes onto the controlled-NOT. Any
/// ambiguity or failure aborts with a convention error.
pub fn build_gate_library<T: Scalar>() -> Result<GateLibrary<T>> {
    let tol = T::from_f64(TOL_VERIFY);
    let targets = gate_targets::<T>();

    let mut passing: Vec<(f64, Reading)> = Vec::new();
    for sign in [1.0f64, -1.0] {
        for reading in [Reading::LeftFirst, Reading::RightFirst] {
            let all_close = targets.iter().all(|(_, exp, target)| {
                expansion_matrix::<T>(exp, sign, reading).max_abs_diff(target) <= tol
            });
            if all_close {
                passing.push((sign, reading));
            }
        }
    }
    if passing.len() != 1 {
        return Err(Error::ConventionFailure(format!(
            "{} carrier conventions reproduce the single-ion expansions, expected exactly 1",
            passing.len()
        )));
    }
    let (sign, reading) = passing[0];
    if sign != 1.0 || reading != Reading::LeftFirst {
        return Err(Error::ConventionFailure(
            "the carrier convention that closes is not the one the emitter implements".into(),
        ));
    }

    let gates: Vec<(&'static str, Matrix<T>)> = targets
        .iter()
        .map(|(name, exp, _)| (*name, expansion_matrix::<T>(exp, sign, reading)))
        .collect();

    let cnot = cnot_target::<T>();
    let mut ms_passing: Vec<(MsVariant, f64)> = Vec::new();
    for variant in [
        MsVariant::XxPlus,
        MsVariant::XxMinus,
        MsVariant::YyPlus,
        MsVariant::YyMinus,
    ] {
        let ms = ms_candidate::<T>(variant);
        let factors = cnot_formula_factors(&gates, &ms);
        let product = cnot_product(&factors, reading);
        let dev = product.deviation_up_to_phase(&cnot).as_f64();
        if dev <= TOL_VERIFY {
            let raw = product.max_abs_diff(&cnot).as_f64();
            ms_passing.push((variant, raw));
        }
    }
    if ms_passing.len() != 1 {
        return Err(Error::ConventionFailure(format!(
            "{} entangling-pulse variants close the controlled-NOT product, expected exactly 1",
            ms_passing.len()
        )));
    }
    let (ms_variant, raw_dev) = ms_passing[0];
    if ms_variant != MsVariant::YyMinus {
        return Err(Error::ConventionFailure(format!(
            "the entangling variant that closes ({}) is not the one the evaluator implements",
            ms_variant.name()
        )));
    }
    let ms = ms_candidate::<T>(ms_variant);

    // The factors are all symmetric matrices, so the reversed reading gives
    // the transposed product, which is the same controlled-NOT. Record that
    // the formula is reading-insensitive rather than claiming a discriminating
    // oracle here.
    let factors = cnot_formula_factors(&gates, &ms);
    let forward = cnot_product(&factors, Reading::LeftFirst);
    let backward = cnot_product(&factors, Reading::RightFirst);
    let reading_gap = forward.max_abs_diff(&backward).as_f64();

    let find = |name: &str| -> Matrix<T> {
        gates
            .iter()
            .find(|(n, _)| *n == name)
            .expect("known gate")
            .1
            .clone()
    };
    Ok(GateLibrary {
        p: find("p"),
        p_inv: find("p_inv"),
        h: find("h"),
        sigma_z: find("sigma_z"),
        sigma_x: find("sigma_x"),
        ms,
        conventions: ConventionRecord {
            carrier_sign: "+i".into(),
            product_reading: "left to right in time".into(),
            ms_variant: ms_variant.name().into(),
            cnot_phase_deviation: raw_dev,
            notes: vec![
                "the -i carrier sign fails the single-ion expansions in both readings".into(),
                format!(
                    "the two-ion product closes in both readings (all factors symmetric); \
                     largest gap between readings {reading_gap:.3e}"
                ),
            ],
        },
    })
}

fn emit_gate(program: &mut PulseProgram, ion: usize, exp: &GateExpansion) {
    program.push(PulsePrimitive::phase(exp.phase));
    for &(theta, phi) in exp.carriers {
        program.push(PulsePrimitive::carrier(ion, theta, phi));
    }
}

fn emit_cnot(program: &mut PulseProgram, control: usize, target: usize) {
    // Temporal order: reverse of the written product formula, so the
    // correction pair comes last.
    emit_gate(program, target, &EXP_P);
    program.push(PulsePrimitive::ms(control, target));
    emit_gate(program, control, &EXP_P);
    emit_gate(program, control, &EXP_H);
    emit_gate(program, control, &EXP_P);
    program.push(PulsePrimitive::ms(control, target));
    emit_gate(program, target, &EXP_H);
    emit_gate(program, target, &EXP_P_INV);
    emit_gate(program, control, &EXP_P);
    emit_gate(program, target, &EXP_SZ);
    emit_gate(program, control, &EXP_SX);
    program.push(PulsePrimitive::phase(PI));
}

/// Compile one controlled-NOT between two ions of a register just large
/// enough to hold them.
pub fn compile_cnot(control: usize, target: usize) -> Result<PulseProgram> {
    if control == 0 || target == 0 {
        return Err(Error::IndexOutOfRange("ion indices are 1-based".into()));
    }
    if control == target {
        return Err(Error::InvalidArgument(
            "control and target must be distinct ions".into(),
        ));
    }
    let register = control.max(target);
    if register > MAX_IONS {
        return Err(Error::CapacityExceeded(format!(
            "ion {register} exceeds the {MAX_IONS}-ion cap"
        )));
    }
    let mut program = PulseProgram::new(register);
    emit_cnot(&mut program, control, target);
    Ok(program)
}

/// Which physical encoding a compiled register uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegisterKind {
    /// One ion per two-level individual.
    Qubit,
    /// Two ions per three-level individual (with one spare ancilla level).
    Qutrit,
}

impl std::fmt::Display for RegisterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegisterKind::Qubit => write!(f, "qubit"),
            RegisterKind::Qutrit => write!(f, "qutrit"),
        }
    }
}

/// Compile the first g cloning generations. Two-level registers double the
/// ion count per generation (capacity g <= 3); three-level registers use an
/// ion pair per individual and two controlled-NOTs, with control and target
/// interchanged, on each target pair (capacity g <= 2). Generation 0 is the
/// empty program on the initial register.
pub fn compile_generation(g: u32, kind: RegisterKind) -> Result<PulseProgram> {
    match kind {
        RegisterKind::Qubit => {
            if g > 3 {
                return Err(Error::CapacityExceeded(format!(
                    "two-level registers support at most 3 generations, requested {g}"
                )));
            }
            let register = 1usize << g;
            let mut program = PulseProgram::new(register);
            for step in 1..=g {
                let half = 1usize << (step - 1);
                for i in 1..=half {
                    emit_cnot(&mut program, i, i + half);
                }
            }
            Ok(program)
        }
        RegisterKind::Qutrit => {
            if g > 2 {
                return Err(Error::CapacityExceeded(format!(
                    "three-level registers support at most 2 generations, requested {g}"
                )));
            }
            let register = 1usize << (g + 1);
            let mut program = PulseProgram::new(register);
            for step in 1..=g {
                let half = 1usize << (step - 1);
                for i in 1..=half {
                    let target_pair = i + half;
                    let a = 2 * target_pair - 1;
                    let b = 2 * target_pair;
                    emit_cnot(&mut program, b, a);
                    emit_cnot(&mut program, a, b);
                }
            }
            Ok(program)
        }
    }
}

/// One row of the gate accounting per generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub generations: u32,
    pub ions: usize,
    pub total_gates: usize,
    pub two_qubit_gates: usize,
}

/// Gate accounting for every supported generation of a register family.
pub fn resource_table(kind: RegisterKind) -> Result<Vec<ResourceRow>> {
    let cap = match kind {
        RegisterKind::Qubit => 3u32,
        RegisterKind::Qutrit => 2u32,
    };
    let mut rows = Vec::new();
    for g in 0..=cap {
        let program = compile_generation(g, kind)?;
        rows.push(ResourceRow {
            generations: g,
            ions: program.register,
            total_gates: program.counts.total,
            two_qubit_gates: program.counts.two_qubit,
        });
    }
    Ok(rows)
}

/// The 12-dimensional three-level cloning embedding: identity on the first
/// target block and the two interleaving permutations on the others. Each
/// nontrivial block is exactly a product of the two controlled-NOTs on the
/// encoded target pair, and the ancilla pattern |00> is fixed by every block.
pub fn build_qutrit_embedding<T: Scalar>() -> Result<Unitary<T>> {
    let b2 = qutrit_block::<T>(2);
    let b3 = qutrit_block::<T>(3);
    let mut m = Matrix::<T>::zeros(12, 12);
    for (offset, block) in [
        (0usize, Matrix::<T>::identity(4)),
        (4usize, b2),
        (8usize, b3),
    ] {
        for r in 0..4 {
            for c in 0..4 {
                m[(offset + r, offset + c)] = block[(r, c)];
            }
        }
    }
    Unitary::new(m)
}

/// The target-pair permutation selected by control level m (1-based):
/// level 1 leaves the pair alone, levels 2 and 3 cycle the encoded levels
/// forward by one and two steps.
pub fn qutrit_block<T: Scalar>(m: usize) -> Matrix<T> {
    assert!((1..=3).contains(&m), "control level out of range");
    Matrix::from_fn(4, 4, |r, c| {
        let image = if c == 0 {
            0 // ancilla pattern is fixed
        } else {
            (c - 1 + (m - 1)) % 3 + 1
        };
        if r == image {
            crate::scalar::cone()
        } else {
            czero()
        }
    })
}

/// Two-bit index of an encoded three-level basis state (1-based level).
pub fn qutrit_level_index(level: usize) -> Result<usize> {
    if (1..=3).contains(&level) {
        Ok(level)
    } else {
        Err(Error::IndexOutOfRange(format!(
            "three-level systems have levels 1..=3, got {level}"
        )))
    }
}

fn apply_one_qubit_left<T: Scalar>(u: &mut Matrix<T>, gate: &Matrix<T>, ions: usize, ion: usize) {
    let dim = u.dim();
    let mask = 1usize << (ions - ion);
    let g00 = gate[(0, 0)];
    let g01 = gate[(0, 1)];
    let g10 = gate[(1, 0)];
    let g11 = gate[(1, 1)];
    for row in 0..dim {
        if row & mask != 0 {
            continue;
        }
        let row1 = row | mask;
        for col in 0..dim {
            let a = u[(row, col)];
            let b = u[(row1, col)];
            u[(row, col)] = g00 * a + g01 * b;
            u[(row1, col)] = g10 * a + g11 * b;
        }
    }
}

fn apply_two_qubit_left<T: Scalar>(
    u: &mut Matrix<T>,
    gate: &Matrix<T>,
    ions: usize,
    first: usize,
    second: usize,
) {
    let dim = u.dim();
    let mask_a = 1usize << (ions - first);
    let mask_b = 1usize << (ions - second);
    for base in 0..dim {
        if base & mask_a != 0 || base & mask_b != 0 {
            continue;
        }
        let rows = [base, base | mask_b, base | mask_a, base | mask_a | mask_b];
        for col in 0..dim {
            let values = [
                u[(rows[0], col)],
                u[(rows[1], col)],
                u[(rows[2], col)],
                u[(rows[3], col)],
            ];
            for r in 0..4 {
                let mut acc = czero::<T>();
                for (k, v) in values.iter().enumerate() {
                    acc += gate[(r, k)] * *v;
                }
                u[(rows[r], col)] = acc;
            }
        }
    }
}

/// Multiply a pulse program back into a unitary: pulses are applied in list
/// order, each left-multiplying the accumulated operator. Ion 1 is the most
/// significant bit of the register index.
pub fn evaluate_program<T: Scalar>(program: &PulseProgram) -> Result<Unitary<T>> {
    program.validate()?;
    let ions = program.register;
    let dim = 1usize << ions;
    let mut u = Matrix::<T>::identity(dim);
    let ms = ms_matrix::<T>();
    for pulse in &program.pulses {
        match pulse {
            PulsePrimitive::Carrier { ion, theta, phi } => {
                let gate = carrier_matrix::<T>(*theta, *phi);
                apply_one_qubit_left(&mut u, &gate, ions, *ion);
            }
            PulsePrimitive::Ms { ions: (a, b) } => {
                apply_two_qubit_left(&mut u, &ms, ions, *a, *b);
            }
            PulsePrimitive::Phase { phi } => {
                u = u.scale(cphase(T::from_f64(*phi)));
            }
        }
    }
    Unitary::new(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloning::generation_circuit_unitary;
    use crate::scalar::cimag;

    type M = Matrix<f64>;

    #[test]
    fn angle_normalization() {
        assert!((normalize_angle(-FRAC_PI_2) - 3.0 * FRAC_PI_2).abs() < 1e-15);
        assert_eq!(normalize_angle(TAU), 0.0);
        assert!((normalize_angle(7.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(normalize_angle(0.0), 0.0);
        let tiny = normalize_angle(-1e-17);
        assert!((0.0..TAU).contains(&tiny));
    }

    #[test]
    fn carrier_at_pi_is_i_pauli_x() {
        let m = carrier_matrix::<f64>(PI, 0.0);
        let mut expected = M::zeros(2, 2);
        expected[(0, 1)] = cimag(1.0);
        expected[(1, 0)] = cimag(1.0);
        assert!(m.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn carrier_at_pi_over_2_phi_pi_over_2() {
        // cos(pi/4) 1 + i sin(pi/4) sy = [[c, s], [-s, c]] with c = s = 1/sqrt(2).
        let m = carrier_matrix::<f64>(FRAC_PI_2, FRAC_PI_2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m[(0, 0)].re - s).abs() < 1e-15);
        assert!((m[(0, 1)].re - s).abs() < 1e-15);
        assert!((m[(1, 0)].re + s).abs() < 1e-15);
        assert!((m[(1, 1)].re - s).abs() < 1e-15);
        assert!(m[(0, 0)].im.abs() < 1e-15);
        assert!(m[(0, 1)].im.abs() < 1e-15);
    }

    #[test]
    fn expansions_reproduce_all_gates() {
        let lib = build_gate_library::<f64>().unwrap();
        let mut p = M::identity(2);
        p[(1, 1)] = cimag(1.0);
        let mut p_inv = M::identity(2);
        p_inv[(1, 1)] = cimag(-1.0);
        assert!(lib.p.approx_eq(&p, 1e-15));
        assert!(lib.p_inv.approx_eq(&p_inv, 1e-15));
        assert!(lib.h.approx_eq(&M::hadamard(), 1e-15));
        assert!(lib.sigma_z.approx_eq(&M::pauli_z(), 1e-15));
        assert!(lib.sigma_x.approx_eq(&M::pauli_x(), 1e-15));
    }

    #[test]
    fn library_records_conventions() {
        let lib = build_gate_library::<f64>().unwrap();
        assert_eq!(lib.conventions.carrier_sign, "+i");
        assert_eq!(lib.conventions.ms_variant, "exp(-i pi/4 yy)");
        assert!(lib.conventions.cnot_phase_deviation < 1e-10);
    }

    #[test]
    fn cnot_compilation_counts() {
        let program = compile_cnot(1, 2).unwrap();
        assert_eq!(program.register, 2);
        assert_eq!(program.counts, GateCounts { total: 19, two_qubit: 2 });
        assert_eq!(program.counts, program.recompute_counts());
        program.validate().unwrap();
    }

    #[test]
    fn compiled_cnot_evaluates_to_cnot() {
        let program = compile_cnot(1, 2).unwrap();
        let u = evaluate_program::<f64>(&program).unwrap();
        assert!(u.matrix().max_abs_diff(&cnot_target()) < 1e-10);
    }

    #[test]
    fn compiled_reverse_cnot_swaps_roles() {
        let program = compile_cnot(2, 1).unwrap();
        let u = evaluate_program::<f64>(&program).unwrap();
        let expected = M::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
        ]);
        assert!(u.matrix().max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn cnot_rejects_bad_ions() {
        assert!(compile_cnot(0, 1).is_err());
        assert!(compile_cnot(3, 3).is_err());
        assert!(compile_cnot(1, 9).is_err());
    }

    #[test]
    fn qubit_generation_accounting() {
        let expected = [(0u32, 1usize, 0usize, 0usize), (1, 2, 19, 2), (2, 4, 57, 6), (3, 8, 133, 14)];
        let rows = resource_table(RegisterKind::Qubit).unwrap();
        assert_eq!(rows.len(), expected.len());
        for ((g, ions, total, two), row) in expected.iter().zip(rows.iter()) {
            assert_eq!(row.generations, *g);
            assert_eq!(row.ions, *ions);
            assert_eq!(row.total_gates, *total);
            assert_eq!(row.two_qubit_gates, *two);
        }
        assert!(compile_generation(4, RegisterKind::Qubit).is_err());
    }

    #[test]
    fn qutrit_generation_accounting() {
        let expected = [(0u32, 2usize, 0usize, 0usize), (1, 4, 38, 4), (2, 8, 114, 12)];
        let rows = resource_table(RegisterKind::Qutrit).unwrap();
        assert_eq!(rows.len(), expected.len());
        for ((g, ions, total, two), row) in expected.iter().zip(rows.iter()) {
            assert_eq!(row.generations, *g);
            assert_eq!(row.ions, *ions);
            assert_eq!(row.total_gates, *total);
            assert_eq!(row.two_qubit_gates, *two);
        }
        assert!(compile_generation(3, RegisterKind::Qutrit).is_err());
    }

    #[test]
    fn compiled_generations_match_abstract_circuits() {
        for g in [1u32, 2] {
            let program = compile_generation(g, RegisterKind::Qubit).unwrap();
            let compiled = evaluate_program::<f64>(&program).unwrap();
            let abstract_u = generation_circuit_unitary::<f64>(g).unwrap();
            let dev = compiled.matrix().deviation_up_to_phase(abstract_u.matrix());
            assert!(dev < 1e-10, "g={g}, dev={dev}");
        }
    }

    #[test]
    fn compiled_qutrit_step_is_the_pair_permutation() {
        let program = compile_generation(1, RegisterKind::Qutrit).unwrap();
        let u = evaluate_program::<f64>(&program).unwrap();
        let expected = M::identity(4)
            .tensor(&qutrit_block::<f64>(2))
            .unwrap();
        let dev = u.matrix().deviation_up_to_phase(&expected);
        assert!(dev < 1e-10, "dev={dev}");
    }

    #[test]
    fn qutrit_blocks_are_two_cnot_products() {
        let c12 = cnot_target::<f64>();
        let c21 = M::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
        ]);
        // Temporal order: the ion-2-controlled gate acts first for the
        // forward cycle, the reverse order gives the backward cycle.
        assert_eq!(&c12 * &c21, qutrit_block::<f64>(2));
        assert_eq!(&c21 * &c12, qutrit_block::<f64>(3));
        assert_eq!(qutrit_block::<f64>(3), qutrit_block::<f64>(2).transpose());
        assert_eq!(qutrit_block::<f64>(1), M::identity(4));
    }

    #[test]
    fn embedding_restricts_to_the_three_level_machine() {
        let embedding = build_qutrit_embedding::<f64>().unwrap();
        for control in 1usize..=3 {
            for level in 1usize..=3 {
                let shifted = (level - 1 + (control - 1)) % 3 + 1;
                let row = (control - 1) * 4 + qutrit_level_index(shifted).unwrap();
                let col = (control - 1) * 4 + qutrit_level_index(level).unwrap();
                assert_eq!(embedding.matrix()[(row, col)].re, 1.0, "m={control}, k={level}");
            }
            // The ancilla pattern is untouched in every block.
            let anchor = (control - 1) * 4;
            assert_eq!(embedding.matrix()[(anchor, anchor)].re, 1.0);
        }
    }

    #[test]
    fn program_json_round_trip_is_stable() {
        let program = compile_cnot(1, 2).unwrap();
        let json = program.to_json_string().unwrap();
        let back = PulseProgram::from_json_str(&json).unwrap();
        assert_eq!(back, program);
        assert_eq!(back.to_json_string().unwrap(), json);
        assert!(json.contains("\"kind\": \"carrier\""));
        assert!(json.contains("\"kind\": \"ms\""));
        assert!(json.contains("\"kind\": \"phase\""));
    }

    #[test]
    fn validation_catches_defects() {
        let mut program = compile_cnot(1, 2).unwrap();
        program.counts.total += 1;
        assert!(matches!(program.validate(), Err(Error::Format(_))));

        let mut bad_ion = PulseProgram::new(2);
        bad_ion.push(PulsePrimitive::carrier(3, PI, 0.0));
        assert!(matches!(bad_ion.validate(), Err(Error::IndexOutOfRange(_))));

        let mut bad_angle = PulseProgram::new(1);
        bad_angle.push(PulsePrimitive::Carrier {
            ion: 1,
            theta: -0.5,
            phi: 0.0,
        });
        assert!(matches!(bad_angle.validate(), Err(Error::InvalidArgument(_))));

        let mut same_ions = PulseProgram::new(2);
        same_ions.push(PulsePrimitive::ms(2, 2));
        assert!(same_ions.validate().is_err());

        let too_big = PulseProgram::new(9);
        assert!(matches!(
            too_big.validate(),
            Err(Error::CapacityExceeded(_))
        ));
        assert!(evaluate_program::<f64>(&too_big).is_err());
    }

    #[test]
    fn evaluate_composes_in_list_order() {
        // sigma_x then sigma_z on one ion: matrix product sz * sx = -i sy.
        let mut program = PulseProgram::new(1);
        emit_gate(&mut program, 1, &EXP_SX);
        emit_gate(&mut program, 1, &EXP_SZ);
        let u = evaluate_program::<f64>(&program).unwrap();
        let expected = &M::pauli_z() * &M::pauli_x();
        assert!(u.matrix().approx_eq(&expected, 1e-14));
    }
}
