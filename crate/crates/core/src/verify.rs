//! Check suites and report assembly.
//!
//! Every suite measures deviations of the defining identities over seeded
//! random ensembles and folds them into [`CheckRecord`] entries; a
//! [`VerificationReport`] gathers the records, classicality verdicts, and
//! transmitted-pattern listings, and renders to JSON, CSV, or plain text.
//! Reports are deterministic for a fixed seed; the timestamp is omitted in
//! deterministic mode so that byte-identical runs stay byte-identical.

use serde::{Deserialize, Serialize};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::classicality::{classify_operation, extract_reduced_channel};
use crate::cloning::{
    blank_state, build_composite, build_un, generation_circuit_unitary, generation_step,
    CloningUnitary,
};
use crate::density::{partial_trace, Subsystem, Unitary};
use crate::error::{Error, Result};
use crate::ion::{
    build_gate_library, compile_cnot, compile_generation, evaluate_program, qutrit_block,
    resource_table, RegisterKind,
};
use crate::matrix::Matrix;
use crate::observables::{
    build_flip_operator, exchange_tau, half_space_sign, lemma_spectrum_check,
    scan_degeneracy_solutions, transmission_deviation, ObservablePair, SPECTRUM_ROUNDING_TOL,
};
use crate::random::{StateSampler, DEFAULT_SEED};
use crate::rotation::{preset_rotation, rotate_setup};
use crate::scalar::Scalar;
use crate::TOL_VERIFY;

/// Echo of the run parameters, embedded in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub n: Option<usize>,
    pub generations: Option<u32>,
    pub composite: Option<(usize, usize)>,
    pub rotation: Option<String>,
    pub kind: Option<String>,
    pub seed: u64,
    pub trials: usize,
    pub tolerance: f64,
    pub deterministic: bool,
    pub format: String,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.into(),
            n: None,
            generations: None,
            composite: None,
            rotation: None,
            kind: None,
            seed: DEFAULT_SEED,
            trials: 100,
            tolerance: TOL_VERIFY,
            deterministic: false,
            format: "text".into(),
        }
    }
}

/// One verified identity: its measured deviation against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub identity: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn measured(name: &str, identity: &str, max_deviation: f64, tolerance: f64) -> Self {
        CheckRecord {
            name: name.into(),
            identity: identity.into(),
            max_deviation,
            tolerance,
            pass: max_deviation <= tolerance,
            note: None,
        }
    }

    pub fn vacuous(name: &str, identity: &str, tolerance: f64) -> Self {
        CheckRecord {
            name: name.into(),
            identity: identity.into(),
            max_deviation: 0.0,
            tolerance,
            pass: true,
            note: Some("no trials executed".into()),
        }
    }

    pub fn failure(name: &str, identity: &str, tolerance: f64, cause: &str) -> Self {
        CheckRecord {
            name: name.into(),
            identity: identity.into(),
            max_deviation: f64::INFINITY,
            tolerance,
            pass: false,
            note: Some(cause.into()),
        }
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Classification outcome for one operation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalityRecord {
    pub operation: String,
    pub is_classical: bool,
    pub witness_column: Option<usize>,
    pub kraus_operators: usize,
    pub fixed_point_dimension: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

/// A full run report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: String,
    pub timestamp: Option<u64>,
    pub config: RunConfig,
    pub records: Vec<CheckRecord>,
    pub classicality: Vec<ClassicalityRecord>,
    pub tau_patterns: Vec<String>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn new(config: RunConfig) -> Self {
        VerificationReport {
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: None,
            config,
            records: Vec::new(),
            classicality: Vec::new(),
            tau_patterns: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, records: Vec<CheckRecord>) {
        self.records.extend(records);
    }

    /// Sort records, recompute the summary, and stamp the time unless the
    /// run is deterministic.
    pub fn finalize(&mut self) {
        self.records.sort_by(|a, b| a.name.cmp(&b.name));
        let passed = self.records.iter().filter(|r| r.pass).count();
        self.summary = Summary {
            total: self.records.len(),
            passed,
            failed: self.records.len() - passed,
        };
        self.timestamp = if self.config.deterministic {
            None
        } else {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs())
        };
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,identity,max_deviation,tolerance,pass,note\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{:e},{:e},{},{}\n",
                csv_field(&r.name),
                csv_field(&r.identity),
                r.max_deviation,
                r.tolerance,
                r.pass,
                csv_field(r.note.as_deref().unwrap_or("")),
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} report (seed {}, trials {})\n",
            self.config.command, self.config.seed, self.config.trials
        ));
        for r in &self.records {
            let status = if r.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status}  {}  max deviation {:e} (tolerance {:e})",
                r.name, r.max_deviation, r.tolerance
            ));
            if let Some(note) = &r.note {
                out.push_str(&format!("  [{note}]"));
            }
            out.push('\n');
        }
        for c in &self.classicality {
            let kind = if c.is_classical { "classical" } else { "quantum" };
            let witness = match c.witness_column {
                Some(w) => format!(", witness column {w}"),
                None => String::new(),
            };
            out.push_str(&format!(
                "CLASS {}  {kind}{witness}, {} Kraus operators, fixed-point dimension {}\n",
                c.operation, c.kraus_operators, c.fixed_point_dimension
            ));
        }
        if !self.tau_patterns.is_empty() {
            out.push_str(&format!(
                "transmitted patterns: {}\n",
                self.tau_patterns.join(" ")
            ));
        }
        out.push_str(&format!(
            "{} checks: {} passed, {} failed\n",
            self.summary.total, self.summary.passed, self.summary.failed
        ));
        out
    }

    pub fn render(&self, format: &str) -> Result<String> {
        match format {
            "json" => self.to_json(),
            "csv" => Ok(self.to_csv()),
            "text" => Ok(self.to_text()),
            other => Err(Error::InvalidArgument(format!(
                "unknown format '{other}' (expected json, csv, or text)"
            ))),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Merge several reports into one (used by the aggregation command): records
/// are concatenated and re-sorted, classicality and pattern sections are
/// concatenated, and the summary is recomputed under the given config.
pub fn merge_reports(config: RunConfig, parts: &[VerificationReport]) -> VerificationReport {
    let mut merged = VerificationReport::new(config);
    for part in parts {
        merged.records.extend(part.records.iter().cloned());
        merged
            .classicality
            .extend(part.classicality.iter().cloned());
        merged.tau_patterns.extend(part.tau_patterns.iter().cloned());
    }
    merged.finalize();
    merged
}

fn ensemble<F>(name: &str, identity: &str, tol: f64, trials: usize, f: F) -> Result<CheckRecord>
where
    F: FnOnce() -> Result<f64>,
{
    if trials == 0 {
        return Ok(CheckRecord::vacuous(name, identity, tol));
    }
    Ok(CheckRecord::measured(name, identity, f()?, tol))
}

/// Copying identity for the n-level machine: both reduced outputs report a
/// fresh random diagonal observable with the input's expectation value.
pub fn check_cloning<T: Scalar>(
    n: usize,
    seed: u64,
    trials: usize,
    tol: f64,
) -> Result<CheckRecord> {
    let name = format!("clone/translation-{n}");
    let identity = "Tr(rho_i theta) = Tr(rho theta) for both outputs; theta diagonal";
    ensemble(&name, identity, tol, trials, || {
        let u = build_un::<T>(n)?;
        cloning_deviation(&u, seed, trials)
    })
}

/// Largest copying-identity deviation for an arbitrary cloner over random
/// states and random diagonal observables.
pub fn cloning_deviation<T: Scalar>(u: &CloningUnitary<T>, seed: u64, trials: usize) -> Result<f64> {
    let n = u.local_dim();
    let mut sampler = StateSampler::new(seed);
    let mut max_dev = 0.0f64;
    for _ in 0..trials {
        let rho = sampler.random_density::<T>(n);
        let theta = sampler.random_diagonal_observable::<T>(n);
        let reference = rho.expectation(&theta)?.re.as_f64();
        let out = u.clone_state(&rho)?;
        for site in 0..2usize {
            let reduced = partial_trace(&out, &[n, n], &[site])?;
            let got = reduced.expectation(&theta)?.re.as_f64();
            max_dev = max_dev.max((got - reference).abs());
        }
    }
    Ok(max_dev)
}

/// Transmission identity for the n-level machine with the full exchange
/// pattern.
pub fn check_transmission<T: Scalar>(
    n: usize,
    seed: u64,
    trials: usize,
    tol: f64,
) -> Result<CheckRecord> {
    let name = format!("transmit/translation-{n}");
    let identity = "Tr(rho_out tau x tau) = Tr(rho tau); tau the full exchange pattern";
    ensemble(&name, identity, tol, trials, || {
        let u = build_un::<T>(n)?;
        transmission_deviation(&u, &exchange_tau(n), seed, trials)
    })
}

/// Full two-level statistics: the diagonal observable individually, and the
/// two exchange-type products globally.
pub fn check_full_statistics<T: Scalar>(
    seed: u64,
    trials: usize,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    let u = build_un::<T>(2)?;
    let sz: Matrix<T> = Matrix::pauli_z();
    let sx: Matrix<T> = Matrix::pauli_x();
    let sy: Matrix<T> = Matrix::pauli_y();
    let xx = sx.tensor(&sx)?;
    let yx = sy.tensor(&sx)?;

    let mut dev_z = 0.0f64;
    let mut dev_xx = 0.0f64;
    let mut dev_yx = 0.0f64;
    let mut sampler = StateSampler::new(seed);
    for _ in 0..trials {
        let rho = sampler.random_density::<T>(2);
        let out = u.clone_state(&rho)?;
        let ref_z = rho.expectation(&sz)?.re.as_f64();
        for site in 0..2usize {
            let reduced = partial_trace(&out, &[2, 2], &[site])?;
            dev_z = dev_z.max((reduced.expectation(&sz)?.re.as_f64() - ref_z).abs());
        }
        let got_xx = out.expectation(&xx)?.re.as_f64();
        dev_xx = dev_xx.max((got_xx - rho.expectation(&sx)?.re.as_f64()).abs());
        let got_yx = out.expectation(&yx)?.re.as_f64();
        dev_yx = dev_yx.max((got_yx - rho.expectation(&sy)?.re.as_f64()).abs());
    }
    let vacuous = trials == 0;
    let build = |name: &str, identity: &str, dev: f64| {
        if vacuous {
            CheckRecord::vacuous(name, identity, tol)
        } else {
            CheckRecord::measured(name, identity, dev, tol)
        }
    };
    Ok(vec![
        build(
            "statistics/individual-z",
            "each output reports the diagonal component of the input",
            dev_z,
        ),
        build(
            "statistics/global-xx",
            "the x (x) x product reports the real off-diagonal component",
            dev_xx,
        ),
        build(
            "statistics/global-yx",
            "the y (x) x product reports the imaginary off-diagonal component",
            dev_yx,
        ),
    ])
}

/// Sequential generations on two-level individuals: every single-site
/// marginal shares the input's diagonal expectation, and the all-sites x
/// product reports the input's x expectation.
pub fn check_generations<T: Scalar>(
    g_max: u32,
    seed: u64,
    trials: usize,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    let mut records = Vec::new();
    let sz: Matrix<T> = Matrix::pauli_z();
    let sx: Matrix<T> = Matrix::pauli_x();
    for g in 1..=g_max {
        // The deepest generation works in dimension 2^(2^g); keep its trial
        // count small so the suite stays fast.
        let capped = if g >= 3 { trials.min(2) } else { trials.min(10) };
        let name_z = format!("generations/g{g}-individual-z");
        let name_x = format!("generations/g{g}-global-x");
        let identity_z = "every single-site marginal reports the input diagonal expectation";
        let identity_x = "the all-sites x product reports the input x expectation";
        if capped == 0 {
            records.push(CheckRecord::vacuous(&name_z, identity_z, tol));
            records.push(CheckRecord::vacuous(&name_x, identity_x, tol));
            continue;
        }

        // Cache the step unitaries once.
        let steps: Vec<Unitary<T>> = (1..=g)
            .map(|k| generation_step::<T>(2, 1usize << k))
            .collect::<Result<_>>()?;
        let sites = 1usize << g;
        let x_all = {
            let factors: Vec<&Matrix<T>> = std::iter::repeat(&sx).take(sites).collect();
            Matrix::tensor_all(&factors)?
        };
        let dims = vec![2usize; sites];

        let mut dev_z = 0.0f64;
        let mut dev_x = 0.0f64;
        let mut sampler = StateSampler::new(seed);
        for _ in 0..capped {
            let rho0 = sampler.random_density::<T>(2);
            let ref_z = rho0.expectation(&sz)?.re.as_f64();
            let ref_x = rho0.expectation(&sx)?.re.as_f64();
            let mut state = rho0;
            for (k, step) in steps.iter().enumerate() {
                let blanks = blank_state::<T>(1usize << (1usize << k));
                state = step.apply_to_density(&state.tensor(&blanks)?)?;
            }
            for site in 0..sites {
                let marginal = partial_trace(&state, &dims, &[site])?;
                dev_z = dev_z.max((marginal.expectation(&sz)?.re.as_f64() - ref_z).abs());
            }
            dev_x = dev_x.max((state.expectation(&x_all)?.re.as_f64() - ref_x).abs());
        }
        records.push(CheckRecord::measured(&name_z, identity_z, dev_z, tol));
        records.push(CheckRecord::measured(&name_x, identity_x, dev_x, tol));
    }
    Ok(records)
}

/// Composite machines: the copying identity on the product-dimension
/// individuals, plus structural distinctness from the plain machine of the
/// same dimension.
pub fn check_composite<T: Scalar>(
    k: usize,
    l: usize,
    seed: u64,
    trials: usize,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    let c = build_composite::<T>(k, l)?;
    let name = format!("composite/{k}x{l}-clone");
    let identity = "Tr(rho_i theta) = Tr(rho theta) for both outputs of the two-factor machine";
    let clone_record = if trials == 0 {
        CheckRecord::vacuous(&name, identity, tol)
    } else {
        CheckRecord::measured(&name, identity, cloning_deviation(&c, seed, trials)?, tol)
    };

    let plain = build_un::<T>(k * l)?;
    let gap = c
        .unitary
        .matrix()
        .max_abs_diff(plain.unitary.matrix())
        .as_f64();
    let shortfall = (0.5 - gap).max(0.0);
    let distinct = CheckRecord::measured(
        &format!("composite/{k}x{l}-distinct"),
        "the two-factor machine differs from the plain machine by at least 0.5 in some entry",
        shortfall,
        0.0,
    )
    .with_note(&format!("largest entry difference {gap:.3}"));
    Ok(vec![clone_record, distinct])
}

/// Spectrum, degeneracy bookkeeping, and the block-sorting flip.
pub fn check_lemma<T: Scalar>(dims: &[usize]) -> Result<Vec<CheckRecord>> {
    let mut records = Vec::new();
    for &d in dims {
        let report = lemma_spectrum_check(&exchange_tau::<T>(d))?;
        records.push(
            CheckRecord::measured(
                &format!("lemma/spectrum-{d}"),
                "the full exchange pattern splits evenly into +1 and -1 with no kernel",
                report.max_rounding_error,
                SPECTRUM_ROUNDING_TOL,
            )
            .with_note(&format!(
                "multiplicities (+1, 0, -1) = ({}, {}, {}), satisfies: {}",
                report.plus_one, report.zero, report.minus_one, report.satisfies_lemma
            )),
        );
        if !report.satisfies_lemma {
            let last = records.last_mut().expect("just pushed");
            last.pass = false;
        }

        let solutions = scan_degeneracy_solutions(d);
        let expected = vec![(0, d, 0), (d / 2, 0, d / 2), (d, 0, 0)];
        let matches = solutions == expected;
        records.push(
            CheckRecord::measured(
                &format!("lemma/degeneracy-scan-{d}"),
                "the integer degeneracy equations admit exactly the trivial and even-split solutions",
                if matches { 0.0 } else { 1.0 },
                0.0,
            )
            .with_note(&format!("solutions: {solutions:?}")),
        );
    }
    for d in [2usize, 4] {
        let f = build_flip_operator::<T>(d)?;
        let s = half_space_sign::<T>(d)?;
        let product = s.tensor(&s)?;
        let sorted = f.conjugate(&product)?;
        let expected = half_space_sign::<T>(d * d)?;
        records.push(CheckRecord::measured(
            &format!("lemma/flip-{d}"),
            "conjugating the product sign by the flip yields the plain half-space sign",
            sorted.max_abs_diff(&expected).as_f64(),
            crate::TOL_STRUCT,
        ));
    }
    Ok(records)
}

/// Rotated-basis identities for the two-level machine: random diagonal
/// observables (conjugated) for copying, the exchange pattern (conjugated)
/// for transmission.
pub fn check_rotated<T: Scalar>(
    rotation_name: &str,
    seed: u64,
    trials: usize,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    let base = build_un::<T>(2)?;
    let r = preset_rotation::<T>(rotation_name, 2, seed)?;
    let pair = ObservablePair::new(Matrix::pauli_z(), exchange_tau(2))?;
    let setup = rotate_setup(&base, &pair, &r)?;

    let clone_name = format!("rotated/{rotation_name}-clone");
    let clone_identity =
        "both outputs report conjugated diagonal observables with the input expectation";
    let clone_record = if trials == 0 {
        CheckRecord::vacuous(&clone_name, clone_identity, tol)
    } else {
        let dev = rotated_cloning_deviation(&base, &r, seed, trials)?;
        CheckRecord::measured(&clone_name, clone_identity, dev, tol)
    };

    let transmit_name = format!("rotated/{rotation_name}-transmit");
    let transmit_identity =
        "the conjugated exchange product reports the input's conjugated exchange expectation";
    let transmit_record = if trials == 0 {
        CheckRecord::vacuous(&transmit_name, transmit_identity, tol)
    } else {
        CheckRecord::measured(
            &transmit_name,
            transmit_identity,
            setup.transmission_deviation(seed, trials)?,
            tol,
        )
    };
    Ok(vec![clone_record, transmit_record])
}

/// Copying-identity deviation in a rotated basis with a fresh random
/// diagonal observable per trial.
pub fn rotated_cloning_deviation<T: Scalar>(
    base: &CloningUnitary<T>,
    r: &Unitary<T>,
    seed: u64,
    trials: usize,
) -> Result<f64> {
    let n = base.local_dim();
    let rotated = base.with_rotation(r.clone())?;
    let rd = r.matrix().dagger();
    let mut sampler = StateSampler::new(seed);
    let mut max_dev = 0.0f64;
    for _ in 0..trials {
        let rho = sampler.random_density::<T>(n);
        let theta = sampler.random_diagonal_observable::<T>(n);
        let theta_rot = &(&rd * &theta) * r.matrix();
        let reference = rho.expectation(&theta_rot)?.re.as_f64();
        let out = rotated.clone_state(&rho)?;
        for site in 0..2usize {
            let reduced = partial_trace(&out, &[n, n], &[site])?;
            let got = reduced.expectation(&theta_rot)?.re.as_f64();
            max_dev = max_dev.max((got - reference).abs());
        }
    }
    Ok(max_dev)
}

/// Pulse-level checks: the gate library closes, the compiled controlled-NOT
/// and generation circuits evaluate to their abstract targets, and the
/// three-level embedding decomposes block by block.
pub fn check_pulses<T: Scalar>(tol: f64) -> Result<Vec<CheckRecord>> {
    let mut records = Vec::new();

    match build_gate_library::<T>() {
        Ok(lib) => {
            records.push(
                CheckRecord::measured(
                    "pulses/library",
                    "every single-ion expansion closes and one entangling variant fits",
                    lib.conventions.cnot_phase_deviation,
                    tol,
                )
                .with_note(&format!(
                    "carrier {}, entangling {}",
                    lib.conventions.carrier_sign, lib.conventions.ms_variant
                )),
            );
        }
        Err(e) => {
            records.push(CheckRecord::failure(
                "pulses/library",
                "every single-ion expansion closes and one entangling variant fits",
                tol,
                &e.to_string(),
            ));
        }
    }

    let cnot_program = compile_cnot(1, 2)?;
    let cnot = evaluate_program::<T>(&cnot_program)?;
    let mut target = Matrix::<T>::identity(4);
    target[(2, 2)] = crate::scalar::czero();
    target[(3, 3)] = crate::scalar::czero();
    target[(2, 3)] = crate::scalar::cone();
    target[(3, 2)] = crate::scalar::cone();
    records.push(CheckRecord::measured(
        "pulses/cnot",
        "the emitted pulse sequence multiplies back to the controlled-NOT",
        cnot.matrix().deviation_up_to_phase(&target).as_f64(),
        tol,
    ));

    for g in 1..=2u32 {
        let program = compile_generation(g, RegisterKind::Qubit)?;
        let compiled = evaluate_program::<T>(&program)?;
        let abstract_u = generation_circuit_unitary::<T>(g)?;
        records.push(CheckRecord::measured(
            &format!("pulses/generation-qubit-g{g}"),
            "the compiled generation circuit equals the abstract circuit up to global phase",
            compiled
                .matrix()
                .deviation_up_to_phase(abstract_u.matrix())
                .as_f64(),
            tol,
        ));
    }

    let c12 = {
        let mut m = Matrix::<T>::identity(4);
        m[(2, 2)] = crate::scalar::czero();
        m[(3, 3)] = crate::scalar::czero();
        m[(2, 3)] = crate::scalar::cone();
        m[(3, 2)] = crate::scalar::cone();
        m
    };
    let c21 = {
        let mut m = Matrix::<T>::identity(4);
        m[(1, 1)] = crate::scalar::czero();
        m[(3, 3)] = crate::scalar::czero();
        m[(1, 3)] = crate::scalar::cone();
        m[(3, 1)] = crate::scalar::cone();
        m
    };
    let forward = &c12 * &c21;
    let backward = &c21 * &c12;
    let dev_blocks = forward
        .max_abs_diff(&qutrit_block::<T>(2))
        .as_f64()
        .max(backward.max_abs_diff(&qutrit_block::<T>(3)).as_f64());
    records.push(CheckRecord::measured(
        "pulses/qutrit-blocks",
        "each nontrivial embedding block is a product of the two controlled-NOTs",
        dev_blocks,
        0.0,
    ));

    let program = compile_generation(1, RegisterKind::Qutrit)?;
    let compiled = evaluate_program::<T>(&program)?;
    let expected = Matrix::<T>::identity(4).tensor(&qutrit_block::<T>(2))?;
    records.push(CheckRecord::measured(
        "pulses/qutrit-step",
        "the compiled three-level step equals the pair permutation up to global phase",
        compiled.matrix().deviation_up_to_phase(&expected).as_f64(),
        tol,
    ));

    Ok(records)
}

/// Gate accounting against the reference per-generation tallies.
pub fn check_resources(kind: RegisterKind) -> Result<Vec<CheckRecord>> {
    let expected: &[(u32, usize, usize, usize)] = match kind {
        RegisterKind::Qubit => &[(0, 1, 0, 0), (1, 2, 19, 2), (2, 4, 57, 6), (3, 8, 133, 14)],
        RegisterKind::Qutrit => &[(0, 2, 0, 0), (1, 4, 38, 4), (2, 8, 114, 12)],
    };
    let rows = resource_table(kind)?;
    let mut records = Vec::new();
    for ((g, ions, total, two), row) in expected.iter().zip(rows.iter()) {
        let gap = (row.ions.abs_diff(*ions)
            + row.total_gates.abs_diff(*total)
            + row.two_qubit_gates.abs_diff(*two)) as f64;
        records.push(
            CheckRecord::measured(
                &format!("resources/{kind}-g{g}"),
                "compiled gate tallies match the reference accounting",
                gap,
                0.0,
            )
            .with_note(&format!(
                "ions {}, gates {}({})",
                row.ions, row.total_gates, row.two_qubit_gates
            )),
        );
    }
    Ok(records)
}

/// Resolve a target name to its machine. Accepted names: `cnot`,
/// `translation-<n>`, `composite-<k>-<l>`, and `hadamard-basis`.
pub fn named_cloner<T: Scalar>(name: &str) -> Result<CloningUnitary<T>> {
    if name == "cnot" {
        return build_un::<T>(2);
    }
    if name == "hadamard-basis" {
        return build_un::<T>(2)?.with_rotation(preset_rotation::<T>("hadamard", 2, 0)?);
    }
    if let Some(rest) = name.strip_prefix("translation-") {
        let n: usize = rest.parse().map_err(|_| {
            Error::InvalidArgument(format!("bad dimension in target '{name}'"))
        })?;
        return build_un::<T>(n);
    }
    if let Some(rest) = name.strip_prefix("composite-") {
        let parts: Vec<&str> = rest.split('-').collect();
        if parts.len() == 2 {
            let k = parts[0].parse().ok();
            let l = parts[1].parse().ok();
            if let (Some(k), Some(l)) = (k, l) {
                return build_composite::<T>(k, l);
            }
        }
        return Err(Error::InvalidArgument(format!(
            "bad factors in target '{name}' (expected composite-<k>-<l>)"
        )));
    }
    Err(Error::InvalidArgument(format!(
        "unknown target '{name}' (expected cnot, translation-<n>, composite-<k>-<l>, \
         or hadamard-basis)"
    )))
}

/// Classify one named target and extract its reduced channel.
pub fn classify_target<T: Scalar>(name: &str) -> Result<ClassicalityRecord> {
    let cloner = named_cloner::<T>(name)?;
    let effective = cloner.effective_unitary()?;
    let verdict = classify_operation(&effective);
    let channel = extract_reduced_channel(&cloner, Subsystem::First)?;
    Ok(ClassicalityRecord {
        operation: name.into(),
        is_classical: verdict.is_classical,
        witness_column: verdict.witness,
        kraus_operators: channel.count_nonzero(),
        fixed_point_dimension: channel.fixed_point_dimension(),
    })
}

/// Classify the standard operations and extract their reduced channels.
pub fn classicality_suite<T: Scalar>() -> Result<Vec<ClassicalityRecord>> {
    let mut names = vec!["cnot".to_string()];
    for n in 3..=6 {
        names.push(format!("translation-{n}"));
    }
    names.push("composite-2-3".into());
    names.push("hadamard-basis".into());
    names.iter().map(|name| classify_target::<T>(name)).collect()
}

/// The default full suite: copying and transmission across dimensions,
/// two-level statistics, sequential generations, composite machines, the
/// spectrum lemma material, rotated bases, pulse compilation, and gate
/// accounting, plus classicality verdicts.
pub fn default_suite<T: Scalar>(config: &RunConfig) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(config.clone());
    let seed = config.seed;
    let trials = config.trials;
    let tol = config.tolerance;

    let dims: Vec<usize> = match config.n {
        Some(n) => vec![n],
        None => vec![2, 3, 4, 5, 6],
    };
    for &n in &dims {
        report.push(check_cloning::<T>(n, seed, trials, tol)?);
        if n % 2 == 0 {
            report.push(check_transmission::<T>(n, seed, trials, tol)?);
        }
    }
    if dims.contains(&2) {
        report.extend(check_full_statistics::<T>(seed, trials, tol)?);
    }

    let g_max = config.generations.unwrap_or(3).min(3);
    if g_max >= 1 {
        report.extend(check_generations::<T>(g_max, seed, trials, tol)?);
    }

    let (k, l) = config.composite.unwrap_or((2, 3));
    report.extend(check_composite::<T>(k, l, seed, trials, tol)?);

    report.extend(check_lemma::<T>(&[2, 4, 6, 8])?);

    let rotations: Vec<String> = match &config.rotation {
        Some(r) => vec![r.clone()],
        None => vec!["identity".into(), "hadamard".into(), "random".into()],
    };
    for r in &rotations {
        report.extend(check_rotated::<T>(r, seed, trials, tol)?);
    }

    report.extend(check_pulses::<T>(tol)?);
    report.extend(check_resources(RegisterKind::Qubit)?);
    report.extend(check_resources(RegisterKind::Qutrit)?);

    report.classicality = classicality_suite::<T>()?;
    report.finalize();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_measure_against_tolerance() {
        let r = CheckRecord::measured("a", "b", 1e-12, 1e-10);
        assert!(r.pass);
        let r = CheckRecord::measured("a", "b", 1e-9, 1e-10);
        assert!(!r.pass);
    }

    #[test]
    fn vacuous_records_flag_missing_trials() {
        let r = CheckRecord::vacuous("a", "b", 1e-10);
        assert!(r.pass);
        assert_eq!(r.note.as_deref(), Some("no trials executed"));
    }

    #[test]
    fn finalize_sorts_and_counts() {
        let mut report = VerificationReport::new(RunConfig::new("verify"));
        report.push(CheckRecord::measured("z", "", 0.0, 1.0));
        report.push(CheckRecord::measured("a", "", 2.0, 1.0));
        report.finalize();
        assert_eq!(report.records[0].name, "a");
        assert_eq!(report.summary.total, 2);
        assert_eq!(report.summary.passed, 1);
        assert_eq!(report.summary.failed, 1);
        assert!(!report.all_pass());
    }

    #[test]
    fn deterministic_reports_have_no_timestamp() {
        let mut config = RunConfig::new("verify");
        config.deterministic = true;
        let mut report = VerificationReport::new(config);
        report.finalize();
        assert_eq!(report.timestamp, None);
        let json = report.to_json().unwrap();
        let back = VerificationReport::from_json(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn csv_escapes_fields() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn small_suite_passes() {
        let mut config = RunConfig::new("verify");
        config.n = Some(2);
        config.trials = 5;
        config.generations = Some(1);
        config.deterministic = true;
        let report = default_suite::<f64>(&config).unwrap();
        assert!(report.all_pass(), "{}", report.to_text());
        assert!(!report.classicality.is_empty());
    }

    #[test]
    fn zero_trials_pass_vacuously() {
        let mut config = RunConfig::new("verify");
        config.n = Some(2);
        config.trials = 0;
        config.generations = Some(1);
        config.deterministic = true;
        let report = default_suite::<f64>(&config).unwrap();
        assert!(report.all_pass());
        assert!(report
            .records
            .iter()
            .any(|r| r.note.as_deref() == Some("no trials executed")));
    }

    #[test]
    fn merged_reports_concatenate_records() {
        let mut a = VerificationReport::new(RunConfig::new("verify"));
        a.push(CheckRecord::measured("x", "", 0.0, 1.0));
        a.finalize();
        let mut b = VerificationReport::new(RunConfig::new("verify"));
        b.push(CheckRecord::measured("y", "", 0.0, 1.0));
        b.finalize();
        let merged = merge_reports(RunConfig::new("report"), &[a, b]);
        assert_eq!(merged.summary.total, 2);
    }
}
