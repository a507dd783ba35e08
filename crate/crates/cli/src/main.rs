//! Command-line front end: verification reports, state cloning, pulse
//! compilation, channel classification, and pattern searches.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage
//! or runtime errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use clonesim_core::cloning::{next_generation, qudit_next_generation, GenerationState};
use clonesim_core::ion::{compile_generation, RegisterKind};
use clonesim_core::observables::search_tau;
use clonesim_core::random::{StateSampler, DEFAULT_SEED};
use clonesim_core::rotation::preset_rotation;
use clonesim_core::verify::{
    classicality_suite, classify_target, default_suite, merge_reports, RunConfig,
    VerificationReport,
};

#[derive(Parser)]
#[command(
    name = "clonesim",
    version,
    about = "Simulate and verify observable-copying machines",
    propagate_version = true
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Random seed; overrides the CLONESIM_SEED environment variable.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Random trials per ensemble check (0 passes vacuously).
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,

    /// Tolerance applied to the ensemble checks.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tolerance: f64,

    /// Omit the timestamp so identical runs produce identical bytes.
    #[arg(long, global = true)]
    deterministic: bool,

    /// Report format (compile and clone always emit JSON).
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the rendered output to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Qubit,
    Qutrit,
}

impl From<KindArg> for RegisterKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Qubit => RegisterKind::Qubit,
            KindArg::Qutrit => RegisterKind::Qutrit,
        }
    }
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split([',', 'x']).collect();
    if parts.len() != 2 {
        return Err(format!("expected K,L or KxL, got '{s}'"));
    }
    let k = parts[0].trim().parse().map_err(|_| format!("bad factor '{}'", parts[0]))?;
    let l = parts[1].trim().parse().map_err(|_| format!("bad factor '{}'", parts[1]))?;
    Ok((k, l))
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites and render a report.
    Verify {
        /// Restrict the copying checks to one local dimension (default 2..=6).
        #[arg(long)]
        n: Option<usize>,

        /// Deepest sequential generation to verify, at most 3.
        #[arg(long)]
        generations: Option<u32>,

        /// Composite machine to verify, as K,L or KxL (default 2,3).
        #[arg(long, value_parser = parse_pair)]
        composite: Option<(usize, usize)>,

        /// Verify one rotation preset (identity, hadamard, random) instead
        /// of all three.
        #[arg(long)]
        rotation: Option<String>,
    },

    /// Clone a seeded random state through sequential generations and dump
    /// every register state as JSON.
    Clone {
        /// Local dimension of the individuals.
        #[arg(long, default_value_t = 2)]
        n: usize,

        /// Number of generations (at most 3 for n = 2, at most 1 otherwise).
        #[arg(long, default_value_t = 1)]
        generations: u32,
    },

    /// Compile cloning generations to an ion pulse program (JSON).
    Compile {
        /// Number of generations; 0 gives the empty program.
        #[arg(long, default_value_t = 1)]
        generations: u32,

        /// Register encoding.
        #[arg(long, value_enum, default_value_t = KindArg::Qubit)]
        kind: KindArg,
    },

    /// Classify operations as classical or quantum and extract their
    /// channels.
    Classify {
        /// cnot, translation-<n>, composite-<k>-<l>, hadamard-basis, or all.
        #[arg(long, default_value = "all")]
        target: String,
    },

    /// Search the antidiagonal patterns a machine transmits.
    TauSearch {
        /// Local dimension of the individuals.
        #[arg(long, default_value_t = 2)]
        n: usize,

        /// Optional rotation preset applied to the machine first.
        #[arg(long)]
        rotation: Option<String>,
    },

    /// Merge previously written JSON reports into one.
    Report {
        /// Paths of JSON reports to merge.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> anyhow::Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("CLONESIM_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .with_context(|| format!("CLONESIM_SEED is not an unsigned integer: '{text}'")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn base_config(command: &str, common: &Common) -> anyhow::Result<RunConfig> {
    let mut config = RunConfig::new(command);
    config.seed = resolve_seed(common.seed)?;
    config.trials = common.trials;
    config.tolerance = common.tolerance;
    config.deterministic = common.deterministic;
    config.format = common.format.as_str().into();
    Ok(config)
}

fn emit(text: &str, common: &Common) -> anyhow::Result<()> {
    match &common.output {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write output file {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_report(report: &VerificationReport, common: &Common) -> anyhow::Result<ExitCode> {
    let rendered = report.render(common.format.as_str())?;
    emit(&rendered, common)?;
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let common = &cli.common;
    match cli.command {
        Command::Verify {
            n,
            generations,
            composite,
            rotation,
        } => {
            let mut config = base_config("verify", common)?;
            config.n = n;
            config.generations = generations;
            config.composite = composite;
            config.rotation = rotation;
            let report = default_suite::<f64>(&config)?;
            emit_report(&report, common)
        }

        Command::Clone { n, generations } => {
            let seed = resolve_seed(common.seed)?;
            let mut sampler = StateSampler::new(seed);
            let rho = sampler.random_density::<f64>(n);
            let mut gs = GenerationState::initial(n, rho)?;
            let mut states = vec![serde_json::json!({
                "generation": gs.generation,
                "individuals": gs.num_individuals(),
                "state": serde_json::to_value(&gs.state)?,
            })];
            for _ in 0..generations {
                gs = if n == 2 {
                    next_generation(&gs)?
                } else {
                    qudit_next_generation(&gs, n)?
                };
                states.push(serde_json::json!({
                    "generation": gs.generation,
                    "individuals": gs.num_individuals(),
                    "state": serde_json::to_value(&gs.state)?,
                }));
            }
            let doc = serde_json::json!({
                "command": "clone",
                "n": n,
                "seed": seed,
                "states": states,
            });
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            emit(&text, common)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Compile { generations, kind } => {
            let program = compile_generation(generations, kind.into())?;
            let text = program.to_json_string()?;
            emit(&text, common)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Classify { target } => {
            let mut config = base_config("classify", common)?;
            config.kind = Some(target.clone());
            let mut report = VerificationReport::new(config);
            report.classicality = if target == "all" {
                classicality_suite::<f64>()?
            } else {
                vec![classify_target::<f64>(&target)?]
            };
            report.finalize();
            emit_report(&report, common)
        }

        Command::TauSearch { n, rotation } => {
            let mut config = base_config("tau-search", common)?;
            config.n = Some(n);
            config.rotation = rotation.clone();
            let seed = config.seed;
            let mut machine = clonesim_core::cloning::build_un::<f64>(n)?;
            if let Some(name) = &rotation {
                machine = machine.with_rotation(preset_rotation::<f64>(name, n, seed)?)?;
            }
            let candidates = search_tau(&machine, n)?;
            let mut report = VerificationReport::new(config);
            report.tau_patterns = candidates.iter().map(|c| c.pattern.clone()).collect();
            report.finalize();
            emit_report(&report, common)
        }

        Command::Report { inputs } => {
            let mut parts = Vec::with_capacity(inputs.len());
            for path in &inputs {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("cannot read report {}", path.display()))?;
                parts.push(
                    VerificationReport::from_json(&text)
                        .with_context(|| format!("cannot parse report {}", path.display()))?,
                );
            }
            let config = base_config("report", common)?;
            let merged = merge_reports(config, &parts);
            emit_report(&merged, common)
        }
    }
}
