//! Command-line front end: `simulate`, `map`, `sweep`, `verify`, `transfer`,
//! `calibrate`. One command per process, machine-readable output, and
//! identical flags (seed included) always produce byte-identical files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::{
    default_calibration, fit_default_calibration, report_to_csv, summarize_with,
    CalibrationAnchors, DeviceCalibration, FITTED_DEFAULT_SOURCE,
};
use crate::error::{Error, Result};
use crate::hdc::{encode, generate_encoding, matvec_oracle, sweep_accuracy, SyntheticTask};
use crate::link::comparison_table;
use crate::mapper::{map_conv, map_encoder, map_fc, plan_network, MappingPlan};
use crate::model::{resnet18_preset, validate_memory, LayerSpec, NetworkSpec, OCBGeometry, PrecisionConfig};
use crate::photonics::arm_mac;
use crate::scheduler::{
    cycle_walk_oracle, schedule_nru_with, schedule_ru_with, ScheduleOptions, TuningMode,
};

/// Precisions every sweep reports: hardware activation widths plus the
/// full-precision reference column.
pub const SWEEP_PRECISIONS: [u32; 3] = [4, 8, 32];

pub const DEFAULT_SWEEP_DIMS: [usize; 3] = [64, 512, 1024];
const DEFAULT_TRANSFER_DIMS: [usize; 4] = [512, 1024, 2048, 8192];
pub const DEFAULT_SWEEP_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Simulate,
    Map,
    Sweep,
    Verify,
    Transfer,
    Calibrate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

/// Everything one invocation needs; the clap layer is a thin translation
/// onto this.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub network: Option<String>,
    pub calibration: Option<PathBuf>,
    pub mode: Option<TuningMode>,
    pub precision: Option<PrecisionConfig>,
    pub dims: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: Option<u64>,
}

fn parse_precision(s: &str) -> Result<PrecisionConfig> {
    PrecisionConfig::parse(s)
}

fn parse_mode(s: &str) -> Result<TuningMode> {
    TuningMode::from_str(s)
}

#[derive(Parser)]
#[command(
    name = "optcore",
    version,
    about = "Event-level simulator for a near-sensor photonic neuro-symbolic accelerator"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a network end to end and write the energy/latency report.
    Simulate {
        /// Network JSON file, or a preset name (`resnet18`).
        #[arg(long)]
        network: String,
        /// Calibration JSON file (defaults to the fitted default).
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Weight-tuning discipline.
        #[arg(long, value_parser = parse_mode)]
        mode: TuningMode,
        /// Precision as W:A (overrides the network's own setting).
        #[arg(long, value_parser = parse_precision)]
        precision: Option<PrecisionConfig>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Recorded in the report header for traceability.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Emit the per-layer mapping plans as JSON.
    Map {
        #[arg(long)]
        network: String,
        #[arg(long, value_parser = parse_precision)]
        precision: Option<PrecisionConfig>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Run the synthetic-task accuracy sweep over hypervector dimensions.
    Sweep {
        /// Hypervector dimensions, comma separated.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        #[arg(long, default_value_t = DEFAULT_SWEEP_SEED)]
        seed: u64,
    },
    /// Run the oracle-equivalence suites and report pass/fail counts.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the image-vs-hypervector uplink cost table.
    Transfer {
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Per-element width taken from the activation side of W:A.
        #[arg(long, value_parser = parse_precision)]
        precision: Option<PrecisionConfig>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Fit the default calibration from the anchor totals and write it.
    Calibrate {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
}

impl Cli {
    fn into_config(self) -> RunConfig {
        let empty = RunConfig {
            command: CommandKind::Verify,
            network: None,
            calibration: None,
            mode: None,
            precision: None,
            dims: None,
            out: None,
            format: OutputFormat::Json,
            seed: None,
        };
        match self.command {
            Command::Simulate {
                network,
                calibration,
                mode,
                precision,
                out,
                format,
                seed,
            } => RunConfig {
                command: CommandKind::Simulate,
                network: Some(network),
                calibration,
                mode: Some(mode),
                precision,
                out,
                format,
                seed,
                ..empty
            },
            Command::Map {
                network,
                precision,
                out,
                format,
            } => RunConfig {
                command: CommandKind::Map,
                network: Some(network),
                precision,
                out,
                format,
                ..empty
            },
            Command::Sweep {
                dims,
                out,
                format,
                seed,
            } => RunConfig {
                command: CommandKind::Sweep,
                dims,
                out,
                format,
                seed: Some(seed),
                ..empty
            },
            Command::Verify { seed } => RunConfig {
                command: CommandKind::Verify,
                seed: Some(seed),
                ..empty
            },
            Command::Transfer {
                dims,
                calibration,
                precision,
                out,
                format,
            } => RunConfig {
                command: CommandKind::Transfer,
                dims,
                calibration,
                precision,
                out,
                format,
                ..empty
            },
            Command::Calibrate { out, format } => RunConfig {
                command: CommandKind::Calibrate,
                out,
                format,
                ..empty
            },
        }
    }
}

/// Resolves `--network`: a preset name first, then a path.
pub fn resolve_network(name: &str, precision: Option<PrecisionConfig>) -> Result<NetworkSpec> {
    if name == "resnet18" {
        let net = resnet18_preset(precision.unwrap_or(PrecisionConfig::new(3, 4)), 1024);
        net.validate()?;
        return Ok(net);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(Error::Validation(format!(
            "network {name:?} is neither a readable file nor a known preset (presets: resnet18)"
        )));
    }
    let mut net = NetworkSpec::load(path)?;
    if let Some(p) = precision {
        net.precision = p;
        net.validate()?;
    }
    Ok(net)
}

fn load_calibration(path: Option<&Path>) -> Result<(DeviceCalibration, String)> {
    match path {
        Some(p) => Ok((DeviceCalibration::load(p)?, p.display().to_string())),
        None => Ok((default_calibration()?, FITTED_DEFAULT_SOURCE.to_string())),
    }
}

fn to_pretty_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Executes one command. Errors come back as values; the binary turns them
/// into a single stderr line and a non-zero exit.
pub fn run(config: &RunConfig) -> Result<()> {
    match config.command {
        CommandKind::Simulate => {
            let network = config.network.as_deref().ok_or_else(|| {
                Error::InvalidArgument("simulate requires --network".into())
            })?;
            let mode = config
                .mode
                .ok_or_else(|| Error::InvalidArgument("simulate requires --mode".into()))?;
            let net = resolve_network(network, config.precision)?;
            for warning in validate_memory(&net, &net.memory) {
                eprintln!("warning: {warning}");
            }
            let plans = plan_network(&net, &net.geometry)?;
            let (cal, source) = load_calibration(config.calibration.as_deref())?;
            let report = summarize_with(
                &net,
                &plans,
                mode,
                &cal,
                &ScheduleOptions::steady_stream(),
                &source,
                config.seed,
            )?;
            let content = match config.format {
                OutputFormat::Json => to_pretty_json(&report),
                OutputFormat::Csv => report_to_csv(&report),
            };
            write_output(config.out.as_deref(), &content)
        }
        CommandKind::Map => {
            let network = config
                .network
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("map requires --network".into()))?;
            if config.format == OutputFormat::Csv {
                return Err(Error::InvalidArgument(
                    "map emits structured plans; use --format json".into(),
                ));
            }
            let net = resolve_network(network, config.precision)?;
            let plans = plan_network(&net, &net.geometry)?;
            write_output(config.out.as_deref(), &to_pretty_json(&plans))
        }
        CommandKind::Sweep => {
            let dims = config
                .dims
                .clone()
                .unwrap_or_else(|| DEFAULT_SWEEP_DIMS.to_vec());
            let seed = config.seed.unwrap_or(DEFAULT_SWEEP_SEED);
            let task = SyntheticTask::reference();
            let grid = sweep_accuracy(&task, &dims, &SWEEP_PRECISIONS, seed)?;
            let content = match config.format {
                OutputFormat::Json => to_pretty_json(&grid),
                OutputFormat::Csv => grid.to_csv(),
            };
            write_output(config.out.as_deref(), &content)
        }
        CommandKind::Verify => {
            let suites = run_verify_suites(config.seed.unwrap_or(0));
            let mut failed = 0u64;
            for suite in &suites {
                println!("{}: {} cases, {} failures", suite.name, suite.cases, suite.failures);
                failed += suite.failures;
            }
            if failed > 0 {
                println!("verify: FAIL");
                Err(Error::Validation(format!(
                    "verification found {failed} mismatching cases"
                )))
            } else {
                println!("verify: PASS");
                Ok(())
            }
        }
        CommandKind::Transfer => {
            let dims = config
                .dims
                .clone()
                .unwrap_or_else(|| DEFAULT_TRANSFER_DIMS.to_vec());
            let bits = config.precision.map(|p| p.activation_bits).unwrap_or(4);
            let (cal, _) = load_calibration(config.calibration.as_deref())?;
            let table = comparison_table(&dims, bits, &cal)?;
            let content = match config.format {
                OutputFormat::Json => to_pretty_json(&table),
                OutputFormat::Csv => table.to_csv(),
            };
            write_output(config.out.as_deref(), &content)
        }
        CommandKind::Calibrate => {
            if config.format == OutputFormat::Csv {
                return Err(Error::InvalidArgument(
                    "calibration files are JSON; use --format json".into(),
                ));
            }
            let cal = fit_default_calibration(&CalibrationAnchors::reference())?;
            write_output(config.out.as_deref(), &to_pretty_json(&cal))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
}

/// The four oracle-equivalence suites behind `verify`, also reused by the
/// acceptance tests. Each compares an independent reference computation
/// against the production path and counts mismatches.
pub fn run_verify_suites(seed: u64) -> Vec<SuiteResult> {
    vec![
        verify_arm_mac_exhaustive(),
        verify_arm_mac_random(seed),
        verify_encode_shapes(seed),
        verify_cycle_walk(),
    ]
}

fn dot_reference(weights: &[i64], acts: &[i64]) -> i64 {
    weights.iter().zip(acts).map(|(w, a)| w * a).sum()
}

/// Every 2-bit weight x 2-bit activation combination at lengths 1..=3.
fn verify_arm_mac_exhaustive() -> SuiteResult {
    let weights = [-1i64, 0, 1];
    let acts = [0i64, 1, 2, 3];
    let mut cases = 0;
    let mut failures = 0;
    for len in 1..=3usize {
        let combos = (weights.len() * acts.len()).pow(len as u32);
        for mut idx in 0..combos {
            let mut w = Vec::with_capacity(len);
            let mut a = Vec::with_capacity(len);
            for _ in 0..len {
                let slot = idx % (weights.len() * acts.len());
                idx /= weights.len() * acts.len();
                w.push(weights[slot % weights.len()]);
                a.push(acts[slot / weights.len()]);
            }
            cases += 1;
            if arm_mac(&w, &a, 2, 2).ok() != Some(dot_reference(&w, &a)) {
                failures += 1;
            }
        }
    }
    SuiteResult {
        name: "arm_mac exhaustive 2-bit",
        cases,
        failures,
    }
}

fn verify_arm_mac_random(seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = 100_000u64;
    let mut failures = 0;
    for _ in 0..cases {
        let w: Vec<i64> = (0..9).map(|_| rng.gen_range(-7..=7)).collect();
        let a: Vec<i64> = (0..9).map(|_| rng.gen_range(0..=15)).collect();
        if arm_mac(&w, &a, 4, 4).ok() != Some(dot_reference(&w, &a)) {
            failures += 1;
        }
    }
    SuiteResult {
        name: "arm_mac random 4-bit length-9",
        cases,
        failures,
    }
}

fn verify_encode_shapes(seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let cases = 1_000u64;
    let mut failures = 0;
    for i in 0..cases {
        let n = rng.gen_range(1..=64);
        let d = rng.gen_range(1..=128);
        let bits = [1, 2, 4][rng.gen_range(0..3)];
        let matrix = match generate_encoding(n, d, seed.wrapping_add(i), bits) {
            Ok(m) => m,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let signed = rng.gen_bool(0.5);
        let feats: Vec<i64> = (0..n)
            .map(|_| {
                if signed {
                    rng.gen_range(-15..=15)
                } else {
                    rng.gen_range(0..=15)
                }
            })
            .collect();
        match (encode(&feats, &matrix), matvec_oracle(&feats, &matrix)) {
            (Ok(hv), Ok(reference)) if hv.values == reference => {}
            _ => failures += 1,
        }
    }
    SuiteResult {
        name: "encode vs matrix-vector",
        cases,
        failures,
    }
}

fn walk_suite_plans() -> Vec<MappingPlan> {
    let geom = OCBGeometry::default();
    let mut plans = Vec::new();
    for k in [1usize, 3, 5, 7] {
        for (cin, cout, hw) in [(3usize, 8usize, 10usize), (16, 8, 14), (64, 64, 8)] {
            let layer = LayerSpec::Conv {
                kernel_size: k,
                in_channels: cin,
                out_channels: cout,
                out_height: hw,
                out_width: hw,
                stride_step: 1,
            };
            plans.push(map_conv(&layer, plans.len(), &geom).expect("valid kernel"));
        }
    }
    for (inf, outf) in [(9usize, 1usize), (10, 1), (512, 1000), (128, 600)] {
        let layer = LayerSpec::FullyConnected {
            in_features: inf,
            out_features: outf,
        };
        plans.push(map_fc(&layer, plans.len(), &geom).expect("valid fc"));
    }
    for (n, d) in [(512usize, 1024usize), (128, 64), (9, 1)] {
        plans.push(map_encoder(n, d, plans.len(), &geom));
    }
    plans
}

fn verify_cycle_walk() -> SuiteResult {
    let mut cases = 0;
    let mut failures = 0;
    for plan in walk_suite_plans() {
        assert!(plan.cycles <= 10_000, "walk suite must stay enumerable");
        for opts in [ScheduleOptions::default(), ScheduleOptions::steady_stream()] {
            for mode in [TuningMode::Nru, TuningMode::Ru] {
                let closed = match mode {
                    TuningMode::Nru => schedule_nru_with(&plan, &opts),
                    TuningMode::Ru => schedule_ru_with(&plan, &opts),
                };
                cases += 1;
                if cycle_walk_oracle(&plan, mode, &opts) != closed {
                    failures += 1;
                }
            }
        }
    }
    SuiteResult {
        name: "scheduler vs cycle-walk",
        cases,
        failures,
    }
}

/// Binary entry point: parse, run, map failures to one stderr line.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli.into_config()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
