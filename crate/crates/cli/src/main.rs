use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pimcancel::experiment::{self, ExperimentConfig};
use pimcancel::freqplan::{self, BandTable};
use pimcancel::{selftest, CoefficientVector, ModelKind};

/// `println!` that tolerates a closed stdout (for example `| head`).
macro_rules! emit {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "pimcancel",
    version,
    about = "PIM self-interference simulation and digital cancellation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the received PIM and noise without cancellation.
    Simulate(RunArgs),
    /// Fit canceller coefficients on the training set.
    Train(RunArgs),
    /// Train (or load coefficients) and cancel the evaluation set.
    Cancel {
        #[command(flatten)]
        run: RunArgs,
        /// Use these coefficients instead of training.
        #[arg(long)]
        coefficients: Option<PathBuf>,
    },
    /// Re-train and cancel at every TX power of the sweep.
    Sweep(RunArgs),
    /// Place the IM3 products of two carriers against receiver bands.
    Plan(PlanArgs),
    /// Run the built-in invariant checks on small instances.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Memoryless,
    Txmemory,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML); defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Measure at the diversity receiver.
    #[arg(long)]
    diversity: bool,
    /// Canceller model.
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Dotted-key override, e.g. `truth.noise_floor_dbfs=-90`; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// dBFS to dBm offset, used only to annotate reports.
    #[arg(long, allow_negative_numbers = true)]
    dbm_offset: Option<f64>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let text = match &self.config {
            Some(p) => std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?,
            None => String::new(),
        };
        let mut cfg = ExperimentConfig::from_toml_with(&text, &self.overrides)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.diversity {
            cfg.diversity = true;
        }
        if let Some(m) = self.model {
            cfg.set_model(match m {
                Model::Memoryless => ModelKind::MemorylessTx,
                Model::Txmemory => ModelKind::TxWithMemory,
            });
        }
        if let Some(o) = self.dbm_offset {
            cfg.link.dbm_offset_db = Some(o);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct PlanArgs {
    /// First carrier: center in MHz or a band name (uplink midpoint).
    #[arg(long, allow_negative_numbers = true)]
    f1: String,
    /// First carrier bandwidth in MHz.
    #[arg(long, default_value_t = 5.0)]
    bw1: f64,
    #[arg(long, allow_negative_numbers = true)]
    f2: String,
    #[arg(long, default_value_t = 5.0)]
    bw2: f64,
    /// Receiver bands to check (comma separated); all bands by default.
    #[arg(long, value_delimiter = ',')]
    bands: Vec<String>,
    /// Band table (TOML) replacing the built-in one.
    #[arg(long)]
    band_table: Option<PathBuf>,
}

fn carrier_mhz(spec: &str, table: &BandTable) -> Result<f64> {
    match spec.trim().parse::<f64>() {
        Ok(f) => Ok(f),
        Err(_) => Ok(table.get(spec.trim())?.uplink_center_mhz()),
    }
}

fn plan(args: &PlanArgs) -> Result<()> {
    let table = match &args.band_table {
        Some(p) => BandTable::load(p)?,
        None => BandTable::builtin(),
    };
    let f1 = carrier_mhz(&args.f1, &table)?;
    let f2 = carrier_mhz(&args.f2, &table)?;
    let bands = (!args.bands.is_empty()).then_some(args.bands.as_slice());
    let report = freqplan::plan(f1, args.bw1, f2, args.bw2, &table, bands)?;
    emit!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn write(dir: &Path, files: Vec<(&str, String)>) -> Result<()> {
    let paths = experiment::write_files(dir, &files)?;
    for p in paths {
        emit!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let cfg = a.config()?;
            let out = experiment::simulate(&cfg)?;
            let s = &out.summary;
            emit!(
                "{} receiver: PIM {:.2} dBFS, noise {:.2} dBFS in band",
                s.receiver,
                s.pim_power_db,
                s.noise_floor_db
            );
            write(&a.out, experiment::simulation_files(&cfg, &out)?)?;
        }
        Command::Train(a) => {
            let cfg = a.config()?;
            let fe = experiment::resolve_frontend(&cfg)?;
            let training = experiment::train(&cfg, &fe)?;
            emit!("fitted {} coefficients", training.coefficients.len());
            write(&a.out, experiment::training_files(&cfg, &fe, &training)?)?;
        }
        Command::Cancel { run, coefficients } => {
            let cfg = run.config()?;
            let out = match coefficients {
                Some(p) => {
                    let text = std::fs::read_to_string(&p)
                        .with_context(|| format!("reading coefficients {}", p.display()))?;
                    experiment::run_with_coefficients(&cfg, CoefficientVector::from_json(&text)?)?
                }
                None => experiment::run_experiment(&cfg)?,
            };
            let c = &out.report.cancellation;
            emit!(
                "{} receiver: suppression {:.2} dB (pre {:.2}, post {:.2}, noise {:.2} dBFS)",
                out.report.receiver,
                c.suppression_db,
                c.pre_power_db,
                c.post_power_db,
                c.noise_floor_db
            );
            write(&run.out, experiment::run_files(&out)?)?;
        }
        Command::Sweep(a) => {
            let cfg = a.config()?;
            let out = experiment::run_sweep(&cfg)?;
            emit!("{}", experiment::sweep_csv(&out.rows).trim_end());
            write(&a.out, experiment::sweep_files(&cfg, &out)?)?;
        }
        Command::Plan(a) => plan(&a)?,
        Command::Selftest => {
            let checks = selftest::run();
            for c in &checks {
                emit!("{}", c.line());
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                bail!("{failed} of {} checks failed", checks.len());
            }
            emit!("all {} checks passed", checks.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
