use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use ternary_qec::calibration::{calibrate, CalibrationOptions, SearchSpace, REFERENCE_STD_LER};
use ternary_qec::config::ExperimentConfig;
use ternary_qec::ingest::{from_simulation, write_dataset};
use ternary_qec::lattice::build_cell;
use ternary_qec::montecarlo::{
    run_condition, simulate_windows, sweep_primary, sweep_sensitivity, RunConfig, RunSummary, DEFAULT_SEED,
    DEFAULT_TRIALS, SENSITIVITY_F,
};

mod stats_cmd;
mod table;

const THREADS_ENV: &str = "TERNARY_QEC_THREADS";

#[derive(Parser, Debug)]
#[command(name = "ternary-qec", version, about = "Mixed binary/ternary error model simulator and syndrome statistics")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON configuration (model fields, `classifier`, run settings).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    rings: Option<usize>,
    #[arg(long, global = true)]
    tau: Option<usize>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    f: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    theta: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump a hexagonal cell as JSON.
    Lattice,
    /// Run one paired condition and print its summary.
    Simulate {
        /// Also write the simulated syndrome windows as a JSONL dataset.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Run the primary (2) or ternary-fraction (3) sweep.
    Sweep {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
        table: u8,
    },
    /// Grid-search activation parameters against standard-decoder LER targets.
    Calibrate {
        /// JSON array of four target LERs (rings 1..=4, tau 1).
        #[arg(long)]
        targets: Option<PathBuf>,
        /// JSON search space; a built-in grid when omitted.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        refinements: usize,
        #[arg(long, default_value_t = 50_000)]
        fano_shots: usize,
    },
    /// Run syndrome statistics on JSONL datasets.
    Stats(stats_cmd::StatsArgs),
    /// Render stored sweep results as an aligned text table.
    Report {
        #[arg(long = "in", required = true)]
        input: PathBuf,
    },
}

/// Sweep results as stored by `sweep --format json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct SweepFile {
    pub table: u8,
    pub seed: u64,
    pub rows: Vec<RunSummary>,
}

struct Effective {
    cfg: ExperimentConfig,
    seed: u64,
}

impl Common {
    fn resolve(&self) -> Result<Effective> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        let run = &mut cfg.run;
        run.rings = self.rings.or(run.rings);
        run.tau = self.tau.or(run.tau);
        run.trials = self.trials.or(run.trials);
        run.seed = self.seed.or(run.seed);
        if let Some(p) = self.p {
            cfg.model.p = p;
        }
        if let Some(f) = self.f {
            cfg.model.f = f;
        }
        if let Some(a) = self.alpha {
            cfg.model.alpha = a;
        }
        if let Some(t) = self.theta {
            cfg.classifier.theta = t;
        }
        cfg.model.validate()?;
        cfg.classifier.validate()?;
        let seed = cfg.run.seed.unwrap_or(DEFAULT_SEED);
        Ok(Effective { cfg, seed })
    }
}

impl Effective {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            rings: self.cfg.run.rings.unwrap_or(2),
            tau: self.cfg.run.tau.unwrap_or(1),
            trials: self.cfg.run.trials.unwrap_or(DEFAULT_TRIALS),
            model: self.cfg.model,
            weights: self.cfg.classifier,
            master_seed: self.seed,
        }
    }
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn json(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let eff = cli.common.resolve()?;
    eprintln!("seed: {}", eff.seed);
    let out = cli.common.out.as_deref();
    let format = cli.common.format;

    match cli.command {
        Command::Lattice => {
            let cell = build_cell(eff.cfg.run.rings.unwrap_or(1))?;
            emit(out, &json(&cell)?)
        }
        Command::Simulate { dataset } => {
            let rc = eff.run_config();
            let summary = run_condition(&rc)?;
            if let Some(path) = dataset {
                let cell = build_cell(rc.rings)?;
                let windows = simulate_windows(&rc)?;
                let meta = [
                    ("seed".to_string(), rc.master_seed.to_string()),
                    ("f".to_string(), rc.model.f.to_string()),
                    ("p".to_string(), rc.model.p.to_string()),
                ]
                .into_iter()
                .collect();
                write_dataset(&from_simulation(&cell, &windows, meta)?, &path)?;
            }
            match format.unwrap_or(Format::Json) {
                Format::Json => emit(out, &json(&summary)?),
                Format::Csv => emit(out, &table::primary_csv(&[summary])?),
            }
        }
        Command::Sweep { table: which } => {
            let base = eff.run_config();
            let rows = if which == 2 {
                sweep_primary(&base)?
            } else {
                sweep_sensitivity(&base, &SENSITIVITY_F)?
            };
            let body = match format.unwrap_or(Format::Csv) {
                Format::Json => json(&SweepFile {
                    table: which,
                    seed: eff.seed,
                    rows,
                })?,
                Format::Csv if which == 2 => table::primary_csv(&rows)?,
                Format::Csv => table::sensitivity_csv(&rows)?,
            };
            emit(out, &body)
        }
        Command::Calibrate {
            targets,
            grid,
            refinements,
            fano_shots,
        } => {
            let targets: Vec<f64> = match targets {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(&p)?)
                    .with_context(|| format!("parsing targets {}", p.display()))?,
                None => REFERENCE_STD_LER.to_vec(),
            };
            let space: SearchSpace = match grid {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(&p)?)
                    .with_context(|| format!("parsing grid {}", p.display()))?,
                None => SearchSpace::default(),
            };
            let opts = CalibrationOptions {
                trials: eff.cfg.run.trials.unwrap_or(CalibrationOptions::default().trials),
                seed: eff.seed,
                refinements,
                fano_shots,
                base: eff.cfg.model,
            };
            let res = calibrate(&targets, &space, &opts)?;
            eprintln!(
                "objective {:.6}  fano {:.4}  evaluated {}  std LER {}",
                res.objective,
                res.fano,
                res.evaluated,
                res.std_ler.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" ")
            );
            let fitted = ExperimentConfig {
                model: res.model,
                classifier: eff.cfg.classifier,
                run: Default::default(),
            };
            emit(out, &json(&fitted.to_value())?)
        }
        Command::Stats(args) => {
            let report = stats_cmd::run(&args)?;
            emit(out, &json(&report)?)
        }
        Command::Report { input } => emit(out, &table::render_file(&input)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
