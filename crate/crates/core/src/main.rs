use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use predift::experiment::{self, ExperimentConfig, ExperimentOutcome};
use predift::{Algorithm, DiffState, Exec};

const EXIT_OTHER: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "predift", version, about = "Predefined-time exact differentiation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides the config's [output] dir.
    #[arg(long, value_name = "DIR", env = "PREDIFT_OUT")]
    out: Option<PathBuf>,
    /// Integration step (s); overrides [sim] dt.
    #[arg(long, value_name = "S")]
    dt: Option<f64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, value_name = "N")]
    parallel: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single (algorithm, ic) cell.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Defaults to the first algorithm of the config.
        #[arg(long)]
        algorithm: Option<Algorithm>,
        /// `v` or `z0:z1`; defaults to the first ic of the config.
        #[arg(long, value_parser = parse_ic, allow_hyphen_values = true)]
        ic: Option<DiffState>,
    },
    /// Run every (algorithm, ic) cell of the config.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Replaces the config's ic list.
        #[arg(long, value_delimiter = ',', value_parser = parse_ic, allow_hyphen_values = true)]
        ics: Vec<DiffState>,
        /// Replaces the config's algorithm list.
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<Algorithm>,
    },
    /// Certify the bound family only.
    ValidateBounds {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Grid size; overrides [sim] grid.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Run every cell and print the summary table.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Kv,
}

fn parse_ic(s: &str) -> Result<DiffState, String> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("'{v}' is not a number"));
    match s.split_once(':') {
        Some((a, b)) => Ok(DiffState::new(num(a)?, num(b)?)),
        None => num(s).map(|v| DiffState::new(v, v)),
    }
}

fn exec_for(threads: Option<usize>) -> Exec {
    match threads {
        Some(1) => Exec::Sequential,
        _ => Exec::default(),
    }
}

fn load(common: &Common) -> predift::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(dt) = common.dt {
        cfg.dt = dt;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn finish(outcome: &ExperimentOutcome, dir: &std::path::Path) -> ExitCode {
    if !outcome.certified() {
        eprint!("{}", outcome.bounds);
        eprintln!("bound certification failed; nothing simulated");
        return ExitCode::from(EXIT_VALIDATION);
    }
    eprintln!("artifacts written to {}", dir.display());
    if outcome.any_failed() {
        return ExitCode::from(EXIT_OTHER);
    }
    if outcome.any_diverged() {
        return ExitCode::from(EXIT_DIVERGED);
    }
    ExitCode::SUCCESS
}

fn run_grid(common: &Common, cfg: &ExperimentConfig, print: Option<Format>) -> predift::Result<ExitCode> {
    let exec = exec_for(common.parallel);
    let dir = experiment::resolve_out_dir(cfg, common.out.as_deref());
    let outcome = exec.install(common.parallel, || experiment::run_experiment(cfg, &dir, exec))?;
    match print {
        Some(Format::Text) if outcome.certified() => print!("{}", experiment::summary_text(cfg, &outcome.cells)),
        Some(Format::Kv) if outcome.certified() => print!("{}", experiment::summary_kv(cfg, &outcome.cells)),
        _ => {}
    }
    Ok(finish(&outcome, &dir))
}

fn run(cli: Cli) -> predift::Result<ExitCode> {
    match cli.command {
        Command::Simulate { common, algorithm, ic } => {
            let mut cfg = load(&common)?;
            cfg.algorithms = vec![algorithm.unwrap_or(cfg.algorithms[0])];
            cfg.ics = vec![ic.unwrap_or(cfg.ics[0])];
            cfg.validate()?;
            run_grid(&common, &cfg, Some(Format::Text))
        }
        Command::Sweep { common, ics, algorithms } => {
            let mut cfg = load(&common)?;
            if !ics.is_empty() {
                cfg.ics = ics;
            }
            if !algorithms.is_empty() {
                cfg.algorithms = algorithms;
            }
            cfg.validate()?;
            run_grid(&common, &cfg, None)
        }
        Command::ValidateBounds { common, format, grid } => {
            let mut cfg = load(&common)?;
            if let Some(n) = grid {
                cfg.grid = n;
            }
            cfg.validate()?;
            let exec = exec_for(common.parallel);
            let report = exec.install(common.parallel, || experiment::certify_config(&cfg, exec))?;
            match format {
                Format::Text => print!("{report}"),
                Format::Kv => print!("{}", report.to_kv()),
            }
            Ok(if report.is_certified() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VALIDATION)
            })
        }
        Command::Compare { common, format } => {
            let cfg = load(&common)?;
            run_grid(&common, &cfg, Some(format))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_OTHER)
        }
    }
}
