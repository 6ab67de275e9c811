mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use spinbath_core::{reproduce_all, BathKind, ReproduceOptions};

use config::{BatchFile, CommandKind, Format, Grid, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "spinbath", version, about = "Two-level system in an Ohmic spin or boson bath")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Bare tunneling Δ/ωc.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Dimensionless coupling.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Temperature in units of ωc.
    #[arg(long, global = true, default_value_t = 0.0)]
    temperature: f64,
    #[arg(long, global = true, value_parser = parse_bath, default_value = "spin")]
    bath: BathKind,
    /// End of the time grid: ηΔ·t for dynamics, tau-x and boson-dynamics, Δ·t for niba.
    #[arg(long, global = true, default_value_t = 20.0)]
    tmax: f64,
    #[arg(long, global = true, default_value_t = 400)]
    points: usize,
    #[arg(long, global = true)]
    tol_abs: Option<f64>,
    #[arg(long, global = true)]
    tol_rel: Option<f64>,
    /// Write here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// JSON run config, or a list of them.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spin-bath P(t), full quadrature and pole approximation.
    Dynamics,
    /// ⟨τx(t)⟩ and the transformed density matrix.
    TauX,
    /// Boson-bath P(t) next to the spin-bath curve.
    BosonDynamics,
    /// P(t) from the NIBA integro-differential equation.
    Niba,
    /// Susceptibility and Shiba-relation table.
    ShibaTable {
        #[arg(long, default_value = "table1")]
        rows: String,
    },
    /// Coherent-incoherent boundary α_c(Δ), or the NIBA boundary against T.
    PhaseDiagram {
        #[arg(long)]
        delta_grid: Option<Grid>,
        #[arg(long)]
        temperature_grid: Option<Grid>,
    },
    /// Variational ground-state energy.
    GroundEnergy,
    /// Run every acceptance check and report.
    Reproduce {
        /// Multiply every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Flip the sign of the damping rate (mutation run).
        #[arg(long)]
        flip_gamma_sign: bool,
    },
    /// Run every config in the --config file.
    Batch,
}

fn parse_bath(s: &str) -> Result<BathKind, String> {
    s.parse().map_err(|e: spinbath_core::Error| e.to_string())
}

/// Bad input, exit 1; numerical failure, exit 2.
enum Failure {
    Config(String),
    Numerical(anyhow::Error),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Config(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            Failure::Numerical(err) => {
                eprintln!("error: {err:#}");
                ExitCode::from(2)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Err(msg) = configure_threads() {
        return Failure::Config(msg).report();
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => f.report(),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SPINBATH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SPINBATH_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    let common = cli.common;
    let kind = match cli.command {
        None | Some(Command::Batch) => {
            let Some(path) = common.config.as_deref() else {
                return Err(Failure::Config("nothing to do: give a subcommand, or --config for a batch".into()));
            };
            return batch(path);
        }
        Some(Command::Reproduce { tol_scale, flip_gamma_sign }) => {
            return reproduce(&common, ReproduceOptions { tol_scale, flip_gamma_sign });
        }
        Some(cmd) => cmd,
    };
    if common.config.is_some() {
        return Err(Failure::Config("--config runs a batch; drop the subcommand or the flag".into()));
    }
    let cfg = from_flags(kind, common);
    execute(&cfg)
}

fn from_flags(cmd: Command, c: Common) -> RunConfig {
    let (kind, rows, delta_grid, temperature_grid) = match cmd {
        Command::Dynamics => (CommandKind::Dynamics, None, None, None),
        Command::TauX => (CommandKind::TauX, None, None, None),
        Command::BosonDynamics => (CommandKind::BosonDynamics, None, None, None),
        Command::Niba => (CommandKind::Niba, None, None, None),
        Command::ShibaTable { rows } => (CommandKind::ShibaTable, Some(rows), None, None),
        Command::PhaseDiagram { delta_grid, temperature_grid } => {
            (CommandKind::PhaseDiagram, None, delta_grid, temperature_grid)
        }
        Command::GroundEnergy => (CommandKind::GroundEnergy, None, None, None),
        Command::Reproduce { .. } | Command::Batch => unreachable!("handled before"),
    };
    RunConfig {
        bath: c.bath,
        delta: c.delta,
        alpha: c.alpha,
        temperature: c.temperature,
        tmax: c.tmax,
        points: c.points,
        tol_abs: c.tol_abs,
        tol_rel: c.tol_rel,
        delta_grid,
        temperature_grid,
        rows,
        output: c.output,
        format: c.format,
        ..RunConfig::new(kind)
    }
}

fn execute(cfg: &RunConfig) -> Result<ExitCode, Failure> {
    cfg.validate().map_err(Failure::Config)?;
    let table = commands::run(cfg).map_err(Failure::Numerical)?;
    write(&table.render(cfg.format), cfg.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn write(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    output::emit(text, path).map_err(|e| match path {
        Some(p) => Failure::Config(format!("cannot write {}: {e}", p.display())),
        None => Failure::Config(format!("cannot write to stdout: {e}")),
    })
}

fn batch(path: &Path) -> Result<ExitCode, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
    let runs = serde_json::from_str::<BatchFile>(&text)
        .map_err(|e| Failure::Config(format!("config {}: {e}", path.display())))?
        .into_runs();
    if runs.is_empty() {
        return Err(Failure::Config(format!("config {} lists no runs", path.display())));
    }
    for (k, run) in runs.iter().enumerate() {
        run.validate().map_err(|m| Failure::Config(format!("config {} run {k}: {m}", path.display())))?;
    }
    for run in &runs {
        execute(run)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn reproduce(common: &Common, opts: ReproduceOptions) -> Result<ExitCode, Failure> {
    if !(opts.tol_scale > 0.0 && opts.tol_scale.is_finite()) {
        return Err(Failure::Config(format!("--tol-scale must be positive, got {}", opts.tol_scale)));
    }
    let report = reproduce_all(&opts);
    let text = match common.format {
        Format::Csv => report.to_string(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
    };
    write(&text, common.output.as_deref())?;
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        let failed: Vec<String> = report.failures().map(|c| format!("[{}] {}", c.criterion, c.name)).collect();
        eprintln!("{} check(s) failed: {}", failed.len(), failed.join(", "));
        Ok(ExitCode::from(2))
    }
}
