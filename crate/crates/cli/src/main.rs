//! `charged-drops`: command-line front end. Every subcommand parses its
//! inputs, calls one library routine and serializes the result.

mod error;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use charged_drops::annulus::{optimal_charged_annulus, r_lambda};
use charged_drops::energies::{total_energy, EnergyParams, Shape};
use charged_drops::geometry::Dim;
use charged_drops::optimizer::{self, OptimOptions, OptimShape, StopReason};
use charged_drops::phase_diagram::{
    self, lambda_bar, mass_map, nonexistence_certificate, Certificate, CertificateSearch, ScanConfig,
};
use charged_drops::stability::{self, DeficitConfig};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use error::{CliError, Code};
use io::{print_json, read_json, write_atomic};

/// Caps the worker pool of parallel scans.
const THREADS_ENV: &str = "CHARGED_DROPS_THREADS";

#[derive(Parser)]
#[command(name = "charged-drops", version, about = "Perimeter, bending and Riesz energies of charged drops")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_dim(s: &str) -> Result<Dim, String> {
    let d: u8 = s.parse().map_err(|_| format!("dim must be 2 or 3, got {s}"))?;
    Dim::try_from(d).map_err(|e| e.to_string())
}

#[derive(clap::Args)]
struct ParamArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long = "Q")]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Energy of a shape read from JSON.
    Energy {
        #[arg(long)]
        shape: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "2", value_parser = parse_dim)]
        dim: Dim,
    },
    /// Ball/annulus threshold of the uncharged problem.
    LambdaBar {
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Optimal charged annulus of area pi.
    Annulus {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Phase-diagram scan from a JSON config.
    PhaseDiagram {
        #[arg(long)]
        config: PathBuf,
    },
    /// Deficit experiment and Taylor checks from a JSON config.
    Stability {
        #[arg(long)]
        config: PathBuf,
    },
    /// Projected gradient descent from a JSON config.
    Minimize {
        #[arg(long)]
        config: PathBuf,
    },
    /// Non-existence certificates over one or more charges.
    Nonexist {
        #[arg(long)]
        lambda: f64,
        /// Comma-separated charges.
        #[arg(long = "Q", value_delimiter = ',', required = true)]
        q: Vec<f64>,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value = "2", value_parser = parse_dim)]
        dim: Dim,
        /// Optional competitor search grid (JSON).
        #[arg(long)]
        search: Option<PathBuf>,
    },
    /// Classification at prescribed areas via mass rescaling.
    MassMap {
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated areas.
        #[arg(long, value_delimiter = ',', required = true)]
        masses: Vec<f64>,
        #[arg(long)]
        search: Option<PathBuf>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseDiagramConfig {
    scan: ScanConfig,
    csv: Option<PathBuf>,
    svg: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilityConfig {
    experiment: DeficitConfig,
    csv: Option<PathBuf>,
    #[serde(default)]
    taylor_modes: Vec<usize>,
    #[serde(default = "taylor_amplitude")]
    taylor_amplitude: f64,
}

fn taylor_amplitude() -> f64 {
    1e-3
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MinimizeConfig {
    init: OptimShape,
    params: EnergyParams,
    #[serde(default)]
    options: OptimOptions,
    trajectory: Option<PathBuf>,
    final_shape: Option<PathBuf>,
}

#[derive(Serialize)]
struct ChargedCertificate {
    #[serde(rename = "Q")]
    q: f64,
    #[serde(flatten)]
    certificate: Certificate,
}

fn energy_params(p: &ParamArgs, dim: Dim) -> Result<EnergyParams, CliError> {
    Ok(EnergyParams::new(p.lambda, p.q, p.alpha, dim)?)
}

fn search_grid(path: Option<&Path>) -> Result<CertificateSearch, CliError> {
    path.map_or(Ok(CertificateSearch::default()), read_json)
}

fn cmd_energy(shape: &Path, params: &ParamArgs, dim: Dim) -> Result<(), CliError> {
    let value: serde_json::Value = read_json(shape)?;
    let shape = Shape::from_value(value)?;
    print_json(&total_energy(&shape, &energy_params(params, dim)?)?)
}

fn cmd_annulus(p: &ParamArgs) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        optimum: charged_drops::annulus::OptimalAnnulus,
        r_lambda: f64,
    }
    print_json(&Out {
        optimum: optimal_charged_annulus(p.lambda, p.q, p.alpha)?,
        r_lambda: r_lambda(p.lambda)?,
    })
}

fn cmd_phase_diagram(config: &Path) -> Result<(), CliError> {
    let cfg: PhaseDiagramConfig = read_json(config)?;
    let cells = phase_diagram::scan(&cfg.scan)?;
    if let Some(p) = &cfg.csv {
        write_atomic(p, phase_diagram::to_csv(&cells).as_bytes())?;
    }
    if let Some(p) = &cfg.svg {
        write_atomic(p, phase_diagram::to_svg(&cells).as_bytes())?;
    }
    print_json(&cells)?;
    let failed = cells.iter().filter(|c| c.note.is_some()).count();
    if failed > 0 {
        return Err(CliError::Incomplete(
            format!("{failed} of {} cells failed and are marked UNKNOWN", cells.len()),
            Code::Numerical,
        ));
    }
    Ok(())
}

fn cmd_stability(config: &Path) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Out {
        trials: usize,
        rejected: usize,
        c0: stability::Envelope,
        c1: stability::Envelope,
        taylor: Vec<stability::TaylorCheck>,
    }
    let cfg: StabilityConfig = read_json(config)?;
    let report = stability::deficit_experiment(&cfg.experiment)?;
    let taylor = cfg
        .taylor_modes
        .iter()
        .map(|&k| stability::taylor_consistency(k, cfg.taylor_amplitude))
        .collect::<charged_drops::Result<Vec<_>>>()?;
    if let Some(p) = &cfg.csv {
        write_atomic(p, stability::deficit_csv(&report.samples).as_bytes())?;
    }
    print_json(&Out {
        trials: report.samples.len(),
        rejected: report.rejected,
        c0: report.c0,
        c1: report.c1,
        taylor,
    })
}

fn cmd_minimize(config: &Path) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Out<'a> {
        stop_reason: StopReason,
        converged: bool,
        energy: f64,
        iterations: usize,
        grad_norm: f64,
        hint: optimizer::ClassificationHint,
        shape: &'a OptimShape,
    }
    let cfg: MinimizeConfig = read_json(config)?;
    let res = optimizer::minimize(&cfg.init, &cfg.params, &cfg.options)?;
    if let Some(p) = &cfg.trajectory {
        write_atomic(p, optimizer::trajectory_csv(&res.trajectory).as_bytes())?;
    }
    if let Some(p) = &cfg.final_shape {
        let json = serde_json::to_string_pretty(&res.state.shape).map_err(|e| CliError::Usage(e.to_string()))?;
        write_atomic(p, json.as_bytes())?;
    }
    print_json(&Out {
        stop_reason: res.stop_reason,
        converged: res.converged,
        energy: res.state.energy,
        iterations: res.state.iteration,
        grad_norm: res.state.grad_norm,
        hint: res.hint,
        shape: &res.state.shape,
    })?;
    // a stagnated run sits at the rounding floor of the energy
    match res.stop_reason {
        StopReason::Converged | StopReason::Stagnated => Ok(()),
        StopReason::BudgetExhausted => Err(CliError::Incomplete(
            format!("iteration budget of {} exhausted", cfg.options.max_iters),
            Code::Budget,
        )),
        StopReason::LineSearchStalled => Err(CliError::Incomplete(
            "line search found no admissible decrease".into(),
            Code::Numerical,
        )),
    }
}

fn cmd_nonexist(lambda: f64, qs: &[f64], alpha: f64, dim: Dim, search: Option<&Path>) -> Result<(), CliError> {
    let grid = search_grid(search)?;
    let out = qs
        .iter()
        .map(|&q| {
            Ok(ChargedCertificate {
                q,
                certificate: nonexistence_certificate(lambda, q, alpha, dim, &grid)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    print_json(&out)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Energy { shape, params, dim } => cmd_energy(&shape, &params, dim),
        Command::LambdaBar { tol } => print_json(&lambda_bar(tol)?),
        Command::Annulus { params } => cmd_annulus(&params),
        Command::PhaseDiagram { config } => cmd_phase_diagram(&config),
        Command::Stability { config } => cmd_stability(&config),
        Command::Minimize { config } => cmd_minimize(&config),
        Command::Nonexist {
            lambda,
            q,
            alpha,
            dim,
            search,
        } => cmd_nonexist(lambda, &q, alpha, dim, search.as_deref()),
        Command::MassMap { params, masses, search } => {
            let grid = search_grid(search.as_deref())?;
            print_json(&mass_map(params.lambda, params.q, params.alpha, &masses, &grid)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Code::Input as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
