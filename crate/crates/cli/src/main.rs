//! `sectorange`: sector angles of elliptic operators, from matrices to Galerkin
//! pencils, with JSON reports.

mod commands;
mod error;
mod json;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;
use json::Json;
use scenario::{Dirichlet, Kind, MeshSpec, Scenario};

#[derive(Parser)]
#[command(name = "sectorange", version, about = "Sector angles and sectoriality checks for elliptic operators")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Replace the tolerance of every asserted check
    #[arg(long, global = true)]
    tol_override: Option<f64>,
    /// Support directions for numerical-range boundaries
    #[arg(long, global = true)]
    n_dirs: Option<usize>,
    /// Seed for randomized runs (pform-check, selftest)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write boundary points and sector rays as CSV
    #[arg(long, global = true)]
    csv_out: Option<PathBuf>,
    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Angles, coercivity data and numerical range of a matrix
    AnalyzeMatrix { matrix: PathBuf },
    /// Ellipticity constants, critical exponent and L^p angle bounds of a field
    AnalyzeField {
        field: PathBuf,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
    },
    /// Sector inclusion of the Galerkin pencil on a structured P1 mesh
    FemCheck {
        field: PathBuf,
        #[arg(long, default_value_t = 16)]
        nx: usize,
        #[arg(long, default_value_t = 16)]
        ny: usize,
        #[arg(long = "lx", default_value_t = 1.0)]
        lx: f64,
        #[arg(long = "ly", default_value_t = 1.0)]
        ly: f64,
        /// Sides (left,right,top,bottom) or boundary edge indices; all sides if omitted
        #[arg(long, value_delimiter = ',')]
        dirichlet: Option<Vec<String>>,
        #[arg(long)]
        delta: Option<f64>,
        /// Check against this half-angle instead of ω(μ)
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Functional calculus, resolvent, semigroup and approximant checks
    CalculusCheck {
        matrix: PathBuf,
        /// Function names: rat1, cayley, sqrtres, exp, res:λ, const:c, poly:c0,c1,...
        #[arg(long, value_delimiter = ';')]
        functions: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long = "lambda", value_delimiter = ';')]
        lambdas: Vec<String>,
        #[arg(long, value_delimiter = ';')]
        z: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        vartheta: Vec<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Quadrature of the cut-off p-form on smooth samples
    PformCheck {
        field: PathBuf,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        /// Cutoff level K
        #[arg(long)]
        cutoff: Option<f64>,
        /// Nodes per side
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        max_freq: Option<u32>,
    },
    /// Run the acceptance suite
    Selftest {
        /// Criterion ids to run
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
    /// Run a scenario file
    Run { scenario: PathBuf },
}

fn dirichlet_from(list: Vec<String>) -> Dirichlet {
    match list.iter().map(|s| s.parse::<usize>()).collect::<Result<Vec<_>, _>>() {
        Ok(edges) if !edges.is_empty() => Dirichlet::Edges(edges),
        _ => Dirichlet::Sides(list),
    }
}

fn build(command: Command) -> Result<Scenario, CliError> {
    let s = match command {
        Command::AnalyzeMatrix { matrix } => Scenario { matrix: Some(matrix), ..Scenario::new(Kind::Matrix) },
        Command::AnalyzeField { field, p } => Scenario { field: Some(field), p, ..Scenario::new(Kind::Field) },
        Command::FemCheck { field, nx, ny, lx, ly, dirichlet, delta, theta } => Scenario {
            field: Some(field),
            mesh: Some(MeshSpec { nx, ny, lx, ly }),
            dirichlet: dirichlet.map(dirichlet_from),
            delta,
            theta,
            ..Scenario::new(Kind::Fem)
        },
        Command::CalculusCheck { matrix, functions, eps, lambdas, z, vartheta, delta } => Scenario {
            matrix: Some(matrix),
            functions,
            eps,
            lambdas,
            z,
            vartheta,
            delta,
            ..Scenario::new(Kind::Calculus)
        },
        Command::PformCheck { field, p, cutoff, grid, samples, max_freq } => Scenario {
            field: Some(field),
            p,
            cutoff,
            grid,
            samples,
            max_freq,
            ..Scenario::new(Kind::Pform)
        },
        Command::Run { scenario } => Scenario::load(&scenario)?,
        Command::Selftest { .. } => unreachable!("selftest has no scenario"),
    };
    Ok(s)
}

/// Command-line flags win over scenario file values.
fn apply_global(s: &mut Scenario, g: &Global) {
    if g.tol_override.is_some() {
        s.tol_override = g.tol_override;
    }
    if g.n_dirs.is_some() {
        s.n_dirs = g.n_dirs;
    }
    if g.seed.is_some() {
        s.seed = g.seed;
    }
    if g.csv_out.is_some() {
        s.csv_out = g.csv_out.clone();
    }
    if g.json_out.is_some() {
        s.json_out = g.json_out.clone();
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

fn emit(report: &Json, json_out: Option<&Path>) -> Result<(), CliError> {
    let text = report.render();
    match json_out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Selftest { only } = &cli.command {
        let (report, failed) = commands::selftest(cli.global.seed.unwrap_or(0), only)?;
        emit(&report, cli.global.json_out.as_deref())?;
        return if failed == 0 { Ok(()) } else { Err(CliError::CheckFailed(failed)) };
    }
    let mut s = build(cli.command)?;
    apply_global(&mut s, &cli.global);
    let (resolved, report) = commands::execute(&s)?;
    if let (Some(path), Some(csv)) = (&resolved.csv_out, report.csv()) {
        write(path, csv)?;
    }
    emit(&report.to_json(&resolved), resolved.json_out.as_deref())?;
    match report.failures() {
        0 => Ok(()),
        n => Err(CliError::CheckFailed(n)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sectorange: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
