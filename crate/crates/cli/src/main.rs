//! `polar-iga` command line: convergence studies, geometry export and mesh
//! diagnostics for the manufactured corner problems.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polar_iga::analysis::{
    convergence_study_with_solutions, study_degrees, ConvergenceReport, ExactSolution, LevelSolution,
    ManufacturedProblem, ProblemKind,
};
use polar_iga::mesh::{quasi_uniformity_report, size_bound_report};
use polar_iga::polar_space::build_space;
use polar_iga::quadrature::QuadratureRule;
use polar_iga::Error;

use config::{ConfigError, RunConfig};

const THREADS_VAR: &str = "POLAR_IGA_THREADS";
const SAMPLES_PER_DIRECTION: usize = 41;

#[derive(Parser)]
#[command(name = "polar-iga", version, about = "Isogeometric Poisson solver on polar corner domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the convergence study described by a JSON or TOML config.
    Run { config: PathBuf },
    /// Write the patch of a problem (pacman or lshape) as JSON.
    ExportGeometry { problem: String, path: PathBuf },
    /// Print mesh and space statistics for every level of a config.
    MeshInfo { config: PathBuf },
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::Numerical(m) | Self::Io(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(format!("invalid config: {e}"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGrading(_) | Error::InvalidArgument(_) => Self::Config(format!("invalid config: {e}")),
            e => Self::Numerical(format!("numerical failure: {e}")),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = match value.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(Failure::Config(format!("{THREADS_VAR} must be a positive integer, got '{value}'"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Io(format!("cannot start thread pool: {e}")))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn fmt_rate(r: Option<f64>) -> String {
    r.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

fn summary(report: &ConvergenceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "problem {}  degree ({}, {})  mu {}  quadrature {}x{}",
        report.problem,
        report.degree[0],
        report.degree[1],
        report.mu,
        report.quadrature_nodes,
        report.quadrature_nodes
    );
    let _ = writeln!(
        s,
        "{:>5} {:>5} {:>7} {:>11} {:>11} {:>11} {:>7} {:>7}",
        "level", "N", "ndofs", "h", "err_l2", "err_h1", "rate_l2", "rate_h1"
    );
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{:>5} {:>5} {:>7} {:>11.4e} {:>11.4e} {:>11.4e} {:>7} {:>7}",
            r.level,
            r.n,
            r.ndofs,
            r.h,
            r.err_l2,
            r.err_h1,
            fmt_rate(r.rate_l2),
            fmt_rate(r.rate_h1)
        );
    }
    let _ = writeln!(
        s,
        "slope over last {} levels: L2 slope {}, H1 slope {}",
        report.rows.len().min(3),
        fmt_rate(report.slope_l2),
        fmt_rate(report.slope_h1)
    );
    s
}

/// Solution and exact values on a parametric grid of the finest level.
fn solution_samples(problem: &ManufacturedProblem, level: &LevelSolution) -> Result<String, Failure> {
    let n = SAMPLES_PER_DIRECTION;
    let mut s = String::from("zeta1,zeta2,x,y,u_h,u_exact\n");
    for i in 0..n {
        for j in 0..n {
            let zeta = [i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64];
            let p = level.solution.evaluate_parametric(zeta, false)?;
            let _ = writeln!(
                s,
                "{},{},{:.12e},{:.12e},{:.12e},{:.12e}",
                zeta[0],
                zeta[1],
                p.x[0],
                p.x[1],
                p.value,
                problem.value(p.x)
            );
        }
    }
    Ok(s)
}

fn plot_script(report_csv: &str) -> String {
    format!(
        r##"# Plots the convergence report written next to this file.
# Usage: python plot_report.py  (needs pandas and matplotlib)
import pathlib

import matplotlib.pyplot as plt
import pandas as pd

here = pathlib.Path(__file__).parent
df = pd.read_csv(here / "{report_csv}", comment="#")
fig, ax = plt.subplots()
ax.loglog(df["h"], df["err_l2"], "o-", label="L2 error")
ax.loglog(df["h"], df["err_h1"], "s-", label="H1 error")
ax.set_xlabel("h")
ax.set_ylabel("error")
ax.invert_xaxis()
ax.legend()
fig.savefig(here / "convergence.png", dpi=150)
"##
    )
}

fn run(path: &Path) -> Result<(), Failure> {
    let cfg = RunConfig::load(path)?;
    let problem = ManufacturedProblem::new(cfg.problem);
    let quad = QuadratureRule::new(cfg.quadrature_nodes)?;
    let (report, levels) = convergence_study_with_solutions(&problem, cfg.degree, cfg.grading, &cfg.levels, &quad)?;
    if let Some(r) = report.rows.iter().find(|r| !(r.err_l2.is_finite() && r.err_h1.is_finite())) {
        return Err(Failure::Numerical(format!(
            "numerical failure: non-finite error at level {}",
            r.level
        )));
    }

    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| io_error(&cfg.output_dir, e))?;
    let out = |name: &str| cfg.output_dir.join(name);
    let mut written = Vec::new();
    if cfg.emit.report_csv {
        write_file(&out("report.csv"), &report.to_csv())?;
        write_file(&out("plot_report.py"), &plot_script("report.csv"))?;
        written.extend(["report.csv", "plot_report.py"]);
    }
    if cfg.emit.report_json {
        write_file(&out("report.json"), &report.to_json()?)?;
        written.push("report.json");
    }
    let finest = levels.last().expect("levels are nonempty");
    if cfg.emit.mesh_csv {
        write_file(&out("mesh.csv"), &finest.solution.space().mesh().to_csv())?;
        written.push("mesh.csv");
    }
    if cfg.emit.solution_samples {
        write_file(&out("solution_samples.csv"), &solution_samples(&problem, finest)?)?;
        written.push("solution_samples.csv");
    }

    print!("{}", summary(&report));
    if !written.is_empty() {
        println!("wrote {} to {}", written.join(", "), cfg.output_dir.display());
    }
    Ok(())
}

fn export_geometry(problem: &str, path: &Path) -> Result<(), Failure> {
    let kind: ProblemKind = problem.parse().map_err(|e: Error| Failure::Config(e.to_string()))?;
    let json = ManufacturedProblem::new(kind).patch().to_json()?;
    write_file(path, &json)?;
    println!("wrote {kind} geometry to {}", path.display());
    Ok(())
}

fn mesh_info(path: &Path) -> Result<(), Failure> {
    let cfg = RunConfig::load(path)?;
    let problem = ManufacturedProblem::new(cfg.problem);
    let mu = cfg.grading.resolve(problem.nu, cfg.degree)?;
    let degrees = study_degrees(problem.patch(), cfg.degree);
    println!(
        "problem {}  degree ({}, {})  mu {mu}  segments {}",
        cfg.problem,
        degrees[0],
        degrees[1],
        problem.patch().segments()
    );
    println!(
        "{:>5} {:>9} {:>7} {:>11} {:>11} {:>9} {:>13}",
        "N", "elements", "ndofs", "max diam", "min h1", "theta1", "size warnings"
    );
    for &n in &cfg.levels {
        let space = build_space(problem.patch(), degrees, [n, n], mu)?;
        let mesh = &space.mesh();
        let q = quasi_uniformity_report(mesh)?;
        let bounds = size_bound_report(mesh)?;
        let min_h1 = mesh.sizes_u().iter().copied().fold(f64::INFINITY, f64::min);
        let [e1, e2] = mesh.shape();
        println!(
            "{:>5} {:>9} {:>7} {:>11.4e} {:>11.4e} {:>9.4} {:>13}",
            n,
            format!("{e1}x{e2}"),
            space.n_dofs(),
            mesh.global_h(),
            min_h1,
            q.theta1,
            bounds.warnings().len()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Run { config } => run(config),
        Command::ExportGeometry { problem, path } => export_geometry(problem, path),
        Command::MeshInfo { config } => mesh_info(config),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
