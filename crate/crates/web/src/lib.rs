//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes the problem name (`pacman` or `lshape`), the degree
//! and the grading `mu`; a non-positive `mu` selects the automatic grading.

use polar_iga::analysis::{convergence_study, study_degrees, Grading, ManufacturedProblem, ProblemKind};
use polar_iga::geometry::Edge;
use polar_iga::polar_space::build_space;
use polar_iga::quadrature::QuadratureRule;
use polar_iga::solver::solve_problem;
use wasm_bindgen::prelude::*;

const LINE_SAMPLES: usize = 48;

fn setup(problem: &str, degree: usize, mu: f64) -> Result<(ManufacturedProblem, f64), String> {
    let kind: ProblemKind = problem.parse().map_err(|e: polar_iga::Error| e.to_string())?;
    let problem = ManufacturedProblem::new(kind);
    if degree == 0 {
        return Err("degree must be at least 1".into());
    }
    let grading = if mu > 0.0 { Grading::Explicit(mu) } else { Grading::Auto };
    let mu = grading.resolve(problem.nu, degree).map_err(|e| e.to_string())?;
    Ok((problem, mu))
}

/// Mesh lines of the graded mesh with `n` breakpoints per direction, mapped
/// to the physical domain. Polylines are stored as `x, y` pairs separated by
/// a `NaN, NaN` pair. The resolved grading comes first.
pub fn mesh_lines_impl(problem: &str, degree: usize, mu: f64, n: usize) -> Result<Vec<f64>, String> {
    let (problem, mu) = setup(problem, degree, mu)?;
    let space = build_space(problem.patch(), study_degrees(problem.patch(), degree), [n, n], mu)
        .map_err(|e| e.to_string())?;
    let mesh = space.mesh();
    let patch = problem.patch();
    let mut out = vec![mu];
    let mut line = |points: &mut dyn Iterator<Item = [f64; 2]>| -> Result<(), String> {
        for z in points {
            let x = patch.map_point(z).map_err(|e| e.to_string())?;
            out.extend(x);
        }
        out.extend([f64::NAN, f64::NAN]);
        Ok(())
    };
    let t = |k: usize| k as f64 / LINE_SAMPLES as f64;
    for &u in mesh.breakpoints_u() {
        line(&mut (0..=LINE_SAMPLES).map(|k| [u, t(k)]))?;
    }
    for &v in mesh.breakpoints_v() {
        line(&mut (0..=LINE_SAMPLES).map(|k| [t(k), v]))?;
    }
    Ok(out)
}

/// Solves on the `n`-breakpoint space and samples the discrete solution on
/// a `samples × samples` parametric grid. Returns `[x, y, u_h, u]` per node,
/// row by row in `ζ1`.
pub fn solve_impl(problem: &str, degree: usize, mu: f64, n: usize, samples: usize) -> Result<Vec<f64>, String> {
    use polar_iga::analysis::ExactSolution;
    let (problem, mu) = setup(problem, degree, mu)?;
    let samples = samples.max(2);
    let space = build_space(problem.patch(), study_degrees(problem.patch(), degree), [n, n], mu)
        .map_err(|e| e.to_string())?;
    let dirichlet: Vec<Edge> = problem.dirichlet.clone();
    let dofs = space.dirichlet_dofs(&dirichlet).map_err(|e| e.to_string())?;
    let (solution, _) = solve_problem(&space, |x| problem.rhs(x), &dofs, &QuadratureRule::default())
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * samples * samples);
    for i in 0..samples {
        for j in 0..samples {
            let z = [i as f64 / (samples - 1) as f64, j as f64 / (samples - 1) as f64];
            let p = solution.evaluate_parametric(z, false).map_err(|e| e.to_string())?;
            out.extend([p.x[0], p.x[1], p.value, problem.value(p.x)]);
        }
    }
    Ok(out)
}

/// Convergence study over `levels` as the JSON report.
pub fn convergence_impl(problem: &str, degree: usize, mu: f64, levels: &[usize]) -> Result<String, String> {
    let (problem, mu) = setup(problem, degree, mu)?;
    let report = convergence_study(&problem, degree, Grading::Explicit(mu), levels, &QuadratureRule::default())
        .map_err(|e| e.to_string())?;
    report.to_json().map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn mesh_lines(problem: &str, degree: usize, mu: f64, n: usize) -> Result<Vec<f64>, JsError> {
    mesh_lines_impl(problem, degree, mu, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve(problem: &str, degree: usize, mu: f64, n: usize, samples: usize) -> Result<Vec<f64>, JsError> {
    solve_impl(problem, degree, mu, n, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn convergence(problem: &str, degree: usize, mu: f64, levels: Vec<usize>) -> Result<String, JsError> {
    convergence_impl(problem, degree, mu, &levels).map_err(|e| JsError::new(&e))
}
