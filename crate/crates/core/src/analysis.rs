//! Manufactured Poisson problems with corner singularities, discretization
//! errors and convergence studies on uniform and graded meshes.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{make_circular_sector, make_l_shape, DomainKind, Edge, PolarPatch, ReferenceMap};
use crate::parallel::map_indices;
use crate::polar_space::{build_space, PolarSplineSpace};
use crate::quadrature::QuadratureRule;
use crate::solver::{solve_problem, DiscreteSolution};

/// A function on the physical domain with a known gradient.
pub trait ExactSolution: Sync {
    fn value(&self, x: [f64; 2]) -> f64;
    fn gradient(&self, x: [f64; 2]) -> [f64; 2];
    /// Geometry the function is posed on, if fixed.
    fn domain(&self) -> Option<&PolarPatch> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Pacman,
    LShape,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pacman => "pacman",
            Self::LShape => "lshape",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pacman" => Ok(Self::Pacman),
            "lshape" | "l-shape" => Ok(Self::LShape),
            other => Err(Error::InvalidArgument(format!(
                "unknown problem '{other}' (expected pacman or lshape)"
            ))),
        }
    }
}

/// Poisson problem with a singular exact solution `u ~ r^ν` at the corner.
#[derive(Debug, Clone)]
pub struct ManufacturedProblem {
    pub kind: ProblemKind,
    pub omega: f64,
    pub nu: f64,
    pub dirichlet: Vec<Edge>,
    pub neumann: Vec<Edge>,
    patch: PolarPatch,
    reference: ReferenceMap,
}

/// Unit sector with `ω = 5π/3`, `u = r^ν cos(νφ)(1 - r)`, Dirichlet data on
/// the arc and Neumann data on the straight edges.
pub fn pacman_problem() -> ManufacturedProblem {
    let omega = 5.0 * PI / 3.0;
    ManufacturedProblem {
        kind: ProblemKind::Pacman,
        omega,
        nu: PI / omega,
        dirichlet: vec![Edge::Outer],
        neumann: vec![Edge::Start, Edge::End],
        patch: make_circular_sector(omega, 3).expect("valid sector"),
        reference: ReferenceMap::Sector { omega },
    }
}

/// L-shaped domain, `u = r^ν sin(νφ)(1 - x²)(1 - y²)` with Neumann data on
/// the edge `{(0, -t)}` and Dirichlet data elsewhere.
pub fn lshape_problem() -> ManufacturedProblem {
    let omega = 1.5 * PI;
    ManufacturedProblem {
        kind: ProblemKind::LShape,
        omega,
        nu: PI / (2.0 * omega),
        dirichlet: vec![Edge::Outer, Edge::Start],
        neumann: vec![Edge::End],
        patch: make_l_shape().expect("valid L-shape"),
        reference: ReferenceMap::LShape,
    }
}

impl ManufacturedProblem {
    pub fn new(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Pacman => pacman_problem(),
            ProblemKind::LShape => lshape_problem(),
        }
    }

    pub fn patch(&self) -> &PolarPatch {
        &self.patch
    }

    pub fn reference_map(&self) -> &ReferenceMap {
        &self.reference
    }

    pub fn domain_kind(&self) -> DomainKind {
        match self.kind {
            ProblemKind::Pacman => DomainKind::Sector,
            ProblemKind::LShape => DomainKind::LShape,
        }
    }

    /// Polar coordinates with the angle in `(ω/2 - π, ω/2 + π]`, so that
    /// the domain sits inside `[0, ω]` without a branch cut.
    pub fn polar(&self, x: [f64; 2]) -> (f64, f64) {
        let r = x[0].hypot(x[1]);
        let mut phi = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
        if phi > 0.5 * (self.omega + 2.0 * PI) {
            phi -= 2.0 * PI;
        }
        (r, phi)
    }

    /// Right-hand side `f = -Δu`.
    pub fn rhs(&self, x: [f64; 2]) -> f64 {
        let (r, phi) = self.polar(x);
        let nu = self.nu;
        match self.kind {
            ProblemKind::Pacman => (2.0 * nu + 1.0) * r.powf(nu - 1.0) * (nu * phi).cos(),
            ProblemKind::LShape => {
                // u = s q with s = r^ν sin(νφ) harmonic and q = (1-x²)(1-y²).
                let s = r.powf(nu) * (nu * phi).sin();
                let gs = harmonic_gradient(r, phi, nu);
                let gq = [-2.0 * x[0] * (1.0 - x[1] * x[1]), -2.0 * x[1] * (1.0 - x[0] * x[0])];
                2.0 * s * (2.0 - r * r) - 2.0 * (gs[0] * gq[0] + gs[1] * gq[1])
            }
        }
    }

    /// `n` mapped points along a parametric edge.
    pub fn edge_points(&self, edge: Edge, n: usize) -> Result<Vec<[f64; 2]>> {
        (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1).max(1) as f64;
                let z = match edge {
                    Edge::Outer => [1.0, t],
                    Edge::Start => [t, 0.0],
                    Edge::End => [t, 1.0],
                };
                self.patch.map_point(z)
            })
            .collect()
    }
}

/// Gradient of `r^ν sin(νφ)` in Cartesian components.
fn harmonic_gradient(r: f64, phi: f64, nu: f64) -> [f64; 2] {
    let a = nu * r.powf(nu - 1.0);
    let t = (nu - 1.0) * phi;
    [a * t.sin(), a * t.cos()]
}

impl ExactSolution for ManufacturedProblem {
    fn value(&self, x: [f64; 2]) -> f64 {
        let (r, phi) = self.polar(x);
        let nu = self.nu;
        match self.kind {
            ProblemKind::Pacman => r.powf(nu) * (nu * phi).cos() * (1.0 - r),
            ProblemKind::LShape => {
                r.powf(nu) * (nu * phi).sin() * (1.0 - x[0] * x[0]) * (1.0 - x[1] * x[1])
            }
        }
    }

    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let (r, phi) = self.polar(x);
        let nu = self.nu;
        match self.kind {
            ProblemKind::Pacman => {
                let (c, s) = ((nu * phi).cos(), (nu * phi).sin());
                let ur = c * (nu * r.powf(nu - 1.0) - (nu + 1.0) * r.powf(nu));
                // (1/r) ∂u/∂φ
                let ut = -nu * r.powf(nu - 1.0) * s * (1.0 - r);
                let (cp, sp) = (phi.cos(), phi.sin());
                [ur * cp - ut * sp, ur * sp + ut * cp]
            }
            ProblemKind::LShape => {
                let s = r.powf(nu) * (nu * phi).sin();
                let q = (1.0 - x[0] * x[0]) * (1.0 - x[1] * x[1]);
                let gs = harmonic_gradient(r, phi, nu);
                let gq = [-2.0 * x[0] * (1.0 - x[1] * x[1]), -2.0 * x[1] * (1.0 - x[0] * x[0])];
                [q * gs[0] + s * gq[0], q * gs[1] + s * gq[1]]
            }
        }
    }

    fn domain(&self) -> Option<&PolarPatch> {
        Some(&self.patch)
    }
}

/// `μ = min(0.9 ν / p, 1)`.
pub fn grading_parameter(nu: f64, p: usize) -> Result<f64> {
    if !(nu > 0.0) || p == 0 {
        return Err(Error::InvalidArgument(format!("need ν > 0 and p >= 1, got ν = {nu}, p = {p}")));
    }
    Ok((0.9 * nu / p as f64).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_semi: f64,
    pub h1: f64,
}

/// L² and H¹ errors of `solution` against `exact`, by element quadrature
/// on the parametric mesh.
pub fn error_norms(solution: &DiscreteSolution, exact: &dyn ExactSolution, quad: &QuadratureRule) -> Result<ErrorNorms> {
    let space = solution.space();
    if let Some(patch) = exact.domain() {
        if patch != space.patch() {
            return Err(Error::InvalidArgument(
                "solution and exact solution live on different geometries".into(),
            ));
        }
    }
    let mesh = space.mesh();
    let elements: Vec<_> = mesh.elements().collect();
    let parts = map_indices(elements.len(), |k| -> Result<(f64, f64)> {
        let e = elements[k];
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for (zeta, w) in quad.element_points(e.u, e.v)? {
            let (uh, g, mapped) = space.evaluate_with_gradient(solution.coefficients(), zeta)?;
            let det = mapped.det();
            if !(det > 0.0) {
                return Err(Error::SingularJacobian { det, zeta });
            }
            let gh = mapped.push_gradient(g);
            let x = mapped.x;
            let du = exact.value(x) - uh;
            let gu = exact.gradient(x);
            let (d0, d1) = (gu[0] - gh[0], gu[1] - gh[1]);
            l2 += w * det * du * du;
            h1 += w * det * (d0 * d0 + d1 * d1);
        }
        Ok((l2, h1))
    });
    let (mut l2, mut h1) = (0.0, 0.0);
    for part in parts {
        let (a, b) = part?;
        l2 += a;
        h1 += b;
    }
    Ok(ErrorNorms {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
        h1: (l2 + h1).sqrt(),
    })
}

/// Mesh grading used by a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    /// [`grading_parameter`] of the problem exponent and degree.
    Auto,
    Explicit(f64),
}

impl Grading {
    pub fn resolve(self, nu: f64, p: usize) -> Result<f64> {
        match self {
            Self::Uniform => Ok(1.0),
            Self::Auto => grading_parameter(nu, p),
            Self::Explicit(mu) if mu > 0.0 && mu <= 1.0 => Ok(mu),
            Self::Explicit(mu) => Err(Error::InvalidGrading(mu)),
        }
    }
}

/// Degrees `(p, p)`, with the angular degree raised to the geometry degree
/// when `p` is lower.
pub fn study_degrees(patch: &PolarPatch, p: usize) -> [usize; 2] {
    [p, p.max(patch.surface().kv2.degree())]
}

/// A discrete solution of a manufactured problem at one refinement level.
#[derive(Debug, Clone)]
pub struct LevelSolution {
    pub n: usize,
    pub h: f64,
    pub solution: DiscreteSolution,
    pub errors: ErrorNorms,
    pub relative_residual: f64,
}

/// Builds the space with `n` breakpoints per direction, solves and measures
/// the errors.
pub fn solve_level(
    problem: &ManufacturedProblem,
    p: usize,
    n: usize,
    mu: f64,
    quad: &QuadratureRule,
) -> Result<LevelSolution> {
    let space: PolarSplineSpace = build_space(problem.patch(), study_degrees(problem.patch(), p), [n, n], mu)?;
    let h = {
        let [h1, h2] = space.mesh().refinement_parameters();
        h1.max(h2)
    };
    let dirichlet = space.dirichlet_dofs(&problem.dirichlet)?;
    let (solution, report) = solve_problem(&space, |x| problem.rhs(x), &dirichlet, quad)?;
    let errors = error_norms(&solution, problem, quad)?;
    Ok(LevelSolution {
        n,
        h,
        solution,
        errors,
        relative_residual: report.relative_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub level: usize,
    /// Breakpoints per direction requested for this level.
    pub n: usize,
    pub h: f64,
    pub ndofs: usize,
    pub err_l2: f64,
    pub err_h1: f64,
    pub rate_l2: Option<f64>,
    pub rate_h1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub problem: ProblemKind,
    pub degree: [usize; 2],
    pub mu: f64,
    pub quadrature_nodes: usize,
    pub rows: Vec<ReportRow>,
    /// Least-squares slopes of `log e` against `log h` over the final three
    /// levels.
    pub slope_l2: Option<f64>,
    pub slope_h1: Option<f64>,
}

fn rate(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

impl ConvergenceReport {
    pub fn from_levels(
        problem: ProblemKind,
        degree: [usize; 2],
        mu: f64,
        quadrature_nodes: usize,
        levels: &[LevelSolution],
    ) -> Self {
        let mut rows: Vec<ReportRow> = Vec::with_capacity(levels.len());
        for (k, l) in levels.iter().enumerate() {
            let (rate_l2, rate_h1) = match k.checked_sub(1).map(|j| &levels[j]) {
                Some(prev) => (
                    Some(rate(prev.errors.l2, l.errors.l2, prev.h, l.h)),
                    Some(rate(prev.errors.h1, l.errors.h1, prev.h, l.h)),
                ),
                None => (None, None),
            };
            rows.push(ReportRow {
                level: k,
                n: l.n,
                h: l.h,
                ndofs: l.solution.space().n_dofs(),
                err_l2: l.errors.l2,
                err_h1: l.errors.h1,
                rate_l2,
                rate_h1,
            });
        }
        let tail = &rows[rows.len().saturating_sub(3)..];
        let h: Vec<f64> = tail.iter().map(|r| r.h).collect();
        let l2: Vec<f64> = tail.iter().map(|r| r.err_l2).collect();
        let h1: Vec<f64> = tail.iter().map(|r| r.err_h1).collect();
        Self {
            problem,
            degree,
            mu,
            quadrature_nodes,
            slope_l2: log_log_slope(&h, &l2),
            slope_h1: log_log_slope(&h, &h1),
            rows,
        }
    }

    /// Rate of the last interval.
    pub fn last_rates(&self) -> (Option<f64>, Option<f64>) {
        self.rows.last().map_or((None, None), |r| (r.rate_l2, r.rate_h1))
    }

    /// CSV with a commented header echoing the study parameters.
    pub fn to_csv(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map_or_else(String::new, |x| format!("{x:.6}"))
        }
        let mut s = String::new();
        let _ = writeln!(s, "# problem={}", self.problem);
        let _ = writeln!(s, "# degree={},{}", self.degree[0], self.degree[1]);
        let _ = writeln!(s, "# mu={}", self.mu);
        let _ = writeln!(s, "# quadrature_nodes={}", self.quadrature_nodes);
        s.push_str("level,h,ndofs,err_l2,err_h1,rate_l2,rate_h1\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.12e},{},{:.12e},{:.12e},{},{}",
                r.level,
                r.h,
                r.ndofs,
                r.err_l2,
                r.err_h1,
                opt(r.rate_l2),
                opt(r.rate_h1)
            );
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Solves `problem` with degrees `(p, p)` at each breakpoint count in
/// `levels` and collects errors and rates.
pub fn convergence_study(
    problem: &ManufacturedProblem,
    p: usize,
    grading: Grading,
    levels: &[usize],
    quad: &QuadratureRule,
) -> Result<ConvergenceReport> {
    let (report, _) = convergence_study_with_solutions(problem, p, grading, levels, quad)?;
    Ok(report)
}

/// Like [`convergence_study`], also returning the solution of every level.
pub fn convergence_study_with_solutions(
    problem: &ManufacturedProblem,
    p: usize,
    grading: Grading,
    levels: &[usize],
    quad: &QuadratureRule,
) -> Result<(ConvergenceReport, Vec<LevelSolution>)> {
    if levels.is_empty() || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("levels must be nonempty and increasing".into()));
    }
    if p == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    let mu = grading.resolve(problem.nu, p)?;
    let solutions = levels
        .iter()
        .map(|&n| solve_level(problem, p, n, mu, quad))
        .collect::<Result<Vec<_>>>()?;
    let degrees = study_degrees(problem.patch(), p);
    let report = ConvergenceReport::from_levels(problem.kind, degrees, mu, quad.nodes_per_direction, &solutions);
    Ok((report, solutions))
}

/// Errors measured with the assembly rule and with a finer rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureDiagnostic {
    pub base: ErrorNorms,
    pub fine: ErrorNorms,
    /// Largest relative change of an error norm.
    pub relative_change: f64,
}

/// Compares the error norms under `quad` and a 12×12 rule.
pub fn quadrature_diagnostic(
    solution: &DiscreteSolution,
    exact: &dyn ExactSolution,
    quad: &QuadratureRule,
) -> Result<QuadratureDiagnostic> {
    let base = error_norms(solution, exact, quad)?;
    let fine = error_norms(solution, exact, &QuadratureRule::new(12)?)?;
    let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
    Ok(QuadratureDiagnostic {
        base,
        fine,
        relative_change: rel(base.l2, fine.l2).max(rel(base.h1, fine.h1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    struct Zero;
    impl ExactSolution for Zero {
        fn value(&self, _: [f64; 2]) -> f64 {
            0.0
        }
        fn gradient(&self, _: [f64; 2]) -> [f64; 2] {
            [0.0, 0.0]
        }
    }

    fn random_interior(problem: &ManufacturedProblem, seed: u64, n: usize) -> Vec<[f64; 2]> {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let z = [rng.random_range(0.1..0.9), rng.random_range(0.05..0.95)];
                problem.patch().map_point(z).unwrap()
            })
            .collect()
    }

    #[test]
    fn exponents() {
        assert!((pacman_problem().nu - 0.6).abs() < 1e-15);
        assert!((lshape_problem().nu - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn grading_examples() {
        assert!((grading_parameter(0.6, 3).unwrap() - 0.18).abs() < 1e-15);
        assert!((grading_parameter(0.6, 2).unwrap() - 0.27).abs() < 1e-15);
        assert!((grading_parameter(1.0 / 3.0, 1).unwrap() - 0.3).abs() < 1e-15);
        assert!((grading_parameter(1.0 / 3.0, 2).unwrap() - 0.15).abs() < 1e-15);
        assert_eq!(grading_parameter(2.0, 1).unwrap(), 1.0);
        assert!(grading_parameter(0.0, 1).is_err());
        assert!(Grading::Explicit(1.5).resolve(0.6, 2).is_err());
    }

    #[test]
    fn laplacian_matches_rhs() {
        let h = 1e-4;
        for problem in [pacman_problem(), lshape_problem()] {
            for x in random_interior(&problem, 1, 50) {
                if x[0].hypot(x[1]) < 0.05 {
                    continue;
                }
                let u = |a: f64, b: f64| problem.value([x[0] + a, x[1] + b]);
                let lap = (u(h, 0.0) + u(-h, 0.0) + u(0.0, h) + u(0.0, -h) - 4.0 * u(0.0, 0.0)) / (h * h);
                assert!((-lap - problem.rhs(x)).abs() < 1e-4, "{:?} {x:?}", problem.kind);
            }
        }
    }

    #[test]
    fn lshape_rhs_closed_form() {
        let problem = lshape_problem();
        let nu = problem.nu;
        for x in random_interior(&problem, 2, 50) {
            let (r, phi) = problem.polar(x);
            let want = r.powf(nu)
                * ((4.0 + 4.0 * nu - 2.0 * r * r - nu * r * r) * (nu * phi).sin()
                    + nu * r * r * ((nu - 4.0) * phi).sin());
            assert!((problem.rhs(x) - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = 1e-6;
        for problem in [pacman_problem(), lshape_problem()] {
            for x in random_interior(&problem, 3, 50) {
                let g = problem.gradient(x);
                for k in 0..2 {
                    let mut a = x;
                    let mut b = x;
                    a[k] -= h;
                    b[k] += h;
                    let fd = (problem.value(b) - problem.value(a)) / (2.0 * h);
                    assert!((fd - g[k]).abs() < 1e-6, "{:?}", problem.kind);
                }
            }
        }
    }

    #[test]
    fn boundary_compatibility() {
        for problem in [pacman_problem(), lshape_problem()] {
            for &edge in &problem.dirichlet {
                for x in problem.edge_points(edge, 100).unwrap() {
                    assert!(problem.value(x).abs() < 1e-12, "{:?} {edge:?} {x:?}", problem.kind);
                }
            }
            for &edge in &problem.neumann {
                let pts = problem.edge_points(edge, 100).unwrap();
                let dir = pts[pts.len() - 1];
                let normal = [dir[1], -dir[0]];
                for x in &pts[1..] {
                    let g = problem.gradient(*x);
                    assert!((g[0] * normal[0] + g[1] * normal[1]).abs() < 1e-8, "{:?} {edge:?}", problem.kind);
                }
            }
        }
        let p = pacman_problem();
        for k in 0..10 {
            let phi = k as f64 / 9.0 * p.omega;
            assert!(p.value([phi.cos(), phi.sin()]).abs() < 1e-15);
        }
    }

    #[test]
    fn polar_angle_normalization() {
        let p = pacman_problem();
        let (_, phi) = p.polar([1.0, -1e-12]);
        assert!(phi < 0.0 && phi > -1e-11);
        let (_, phi) = p.polar([0.5, -0.5]);
        assert!((phi - 7.0 * PI / 4.0).abs() < 1e-15);
        let l = lshape_problem();
        let (_, phi) = l.polar([0.0, -1.0]);
        assert!((phi - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn zero_problem_has_zero_error() {
        let problem = pacman_problem();
        let space = build_space(problem.patch(), [2, 2], [5, 5], 1.0).unwrap();
        let d = space.dirichlet_dofs(&problem.dirichlet).unwrap();
        let (sol, _) = solve_problem(&space, |_| 0.0, &d, &QuadratureRule::default()).unwrap();
        let e = error_norms(&sol, &Zero, &QuadratureRule::default()).unwrap();
        assert_eq!((e.l2, e.h1_semi, e.h1), (0.0, 0.0, 0.0));
        assert!(error_norms(&sol, &lshape_problem(), &QuadratureRule::default()).is_err());
    }

    #[test]
    fn dof_count_is_grading_independent() {
        for problem in [pacman_problem(), lshape_problem()] {
            for p in 1..=3 {
                for n in [5, 9, 17] {
                    let d = study_degrees(problem.patch(), p);
                    let a = build_space(problem.patch(), d, [n, n], 1.0).unwrap();
                    let b = build_space(problem.patch(), d, [n, n], 0.3).unwrap();
                    assert_eq!(a.n_dofs(), b.n_dofs());
                }
            }
        }
    }

    #[test]
    fn report_rates_and_csv() {
        let problem = pacman_problem();
        let q = QuadratureRule::default();
        let report = convergence_study(&problem, 2, Grading::Auto, &[5, 9, 17], &q).unwrap();
        assert!((report.mu - 0.27).abs() < 1e-15);
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows[0].rate_l2.is_none());
        let r = &report.rows[2];
        let prev = &report.rows[1];
        let want = (prev.err_h1 / r.err_h1).ln() / (prev.h / r.h).ln();
        assert!((r.rate_h1.unwrap() - want).abs() < 1e-14);
        let csv = report.to_csv();
        assert!(csv.contains("level,h,ndofs,err_l2,err_h1,rate_l2,rate_h1"));
        assert!(csv.contains("# mu=0.27"));
        assert_eq!(csv, convergence_study(&problem, 2, Grading::Auto, &[5, 9, 17], &q).unwrap().to_csv());
        let json = report.to_json().unwrap();
        let back: ConvergenceReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert!(convergence_study(&problem, 2, Grading::Auto, &[9, 5], &q).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let h = [0.25, 0.125, 0.0625];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powf(1.7)).collect();
        assert!((log_log_slope(&h, &e).unwrap() - 1.7).abs() < 1e-12);
        assert!(log_log_slope(&h[..1], &e[..1]).is_none());
    }

    #[test]
    fn projection_error_decreases() {
        let problem = pacman_problem();
        let q = QuadratureRule::default();
        let mut last = f64::INFINITY;
        for n in [3, 5, 9, 17] {
            let space = build_space(problem.patch(), [2, 2], [n, n], 1.0).unwrap();
            let c = space.project(|x| problem.value(x)).unwrap();
            let sol = DiscreteSolution::new(space, c).unwrap();
            let e = error_norms(&sol, &problem, &q).unwrap().l2;
            assert!(e < last);
            last = e;
        }
    }

    #[test]
    fn quadrature_diagnostic_is_small() {
        let problem = pacman_problem();
        let q = QuadratureRule::default();
        let level = solve_level(&problem, 2, 9, 0.27, &q).unwrap();
        let d = quadrature_diagnostic(&level.solution, &problem, &q).unwrap();
        assert!(d.relative_change < 1e-2, "{}", d.relative_change);
    }
}
