//! Galerkin assembly and solution of `-Δu = f` with homogeneous
//! Dirichlet/Neumann conditions on a polar spline space.

use std::collections::BTreeSet;

use nalgebra::DVector;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};

use crate::error::{Error, Result};
use crate::parallel::map_indices;
use crate::polar_space::PolarSplineSpace;
use crate::quadrature::QuadratureRule;

/// Relative residual required from [`solve_spd`].
pub const SOLVER_TOL: f64 = 1e-12;

/// Stiffness matrix and load vector over a set of free DOFs.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub stiffness: CsrMatrix<f64>,
    pub load: Vec<f64>,
    /// Global DOF of each row.
    pub free_dofs: Vec<usize>,
    /// Size of the full DOF vector.
    pub n_dofs: usize,
}

impl LinearSystem {
    pub fn len(&self) -> usize {
        self.free_dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.free_dofs.is_empty()
    }

    /// Full vector from a vector over the free DOFs; constrained DOFs are 0.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_dofs];
        for (&d, &v) in self.free_dofs.iter().zip(reduced) {
            full[d] = v;
        }
        full
    }
}

struct ElementContribution {
    dofs: Vec<usize>,
    stiffness: Vec<f64>,
    load: Vec<f64>,
}

fn element_contribution<F>(
    space: &PolarSplineSpace,
    u: (f64, f64),
    v: (f64, f64),
    quad: &QuadratureRule,
    f: &F,
) -> Result<ElementContribution>
where
    F: Fn([f64; 2]) -> f64,
{
    let points = quad.element_points(u, v)?;
    let mut dofs: Vec<usize> = Vec::new();
    let mut stiffness = Vec::new();
    let mut load = Vec::new();
    let mut grads = Vec::new();
    for (zeta, w) in points {
        let b = space.eval_basis(zeta, 1)?;
        if dofs.is_empty() {
            dofs = b.dofs.clone();
            stiffness = vec![0.0; dofs.len() * dofs.len()];
            load = vec![0.0; dofs.len()];
        }
        debug_assert_eq!(dofs, b.dofs);
        let det = b.mapped.det();
        if !(det > 0.0) {
            return Err(Error::SingularJacobian { det, zeta });
        }
        let dx = w * det;
        grads.clear();
        grads.extend(b.gradients.iter().map(|&g| b.mapped.push_gradient(g)));
        let fx = f(b.mapped.x);
        let m = dofs.len();
        for a in 0..m {
            load[a] += dx * fx * b.values[a];
            for c in 0..m {
                stiffness[a * m + c] += dx * (grads[a][0] * grads[c][0] + grads[a][1] * grads[c][1]);
            }
        }
    }
    Ok(ElementContribution {
        dofs,
        stiffness,
        load,
    })
}

/// Assembles the full system over all DOFs of `space`.
pub fn assemble<F>(space: &PolarSplineSpace, f: F, quad: &QuadratureRule) -> Result<LinearSystem>
where
    F: Fn([f64; 2]) -> f64 + Sync + Send,
{
    let mesh = space.mesh();
    let elements: Vec<_> = mesh.elements().collect();
    let parts = map_indices(elements.len(), |k| {
        element_contribution(space, elements[k].u, elements[k].v, quad, &f)
    });
    let n = space.n_dofs();
    let mut coo = CooMatrix::new(n, n);
    let mut load = vec![0.0; n];
    for part in parts {
        let part = part?;
        let m = part.dofs.len();
        for (a, &da) in part.dofs.iter().enumerate() {
            load[da] += part.load[a];
            for (c, &dc) in part.dofs.iter().enumerate() {
                coo.push(da, dc, part.stiffness[a * m + c]);
            }
        }
    }
    Ok(LinearSystem {
        stiffness: CsrMatrix::from(&coo),
        load,
        free_dofs: (0..n).collect(),
        n_dofs: n,
    })
}

/// Removes the rows and columns of `constrained` DOFs.
pub fn apply_dirichlet(system: &LinearSystem, constrained: &BTreeSet<usize>) -> Result<LinearSystem> {
    if constrained.is_empty() {
        return Err(Error::BoundaryConditions(
            "no Dirichlet DOFs: the problem needs a nonempty Dirichlet boundary".into(),
        ));
    }
    let mut position = vec![usize::MAX; system.len()];
    let mut free_dofs = Vec::new();
    for (row, &d) in system.free_dofs.iter().enumerate() {
        if !constrained.contains(&d) {
            position[row] = free_dofs.len();
            free_dofs.push(d);
        }
    }
    if free_dofs.is_empty() {
        return Err(Error::BoundaryConditions("every DOF is constrained".into()));
    }
    let m = free_dofs.len();
    let mut coo = CooMatrix::new(m, m);
    for (r, c, &v) in system.stiffness.triplet_iter() {
        let (pr, pc) = (position[r], position[c]);
        if pr != usize::MAX && pc != usize::MAX {
            coo.push(pr, pc, v);
        }
    }
    let load = system
        .load
        .iter()
        .enumerate()
        .filter(|&(r, _)| position[r] != usize::MAX)
        .map(|(_, &v)| v)
        .collect();
    Ok(LinearSystem {
        stiffness: CsrMatrix::from(&coo),
        load,
        free_dofs,
        n_dofs: system.n_dofs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Cholesky,
    ConjugateGradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub relative_residual: f64,
    pub method: SolverMethod,
    pub iterations: usize,
}

fn residual(k: &CsrMatrix<f64>, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = b.to_vec();
    for (i, row) in k.row_iter().enumerate() {
        r[i] -= row
            .col_indices()
            .iter()
            .zip(row.values())
            .map(|(&j, v)| v * x[j])
            .sum::<f64>();
    }
    r
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Ratio of the largest to the smallest diagonal entry, a cheap lower
/// bound on the condition number.
pub fn diagonal_condition_estimate(k: &CsrMatrix<f64>) -> f64 {
    let d: Vec<f64> = k.diagonal_as_csr().values().iter().map(|v| v.abs()).collect();
    let max = d.iter().copied().fold(0.0, f64::max);
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// Solves a symmetric positive definite system to relative residual
/// [`SOLVER_TOL`], by sparse Cholesky with iterative refinement and, if that
/// fails, Jacobi-preconditioned conjugate gradients.
pub fn solve_spd(k: &CsrMatrix<f64>, b: &[f64]) -> Result<SolveReport> {
    let n = b.len();
    if k.nrows() != n || k.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{}, right-hand side has length {n}",
            k.nrows(),
            k.ncols()
        )));
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(SolveReport {
            x: vec![0.0; n],
            relative_residual: 0.0,
            method: SolverMethod::Cholesky,
            iterations: 0,
        });
    }
    if let Ok(chol) = CscCholesky::factor(&CscMatrix::from(k)) {
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut rel = 1.0;
        for it in 0..6 {
            let dx = chol.solve(&DVector::from_column_slice(&r));
            for (xi, d) in x.iter_mut().zip(dx.iter()) {
                *xi += d;
            }
            r = residual(k, &x, b);
            let next = norm(&r) / bnorm;
            if next < SOLVER_TOL {
                return Ok(SolveReport {
                    x,
                    relative_residual: next,
                    method: SolverMethod::Cholesky,
                    iterations: it + 1,
                });
            }
            if it > 0 && next >= 0.5 * rel {
                break;
            }
            rel = next;
        }
        let cg = conjugate_gradient(k, b, Some(&x), SOLVER_TOL, 20 * n + 100)?;
        if cg.relative_residual < SOLVER_TOL {
            return Ok(cg);
        }
    } else {
        let cg = conjugate_gradient(k, b, None, SOLVER_TOL, 20 * n + 100)?;
        if cg.relative_residual < SOLVER_TOL {
            return Ok(cg);
        }
    }
    Err(Error::Solver(format!(
        "relative residual above {SOLVER_TOL:e}; diagonal condition estimate {:.3e}",
        diagonal_condition_estimate(k)
    )))
}

/// Jacobi-preconditioned conjugate gradients, stopping at relative residual
/// `tol` or after `max_iter` iterations.
pub fn conjugate_gradient(
    k: &CsrMatrix<f64>,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    let n = b.len();
    let mut diag = vec![0.0; n];
    for (r, c, &v) in k.triplet_iter() {
        if r == c {
            diag[r] = v;
        }
    }
    if diag.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Solver("matrix has a non-positive diagonal entry".into()));
    }
    let bnorm = norm(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if bnorm == 0.0 {
        return Ok(SolveReport {
            x: vec![0.0; n],
            relative_residual: 0.0,
            method: SolverMethod::ConjugateGradient,
            iterations: 0,
        });
    }
    let mut r = residual(k, &x, b);
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut iterations = 0;
    let mut rel = norm(&r) / bnorm;
    while rel >= tol && iterations < max_iter {
        let kp = {
            let zero = vec![0.0; n];
            let neg = residual(k, &p, &zero);
            neg.into_iter().map(|v| -v).collect::<Vec<_>>()
        };
        let pkp: f64 = p.iter().zip(&kp).map(|(a, b)| a * b).sum();
        if !(pkp > 0.0) {
            return Err(Error::Solver("matrix is not positive definite".into()));
        }
        let alpha = rz / pkp;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * kp[i];
        }
        iterations += 1;
        if iterations % 50 == 0 {
            r = residual(k, &x, b);
        }
        rel = norm(&r) / bnorm;
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = norm(&residual(k, &x, b)) / bnorm;
    Ok(SolveReport {
        x,
        relative_residual: rel,
        method: SolverMethod::ConjugateGradient,
        iterations,
    })
}

/// A member of the polar spline space given by its full coefficient vector.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    space: PolarSplineSpace,
    coefficients: Vec<f64>,
}

/// Value, and physical gradient when requested, at a point of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub x: [f64; 2],
    pub value: f64,
    pub gradient: Option<[f64; 2]>,
}

impl DiscreteSolution {
    pub fn new(space: PolarSplineSpace, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != space.n_dofs() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                space.n_dofs(),
                coefficients.len()
            )));
        }
        Ok(Self { space, coefficients })
    }

    pub fn space(&self) -> &PolarSplineSpace {
        &self.space
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Evaluation at a parametric point. The gradient is unavailable on the
    /// collapsed edge `ζ1 = 0`.
    pub fn evaluate_parametric(&self, zeta: [f64; 2], gradient: bool) -> Result<PointValue> {
        if !gradient {
            let b = self.space.eval_basis(zeta, 0)?;
            let value = b.dofs.iter().zip(&b.values).map(|(&d, v)| self.coefficients[d] * v).sum();
            return Ok(PointValue {
                x: b.mapped.x,
                value,
                gradient: None,
            });
        }
        if zeta[0] == 0.0 {
            return Err(Error::SingularJacobian { det: 0.0, zeta });
        }
        let (value, g, mapped) = self.space.evaluate_with_gradient(&self.coefficients, zeta)?;
        let det = mapped.det();
        if !(det > 0.0) {
            return Err(Error::SingularJacobian { det, zeta });
        }
        Ok(PointValue {
            x: mapped.x,
            value,
            gradient: Some(mapped.push_gradient(g)),
        })
    }

    /// Evaluation at a physical point, located with the inverse geometry map.
    pub fn evaluate_physical(&self, x: [f64; 2], gradient: bool) -> Result<PointValue> {
        let zeta = self.space.patch().inverse_map(x)?;
        let mut out = self.evaluate_parametric(zeta, gradient)?;
        out.x = x;
        Ok(out)
    }
}

/// Assembles, constrains and solves; constrained coefficients are zero.
pub fn solve_problem<F>(
    space: &PolarSplineSpace,
    f: F,
    dirichlet: &BTreeSet<usize>,
    quad: &QuadratureRule,
) -> Result<(DiscreteSolution, SolveReport)>
where
    F: Fn([f64; 2]) -> f64 + Sync + Send,
{
    let full = assemble(space, f, quad)?;
    let reduced = apply_dirichlet(&full, dirichlet)?;
    let report = solve_spd(&reduced.stiffness, &reduced.load)?;
    let solution = DiscreteSolution::new(space.clone(), reduced.expand(&report.x))?;
    Ok((solution, report))
}

/// Solves a reduced system and returns the full coefficient vector.
pub fn solve(space: &PolarSplineSpace, system: &LinearSystem) -> Result<DiscreteSolution> {
    let report = solve_spd(&system.stiffness, &system.load)?;
    DiscreteSolution::new(space.clone(), system.expand(&report.x))
}
