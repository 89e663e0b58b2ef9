//! The continuous polar spline space on a refined polar patch.
//!
//! The tensor NURBS space of the refined patch is the scaffold. All basis
//! functions of the first radial row (`i1 = 0`) are merged into a single
//! global function, which reduces to `B_(0,p1)(ζ1)` in the parametric
//! domain and takes the value 1 at the corner. Global DOF 0 is that merged
//! function; tensor index `(i1, i2)` with `i1 >= 1` becomes
//! `1 + (i1 - 1) n2 + i2`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::{Edge, PolarPatch};
use crate::mesh::BezierMesh;
use crate::nurbs::{MappedPoint, NurbsSurface};
use crate::parallel::map_indices;
use crate::splines::{graded_refine, refine_coefficients, DualBasis, DualMode, KnotVector};

/// Global index of the collapsed DOF.
pub const POLAR_DOF: usize = 0;

#[derive(Debug, Clone)]
pub struct PolarSplineSpace {
    patch: PolarPatch,
    degrees: [usize; 2],
    mu: f64,
    surface: NurbsSurface,
    duals: [DualBasis; 2],
    n_dofs: usize,
}

/// Angular knot vector of degree `p2` containing the geometry space: every
/// arc is split uniformly into `ceil((n2 - 1) / segments)` pieces, arc
/// junctions keep C⁰ continuity and new breakpoints get multiplicity one.
pub fn angular_refinement(geometry: &KnotVector, p2: usize, n2: usize) -> Result<KnotVector> {
    let pg = geometry.degree();
    if p2 < pg {
        return Err(Error::InvalidRefinement(format!(
            "angular degree {p2} is below the geometry degree {pg}"
        )));
    }
    if n2 < 2 {
        return Err(Error::InvalidRefinement(format!("need N >= 2 breakpoints, got {n2}")));
    }
    let z = geometry.breakpoints();
    let mult = geometry.multiplicities();
    let segments = z.len() - 1;
    let sub = (n2 - 1).div_ceil(segments);
    let total = segments * sub;
    let mut breakpoints = Vec::with_capacity(total + 1);
    let mut interior = Vec::with_capacity(total.saturating_sub(1));
    for s in 0..segments {
        for k in 0..sub {
            let idx = s * sub + k;
            breakpoints.push(if k == 0 { z[s] } else { idx as f64 / total as f64 });
            if idx > 0 {
                interior.push(if k == 0 { (mult[s] + p2 - pg).min(p2) } else { 1 });
            }
        }
    }
    breakpoints.push(1.0);
    KnotVector::from_breakpoints(&breakpoints, &interior, p2)
}

/// Refines `patch` to degrees `p` with `n[0]` graded radial breakpoints
/// (grading `mu`) and about `n[1]` angular breakpoints. The geometry map is
/// unchanged up to rounding.
pub fn build_space(patch: &PolarPatch, p: [usize; 2], n: [usize; 2], mu: f64) -> Result<PolarSplineSpace> {
    if p[0] < 1 {
        return Err(Error::InvalidRefinement("radial degree must be at least 1".into()));
    }
    let kv1 = graded_refine(p[0], n[0], mu)?;
    let coarse2 = &patch.surface().kv2;
    let kv2 = angular_refinement(coarse2, p[1], n[1])?;

    let (outer, weights) = patch.outer_row();
    let homogeneous: [Vec<f64>; 3] = [
        outer.iter().zip(&weights).map(|(c, w)| c[0] * w).collect(),
        outer.iter().zip(&weights).map(|(c, w)| c[1] * w).collect(),
        weights.clone(),
    ];
    let [hx, hy, hw] = homogeneous.map(|c| refine_coefficients(coarse2, &c, &kv2));
    let (hx, hy, hw) = (hx?, hy?, hw?);
    if hw.iter().any(|&w| w <= 0.0) {
        return Err(Error::InvalidGeometry("refined weights are not positive".into()));
    }

    let radial = kv1.greville();
    let (n1, n2) = (kv1.basis_count(), kv2.basis_count());
    let mut control_points = Vec::with_capacity(n1 * n2);
    let mut cw = Vec::with_capacity(n1 * n2);
    for &g in &radial {
        for i2 in 0..n2 {
            control_points.push([g * hx[i2] / hw[i2], g * hy[i2] / hw[i2]]);
            cw.push(hw[i2]);
        }
    }
    let surface = NurbsSurface::new(kv1.clone(), kv2.clone(), control_points, cw)?;
    let duals = [
        DualBasis::new(kv1, DualMode::Boundary)?,
        DualBasis::new(kv2, DualMode::Boundary)?,
    ];
    Ok(PolarSplineSpace {
        patch: patch.clone(),
        degrees: p,
        mu,
        surface,
        duals,
        n_dofs: n1 * n2 - (n2 - 1),
    })
}

/// Nonzero global basis functions at a point. Gradients are parametric.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceBasis {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
    /// Geometry map and Jacobian at the point (Jacobian zero without
    /// derivatives).
    pub mapped: MappedPoint,
}

impl PolarSplineSpace {
    pub fn patch(&self) -> &PolarPatch {
        &self.patch
    }

    pub fn degrees(&self) -> [usize; 2] {
        self.degrees
    }

    pub fn grading(&self) -> f64 {
        self.mu
    }

    /// The refined geometry; the same map as the coarse patch.
    pub fn surface(&self) -> &NurbsSurface {
        &self.surface
    }

    pub fn knot_vectors(&self) -> (&KnotVector, &KnotVector) {
        (&self.surface.kv1, &self.surface.kv2)
    }

    pub fn tensor_shape(&self) -> [usize; 2] {
        self.surface.shape()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn mesh(&self) -> BezierMesh {
        BezierMesh::new(&self.surface.kv1, &self.surface.kv2)
    }

    pub fn dof(&self, i1: usize, i2: usize) -> usize {
        if i1 == 0 {
            POLAR_DOF
        } else {
            1 + (i1 - 1) * self.surface.kv2.basis_count() + i2
        }
    }

    /// Tensor index of a non-polar DOF.
    pub fn tensor_index(&self, dof: usize) -> Option<[usize; 2]> {
        if dof == POLAR_DOF || dof >= self.n_dofs {
            return None;
        }
        let n2 = self.surface.kv2.basis_count();
        Some([1 + (dof - 1) / n2, (dof - 1) % n2])
    }

    /// Values, and parametric gradients for `max_derivative = 1`, of the
    /// global basis functions that may be nonzero at `zeta`.
    pub fn eval_basis(&self, zeta: [f64; 2], max_derivative: usize) -> Result<SpaceBasis> {
        if max_derivative > 1 {
            return Err(Error::InvalidArgument(format!(
                "derivatives up to order 1 are supported, got {max_derivative}"
            )));
        }
        let grads = max_derivative == 1;
        let local = self.surface.basis(zeta, grads)?;
        let mapped = self.surface.map_with_basis(&local);
        let count = local.values.len();
        let mut out = SpaceBasis {
            dofs: Vec::with_capacity(count),
            values: Vec::with_capacity(count),
            gradients: Vec::with_capacity(if grads { count } else { 0 }),
            mapped,
        };
        let merged = local.first[0] == 0;
        if merged {
            out.dofs.push(POLAR_DOF);
            out.values.push(0.0);
            if grads {
                out.gradients.push([0.0, 0.0]);
            }
        }
        for (l, &v) in local.values.iter().enumerate() {
            let [i1, i2] = local.tensor_index(l);
            if i1 == 0 {
                out.values[0] += v;
                if grads {
                    let g = local.gradients[l];
                    out.gradients[0][0] += g[0];
                    out.gradients[0][1] += g[1];
                }
            } else {
                out.dofs.push(self.dof(i1, i2));
                out.values.push(v);
                if grads {
                    out.gradients.push(local.gradients[l]);
                }
            }
        }
        Ok(out)
    }

    /// `Σ c_k N_k(ζ)`.
    pub fn evaluate(&self, coefficients: &[f64], zeta: [f64; 2]) -> Result<f64> {
        self.check_len(coefficients)?;
        let b = self.eval_basis(zeta, 0)?;
        Ok(b.dofs.iter().zip(&b.values).map(|(&d, v)| coefficients[d] * v).sum())
    }

    /// Value and parametric gradient of `Σ c_k N_k` at `zeta`.
    pub fn evaluate_with_gradient(&self, coefficients: &[f64], zeta: [f64; 2]) -> Result<(f64, [f64; 2], MappedPoint)> {
        self.check_len(coefficients)?;
        let b = self.eval_basis(zeta, 1)?;
        let mut value = 0.0;
        let mut grad = [0.0; 2];
        for ((&d, v), g) in b.dofs.iter().zip(&b.values).zip(&b.gradients) {
            value += coefficients[d] * v;
            grad[0] += coefficients[d] * g[0];
            grad[1] += coefficients[d] * g[1];
        }
        Ok((value, grad, b.mapped))
    }

    fn check_len(&self, coefficients: &[f64]) -> Result<()> {
        if coefficients.len() != self.n_dofs {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                self.n_dofs,
                coefficients.len()
            )));
        }
        Ok(())
    }

    /// Global DOFs whose basis functions do not vanish on the given edges.
    /// The collapsed DOF is included when an edge adjacent to the corner is
    /// listed.
    pub fn dirichlet_dofs(&self, edges: &[Edge]) -> Result<BTreeSet<usize>> {
        if edges.is_empty() {
            return Err(Error::BoundaryConditions("the Dirichlet boundary must not be empty".into()));
        }
        let [n1, n2] = self.tensor_shape();
        let mut out = BTreeSet::new();
        for edge in edges {
            match edge {
                Edge::Outer => out.extend((0..n2).map(|i2| self.dof(n1 - 1, i2))),
                Edge::Start => out.extend((0..n1).map(|i1| self.dof(i1, 0))),
                Edge::End => out.extend((0..n1).map(|i1| self.dof(i1, n2 - 1))),
            }
        }
        Ok(out)
    }

    /// Coefficients of the projection of a function given on the parametric
    /// square. `v(0, ·)` must be constant (a function of the corner value).
    pub fn project_parametric<F>(&self, v: F) -> Vec<f64>
    where
        F: Fn([f64; 2]) -> f64 + Sync + Send,
    {
        let corner = v([0.0, 0.0]);
        let surface = &self.surface;
        let [r1, r2] = [self.duals[0].rules(), self.duals[1].rules()];
        map_indices(self.n_dofs, |dof| match self.tensor_index(dof) {
            None => corner,
            Some([i1, i2]) => {
                let (a, b) = (&r1[i1], &r2[i2]);
                let mut acc = 0.0;
                for (&t1, &w1) in a.points.iter().zip(&a.weights) {
                    for (&t2, &w2) in b.points.iter().zip(&b.weights) {
                        let z = [t1, t2];
                        // W depends on ζ2 only; evaluating at ζ1 = 0 is valid.
                        let w = surface.weight_function(z).unwrap_or(f64::NAN);
                        acc += w1 * w2 * w * v(z);
                    }
                }
                acc / surface.weights[surface.index(i1, i2)]
            }
        })
    }

    /// Coefficients of the projection of `v`, a function of the physical
    /// point, evaluated through the geometry map.
    pub fn project<F>(&self, v: F) -> Result<Vec<f64>>
    where
        F: Fn([f64; 2]) -> f64 + Sync + Send,
    {
        let c = self.project_parametric(|z| match self.surface.map_point(z) {
            Ok(x) => v(x),
            Err(_) => f64::NAN,
        });
        if c.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidArgument("projection produced NaN".into()));
        }
        Ok(c)
    }
}
