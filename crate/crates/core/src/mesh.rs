//! Parametric Bézier meshes, element sizes and the diagnostics used to
//! check local quasi-uniformity of graded meshes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PolarPatch;
use crate::splines::{graded_breakpoints, KnotVector};

/// Tolerance used when recognising a graded breakpoint sequence.
const GRADING_TOL: f64 = 1e-10;

/// Tensor grid of the elements `Q_(j1, j2) = (ζ1_j1, ζ1_j1+1) x (ζ2_j2, ζ2_j2+1)`.
///
/// Element indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierMesh {
    kv1: KnotVector,
    kv2: KnotVector,
    breakpoints_u: Vec<f64>,
    breakpoints_v: Vec<f64>,
    sizes_u: Vec<f64>,
    sizes_v: Vec<f64>,
    global_h: f64,
    grading_mu: Option<f64>,
}

fn widths(z: &[f64]) -> Vec<f64> {
    z.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Recovers `μ` from `ζ_1 = h^{1/μ}` and checks the remaining breakpoints.
fn infer_grading(z: &[f64]) -> Option<f64> {
    let n = z.len();
    if n == 2 {
        return Some(1.0);
    }
    let h = 1.0 / (n - 1) as f64;
    let mu = h.ln() / z[1].ln();
    if !(mu > 0.0 && mu <= 1.0 + GRADING_TOL) {
        return None;
    }
    let mu = if (mu - 1.0).abs() <= GRADING_TOL { 1.0 } else { mu };
    let reference = graded_breakpoints(n, mu);
    z.iter()
        .zip(&reference)
        .all(|(a, b)| (a - b).abs() <= GRADING_TOL * b.max(1e-300).max(h.powf(1.0 / mu)))
        .then_some(mu)
}

impl BezierMesh {
    pub fn new(kv1: &KnotVector, kv2: &KnotVector) -> Self {
        let breakpoints_u = kv1.breakpoints();
        let breakpoints_v = kv2.breakpoints();
        let sizes_u = widths(&breakpoints_u);
        let sizes_v = widths(&breakpoints_v);
        let global_h = sizes_u
            .iter()
            .flat_map(|a| sizes_v.iter().map(move |b| a.hypot(*b)))
            .fold(0.0, f64::max);
        let grading_mu = infer_grading(&breakpoints_u);
        Self {
            kv1: kv1.clone(),
            kv2: kv2.clone(),
            breakpoints_u,
            breakpoints_v,
            sizes_u,
            sizes_v,
            global_h,
            grading_mu,
        }
    }

    pub fn knot_vectors(&self) -> (&KnotVector, &KnotVector) {
        (&self.kv1, &self.kv2)
    }

    pub fn breakpoints_u(&self) -> &[f64] {
        &self.breakpoints_u
    }

    pub fn breakpoints_v(&self) -> &[f64] {
        &self.breakpoints_v
    }

    /// Column widths `h_(1, j1)`.
    pub fn sizes_u(&self) -> &[f64] {
        &self.sizes_u
    }

    /// Row heights `h_(2, j2)`.
    pub fn sizes_v(&self) -> &[f64] {
        &self.sizes_v
    }

    /// Largest parametric element diameter.
    pub fn global_h(&self) -> f64 {
        self.global_h
    }

    /// Grading exponent of the radial breakpoints, `None` if they do not
    /// follow `(j h)^{1/μ}`.
    pub fn grading_mu(&self) -> Option<f64> {
        self.grading_mu
    }

    /// Refinement parameters `h_l = 1 / (N_l - 1)`.
    pub fn refinement_parameters(&self) -> [f64; 2] {
        [
            1.0 / self.sizes_u.len() as f64,
            1.0 / self.sizes_v.len() as f64,
        ]
    }

    pub fn shape(&self) -> [usize; 2] {
        [self.sizes_u.len(), self.sizes_v.len()]
    }

    pub fn element_count(&self) -> usize {
        self.sizes_u.len() * self.sizes_v.len()
    }

    /// Elements in row-major order with `j1` as the slow index.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        let [n1, n2] = self.shape();
        (0..n1).flat_map(move |j1| (0..n2).map(move |j2| self.element(j1, j2)))
    }

    pub fn element(&self, j1: usize, j2: usize) -> Element {
        Element {
            index: [j1, j2],
            u: (self.breakpoints_u[j1], self.breakpoints_u[j1 + 1]),
            v: (self.breakpoints_v[j2], self.breakpoints_v[j2 + 1]),
        }
    }

    /// Parametric box of the support extension of element `(j1, j2)`.
    pub fn support_extension(&self, j1: usize, j2: usize) -> Result<[(f64, f64); 2]> {
        Ok([self.kv1.support_extension(j1)?, self.kv2.support_extension(j2)?])
    }

    /// Largest number of support extensions that contain a single element.
    pub fn max_support_extension_overlap(&self) -> Result<usize> {
        fn counts(kv: &KnotVector, z: &[f64]) -> Result<Vec<usize>> {
            let m = z.len() - 1;
            let mut c = vec![0; m];
            for j in 0..m {
                let (lo, hi) = kv.support_extension(j)?;
                for (k, ck) in c.iter_mut().enumerate() {
                    if z[k] >= lo && z[k + 1] <= hi {
                        *ck += 1;
                    }
                }
            }
            Ok(c)
        }
        let c1 = counts(&self.kv1, &self.breakpoints_u)?;
        let c2 = counts(&self.kv2, &self.breakpoints_v)?;
        Ok(c1.iter().max().copied().unwrap_or(0) * c2.iter().max().copied().unwrap_or(0))
    }

    /// Diameters of the physical elements `F(Q)`, estimated from points on
    /// the element boundary.
    pub fn physical_diameters(&self, patch: &PolarPatch, samples_per_edge: usize) -> Result<Vec<f64>> {
        let s = samples_per_edge.max(2);
        let mut out = Vec::with_capacity(self.element_count());
        for e in self.elements() {
            let mut pts = Vec::with_capacity(4 * s);
            for k in 0..s {
                let t = k as f64 / (s - 1) as f64;
                let zu = e.u.0 + t * (e.u.1 - e.u.0);
                let zv = e.v.0 + t * (e.v.1 - e.v.0);
                pts.push(patch.map_point([zu, e.v.0])?);
                pts.push(patch.map_point([zu, e.v.1])?);
                pts.push(patch.map_point([e.u.0, zv])?);
                pts.push(patch.map_point([e.u.1, zv])?);
            }
            let mut d: f64 = 0.0;
            for (i, a) in pts.iter().enumerate() {
                for b in &pts[i + 1..] {
                    d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
                }
            }
            out.push(d);
        }
        Ok(out)
    }

    /// `j1,j2,z1_lo,z1_hi,z2_lo,z2_hi` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j1,j2,z1_lo,z1_hi,z2_lo,z2_hi\n");
        for e in self.elements() {
            let _ = writeln!(s, "{},{},{:e},{:e},{:e},{:e}", e.index[0], e.index[1], e.u.0, e.u.1, e.v.0, e.v.1);
        }
        s
    }
}

/// Builds the Bézier mesh of a pair of knot vectors.
pub fn build_mesh(kv1: &KnotVector, kv2: &KnotVector) -> BezierMesh {
    BezierMesh::new(kv1, kv2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub index: [usize; 2],
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl Element {
    pub fn area(&self) -> f64 {
        (self.u.1 - self.u.0) * (self.v.1 - self.v.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiUniformity {
    pub mu: f64,
    /// `θ1 = 2^{1/μ} - 1`.
    pub theta1: f64,
    /// Observed `Θ1(j) = h_(1,j) / h_(1,j+1)` for consecutive columns.
    pub ratios: Vec<f64>,
}

impl QuasiUniformity {
    /// Closed form of the first ratio, `1 / (2^{1/μ} - 1)`.
    pub fn first_ratio_closed_form(&self) -> f64 {
        1.0 / self.theta1
    }

    /// Whether every ratio lies in `[1/θ1, θ1]` up to a relative slack.
    pub fn within_bounds(&self, rel_tol: f64) -> bool {
        let lo = (1.0 / self.theta1) * (1.0 - rel_tol);
        let hi = self.theta1 * (1.0 + rel_tol);
        self.ratios.iter().all(|&r| r >= lo && r <= hi)
    }

    /// Whether the ratio sequence is non-decreasing up to `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.ratios.windows(2).all(|w| w[1] >= w[0] - tol)
    }
}

/// Quasi-uniformity constants of a graded radial refinement.
pub fn quasi_uniformity_report(mesh: &BezierMesh) -> Result<QuasiUniformity> {
    let mu = mesh
        .grading_mu()
        .ok_or_else(|| Error::InvalidRefinement("radial breakpoints are not graded".into()))?;
    let theta1 = 2f64.powf(1.0 / mu) - 1.0;
    let ratios = mesh.sizes_u.windows(2).map(|w| w[0] / w[1]).collect();
    Ok(QuasiUniformity { mu, theta1, ratios })
}

/// Column index sets of the corner region (touching supports of the polar
/// functions) and the remaining ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DomainSplit {
    pub corner_columns: Vec<usize>,
    pub ring_columns: Vec<usize>,
}

/// Splits the columns at `j1 < p1 + 1` (zero-based): the corner part holds
/// exactly the columns whose support extension reaches `ζ1 = 0`.
pub fn split_domain(mesh: &BezierMesh, p1: usize) -> Result<DomainSplit> {
    let columns = mesh.shape()[0];
    if columns < p1 + 1 {
        return Err(Error::InvalidRefinement(format!(
            "need at least {} columns for p1 = {p1}, mesh has {columns}",
            p1 + 1
        )));
    }
    Ok(DomainSplit {
        corner_columns: (0..=p1).collect(),
        ring_columns: (p1 + 1..columns).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeBoundEntry {
    /// Zero-based column index.
    pub column: usize,
    pub width: f64,
    /// `h1 ζ^{1-μ}` at the left end of the column.
    pub scale_left: f64,
    /// `h1 ζ^{1-μ}` at the right end of the column.
    pub scale_right: f64,
}

/// Check of `h_(1,j) <= C h1 ζ_(1,j)^{1-μ}` for the columns away from the
/// singular edge with the explicit constant `C = 1/μ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeBoundReport {
    pub mu: f64,
    pub constant: f64,
    pub entries: Vec<SizeBoundEntry>,
}

impl SizeBoundReport {
    /// Columns for which the bound evaluated at the left endpoint fails.
    pub fn warnings(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| e.width > self.constant * e.scale_left * (1.0 + 1e-12))
            .map(|e| e.column)
            .collect()
    }

    /// Columns for which the bound fails at the right endpoint.
    pub fn right_endpoint_violations(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| e.width > self.constant * e.scale_right * (1.0 + 1e-12))
            .map(|e| e.column)
            .collect()
    }

    /// Smallest `C` for which the left-endpoint bound holds on all columns.
    pub fn required_constant(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.width / e.scale_left)
            .fold(0.0, f64::max)
    }
}

pub fn size_bound_report(mesh: &BezierMesh) -> Result<SizeBoundReport> {
    let mu = mesh
        .grading_mu()
        .ok_or_else(|| Error::InvalidRefinement("radial breakpoints are not graded".into()))?;
    let h1 = mesh.refinement_parameters()[0];
    let z = &mesh.breakpoints_u;
    let entries = (1..mesh.sizes_u.len())
        .map(|j| SizeBoundEntry {
            column: j,
            width: mesh.sizes_u[j],
            scale_left: h1 * z[j].powf(1.0 - mu),
            scale_right: h1 * z[j + 1].powf(1.0 - mu),
        })
        .collect();
    Ok(SizeBoundReport {
        mu,
        constant: 1.0 / mu,
        entries,
    })
}
