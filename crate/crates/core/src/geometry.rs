//! Polar NURBS parameterizations of domains with a corner.
//!
//! A polar patch maps the unit square onto the domain so that the edge
//! `ζ1 = 0` collapses into the corner `P = (0, 0)`. This requires
//!
//! * `Ξ1 = {0, 0, 1, 1}` and an angular knot vector whose interior
//!   breakpoints are uniform with multiplicity `p2`,
//! * every control point of the first row located at `P`,
//! * equal weights in both rows for each angular index,
//!
//! so that `F(ζ1, ζ2) = ζ1 F2(ζ2)` with the boundary curve `F2`.
//!
//! Parametric edges: `ζ1 = 0` is the singular edge, [`Edge::Outer`] is
//! `ζ1 = 1`, [`Edge::Start`] is `ζ2 = 0` and [`Edge::End`] is `ζ2 = 1`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nurbs::{MappedPoint, NurbsSurface};
use crate::splines::{KnotVector, KNOT_TOL};

/// Boundary edges of the parametric square other than the singular one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    /// `ζ1 = 1`, mapped away from the corner.
    Outer,
    /// `ζ2 = 0`, the first edge adjacent to the corner.
    Start,
    /// `ζ2 = 1`, the second edge adjacent to the corner.
    End,
}

/// A polar parameterization together with its corner angle `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPatch {
    surface: NurbsSurface,
    corner_angle: f64,
}

impl PolarPatch {
    /// Wraps a NURBS surface after checking the polar structure.
    pub fn new(surface: NurbsSurface, corner_angle: f64) -> Result<Self> {
        if !(corner_angle > 0.0 && corner_angle <= TAU + 1e-12) {
            return Err(Error::InvalidGeometry(format!(
                "corner angle {corner_angle} outside (0, 2π]"
            )));
        }
        if surface.kv1.degree() != 1 || surface.kv1.knots() != [0.0, 0.0, 1.0, 1.0] {
            return Err(Error::InvalidGeometry("radial knot vector must be {0,0,1,1}".into()));
        }
        let kv2 = &surface.kv2;
        let p2 = kv2.degree();
        let z = kv2.breakpoints();
        let segments = z.len() - 1;
        for (j, zj) in z.iter().enumerate() {
            if (zj - j as f64 / segments as f64).abs() > KNOT_TOL {
                return Err(Error::InvalidGeometry("angular breakpoints must be uniform".into()));
            }
        }
        let mults = kv2.multiplicities();
        if mults[1..mults.len() - 1].iter().any(|&m| m != p2) {
            return Err(Error::InvalidGeometry(format!(
                "angular interior multiplicities must equal p2 = {p2}"
            )));
        }
        let n2 = kv2.basis_count();
        for i2 in 0..n2 {
            let c = surface.control_points[surface.index(0, i2)];
            if c != [0.0, 0.0] {
                return Err(Error::InvalidGeometry(format!(
                    "control point (0, {i2}) is {c:?}, expected the polar point (0, 0)"
                )));
            }
            let (w0, w1) = (surface.weights[surface.index(0, i2)], surface.weights[surface.index(1, i2)]);
            if w0 != w1 {
                return Err(Error::InvalidGeometry(format!(
                    "weights of angular index {i2} differ between rows ({w0} vs {w1})"
                )));
            }
        }
        Ok(Self {
            surface,
            corner_angle,
        })
    }

    pub fn surface(&self) -> &NurbsSurface {
        &self.surface
    }

    pub fn corner_angle(&self) -> f64 {
        self.corner_angle
    }

    pub fn polar_point(&self) -> [f64; 2] {
        [0.0, 0.0]
    }

    /// Number of Bézier arcs of the boundary curve.
    pub fn segments(&self) -> usize {
        self.surface.kv2.breakpoints().len() - 1
    }

    /// Outer control row `c_(2, i2)` and its weights.
    pub fn outer_row(&self) -> (Vec<[f64; 2]>, Vec<f64>) {
        let n2 = self.surface.kv2.basis_count();
        let s = &self.surface;
        (
            (0..n2).map(|i| s.control_points[s.index(1, i)]).collect(),
            (0..n2).map(|i| s.weights[s.index(1, i)]).collect(),
        )
    }

    pub fn map_point(&self, zeta: [f64; 2]) -> Result<[f64; 2]> {
        self.surface.map_point(zeta)
    }

    pub fn jacobian(&self, zeta: [f64; 2]) -> Result<MappedPoint> {
        self.surface.map_with_jacobian(zeta)
    }

    pub fn weight_function(&self, zeta: [f64; 2]) -> Result<f64> {
        self.surface.weight_function(zeta)
    }

    /// Boundary curve `F2(ζ2) = F(1, ζ2)` and its derivative.
    pub fn boundary_curve(&self, zeta2: f64) -> Result<([f64; 2], [f64; 2])> {
        let m = self.jacobian([1.0, zeta2])?;
        Ok((m.x, [m.jacobian[0][1], m.jacobian[1][1]]))
    }

    /// Angle of `x` measured counterclockwise from `F2(0)`, in `(-π/2, ω + π/2)`
    /// for points of the domain.
    fn relative_angle(&self, start: [f64; 2], x: [f64; 2]) -> f64 {
        let cross = start[0] * x[1] - start[1] * x[0];
        let dot = start[0] * x[0] + start[1] * x[1];
        let a = cross.atan2(dot).rem_euclid(TAU);
        if a > 0.5 * (self.corner_angle + TAU) {
            a - TAU
        } else {
            a
        }
    }

    /// Inverse of `F`, found by bisection on the (monotone) polar angle of
    /// the boundary curve. Returns an error for points outside the domain.
    pub fn inverse_map(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            return Ok([0.0, 0.0]);
        }
        let start = self.boundary_curve(0.0)?.0;
        let target = self.relative_angle(start, x);
        if target < -1e-12 || target > self.corner_angle + 1e-12 {
            return Err(Error::InvalidArgument(format!("point {x:?} lies outside the sector of the patch")));
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let c = self.boundary_curve(mid)?.0;
            if self.relative_angle(start, c) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let zeta2 = 0.5 * (lo + hi);
        let c = self.boundary_curve(zeta2)?.0;
        let zeta1 = (x[0] * c[0] + x[1] * c[1]) / (c[0] * c[0] + c[1] * c[1]);
        if zeta1 > 1.0 + 1e-10 {
            return Err(Error::InvalidArgument(format!("point {x:?} lies outside the domain")));
        }
        Ok([zeta1.min(1.0), zeta2])
    }

    pub fn to_document(&self) -> PatchDocument {
        let s = &self.surface;
        PatchDocument {
            degrees: [s.kv1.degree(), s.kv2.degree()],
            knots_u: s.kv1.knots().to_vec(),
            knots_v: s.kv2.knots().to_vec(),
            control_points: s.control_points.clone(),
            weights: s.weights.clone(),
            corner_angle: self.corner_angle,
        }
    }

    pub fn from_document(doc: PatchDocument) -> Result<Self> {
        let kv1 = KnotVector::new(doc.knots_u, doc.degrees[0])?;
        let kv2 = KnotVector::new(doc.knots_v, doc.degrees[1])?;
        let surface = NurbsSurface::new(kv1, kv2, doc.control_points, doc.weights)?;
        Self::new(surface, doc.corner_angle)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_document()).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: PatchDocument = serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        Self::from_document(doc)
    }
}

/// JSON layout of a patch. Control points and weights are row-major with the
/// radial index `i1` as the row: entry `i1 * n2 + i2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchDocument {
    pub degrees: [usize; 2],
    pub knots_u: Vec<f64>,
    pub knots_v: Vec<f64>,
    pub control_points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub corner_angle: f64,
}

fn polar_patch_from_outer_row(
    kv2: KnotVector,
    outer: Vec<[f64; 2]>,
    outer_weights: Vec<f64>,
    omega: f64,
) -> Result<PolarPatch> {
    let kv1 = KnotVector::new(vec![0.0, 0.0, 1.0, 1.0], 1)?;
    let n2 = outer.len();
    let mut control_points = vec![[0.0, 0.0]; n2];
    control_points.extend(outer);
    let mut weights = outer_weights.clone();
    weights.extend(outer_weights);
    PolarPatch::new(NurbsSurface::new(kv1, kv2, control_points, weights)?, omega)
}

/// Segment count used for a sector of angle `omega` when none is given.
pub fn default_sector_segments(omega: f64) -> usize {
    if (omega - 5.0 * PI / 3.0).abs() < 1e-12 {
        3
    } else {
        ((omega / FRAC_PI_2) - 1e-12).ceil().max(1.0) as usize
    }
}

/// Unit circular sector of angle `omega` built from `segments` quadratic
/// rational arcs.
pub fn make_circular_sector(omega: f64, segments: usize) -> Result<PolarPatch> {
    if !(omega > 0.0 && omega <= TAU + 1e-12) {
        return Err(Error::InvalidGeometry(format!("corner angle {omega} outside (0, 2π]")));
    }
    if segments == 0 {
        return Err(Error::InvalidGeometry("at least one arc segment is required".into()));
    }
    let alpha = omega / segments as f64;
    if alpha >= PI {
        return Err(Error::InvalidGeometry(format!(
            "arc segment angle {alpha} must be below π"
        )));
    }
    let breakpoints: Vec<f64> = (0..=segments)
        .map(|j| if j == segments { 1.0 } else { j as f64 / segments as f64 })
        .collect();
    let kv2 = KnotVector::with_uniform_multiplicity(&breakpoints, 2, 2)?;
    let mid_weight = (0.5 * alpha).cos();
    let mut outer = Vec::with_capacity(2 * segments + 1);
    let mut weights = Vec::with_capacity(2 * segments + 1);
    for k in 0..segments {
        let theta = k as f64 * alpha;
        outer.push([theta.cos(), theta.sin()]);
        weights.push(1.0);
        let mid = theta + 0.5 * alpha;
        outer.push([mid.cos() / mid_weight, mid.sin() / mid_weight]);
        weights.push(mid_weight);
    }
    outer.push([omega.cos(), omega.sin()]);
    weights.push(1.0);
    polar_patch_from_outer_row(kv2, outer, weights, omega)
}

/// Polar parameterization of the L-shaped domain `(-1, 1)^2 \ [0, 1) x (-1, 0]`.
pub fn make_l_shape() -> Result<PolarPatch> {
    let kv2 = KnotVector::from_breakpoints(&[0.0, 0.25, 0.5, 0.75, 1.0], &[1, 1, 1], 1)?;
    let outer = vec![[1.0, 0.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [0.0, -1.0]];
    polar_patch_from_outer_row(kv2, outer, vec![1.0; 5], 1.5 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Sector,
    LShape,
}

impl FromStr for DomainKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sector" | "pacman" => Ok(Self::Sector),
            "lshape" | "l-shape" => Ok(Self::LShape),
            other => Err(Error::InvalidArgument(format!("unsupported domain kind '{other}'"))),
        }
    }
}

/// Reference parameterization in polar coordinates,
/// `G(r, φ) = r R(Φ(φ)) (cos Φ(φ), sin Φ(φ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceMap {
    Sector { omega: f64 },
    LShape,
}

impl ReferenceMap {
    pub fn new(kind: DomainKind, omega: f64) -> Result<Self> {
        match kind {
            DomainKind::Sector if omega > 0.0 && omega <= TAU + 1e-12 => Ok(Self::Sector { omega }),
            DomainKind::Sector => Err(Error::InvalidGeometry(format!("corner angle {omega} outside (0, 2π]"))),
            DomainKind::LShape if (omega - 1.5 * PI).abs() < 1e-12 => Ok(Self::LShape),
            DomainKind::LShape => Err(Error::InvalidGeometry("the L-shape has corner angle 3π/2".into())),
        }
    }

    pub fn omega(&self) -> f64 {
        match self {
            Self::Sector { omega } => *omega,
            Self::LShape => 1.5 * PI,
        }
    }

    /// Piecewise-linear angle map `Φ: [0, 1] -> [0, ω]`.
    pub fn angle(&self, phi: f64) -> f64 {
        let omega = self.omega();
        match self {
            Self::Sector { .. } => omega * phi,
            Self::LShape => {
                if phi <= 0.25 {
                    2.0 / 3.0 * omega * phi
                } else if phi <= 0.75 {
                    omega * (4.0 / 3.0 * phi - 1.0 / 6.0)
                } else {
                    omega * (2.0 / 3.0 * phi + 1.0 / 3.0)
                }
            }
        }
    }

    /// Radius `R(Φ)` of the domain boundary at polar angle `angle`.
    pub fn radius(&self, angle: f64) -> f64 {
        match self {
            Self::Sector { .. } => 1.0,
            Self::LShape => {
                if angle <= FRAC_PI_4 {
                    1.0 / angle.cos()
                } else if angle <= 3.0 * FRAC_PI_4 {
                    1.0 / angle.sin()
                } else if angle <= 5.0 * FRAC_PI_4 {
                    -1.0 / angle.cos()
                } else {
                    -1.0 / angle.sin()
                }
            }
        }
    }

    pub fn eval(&self, r: f64, phi: f64) -> [f64; 2] {
        let a = self.angle(phi);
        let rad = r * self.radius(a);
        [rad * a.cos(), rad * a.sin()]
    }
}

/// Free-function form of [`ReferenceMap::new`].
pub fn reference_map(kind: DomainKind, omega: f64) -> Result<ReferenceMap> {
    ReferenceMap::new(kind, omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub phi: f64,
    /// `F2_1(φ) - R(Φ(φ)) cos Φ(φ)`.
    pub dx: f64,
    /// `F2_2(φ) - R(Φ(φ)) sin Φ(φ)`.
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceComparison {
    pub samples: Vec<ReferenceSample>,
    pub max_diff: f64,
}

impl ReferenceComparison {
    /// Largest `|dx|` (component 0) or `|dy|` (component 1) over samples with
    /// `φ` in `[lo, hi]`.
    pub fn max_on(&self, component: usize, lo: f64, hi: f64) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.phi >= lo && s.phi <= hi)
            .map(|s| if component == 0 { s.dx.abs() } else { s.dy.abs() })
            .fold(0.0, f64::max)
    }
}

/// Componentwise difference between the boundary curve and the reference
/// map at `n_samples` uniform interior angles `k / (n_samples + 1)`.
pub fn compare_to_reference(
    patch: &PolarPatch,
    refmap: &ReferenceMap,
    n_samples: usize,
) -> Result<ReferenceComparison> {
    let mut samples = Vec::with_capacity(n_samples);
    let mut max_diff: f64 = 0.0;
    for k in 1..=n_samples {
        let phi = k as f64 / (n_samples + 1) as f64;
        let f = patch.boundary_curve(phi)?.0;
        let g = refmap.eval(1.0, phi);
        let (dx, dy) = (f[0] - g[0], f[1] - g[1]);
        max_diff = max_diff.max(dx.abs()).max(dy.abs());
        samples.push(ReferenceSample { phi, dx, dy });
    }
    Ok(ReferenceComparison { samples, max_diff })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pacman() -> PolarPatch {
        make_circular_sector(5.0 * PI / 3.0, 3).unwrap()
    }

    fn grid(n: usize) -> impl Iterator<Item = [f64; 2]> {
        (0..=n).flat_map(move |a| (0..=n).map(move |b| [a as f64 / n as f64, b as f64 / n as f64]))
    }

    #[test]
    fn sector_knots_and_weights() {
        let p = pacman();
        assert_eq!(
            p.surface().kv2.knots(),
            &[0.0, 0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 1.0, 1.0, 1.0]
        );
        let (_, w) = p.outer_row();
        // cos(5π/18) at 40 digits.
        let mid = 0.642_787_609_686_539_3;
        for (i, wi) in w.iter().enumerate() {
            let want = if i % 2 == 1 { mid } else { 1.0 };
            assert!((wi - want).abs() < 1e-15, "i={i}");
        }
        for k in 0..100 {
            let (x, _) = p.boundary_curve(k as f64 / 99.0).unwrap();
            assert!((x[0].hypot(x[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sector_rejects_wide_segments() {
        assert!(make_circular_sector(5.0 * PI / 3.0, 1).is_err());
        assert!(make_circular_sector(TAU, 2).is_err());
        assert!(make_circular_sector(TAU, 3).is_ok());
        assert!(make_circular_sector(7.0, 4).is_err());
        assert_eq!(default_sector_segments(5.0 * PI / 3.0), 3);
        assert_eq!(default_sector_segments(FRAC_PI_2), 1);
        assert_eq!(default_sector_segments(TAU), 4);
    }

    #[test]
    fn collapsed_edge_maps_to_polar_point() {
        for patch in [pacman(), make_l_shape().unwrap()] {
            for k in 0..=20 {
                assert_eq!(patch.map_point([0.0, k as f64 / 20.0]).unwrap(), [0.0, 0.0]);
            }
        }
        let p = pacman().map_point([1.0, 0.0]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
    }

    #[test]
    fn l_shape_examples() {
        let l = make_l_shape().unwrap();
        let (outer, w) = l.outer_row();
        assert_eq!(outer, vec![[1.0, 0.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [0.0, -1.0]]);
        assert!(w.iter().all(|&w| w == 1.0));
        assert_eq!(l.surface().kv2.knots(), &[0.0, 0.0, 0.25, 0.5, 0.75, 1.0, 1.0]);
        assert_eq!(l.map_point([1.0, 0.0]).unwrap(), [1.0, 0.0]);
        assert_eq!(l.map_point([1.0, 1.0]).unwrap(), [0.0, -1.0]);
        let m = l.map_point([0.5, 0.5]).unwrap();
        assert!((m[0] + 0.5).abs() < 1e-15 && (m[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn factorization_through_radial_parameter() {
        for patch in [pacman(), make_l_shape().unwrap()] {
            for z in grid(19) {
                let x = patch.map_point(z).unwrap();
                let c = patch.map_point([1.0, z[1]]).unwrap();
                assert!((x[0] - z[0] * c[0]).abs() < 1e-13 && (x[1] - z[0] * c[1]).abs() < 1e-13);
                let w = patch.weight_function(z).unwrap();
                let w0 = patch.weight_function([0.0, z[1]]).unwrap();
                assert!((w - w0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn jacobian_properties() {
        for patch in [pacman(), make_l_shape().unwrap()] {
            for k in 0..=10 {
                let z2 = k as f64 / 10.0;
                assert_eq!(patch.jacobian([0.0, z2]).unwrap().det(), 0.0);
                let g: Vec<f64> = [0.1, 0.5, 0.9]
                    .iter()
                    .map(|&z1| patch.jacobian([z1, z2]).unwrap().det() / z1)
                    .collect();
                assert!(g[0] > 0.0);
                assert!((g[0] - g[1]).abs() < 1e-12 * g[0].abs().max(1.0));
                assert!((g[0] - g[2]).abs() < 1e-12 * g[0].abs().max(1.0));
            }
            for z in grid(12).filter(|z| z[0] > 0.0) {
                assert!(patch.jacobian(z).unwrap().det() > 0.0);
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let step = 1e-6;
        for patch in [pacman(), make_l_shape().unwrap()] {
            let breaks = patch.surface().kv2.breakpoints();
            for z in grid(9) {
                let z = [z[0].clamp(0.05, 0.95), z[1].clamp(0.05, 0.95)];
                if breaks.iter().any(|b| (b - z[1]).abs() < 1e-3) {
                    continue;
                }
                let j = patch.jacobian(z).unwrap().jacobian;
                for c in 0..2 {
                    let mut lo = z;
                    let mut hi = z;
                    lo[c] -= step;
                    hi[c] += step;
                    let (a, b) = (patch.map_point(lo).unwrap(), patch.map_point(hi).unwrap());
                    for r in 0..2 {
                        let fd = (b[r] - a[r]) / (2.0 * step);
                        assert!((fd - j[r][c]).abs() < 1e-5, "r={r} c={c} z={z:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_map_round_trip() {
        for patch in [pacman(), make_l_shape().unwrap()] {
            for z in grid(10).filter(|z| z[0] > 0.0) {
                let x = patch.map_point(z).unwrap();
                let back = patch.inverse_map(x).unwrap();
                assert!((back[0] - z[0]).abs() < 1e-12 && (back[1] - z[1]).abs() < 1e-12, "{z:?} -> {back:?}");
            }
        }
        assert!(pacman().inverse_map([0.5, -0.1]).is_err());
        assert!(pacman().inverse_map([1.5, 0.3]).is_err());
    }

    #[test]
    fn polar_structure_is_enforced() {
        let good = pacman();
        let mut s = good.surface().clone();
        s.control_points[1] = [0.1, 0.0];
        assert!(PolarPatch::new(s, good.corner_angle()).is_err());
        let mut s = good.surface().clone();
        s.weights[1] = 0.5;
        assert!(PolarPatch::new(s, good.corner_angle()).is_err());
        assert!(PolarPatch::new(good.surface().clone(), 7.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        for patch in [pacman(), make_l_shape().unwrap()] {
            let text = patch.to_json().unwrap();
            assert!(text.contains("corner_angle") && text.contains("knots_u") && text.contains("control_points"));
            let back = PolarPatch::from_json(&text).unwrap();
            assert_eq!(back, patch);
        }
        assert!(PolarPatch::from_json("{}").is_err());
    }

    #[test]
    fn reference_map_examples() {
        let omega = 5.0 * PI / 3.0;
        let s = reference_map(DomainKind::Sector, omega).unwrap();
        let g = s.eval(0.7, 0.3);
        assert!((g[0] - 0.7 * (omega * 0.3).cos()).abs() < 1e-15);
        assert!((g[1] - 0.7 * (omega * 0.3).sin()).abs() < 1e-15);

        let l = reference_map(DomainKind::LShape, 1.5 * PI).unwrap();
        assert!((l.radius(FRAC_PI_4) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(l.eval(1.0, 0.0), [1.0, 0.0]);
        assert_eq!(l.angle(1.0), 1.5 * PI);
        assert!(reference_map(DomainKind::LShape, PI).is_err());
        assert!("disk".parse::<DomainKind>().is_err());
    }

    #[test]
    fn sector_matches_reference_as_point_set() {
        let patch = pacman();
        let refmap = reference_map(DomainKind::Sector, patch.corner_angle()).unwrap();
        let cmp = compare_to_reference(&patch, &refmap, 1000).unwrap();
        assert_eq!(cmp.samples.len(), 1000);
        // Both curves lie on the unit circle; only the angular speed differs.
        for s in &cmp.samples {
            let g = refmap.eval(1.0, s.phi);
            let f = [g[0] + s.dx, g[1] + s.dy];
            assert!((f[0].hypot(f[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn l_shape_reference_difference() {
        let patch = make_l_shape().unwrap();
        let cmp = compare_to_reference(&patch, &ReferenceMap::LShape, 1000).unwrap();
        assert!(cmp.max_diff > 0.05 && cmp.max_diff < 0.15, "{}", cmp.max_diff);
        // Pieces on which one coordinate of the boundary polyline is constant
        // and equal to the reference.
        assert!(cmp.max_on(0, 0.0, 0.25) < 1e-12);
        assert!(cmp.max_on(0, 0.5, 0.75) < 1e-12);
        assert!(cmp.max_on(1, 0.25, 0.5) < 1e-12);
        assert!(cmp.max_on(1, 0.75, 1.0) < 1e-12);
        assert!(cmp.max_on(0, 0.0, 1.0 / 6.0) < 1e-12);
    }
}
