//! Patch JSON to solution, outside the manufactured problems of `analysis`.

use std::f64::consts::FRAC_PI_2;

use approx::assert_relative_eq;
use polar_iga::analysis::{error_norms, log_log_slope, ExactSolution};
use polar_iga::geometry::{Edge, PolarPatch};
use polar_iga::polar_space::build_space;
use polar_iga::quadrature::QuadratureRule;
use polar_iga::solver::solve_problem;

const QUARTER_DISK: &str = r#"{
  "degrees": [1, 2],
  "knots_u": [0, 0, 1, 1],
  "knots_v": [0, 0, 0, 1, 1, 1],
  "control_points": [[0, 0], [0, 0], [0, 0], [1, 0], [1, 1], [0, 1]],
  "weights": [1, 0.7071067811865476, 1, 1, 0.7071067811865476, 1],
  "corner_angle": 1.5707963267948966
}"#;

/// `u = 1 - r²`: zero on the arc, no flux through the straight edges.
struct Paraboloid<'a>(&'a PolarPatch);

impl ExactSolution for Paraboloid<'_> {
    fn value(&self, x: [f64; 2]) -> f64 {
        1.0 - x[0] * x[0] - x[1] * x[1]
    }
    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        [-2.0 * x[0], -2.0 * x[1]]
    }
    fn domain(&self) -> Option<&PolarPatch> {
        Some(self.0)
    }
}

/// `u = cos(πr/2)`, radial and not in any of the discrete spaces.
struct RadialCosine<'a>(&'a PolarPatch);

impl ExactSolution for RadialCosine<'_> {
    fn value(&self, x: [f64; 2]) -> f64 {
        (FRAC_PI_2 * x[0].hypot(x[1])).cos()
    }
    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            return [0.0, 0.0];
        }
        let d = -FRAC_PI_2 * (FRAC_PI_2 * r).sin() / r;
        [d * x[0], d * x[1]]
    }
    fn domain(&self) -> Option<&PolarPatch> {
        Some(self.0)
    }
}

fn radial_cosine_rhs(x: [f64; 2]) -> f64 {
    let r = x[0].hypot(x[1]);
    let k = FRAC_PI_2;
    let sinc = if r == 0.0 { k } else { (k * r).sin() / r };
    k * k * (k * r).cos() + k * sinc
}

#[test]
fn quarter_disk_from_json() {
    let patch = PolarPatch::from_json(QUARTER_DISK).unwrap();
    assert_relative_eq!(patch.corner_angle(), FRAC_PI_2);
    let mid = patch.map_point([1.0, 0.5]).unwrap();
    assert_relative_eq!(mid[0].hypot(mid[1]), 1.0, epsilon = 1e-15);
}

#[test]
fn quadratic_radial_solution_is_reproduced() {
    let patch = PolarPatch::from_json(QUARTER_DISK).unwrap();
    let quad = QuadratureRule::default();
    for n in [3, 5, 9] {
        let space = build_space(&patch, [2, 2], [n, n], 0.5).unwrap();
        let dirichlet = space.dirichlet_dofs(&[Edge::Outer]).unwrap();
        let (solution, report) = solve_problem(&space, |_| 4.0, &dirichlet, &quad).unwrap();
        assert!(report.relative_residual < 1e-12);
        let e = error_norms(&solution, &Paraboloid(&patch), &quad).unwrap();
        assert!(e.h1 < 1e-12, "N={n}: {e:?}");
    }
}

#[test]
fn smooth_solution_converges_optimally() {
    let patch = PolarPatch::from_json(QUARTER_DISK).unwrap();
    let exact = RadialCosine(&patch);
    let quad = QuadratureRule::default();
    let (mut h, mut l2, mut h1) = (Vec::new(), Vec::new(), Vec::new());
    for n in [5, 9, 17, 33] {
        let space = build_space(&patch, [2, 2], [n, n], 1.0).unwrap();
        let dirichlet = space.dirichlet_dofs(&[Edge::Outer]).unwrap();
        let (solution, _) = solve_problem(&space, radial_cosine_rhs, &dirichlet, &quad).unwrap();
        let e = error_norms(&solution, &exact, &quad).unwrap();
        h.push(1.0 / (n - 1) as f64);
        l2.push(e.l2);
        h1.push(e.h1);
    }
    let s_l2 = log_log_slope(&h[1..], &l2[1..]).unwrap();
    let s_h1 = log_log_slope(&h[1..], &h1[1..]).unwrap();
    assert!((2.7..3.3).contains(&s_l2), "L2 slope {s_l2}, errors {l2:?}");
    assert!((1.8..2.2).contains(&s_h1), "H1 slope {s_h1}, errors {h1:?}");
}

#[test]
fn rejects_patch_without_collapsed_row() {
    let bad = QUARTER_DISK.replacen("[[0, 0], [0, 0], [0, 0]", "[[0, 0], [0.1, 0], [0, 0]", 1);
    assert!(PolarPatch::from_json(&bad).is_err());
    let truncated = QUARTER_DISK.replace(", [0, 1]]", "]");
    assert!(PolarPatch::from_json(&truncated).is_err());
}
