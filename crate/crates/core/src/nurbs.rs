//! Bivariate tensor-product NURBS: rational basis evaluation with first
//! derivatives and the induced geometry map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splines::{ders_basis_funs, KnotVector};

/// Nonzero tensor basis functions at a parametric point.
///
/// Local function `(a, b)` is the global tensor index
/// `(first[0] + a, first[1] + b)` and is stored at `a * (p2 + 1) + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    pub first: [usize; 2],
    pub local_shape: [usize; 2],
    pub values: Vec<f64>,
    /// Parametric gradients; empty when derivatives were not requested.
    pub gradients: Vec<[f64; 2]>,
}

impl LocalBasis {
    pub fn tensor_index(&self, local: usize) -> [usize; 2] {
        let b2 = self.local_shape[1];
        [self.first[0] + local / b2, self.first[1] + local % b2]
    }
}

/// A point of the geometry map with its Jacobian `J[r][c] = ∂x_r / ∂ζ_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedPoint {
    pub x: [f64; 2],
    pub jacobian: [[f64; 2]; 2],
}

impl MappedPoint {
    pub fn det(&self) -> f64 {
        let j = &self.jacobian;
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    /// `J^{-T} g`: physical gradient from a parametric one.
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        let det = self.det();
        [
            (j[1][1] * g[0] - j[1][0] * g[1]) / det,
            (-j[0][1] * g[0] + j[0][0] * g[1]) / det,
        ]
    }
}

/// Tensor-product NURBS surface. Control data is stored with `i1` as the
/// slow index: entry `i1 * n2 + i2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NurbsSurface {
    pub kv1: KnotVector,
    pub kv2: KnotVector,
    pub control_points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl NurbsSurface {
    pub fn new(
        kv1: KnotVector,
        kv2: KnotVector,
        control_points: Vec<[f64; 2]>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let n = kv1.basis_count() * kv2.basis_count();
        if control_points.len() != n || weights.len() != n {
            return Err(Error::InvalidGeometry(format!(
                "expected {n} control points and weights, got {} and {}",
                control_points.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidGeometry("weights must be positive".into()));
        }
        Ok(Self {
            kv1,
            kv2,
            control_points,
            weights,
        })
    }

    pub fn shape(&self) -> [usize; 2] {
        [self.kv1.basis_count(), self.kv2.basis_count()]
    }

    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.kv2.basis_count() + i2
    }

    fn check(zeta: [f64; 2]) -> Result<()> {
        for &z in &zeta {
            if !(0.0..=1.0).contains(&z) {
                return Err(Error::ParameterOutOfRange { value: z });
            }
        }
        Ok(())
    }

    /// Rational basis `N_i = w_i B_i / W` at `zeta`, optionally with
    /// parametric gradients.
    pub fn basis(&self, zeta: [f64; 2], gradients: bool) -> Result<LocalBasis> {
        Self::check(zeta)?;
        let d = usize::from(gradients);
        let (p1, p2) = (self.kv1.degree(), self.kv2.degree());
        let s1 = self.kv1.find_span(zeta[0]);
        let s2 = self.kv2.find_span(zeta[1]);
        // Degree-0 directions have no derivative rows; pad with zeros.
        let mut b1 = ders_basis_funs(self.kv1.knots(), p1, s1, zeta[0], d.min(p1));
        let mut b2 = ders_basis_funs(self.kv2.knots(), p2, s2, zeta[1], d.min(p2));
        b1.resize(d + 1, vec![0.0; p1 + 1]);
        b2.resize(d + 1, vec![0.0; p2 + 1]);
        let first = [s1 - p1, s2 - p2];
        let shape = [p1 + 1, p2 + 1];
        let count = shape[0] * shape[1];
        let mut values = Vec::with_capacity(count);
        let mut grads = Vec::with_capacity(if gradients { count } else { 0 });
        let (mut w_sum, mut dw1, mut dw2) = (0.0, 0.0, 0.0);
        for a in 0..shape[0] {
            for b in 0..shape[1] {
                let w = self.weights[self.index(first[0] + a, first[1] + b)];
                let v = w * b1[0][a] * b2[0][b];
                values.push(v);
                w_sum += v;
                if gradients {
                    let g = [w * b1[1][a] * b2[0][b], w * b1[0][a] * b2[1][b]];
                    dw1 += g[0];
                    dw2 += g[1];
                    grads.push(g);
                }
            }
        }
        if gradients {
            for (g, &v) in grads.iter_mut().zip(&values) {
                g[0] = (g[0] - v * dw1 / w_sum) / w_sum;
                g[1] = (g[1] - v * dw2 / w_sum) / w_sum;
            }
        }
        for v in &mut values {
            *v /= w_sum;
        }
        Ok(LocalBasis {
            first,
            local_shape: shape,
            values,
            gradients: grads,
        })
    }

    /// Weight function `W(ζ) = Σ w_i B_i(ζ)`.
    pub fn weight_function(&self, zeta: [f64; 2]) -> Result<f64> {
        Self::check(zeta)?;
        let e1 = self.kv1.eval_basis(zeta[0], 0)?;
        let e2 = self.kv2.eval_basis(zeta[1], 0)?;
        let mut w = 0.0;
        for (a, v1) in e1.values[0].iter().enumerate() {
            for (b, v2) in e2.values[0].iter().enumerate() {
                w += v1 * v2 * self.weights[self.index(e1.first_index + a, e2.first_index + b)];
            }
        }
        Ok(w)
    }

    pub fn map_with_basis(&self, basis: &LocalBasis) -> MappedPoint {
        let mut x = [0.0; 2];
        let mut jac = [[0.0; 2]; 2];
        for (l, &v) in basis.values.iter().enumerate() {
            let [i1, i2] = basis.tensor_index(l);
            let c = self.control_points[self.index(i1, i2)];
            x[0] += v * c[0];
            x[1] += v * c[1];
            if let Some(g) = basis.gradients.get(l) {
                for r in 0..2 {
                    jac[r][0] += g[0] * c[r];
                    jac[r][1] += g[1] * c[r];
                }
            }
        }
        MappedPoint { x, jacobian: jac }
    }

    pub fn map_point(&self, zeta: [f64; 2]) -> Result<[f64; 2]> {
        Ok(self.map_with_basis(&self.basis(zeta, false)?).x)
    }

    pub fn map_with_jacobian(&self, zeta: [f64; 2]) -> Result<MappedPoint> {
        Ok(self.map_with_basis(&self.basis(zeta, true)?))
    }
}
