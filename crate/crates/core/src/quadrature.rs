//! Gauss–Legendre rules on the unit interval and their tensor products over
//! parametric elements.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A one-dimensional Gauss–Legendre rule mapped to `[0, 1]`.
///
/// An `n`-point rule integrates polynomials of degree `2n - 1` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(points: usize) -> Result<Self> {
        let n = NonZeroUsize::new(points)
            .ok_or_else(|| Error::InvalidArgument("quadrature needs at least one node".into()))?;
        let rule = GaussLegendre::new(n);
        let mut pairs: Vec<(f64, f64)> = rule
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes on `[0, 1]`, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (a + len * x, len * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Tensor-product Gauss–Legendre rule used per Bézier element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes_per_direction: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            nodes_per_direction: 6,
        }
    }
}

impl QuadratureRule {
    pub fn new(nodes_per_direction: usize) -> Result<Self> {
        if nodes_per_direction == 0 {
            return Err(Error::InvalidArgument(
                "quadrature needs at least one node per direction".into(),
            ));
        }
        Ok(Self {
            nodes_per_direction,
        })
    }

    pub fn gauss_rule(&self) -> Result<GaussRule> {
        GaussRule::new(self.nodes_per_direction)
    }

    /// Points and weights of the tensor rule on the element `[a1, b1] x [a2, b2]`.
    pub fn element_points(&self, u: (f64, f64), v: (f64, f64)) -> Result<Vec<([f64; 2], f64)>> {
        let rule = self.gauss_rule()?;
        let mut out = Vec::with_capacity(rule.len() * rule.len());
        for (x, wx) in rule.on_interval(u.0, u.1) {
            for (y, wy) in rule.on_interval(v.0, v.1) {
                out.push(([x, y], wx * wy));
            }
        }
        Ok(out)
    }
}
