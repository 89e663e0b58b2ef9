//! Univariate open knot vectors, B-spline evaluation, uniform and graded
//! refinement, support extensions and dual functionals.
//!
//! Indices are zero-based throughout: basis function `i` runs over
//! `0..basis_count()`, and knot span `s` is the half-open interval
//! `[knots[s], knots[s + 1])`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

/// Absolute tolerance used when grouping knots into breakpoints.
pub const KNOT_TOL: f64 = 1e-12;

/// A `p`-open knot vector on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KnotVectorRepr", into = "KnotVectorRepr")]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

#[derive(Serialize, Deserialize)]
struct KnotVectorRepr {
    degree: usize,
    knots: Vec<f64>,
}

impl TryFrom<KnotVectorRepr> for KnotVector {
    type Error = Error;
    fn try_from(r: KnotVectorRepr) -> Result<Self> {
        KnotVector::new(r.knots, r.degree)
    }
}

impl From<KnotVector> for KnotVectorRepr {
    fn from(k: KnotVector) -> Self {
        Self {
            degree: k.degree,
            knots: k.knots,
        }
    }
}

impl KnotVector {
    /// Validates and wraps a full knot sequence.
    pub fn new(knots: Vec<f64>, degree: usize) -> Result<Self> {
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::InvalidKnotVector(format!(
                "{} knots cannot form a {p}-open knot vector",
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidKnotVector("non-finite knot".into()));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnotVector("knots must be non-decreasing".into()));
        }
        let m = knots.len();
        if knots[..=p].iter().any(|&k| k != 0.0) || knots[m - p - 1..].iter().any(|&k| k != 1.0) {
            return Err(Error::InvalidKnotVector(format!(
                "first and last {} knots must equal 0 and 1",
                p + 1
            )));
        }
        if knots[p + 1] <= 0.0 || knots[m - p - 2] >= 1.0 {
            return Err(Error::InvalidKnotVector(format!(
                "endpoint multiplicity exceeds {}",
                p + 1
            )));
        }
        let kv = Self { knots, degree };
        if let Some(&mult) = kv.multiplicities().iter().find(|&&mult| mult > p + 1) {
            return Err(Error::InvalidKnotVector(format!(
                "interior multiplicity {mult} exceeds p + 1 = {}",
                p + 1
            )));
        }
        Ok(kv)
    }

    /// Builds `Ξ` from breakpoints and interior multiplicities; endpoint
    /// multiplicities are set to `p + 1`.
    pub fn from_breakpoints(
        breakpoints: &[f64],
        interior_multiplicities: &[usize],
        degree: usize,
    ) -> Result<Self> {
        let n = breakpoints.len();
        if n < 2 {
            return Err(Error::InvalidKnotVector("need at least two breakpoints".into()));
        }
        if breakpoints[0] != 0.0 || breakpoints[n - 1] != 1.0 {
            return Err(Error::InvalidKnotVector("breakpoints must start at 0 and end at 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidKnotVector("breakpoints must be strictly increasing".into()));
        }
        if interior_multiplicities.len() != n - 2 {
            return Err(Error::InvalidKnotVector(format!(
                "expected {} interior multiplicities, got {}",
                n - 2,
                interior_multiplicities.len()
            )));
        }
        if let Some(&m) = interior_multiplicities
            .iter()
            .find(|&&m| m == 0 || m > degree + 1)
        {
            return Err(Error::InvalidKnotVector(format!(
                "interior multiplicity {m} outside 1..={}",
                degree + 1
            )));
        }
        let mut knots = vec![0.0; degree + 1];
        for (z, &m) in breakpoints[1..n - 1].iter().zip(interior_multiplicities) {
            knots.extend(std::iter::repeat_n(*z, m));
        }
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(knots, degree)
    }

    /// Same multiplicity `m` at every interior breakpoint.
    pub fn with_uniform_multiplicity(breakpoints: &[f64], m: usize, degree: usize) -> Result<Self> {
        let mults = vec![m; breakpoints.len().saturating_sub(2)];
        Self::from_breakpoints(breakpoints, &mults, degree)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions `n`.
    pub fn basis_count(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Distinct knot values `Z`.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.grouped().into_iter().map(|(z, _)| z).collect()
    }

    /// Multiplicity of each breakpoint, endpoints included.
    pub fn multiplicities(&self) -> Vec<usize> {
        self.grouped().into_iter().map(|(_, m)| m).collect()
    }

    fn grouped(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.knots {
            match out.last_mut() {
                Some((z, m)) if k == *z => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    /// Non-empty knot spans as `(span index, left, right)`, one per element.
    pub fn elements(&self) -> Vec<(usize, f64, f64)> {
        let p = self.degree;
        (p..self.basis_count())
            .filter(|&s| self.knots[s + 1] > self.knots[s])
            .map(|s| (s, self.knots[s], self.knots[s + 1]))
            .collect()
    }

    /// Span index `s` with `knots[s] <= t < knots[s + 1]`; `t = 1` is assigned
    /// to the last non-empty span.
    pub fn find_span(&self, t: f64) -> usize {
        let p = self.degree;
        let n = self.basis_count();
        if t >= self.knots[n] {
            return n - 1;
        }
        let idx = self.knots.partition_point(|&k| k <= t);
        idx.saturating_sub(1).clamp(p, n - 1)
    }

    fn check_parameter(t: f64) -> Result<()> {
        if (0.0..=1.0).contains(&t) {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange { value: t })
        }
    }

    /// Values and derivatives up to order `max_derivative` of the `p + 1`
    /// basis functions that may be nonzero at `t`.
    pub fn eval_basis(&self, t: f64, max_derivative: usize) -> Result<BasisEvaluation> {
        Self::check_parameter(t)?;
        if max_derivative > self.degree {
            return Err(Error::InvalidArgument(format!(
                "derivative order {max_derivative} exceeds degree {}",
                self.degree
            )));
        }
        let span = self.find_span(t);
        Ok(BasisEvaluation {
            first_index: span - self.degree,
            values: ders_basis_funs(&self.knots, self.degree, span, t, max_derivative),
        })
    }

    /// Value of the spline `Σ c_i B_i` at `t`.
    pub fn eval_spline(&self, coefficients: &[f64], t: f64) -> Result<f64> {
        if coefficients.len() != self.basis_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                self.basis_count(),
                coefficients.len()
            )));
        }
        let b = self.eval_basis(t, 0)?;
        Ok(b.values[0]
            .iter()
            .enumerate()
            .map(|(a, v)| v * coefficients[b.first_index + a])
            .sum())
    }

    /// Support `[ξ_i, ξ_{i+p+1}]` of basis function `i`.
    pub fn support(&self, i: usize) -> Result<(f64, f64)> {
        let n = self.basis_count();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        Ok((self.knots[i], self.knots[i + self.degree + 1]))
    }

    /// Support extension `(ξ_{s-p}, ξ_{s+p+1})` of element `j` (zero-based,
    /// counted over non-empty spans), where `(ξ_s, ξ_{s+1})` is the element.
    pub fn support_extension(&self, element: usize) -> Result<(f64, f64)> {
        let elems = self.elements();
        let &(s, _, _) = elems.get(element).ok_or(Error::IndexOutOfRange {
            index: element,
            len: elems.len(),
        })?;
        let p = self.degree;
        Ok((self.knots[s - p], self.knots[s + p + 1]))
    }

    /// Greville abscissae; the B-spline coefficients of `f(t) = t`.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.basis_count())
            .map(|i| {
                if p == 0 {
                    0.5 * (self.knots[i] + self.knots[i + 1])
                } else {
                    self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64
                }
            })
            .collect()
    }

    /// Inserts one knot with Boehm's algorithm, returning the refined knot
    /// vector and the coefficients describing the same spline.
    pub fn insert_knot(&self, coefficients: &[f64], t: f64) -> Result<(KnotVector, Vec<f64>)> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidArgument(format!("knot {t} must lie in (0, 1)")));
        }
        if coefficients.len() != self.basis_count() {
            return Err(Error::InvalidArgument("coefficient count mismatch".into()));
        }
        let p = self.degree;
        let k = self.find_span(t);
        let n = self.basis_count();
        let mut new_coefs = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let c = if i + p <= k {
                coefficients[i]
            } else if i > k {
                coefficients[i - 1]
            } else {
                let a = (t - self.knots[i]) / (self.knots[i + p] - self.knots[i]);
                a * coefficients[i] + (1.0 - a) * coefficients[i - 1]
            };
            new_coefs.push(c);
        }
        let mut knots = self.knots.clone();
        knots.insert(k + 1, t);
        Ok((KnotVector::new(knots, p)?, new_coefs))
    }

    /// Whether every spline over `coarse` is also a spline over `self`.
    pub fn contains_space(&self, coarse: &KnotVector) -> bool {
        if self.degree < coarse.degree {
            return false;
        }
        let raise = self.degree - coarse.degree;
        let fine = self.grouped();
        let coarse_groups = coarse.grouped();
        let last = coarse_groups.len() - 1;
        coarse_groups[1..last].iter().all(|&(z, m)| {
            fine.iter()
                .any(|&(zf, mf)| (zf - z).abs() <= KNOT_TOL && mf >= m + raise)
        })
    }
}

/// Output of [`KnotVector::eval_basis`]: `values[k][a]` is the `k`-th
/// derivative of basis function `first_index + a`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEvaluation {
    pub first_index: usize,
    pub values: Vec<Vec<f64>>,
}

/// Cox–de Boor recursion with derivatives (Piegl & Tiller, A2.3).
pub(crate) fn ders_basis_funs(knots: &[f64], p: usize, span: usize, t: f64, n: usize) -> Vec<Vec<f64>> {
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![vec![0.0; p + 1]; n + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
    for r in 0..=p {
        let (mut s1, mut s2) = (0, 1);
        a[0][0] = 1.0;
        for k in 1..=n {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for (k, row) in ders.iter_mut().enumerate().skip(1) {
        for v in row.iter_mut() {
            *v *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

/// Maximally smooth `p`-open knot vector with `n` uniformly spaced
/// breakpoints `j / (n - 1)`.
pub fn uniform_refine(degree: usize, n: usize) -> Result<KnotVector> {
    if n < 2 {
        return Err(Error::InvalidRefinement(format!("need N >= 2 breakpoints, got {n}")));
    }
    if degree == 0 {
        return Err(Error::InvalidRefinement("degree must be at least 1".into()));
    }
    let h = 1.0 / (n - 1) as f64;
    let breakpoints: Vec<f64> = (0..n)
        .map(|j| if j == n - 1 { 1.0 } else { j as f64 * h })
        .collect();
    KnotVector::with_uniform_multiplicity(&breakpoints, 1, degree)
}

/// Graded refinement: breakpoints `(j h)^{1/μ}`, `h = 1 / (n - 1)`.
/// `μ = 1` reproduces [`uniform_refine`] exactly.
pub fn graded_refine(degree: usize, n: usize, mu: f64) -> Result<KnotVector> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidGrading(mu));
    }
    if n < 2 {
        return Err(Error::InvalidRefinement(format!("need N >= 2 breakpoints, got {n}")));
    }
    if degree == 0 {
        return Err(Error::InvalidRefinement("degree must be at least 1".into()));
    }
    let breakpoints = graded_breakpoints(n, mu);
    KnotVector::with_uniform_multiplicity(&breakpoints, 1, degree)
}

/// The graded breakpoint sequence `ζ_j = (j h)^{1/μ}`, `j = 0..n`.
pub fn graded_breakpoints(n: usize, mu: f64) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    (0..n)
        .map(|j| {
            if j == n - 1 {
                1.0
            } else {
                let x = j as f64 * h;
                if mu == 1.0 {
                    x
                } else {
                    x.powf(1.0 / mu)
                }
            }
        })
        .collect()
}

/// Which functionals are replaced by endpoint evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DualMode {
    /// Integral functionals for every index.
    Plain,
    /// `λ_0(v) = v(0)` and `λ_{n-1}(v) = v(1)`; the others are integral
    /// functionals. The first of these is also the polar functional used in
    /// the collapsed direction.
    Boundary,
}

/// A dual functional stored as a weighted point rule, `λ(v) = Σ_k w_k v(t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FunctionalRule {
    pub fn apply<F: FnMut(f64) -> f64>(&self, mut v: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * v(t))
            .sum()
    }

    fn point_evaluation(t: f64) -> Self {
        Self {
            points: vec![t],
            weights: vec![1.0],
        }
    }
}

/// Dual basis `{λ_i}` with `λ_i(B_k) = δ_ik`.
///
/// Each integral functional is a local L²-dual: on the longest knot span `J`
/// inside `supp(B_i)`, `λ_i(v) = ∫_J v φ_i` where `φ_i` is the combination of
/// the `p + 1` basis functions living on `J` that is biorthogonal to them.
/// Basis functions not supported on `J` are annihilated automatically.
#[derive(Debug, Clone)]
pub struct DualBasis {
    knot_vector: KnotVector,
    mode: DualMode,
    rules: Vec<FunctionalRule>,
}

impl DualBasis {
    pub fn new(knot_vector: KnotVector, mode: DualMode) -> Result<Self> {
        let p = knot_vector.degree();
        let n = knot_vector.basis_count();
        let gauss = GaussRule::new(p + 2)?;
        let knots = knot_vector.knots();
        let mut rules = Vec::with_capacity(n);
        for i in 0..n {
            if mode == DualMode::Boundary && i == 0 {
                rules.push(FunctionalRule::point_evaluation(0.0));
                continue;
            }
            if mode == DualMode::Boundary && i == n - 1 {
                rules.push(FunctionalRule::point_evaluation(1.0));
                continue;
            }
            let span = (i..=i + p)
                .filter(|&s| s >= p && s < n)
                .max_by(|&a, &b| {
                    (knots[a + 1] - knots[a]).total_cmp(&(knots[b + 1] - knots[b]))
                })
                .filter(|&s| knots[s + 1] > knots[s])
                .ok_or_else(|| {
                    Error::InvalidKnotVector(format!("basis function {i} has empty support"))
                })?;
            rules.push(local_dual_rule(&knot_vector, &gauss, span, i - (span - p))?);
        }
        Ok(Self {
            knot_vector,
            mode,
            rules,
        })
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.knot_vector
    }

    pub fn mode(&self) -> DualMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, i: usize) -> Result<&FunctionalRule> {
        self.rules.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.rules.len(),
        })
    }

    pub fn rules(&self) -> &[FunctionalRule] {
        &self.rules
    }

    /// `λ_i(v)`.
    pub fn apply<F: FnMut(f64) -> f64>(&self, i: usize, v: F) -> Result<f64> {
        Ok(self.rule(i)?.apply(v))
    }

    /// Quasi-interpolant coefficients `(λ_0(v), ..., λ_{n-1}(v))`.
    pub fn project<F: FnMut(f64) -> f64>(&self, mut v: F) -> Vec<f64> {
        self.rules.iter().map(|r| r.apply(&mut v)).collect()
    }
}

fn local_dual_rule(
    kv: &KnotVector,
    gauss: &GaussRule,
    span: usize,
    local: usize,
) -> Result<FunctionalRule> {
    let p = kv.degree();
    let knots = kv.knots();
    let (a, b) = (knots[span], knots[span + 1]);
    // Moments M[k][m] = ∫_J B_k L_m against Legendre polynomials orthonormal
    // on J. The dual density is φ_i = Σ_m y_m L_m with M y = e_i, which is
    // better conditioned than the B-spline Gram system.
    let len = b - a;
    let nodes: Vec<(f64, f64)> = gauss.on_interval(a, b).collect();
    let legendre: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&(t, _)| orthonormal_legendre(p, (t - a) / len))
        .collect();
    let mut moments = DMatrix::<f64>::zeros(p + 1, p + 1);
    for (q, &(t, w)) in nodes.iter().enumerate() {
        let vals = ders_basis_funs(knots, p, span, t, 0).swap_remove(0);
        for k in 0..=p {
            for m in 0..=p {
                moments[(k, m)] += w / len * vals[k] * legendre[q][m];
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(p + 1);
    rhs[local] = 1.0;
    let y = moments
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidKnotVector("singular local moment matrix".into()))?;
    let points = nodes.iter().map(|&(t, _)| t).collect();
    let weights = nodes
        .iter()
        .zip(&legendre)
        .map(|(&(_, w), l)| w / len * l.iter().zip(y.iter()).map(|(l, y)| l * y).sum::<f64>())
        .collect();
    Ok(FunctionalRule { points, weights })
}

/// Legendre polynomials orthonormal on `[0, 1]`, degrees `0..=p`, at `x`.
fn orthonormal_legendre(p: usize, x: f64) -> Vec<f64> {
    let s = 2.0 * x - 1.0;
    let mut out = Vec::with_capacity(p + 1);
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..=p {
        out.push(cur * (2.0 * k as f64 + 1.0).sqrt());
        let next = ((2 * k + 1) as f64 * s * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    out
}

/// `λ_i(v)` for a dual basis; free-function form of [`DualBasis::apply`].
pub fn dual_functional<F: FnMut(f64) -> f64>(db: &DualBasis, i: usize, v: F) -> Result<f64> {
    db.apply(i, v)
}

/// Coefficients on `fine` of the spline given by `coefficients` on `coarse`.
/// Requires `fine` to contain the coarse space (degree elevation and/or knot
/// insertion); the result is exact up to rounding.
pub fn refine_coefficients(coarse: &KnotVector, coefficients: &[f64], fine: &KnotVector) -> Result<Vec<f64>> {
    if !fine.contains_space(coarse) {
        return Err(Error::InvalidRefinement(
            "target knot vector does not contain the source spline space".into(),
        ));
    }
    if coefficients.len() != coarse.basis_count() {
        return Err(Error::InvalidArgument("coefficient count mismatch".into()));
    }
    let dual = DualBasis::new(fine.clone(), DualMode::Plain)?;
    let mut err = None;
    let out = dual.project(|t| match coarse.eval_spline(coefficients, t) {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            f64::NAN
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
