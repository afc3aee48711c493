//! Quadrature for the unit-volume Fubini–Study measure on P1 and P2.
//!
//! Both rules work in moment-map coordinates, where the Fubini–Study volume
//! form becomes Lebesgue measure on a simplex times uniform angles. Weights of
//! the form `|z^α|^2 (1+|z|^2)^{-k}` turn into polynomials of degree `k` on the
//! simplex, so Gauss–Legendre in the radial directions and a trapezoid rule in
//! the angles integrate them exactly.
//!
//! * P1: `z = tan(θ/2) e^{iφ}`, `dVol = sinθ dθ dφ / 4π`; Gauss–Legendre in
//!   `cos θ` with `order` points, `2·order + 1` equispaced angles.
//! * P2: `p1 = v`, `p2 = (1-v) w`, `p0 = (1-v)(1-w)` with
//!   `z_j = sqrt(p_j / p0) e^{iφ_j}` and `dVol = 2 (1-v) dv dw dφ1 dφ2 / 4π²`;
//!   Gauss–Legendre in `v` and `w`, `2·order + 1` angles per coordinate.
//!
//! All nodes sit in the affine chart `w0 != 0`.

use std::f64::consts::PI;
use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle::{moment_keys, rational_to_f64};

/// Roundoff floor for [`QuadratureScheme::eps_quad`]. The built-in moment
/// family is integrated exactly, so the measured error is pure roundoff and
/// smaller than what the downstream functionals accumulate.
pub const EPS_QUAD_FLOOR: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Manifold {
    P1,
    P2,
}

impl Manifold {
    /// Complex dimension.
    pub fn dim(self) -> usize {
        match self {
            Manifold::P1 => 1,
            Manifold::P2 => 2,
        }
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Manifold::P1 => f.write_str("P1"),
            Manifold::P2 => f.write_str("P2"),
        }
    }
}

impl FromStr for Manifold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "P1" | "p1" => Ok(Manifold::P1),
            "P2" | "p2" => Ok(Manifold::P2),
            other => Err(Error::invalid(format!("unsupported manifold `{other}`"))),
        }
    }
}

/// Affine coordinates `(z1, z2)` of a node in the chart `w0 != 0`. On P1 only
/// `z[0]` is used and `z[1]` is zero.
pub type ChartPoint = [Complex64; 2];

/// Nodes and positive weights approximating `∫_X · dVol` with `Vol(X) = 1`.
#[derive(Debug, Clone)]
pub struct QuadratureScheme {
    manifold: Manifold,
    order: usize,
    nodes: Vec<ChartPoint>,
    weights: Vec<f64>,
    total_mass: f64,
    exactness_degree: usize,
    eps_quad: f64,
}

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("n >= 1"));
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

fn angles(count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / count as f64))
        .collect()
}

/// Builds the tensor-product rule for `manifold`. Requires `order >= 2`.
pub fn build_quadrature(manifold: Manifold, order: usize) -> Result<QuadratureScheme> {
    if order < 2 {
        return Err(Error::invalid(format!("quadrature order must be >= 2, got {order}")));
    }
    let n_ang = 2 * order + 1;
    let phases = angles(n_ang);
    let ang_w = 1.0 / n_ang as f64;
    let radial = gauss_legendre_unit(order);

    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let exactness_degree = match manifold {
        Manifold::P1 => {
            // u = |z|^2 / (1 + |z|^2) = (1 - cos θ) / 2 is uniform on [0, 1].
            for &(u, wu) in &radial {
                let modulus = (u / (1.0 - u)).sqrt();
                for &ph in &phases {
                    nodes.push([ph * modulus, Complex64::new(0.0, 0.0)]);
                    weights.push(wu * ang_w);
                }
            }
            2 * order - 1
        }
        Manifold::P2 => {
            for &(v, wv) in &radial {
                for &(w, ww) in &radial {
                    let p1 = v;
                    let p2 = (1.0 - v) * w;
                    let p0 = (1.0 - v) * (1.0 - w);
                    let m1 = (p1 / p0).sqrt();
                    let m2 = (p2 / p0).sqrt();
                    let base = 2.0 * (1.0 - v) * wv * ww * ang_w * ang_w;
                    for &ph1 in &phases {
                        for &ph2 in &phases {
                            nodes.push([ph1 * m1, ph2 * m2]);
                            weights.push(base);
                        }
                    }
                }
            }
            2 * order - 2
        }
    };

    let total_mass = pairwise_sum(&weights);
    let mut scheme = QuadratureScheme {
        manifold,
        order,
        nodes,
        weights,
        total_mass,
        exactness_degree,
        eps_quad: 0.0,
    };
    scheme.eps_quad = scheme.moment_error(order)?.max(EPS_QUAD_FLOOR);
    Ok(scheme)
}

impl QuadratureScheme {
    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[ChartPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nominal volume `V`. Always 1; the realized sum of weights is
    /// [`QuadratureScheme::weight_sum`].
    pub fn volume(&self) -> f64 {
        1.0
    }

    pub fn weight_sum(&self) -> f64 {
        self.total_mass
    }

    /// Highest weight degree `k` for which every built-in moment is exact.
    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    /// Tolerance budget: max absolute moment error over weights of degree
    /// `<= order`, floored at [`EPS_QUAD_FLOOR`].
    pub fn eps_quad(&self) -> f64 {
        self.eps_quad
    }

    /// Max absolute error of the rule over all oracle moments of degree
    /// `<= max_degree`.
    pub fn moment_error(&self, max_degree: usize) -> Result<f64> {
        let keys = moment_keys(self.manifold, max_degree);
        let mut sums = vec![0.0f64; keys.len()];
        // Per node: p_j = |z_j|^2 / (1 + |z|^2), so the moment integrand is
        // p1^a p2^b p0^(k-a-b).
        let mut pow0 = vec![0.0; max_degree + 1];
        let mut pow1 = vec![0.0; max_degree + 1];
        let mut pow2 = vec![0.0; max_degree + 1];
        for (node, &w) in self.nodes.iter().zip(&self.weights) {
            let t1 = node[0].norm_sqr();
            let t2 = node[1].norm_sqr();
            let s = 1.0 + t1 + t2;
            let (p0, p1, p2) = (1.0 / s, t1 / s, t2 / s);
            pow0[0] = 1.0;
            pow1[0] = 1.0;
            pow2[0] = 1.0;
            for d in 1..=max_degree {
                pow0[d] = pow0[d - 1] * p0;
                pow1[d] = pow1[d - 1] * p1;
                pow2[d] = pow2[d - 1] * p2;
            }
            for (key, acc) in keys.iter().zip(sums.iter_mut()) {
                *acc += w * pow1[key.a] * pow2[key.b] * pow0[key.k - key.a - key.b];
            }
        }
        let mut worst = 0.0f64;
        for (key, got) in keys.iter().zip(&sums) {
            let exact = rational_to_f64(&key.exact()?);
            worst = worst.max((got - exact).abs());
        }
        Ok(worst)
    }

    /// `Σ_q w_q f(x_q)` with a fixed pairwise summation order.
    pub fn integrate(&self, values: &[Complex64]) -> Result<Complex64> {
        if values.len() != self.len() {
            return Err(Error::invalid(format!(
                "field has {} values, scheme has {} nodes",
                values.len(),
                self.len()
            )));
        }
        let mut terms = Vec::with_capacity(values.len());
        for (q, (v, w)) in values.iter().zip(&self.weights).enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NumericalDomain {
                    node: q,
                    what: format!("non-finite integrand value {v}"),
                });
            }
            terms.push(v * w);
        }
        Ok(pairwise_sum_complex(&terms))
    }

    /// Real-valued variant of [`QuadratureScheme::integrate`].
    pub fn integrate_real(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::invalid(format!(
                "field has {} values, scheme has {} nodes",
                values.len(),
                self.len()
            )));
        }
        let mut terms = Vec::with_capacity(values.len());
        for (q, (v, w)) in values.iter().zip(&self.weights).enumerate() {
            if !v.is_finite() {
                return Err(Error::NumericalDomain {
                    node: q,
                    what: format!("non-finite integrand value {v}"),
                });
            }
            terms.push(v * w);
        }
        Ok(pairwise_sum(&terms))
    }

    /// Evaluates `f` at every node and integrates.
    pub fn integrate_fn<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(&ChartPoint) -> Complex64,
    {
        let values: Vec<Complex64> = self.nodes.iter().map(f).collect();
        self.integrate(&values)
    }
}

const PAIRWISE_BLOCK: usize = 32;

/// Recursive pairwise summation; the split points depend only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}
