//! Built-in bundles and their global-section bases.
//!
//! Sections are evaluated in the affine chart `w0 != 0` through their
//! homogeneous description, so the same code also evaluates them in the other
//! standard charts (used to check transition functions).
//!
//! Bases:
//! * `LineP1(k)`: `z^j`, `j = 0..=k` (homogeneous `w0^{k-j} w1^j`).
//! * `LineP2(k)`: `z1^a z2^b` with `a + b <= k`, ordered by `a` then `b`.
//! * `Sum(a, b)`: `O(a) ⊕ O(b)` on P1, the two monomial bases concatenated.
//! * `TangentP2`: vector fields of the elementary matrices `E_ij` of `gl(3)`
//!   acting on `[w0 : w1 : w2]`, in lexicographic order
//!   `E01, E02, E10, E11, E12, E20, E21, E22` (`E00` is dropped since
//!   `E00 + E11 + E22` generates the trivial Euler action). Frame
//!   `(∂/∂z1, ∂/∂z2)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::form::{CMatrix, FiberMetricField};
use crate::geometry::{ChartPoint, Manifold, QuadratureScheme};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BundleId {
    LineP1(usize),
    LineP2(usize),
    /// `O(a) ⊕ O(b)` over P1.
    Sum(usize, usize),
    TangentP2,
}

/// Generators spanning the sections of `T P2`, as `(i, j)` of `E_ij`.
pub const TANGENT_P2_GENERATORS: [(usize, usize); 8] =
    [(0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)];

impl BundleId {
    pub fn manifold(&self) -> Manifold {
        match self {
            BundleId::LineP1(_) | BundleId::Sum(..) => Manifold::P1,
            BundleId::LineP2(_) | BundleId::TangentP2 => Manifold::P2,
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            BundleId::LineP1(_) | BundleId::LineP2(_) => 1,
            BundleId::Sum(..) | BundleId::TangentP2 => 2,
        }
    }

    /// `dim H^0(X, E)`.
    pub fn dim(&self) -> usize {
        match *self {
            BundleId::LineP1(k) => k + 1,
            BundleId::LineP2(k) => (k + 1) * (k + 2) / 2,
            BundleId::Sum(a, b) => a + b + 2,
            BundleId::TangentP2 => 8,
        }
    }

    /// The determinant line bundle.
    pub fn determinant(&self) -> BundleId {
        match *self {
            BundleId::LineP1(k) => BundleId::LineP1(k),
            BundleId::LineP2(k) => BundleId::LineP2(k),
            BundleId::Sum(a, b) => BundleId::LineP1(a + b),
            BundleId::TangentP2 => BundleId::LineP2(3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BundleId::LineP1(0) | BundleId::LineP2(0) => {
                Err(Error::invalid("line bundle degree must be >= 1"))
            }
            BundleId::Sum(a, b) if a == 0 || b == 0 => {
                Err(Error::invalid("direct-sum degrees must both be >= 1"))
            }
            _ => Ok(()),
        }
    }

    /// Sections evaluated at homogeneous coordinates `w`, expressed in the
    /// standard frame of chart `chart` (`w[chart] != 0`). Returns `r × N`.
    pub fn evaluate_in_chart(&self, w: &[Complex64; 3], chart: usize) -> CMatrix {
        let y = w.map(|x| x / w[chart]);
        match *self {
            BundleId::LineP1(k) => {
                let row: Vec<Complex64> = (0..=k).map(|j| y[0].powu((k - j) as u32) * y[1].powu(j as u32)).collect();
                CMatrix::from_row_slice(1, k + 1, &row)
            }
            BundleId::LineP2(k) => {
                let row: Vec<Complex64> = p2_exponents(k)
                    .into_iter()
                    .map(|(a, b)| {
                        y[0].powu((k - a - b) as u32) * y[1].powu(a as u32) * y[2].powu(b as u32)
                    })
                    .collect();
                CMatrix::from_row_slice(1, row.len(), &row)
            }
            BundleId::Sum(a, b) => {
                let mut m = CMatrix::zeros(2, a + b + 2);
                for j in 0..=a {
                    m[(0, j)] = y[0].powu((a - j) as u32) * y[1].powu(j as u32);
                }
                for j in 0..=b {
                    m[(1, a + 1 + j)] = y[0].powu((b - j) as u32) * y[1].powu(j as u32);
                }
                m
            }
            BundleId::TangentP2 => {
                let coords: Vec<usize> = (0..3).filter(|&a| a != chart).collect();
                let mut m = CMatrix::zeros(2, 8);
                for (col, &(i, j)) in TANGENT_P2_GENERATORS.iter().enumerate() {
                    // Velocity of y under E_ij, projected to the chart:
                    // ẏ_a = δ_ai y_j - y_a δ_{chart,i} y_j.
                    for (row, &a) in coords.iter().enumerate() {
                        let mut v = if a == i { y[j] } else { ZERO };
                        if chart == i {
                            v -= y[a] * y[j];
                        }
                        m[(row, col)] = v;
                    }
                }
                m
            }
        }
    }

    /// Background fiber metric `h0` in the chart `w0 != 0` at affine point `z`:
    /// `(1+|z|^2)^{-k}` on line bundles, blockwise on sums, the Fubini–Study
    /// metric `((1+|z|^2) I - z z^*) / (1+|z|^2)^2` on `T P2`.
    pub fn background_at(&self, z: &ChartPoint) -> CMatrix {
        let s = 1.0 + z[0].norm_sqr() + z[1].norm_sqr();
        match *self {
            BundleId::LineP1(k) | BundleId::LineP2(k) => {
                CMatrix::from_element(1, 1, Complex64::from(s.powi(-(k as i32))))
            }
            BundleId::Sum(a, b) => {
                let mut m = CMatrix::zeros(2, 2);
                m[(0, 0)] = Complex64::from(s.powi(-(a as i32)));
                m[(1, 1)] = Complex64::from(s.powi(-(b as i32)));
                m
            }
            BundleId::TangentP2 => {
                let zv = nalgebra::DVector::from_vec(vec![z[0], z[1]]);
                let m = CMatrix::identity(2, 2).scale(s) - &zv * zv.adjoint();
                m.scale(1.0 / (s * s))
            }
        }
    }
}

impl fmt::Display for BundleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleId::LineP1(k) => write!(f, "LineP1({k})"),
            BundleId::LineP2(k) => write!(f, "LineP2({k})"),
            BundleId::Sum(a, b) => write!(f, "Sum({a},{b})"),
            BundleId::TangentP2 => f.write_str("TangentP2"),
        }
    }
}

impl FromStr for BundleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::invalid(format!("unrecognized bundle `{s}`"));
        if compact == "TangentP2" {
            return Ok(BundleId::TangentP2);
        }
        let open = compact.find('(').ok_or_else(bad)?;
        let args = compact[open..]
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let nums: Vec<usize> = args
            .split(',')
            .map(|a| a.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let id = match (&compact[..open], nums.as_slice()) {
            ("LineP1", [k]) => BundleId::LineP1(*k),
            ("LineP2", [k]) => BundleId::LineP2(*k),
            ("Sum", [a, b]) => BundleId::Sum(*a, *b),
            _ => return Err(bad()),
        };
        id.validate()?;
        Ok(id)
    }
}

/// Exponents `(a, b)` of the monomials `z1^a z2^b`, `a + b <= k`.
pub fn p2_exponents(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity((k + 1) * (k + 2) / 2);
    for a in 0..=k {
        for b in 0..=(k - a) {
            out.push((a, b));
        }
    }
    out
}

/// Homogeneous coordinates `[1 : z1 : z2]` of an affine node.
pub fn homogeneous(z: &ChartPoint) -> [Complex64; 3] {
    [ONE, z[0], z[1]]
}

/// Section evaluations at every quadrature node plus the background metric.
#[derive(Debug, Clone)]
pub struct SectionBasis {
    bundle: BundleId,
    rank: usize,
    dim: usize,
    points: Vec<ChartPoint>,
    /// Row block `q*r .. q*r + r` is `S(x_q)`; column `i` holds `s_i`.
    evals: CMatrix,
    frame_weight: Vec<CMatrix>,
}

pub fn build_sections(bundle: BundleId, q: &QuadratureScheme) -> Result<SectionBasis> {
    bundle.validate()?;
    if bundle.manifold() != q.manifold() {
        return Err(Error::invalid(format!(
            "bundle {bundle} lives on {}, quadrature is on {}",
            bundle.manifold(),
            q.manifold()
        )));
    }
    let r = bundle.rank();
    let n = bundle.dim();
    let mut evals = DMatrix::zeros(q.len() * r, n);
    let mut frame_weight = Vec::with_capacity(q.len());
    for (idx, z) in q.nodes().iter().enumerate() {
        let s = bundle.evaluate_in_chart(&homogeneous(z), 0);
        evals.view_mut((idx * r, 0), (r, n)).copy_from(&s);
        frame_weight.push(bundle.background_at(z));
    }
    Ok(SectionBasis { bundle, rank: r, dim: n, points: q.nodes().to_vec(), evals, frame_weight })
}

impl SectionBasis {
    pub fn bundle(&self) -> BundleId {
        self.bundle
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ChartPoint] {
        &self.points
    }

    /// `S(x_q)`, an `r × N` view.
    pub fn at(&self, node: usize) -> nalgebra::DMatrixView<'_, Complex64> {
        self.evals.view((node * self.rank, 0), (self.rank, self.dim))
    }

    /// All evaluations stacked node by node, `(len · r) × N`.
    pub fn stacked(&self) -> &CMatrix {
        &self.evals
    }

    /// The background metric `h0` at every node.
    pub fn background_metric(&self) -> FiberMetricField {
        FiberMetricField::from_values_unchecked(self.rank, self.frame_weight.clone())
    }

    /// `min_q σ_min(S(x_q))`; positive iff the sections generate every
    /// sampled fiber.
    pub fn min_generation_margin(&self) -> f64 {
        (0..self.len())
            .map(|q| {
                let sv = self.at(q).into_owned().singular_values();
                sv.iter().copied().fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Same sections expressed in the basis `s' = s A`.
    pub fn change_basis(&self, a: &CMatrix) -> Result<SectionBasis> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::invalid("change-of-basis matrix has the wrong shape"));
        }
        Ok(SectionBasis { evals: &self.evals * a, ..self.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_quadrature;

    #[test]
    fn dimensions() {
        assert_eq!(BundleId::LineP1(4).dim(), 5);
        assert_eq!(BundleId::LineP2(3).dim(), 10);
        assert_eq!(BundleId::Sum(1, 3).dim(), 6);
        assert_eq!(BundleId::Sum(1, 3).rank(), 2);
        // dim sl(3) = 3^2 - 1
        assert_eq!(BundleId::TangentP2.dim(), 3 * 3 - 1);
        assert_eq!(p2_exponents(4).len(), BundleId::LineP2(4).dim());
    }

    #[test]
    fn parse_and_display() {
        for s in ["LineP1(3)", "LineP2(2)", "Sum(1,3)", "TangentP2"] {
            assert_eq!(s.parse::<BundleId>().unwrap().to_string(), s);
        }
        assert_eq!("Sum( 2, 5 )".parse::<BundleId>().unwrap(), BundleId::Sum(2, 5));
        for bad in ["LineP1(0)", "Sum(0,2)", "LineP3(1)", "LineP1(-1)", "Sum(1)", "Tangent"] {
            assert!(matches!(bad.parse::<BundleId>(), Err(Error::InvalidInput(_))), "{bad}");
        }
    }

    #[test]
    fn line_p1_values() {
        let q = build_quadrature(Manifold::P1, 3).unwrap();
        let b = build_sections(BundleId::LineP1(1), &q).unwrap();
        for (idx, z) in q.nodes().iter().enumerate() {
            let s = b.at(idx);
            assert_eq!(s[(0, 0)], ONE);
            assert_eq!(s[(0, 1)], z[0]);
        }
    }

    #[test]
    fn background_examples() {
        let z0 = [ZERO, ZERO];
        assert_eq!(BundleId::LineP1(1).background_at(&z0)[(0, 0)].re, 1.0);
        let z1 = [Complex64::from_polar(1.0, 0.7), ZERO];
        assert!((BundleId::LineP1(2).background_at(&z1)[(0, 0)].re - 0.25).abs() < 1e-15);
        let h = BundleId::Sum(1, 3).background_at(&z1);
        assert!((h[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((h[(1, 1)].re - 0.125).abs() < 1e-15);
        assert_eq!(h[(0, 1)], ZERO);
    }

    #[test]
    fn construction_errors() {
        let q1 = build_quadrature(Manifold::P1, 2).unwrap();
        assert!(build_sections(BundleId::TangentP2, &q1).is_err());
        assert!(build_sections(BundleId::LineP1(0), &q1).is_err());
    }

    #[test]
    fn global_generation_margin_positive() {
        let q1 = build_quadrature(Manifold::P1, 4).unwrap();
        let q2 = build_quadrature(Manifold::P2, 3).unwrap();
        for (b, q) in [
            (BundleId::LineP1(1), &q1),
            (BundleId::Sum(1, 3), &q1),
            (BundleId::LineP2(2), &q2),
            (BundleId::TangentP2, &q2),
        ] {
            let basis = build_sections(b, q).unwrap();
            assert!(basis.min_generation_margin() > 0.0, "{b}");
        }
    }

    fn sample_homogeneous() -> Vec<[Complex64; 3]> {
        vec![
            [ONE, Complex64::new(0.3, -1.2), Complex64::new(-0.7, 0.4)],
            [ONE, Complex64::new(2.5, 0.1), Complex64::new(0.2, 1.9)],
            [ONE, Complex64::new(-0.4, 0.6), Complex64::new(1.1, -0.3)],
        ]
    }

    #[test]
    fn line_and_sum_transition_functions() {
        for b in [BundleId::LineP1(3), BundleId::Sum(1, 3), BundleId::LineP2(3)] {
            let charts: &[usize] = if b.manifold() == Manifold::P1 { &[1] } else { &[1, 2] };
            for w in sample_homogeneous() {
                let w = if b.manifold() == Manifold::P1 { [w[0], w[1], ZERO] } else { w };
                let s0 = b.evaluate_in_chart(&w, 0);
                for &c in charts {
                    let sc = b.evaluate_in_chart(&w, c);
                    let ratio = w[c] / w[0];
                    let degrees: Vec<usize> = match b {
                        BundleId::Sum(a, bb) => vec![a, bb],
                        BundleId::LineP1(k) | BundleId::LineP2(k) => vec![k],
                        BundleId::TangentP2 => unreachable!(),
                    };
                    for (row, k) in degrees.iter().enumerate() {
                        let g = ratio.powu(*k as u32);
                        for col in 0..b.dim() {
                            let want = s0[(row, col)];
                            let got = sc[(row, col)] * g;
                            assert!((want - got).norm() <= 1e-12 * (1.0 + want.norm()), "{b}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tangent_transition_jacobian() {
        // A vector with chart-c components v has homogeneous velocity ẏ_b = v_b
        // (b != c), ẏ_c = 0; in chart 0, ż_a = ẏ_a / y_0 - y_a ẏ_0 / y_0^2.
        let b = BundleId::TangentP2;
        for w in sample_homogeneous() {
            let s0 = b.evaluate_in_chart(&w, 0);
            for c in [1usize, 2] {
                let y = w.map(|x| x / w[c]);
                let sc = b.evaluate_in_chart(&w, c);
                let coords: Vec<usize> = (0..3).filter(|&a| a != c).collect();
                for col in 0..8 {
                    let mut ydot = [ZERO; 3];
                    for (row, &a) in coords.iter().enumerate() {
                        ydot[a] = sc[(row, col)];
                    }
                    for (row, a) in [1usize, 2].into_iter().enumerate() {
                        let zdot = ydot[a] / y[0] - y[a] * ydot[0] / (y[0] * y[0]);
                        let want = s0[(row, col)];
                        assert!((zdot - want).norm() <= 1e-12 * (1.0 + want.norm()));
                    }
                }
            }
        }
    }

    #[test]
    fn tangent_fields_in_affine_chart() {
        let z = [Complex64::new(0.5, 0.2), Complex64::new(-0.1, 0.9)];
        let s = BundleId::TangentP2.evaluate_in_chart(&homogeneous(&z), 0);
        // E01 -> -z1 (z1, z2); E10 -> ∂1; E12 -> z2 ∂1; E22 -> z2 ∂2.
        assert!((s[(0, 0)] + z[0] * z[0]).norm() < 1e-15);
        assert!((s[(1, 0)] + z[0] * z[1]).norm() < 1e-15);
        assert_eq!((s[(0, 2)], s[(1, 2)]), (ONE, ZERO));
        assert_eq!((s[(0, 4)], s[(1, 4)]), (z[1], ZERO));
        assert_eq!((s[(0, 7)], s[(1, 7)]), (ZERO, z[1]));
    }
}
