//! The Gieseker point: the linear map `Λ^r H^0(E) -> H^0(det E)` sending
//! `s_{i1} ∧ ... ∧ s_{ir}` to the section `x ↦ s_{i1}(x) ∧ ... ∧ s_{ir}(x)`.
//!
//! In the chart frame the wedge of `r` sections is the `r × r` minor of
//! `S(x)` on those columns. Its coefficients in the monomial basis of
//! `H^0(det E)` are recovered by an overdetermined least-squares fit over
//! sample nodes; a nonzero residual means the section evaluations are wrong.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::form::{hermitian_part, CMatrix};
use crate::sections::{homogeneous, BundleId, SectionBasis};

/// Relative residual allowed in the coefficient fit.
pub const FIT_TOL: f64 = 1e-10;

/// Singular values below `RANK_TOL · σ_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Sample nodes are drawn from `|z|_∞ <= SAMPLE_RADIUS` to keep the monomial
/// system well conditioned.
const SAMPLE_RADIUS: f64 = 2.0;

/// All `r`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::with_capacity(r), &mut out);
    out
}

fn minor(m: &CMatrix, rows: &[usize], cols: &[usize]) -> Complex64 {
    let sub = CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    sub.determinant()
}

/// The `r`-th compound matrix: entry `(J, I)` is `det A[J, I]` over
/// lexicographically ordered `r`-subsets. It represents `Λ^r A`.
pub fn compound_matrix(a: &CMatrix, r: usize) -> CMatrix {
    let sets = subsets(a.nrows(), r);
    CMatrix::from_fn(sets.len(), sets.len(), |j, i| minor(a, &sets[j], &sets[i]))
}

#[derive(Debug, Clone)]
pub struct GiesekerPoint {
    bundle: BundleId,
    rank: usize,
    dim: usize,
    /// Rows: monomial basis of `H^0(det E)`; columns: `r`-subsets.
    matrix: CMatrix,
    fit_residual: f64,
}

pub fn gieseker_point(basis: &SectionBasis) -> Result<GiesekerPoint> {
    let bundle = basis.bundle();
    let det = bundle.determinant();
    let r = basis.rank();
    let n = basis.dim();
    let m = det.dim();

    let wanted = 2 * m;
    let candidates: Vec<usize> = (0..basis.len())
        .filter(|&q| {
            let z = basis.points()[q];
            z[0].norm() <= SAMPLE_RADIUS && z[1].norm() <= SAMPLE_RADIUS
        })
        .collect();
    if candidates.len() < wanted {
        return Err(Error::Construction(format!(
            "only {} usable sample nodes, need {wanted}",
            candidates.len()
        )));
    }
    // Spread the picks over the candidate list; nodes are ordered radially
    // first, so a stride mixes radii and phases.
    let stride = candidates.len() / wanted;
    let picks: Vec<usize> = (0..wanted).map(|i| candidates[i * stride + stride / 2]).collect();

    let mut design = CMatrix::zeros(wanted, m);
    for (row, &q) in picks.iter().enumerate() {
        let e = det.evaluate_in_chart(&homogeneous(&basis.points()[q]), 0);
        design.row_mut(row).copy_from(&e.row(0));
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOL * smax) {
        return Err(Error::Construction("sample nodes do not separate the monomial basis".into()));
    }

    let sets = subsets(n, r);
    let rows: Vec<usize> = (0..r).collect();
    let mut matrix = CMatrix::zeros(m, sets.len());
    let mut worst = 0.0f64;
    for (col, set) in sets.iter().enumerate() {
        let rhs = CMatrix::from_fn(wanted, 1, |row, _| minor(&basis.at(picks[row]).into_owned(), &rows, set));
        let coeffs = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::Construction(format!("least-squares solve failed: {e}")))?;
        let resid = (&design * &coeffs - &rhs).norm();
        let rel = resid / (1.0 + rhs.norm());
        worst = worst.max(rel);
        if rel > FIT_TOL {
            return Err(Error::Construction(format!(
                "wedge of sections {set:?} is not a section of {det} (relative residual {rel:e})"
            )));
        }
        matrix.column_mut(col).copy_from(&coeffs.column(0));
    }
    Ok(GiesekerPoint { bundle, rank: r, dim: n, matrix, fit_residual: worst })
}

impl GiesekerPoint {
    pub fn bundle(&self) -> BundleId {
        self.bundle
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Worst relative residual of the coefficient fit.
    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    /// `dim H^0(det E)`.
    pub fn target_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn numerical_rank(&self) -> usize {
        let sv = self.matrix.singular_values();
        let smax = sv.max();
        sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
    }

    pub fn is_surjective(&self) -> bool {
        self.numerical_rank() == self.target_dim()
    }

    /// `σ · T(E)`: the induced `Λ^r` action on columns, `T(E) · Λ^r σ`.
    pub fn act(&self, sigma: &CMatrix) -> Result<CMatrix> {
        if sigma.nrows() != self.dim || sigma.ncols() != self.dim {
            return Err(Error::invalid("group element has the wrong dimension"));
        }
        Ok(&self.matrix * compound_matrix(sigma, self.rank))
    }

    /// `t ↦ log ‖e^{tΛ} · T(E)‖_F^2` on the grid `ts`, for traceless
    /// Hermitian `Λ`. Diagonalizing `Λ = U D U^*` turns the profile into
    /// `log Σ_I c_I e^{2 t μ_I}` with `μ_I = Σ_{i∈I} d_i`, evaluated with a
    /// shifted log-sum-exp.
    pub fn kempf_ness_profile(&self, direction: &CMatrix, ts: &[f64]) -> Result<Vec<f64>> {
        if direction.nrows() != self.dim || direction.ncols() != self.dim {
            return Err(Error::invalid("direction has the wrong dimension"));
        }
        let scale = direction.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(1.0);
        let asym = (direction - direction.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if asym > 1e-12 * scale {
            return Err(Error::invalid("direction is not Hermitian"));
        }
        if direction.trace().norm() > 1e-10 * scale * self.dim as f64 {
            return Err(Error::invalid("direction is not traceless"));
        }
        let eig = SymmetricEigen::new(hermitian_part(direction));
        let w = &self.matrix * compound_matrix(&eig.eigenvectors, self.rank);
        let terms: Vec<(f64, f64)> = subsets(self.dim, self.rank)
            .iter()
            .enumerate()
            .filter_map(|(col, set)| {
                let c = w.column(col).norm_squared();
                let mu: f64 = set.iter().map(|&i| eig.eigenvalues[i]).sum();
                (c > 0.0).then(|| (c.ln(), mu))
            })
            .collect();
        Ok(ts
            .iter()
            .map(|&t| {
                let peak = terms.iter().map(|(lc, mu)| lc + 2.0 * t * mu).fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = terms.iter().map(|(lc, mu)| (lc + 2.0 * t * mu - peak).exp()).sum();
                peak + sum.ln()
            })
            .collect())
    }
}
