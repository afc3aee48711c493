//! Hermitian inner products on the section space and fiber metrics on `E`.
//!
//! Convention: `gram[(i, j)] = H(s_i, s_j)` with `H` conjugate-linear in the
//! first slot, so `H(u, v) = u^* G v` for coefficient vectors `u, v`. With this
//! choice a change of basis `s' = s A` maps the Gram matrix to `A^* G A`, and
//! the pointwise density of an `H`-orthonormal frame is `S G^{-1} S^*`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative Hermitian-symmetry tolerance accepted at construction.
pub const HERMITIAN_TOL: f64 = 1e-13;

/// Inputs with `λ_min < PD_GUARD · λ_max` are rejected as degenerate.
pub const PD_GUARD: f64 = 1e-300;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// `(A + A^*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Cholesky factorization that fails on indefinite input. The complex
/// `Cholesky::new` takes a complex square root of every pivot, so a negative
/// pivot yields an imaginary diagonal instead of an error.
pub fn cholesky_pd(m: &CMatrix) -> Option<Cholesky<Complex64, Dyn>> {
    let chol = Cholesky::new(m.clone())?;
    let l = chol.l_dirty();
    for i in 0..m.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0) || !d.re.is_finite() || d.im.abs() > 1e-8 * d.re {
            return None;
        }
    }
    Some(chol)
}

/// `log det` of a Hermitian positive-definite matrix via Cholesky.
pub fn log_det_pd(m: &CMatrix) -> Option<f64> {
    let chol = cholesky_pd(m)?;
    let l = chol.l_dirty();
    Some(2.0 * (0..m.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>())
}

/// Positive-definite Hermitian Gram matrix of an inner product on `H^0(X, E)`
/// in the fixed reference basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    gram: CMatrix,
}

impl HermitianForm {
    /// Validates symmetry and definiteness, then stores the Hermitian part.
    pub fn new(gram: CMatrix) -> Result<Self> {
        if gram.nrows() != gram.ncols() || gram.is_empty() {
            return Err(Error::invalid(format!(
                "Gram matrix must be square and non-empty, got {}x{}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        if gram.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("Gram matrix has non-finite entries"));
        }
        let scale = max_abs(&gram);
        let asym = max_abs(&(&gram - gram.adjoint()));
        if asym > HERMITIAN_TOL * scale {
            return Err(Error::invalid(format!(
                "Gram matrix is not Hermitian (asymmetry {asym:e} vs scale {scale:e})"
            )));
        }
        Self::from_hermitian(hermitian_part(&gram), "HermitianForm::new")
    }

    /// Definiteness check only; `gram` must already be exactly Hermitian.
    pub(crate) fn from_hermitian(gram: CMatrix, context: &str) -> Result<Self> {
        let ev = hermitian_eigenvalues(&gram);
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if !(lo > 0.0) || lo < PD_GUARD * hi {
            return Err(Error::Conditioning { context: context.to_string(), min_eigenvalue: lo });
        }
        Ok(Self { gram })
    }

    pub fn identity(n: usize) -> Self {
        Self { gram: CMatrix::identity(n, n) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(CMatrix::from_diagonal(&DVector::from_vec(d)))
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn into_gram(self) -> CMatrix {
        self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn cholesky(&self) -> Result<Cholesky<Complex64, Dyn>> {
        cholesky_pd(&self.gram).ok_or_else(|| Error::Conditioning {
            context: "Cholesky factorization".into(),
            min_eigenvalue: self.min_eigenvalue(),
        })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.gram)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `log det` of the Gram matrix; the reference basis has `log det = 0`.
    pub fn log_det(&self) -> Result<f64> {
        log_det_pd(&self.gram).ok_or_else(|| Error::Conditioning {
            context: "log det".into(),
            min_eigenvalue: self.min_eigenvalue(),
        })
    }

    /// `c · H` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::invalid(format!("scale factor must be positive, got {c}")));
        }
        Ok(Self { gram: self.gram.map(|z| z * c) })
    }

    /// Gram matrix `A^* G A` of the same inner product in the basis `s A`.
    pub fn change_basis(&self, a: &CMatrix) -> Result<Self> {
        Self::new(a.adjoint() * &self.gram * a)
    }

    /// `tr(G^{-1} M)` via a Cholesky solve.
    pub fn trace_inverse_times(&self, m: &CMatrix) -> Result<Complex64> {
        let x = self.cholesky()?.solve(m);
        Ok(x.trace())
    }

    /// `det(H)^{-1/N} H`, the determinant-one representative.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.dim() as f64;
        let factor = (-self.log_det()? / n).exp();
        self.scaled(factor)
    }

    /// Normalized eigenvalue spread `max(λ_max(H̃), 1/λ_min(H̃))`.
    pub fn boundedness_radius(&self) -> Result<f64> {
        let ev = self.normalize()?.eigenvalues();
        let r = ev[ev.len() - 1].max(1.0 / ev[0]);
        Ok(r.max(1.0))
    }
}

/// A point of the geodesic `H_t` joining two inner products.
pub fn geodesic(h0: &HermitianForm, h1: &HermitianForm, t: f64) -> Result<HermitianForm> {
    GeodesicSpec::new(h0, h1)?.at(t)
}

/// Simultaneous diagonalization of a pair of inner products: a frame that is
/// `base`-orthonormal and diagonalizes the target with entries `e^{λ_i}`.
#[derive(Debug, Clone)]
pub struct GeodesicSpec {
    base: HermitianForm,
    exponents: Vec<f64>,
    /// Columns are the frame vectors `P`, with `P^* G_0 P = I`.
    frame: CMatrix,
    /// `P^{-*} = L U`, used to rebuild `H_t = (LU) diag(e^{tλ}) (LU)^*`.
    lift: CMatrix,
}

impl GeodesicSpec {
    pub fn new(h0: &HermitianForm, h1: &HermitianForm) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return Err(Error::invalid("geodesic endpoints have different dimensions"));
        }
        let l = h0.cholesky()?.unpack();
        // C = L^{-1} G_1 L^{-*}
        let linv_g1 = l
            .solve_lower_triangular(h1.gram())
            .ok_or_else(|| conditioning("geodesic triangular solve", h0))?;
        let c = l
            .solve_lower_triangular(&linv_g1.adjoint())
            .ok_or_else(|| conditioning("geodesic triangular solve", h0))?;
        let eig = SymmetricEigen::new(hermitian_part(&c));
        let mut exponents = Vec::with_capacity(h0.dim());
        for (i, &mu) in eig.eigenvalues.iter().enumerate() {
            if !(mu > 0.0) {
                return Err(Error::Conditioning {
                    context: format!("generalized eigenvalue {i} of geodesic pair"),
                    min_eigenvalue: mu,
                });
            }
            exponents.push(mu.ln());
        }
        let u = eig.eigenvectors;
        let lift = &l * &u;
        let frame = l
            .adjoint()
            .solve_upper_triangular(&u)
            .ok_or_else(|| conditioning("geodesic frame", h0))?;
        Ok(Self { base: h0.clone(), exponents, frame, lift })
    }

    pub fn base(&self) -> &HermitianForm {
        &self.base
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn at(&self, t: f64) -> Result<HermitianForm> {
        let mut scaled = self.lift.clone();
        for (j, lam) in self.exponents.iter().enumerate() {
            let f = (t * lam).exp();
            scaled.column_mut(j).scale_mut(f);
        }
        let g = &scaled * self.lift.adjoint();
        HermitianForm::from_hermitian(hermitian_part(&g), "geodesic point")
    }
}

fn conditioning(context: &str, h: &HermitianForm) -> Error {
    Error::Conditioning { context: context.into(), min_eigenvalue: h.min_eigenvalue() }
}

/// A Hermitian metric on `E` sampled at quadrature nodes: one `r × r`
/// positive-definite matrix per node, in the chart frame, with
/// `h(u, v) = v^* h(x) u`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberMetricField {
    rank: usize,
    values: Vec<CMatrix>,
}

impl FiberMetricField {
    pub fn new(rank: usize, values: Vec<CMatrix>) -> Result<Self> {
        for (q, m) in values.iter().enumerate() {
            if m.nrows() != rank || m.ncols() != rank {
                return Err(Error::invalid(format!("node {q}: fiber matrix is not {rank}x{rank}")));
            }
            if cholesky_pd(m).is_none() {
                return Err(Error::NumericalDomain {
                    node: q,
                    what: "fiber metric is not positive-definite".into(),
                });
            }
        }
        Ok(Self { rank, values })
    }

    pub(crate) fn from_values_unchecked(rank: usize, values: Vec<CMatrix>) -> Self {
        Self { rank, values }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, node: usize) -> &CMatrix {
        &self.values[node]
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::invalid(format!("scale factor must be positive, got {c}")));
        }
        Ok(Self { rank: self.rank, values: self.values.iter().map(|m| m.map(|z| z * c)).collect() })
    }
}
