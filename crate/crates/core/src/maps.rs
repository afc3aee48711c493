//! The maps `FS: M -> K`, `Hilb: K -> M`, their composite `T`, the Bergman
//! kernel, and the functionals `I`, `Z`, `Z̃`.
//!
//! Every integral is the discrete sum of the quadrature scheme. Since the
//! weights are positive and sum to the volume, the pointwise identities behind
//! the trace identity and the monotonicity of `Z`, `log det` and `Z̃` under `T`
//! survive discretization; only roundoff separates them from equalities.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::form::{cholesky_pd, hermitian_part, op_norm, CMatrix, FiberMetricField, HermitianForm};
use crate::geometry::{build_quadrature, QuadratureScheme};
use crate::sections::{build_sections, BundleId, SectionBasis};

const PAR_MIN_LEN: usize = 512;

fn check_dims(h: &HermitianForm, basis: &SectionBasis) -> Result<()> {
    if h.dim() != basis.dim() {
        return Err(Error::invalid(format!(
            "Gram matrix is {}x{}, section space has dimension {}",
            h.dim(),
            h.dim(),
            basis.dim()
        )));
    }
    Ok(())
}

fn check_field(field: &FiberMetricField, basis: &SectionBasis) -> Result<()> {
    if field.len() != basis.len() || field.rank() != basis.rank() {
        return Err(Error::invalid("fiber metric does not match the section basis"));
    }
    Ok(())
}

/// `Y = L^{-1} S^*` for `G = L L^*`: column block `q` satisfies
/// `Y_q^* Y_q = S(x_q) G^{-1} S(x_q)^*`.
fn whitened_sections(h: &HermitianForm, basis: &SectionBasis) -> Result<CMatrix> {
    let l = h.cholesky()?.unpack();
    l.solve_lower_triangular(&basis.stacked().adjoint()).ok_or_else(|| Error::Conditioning {
        context: "triangular solve against sections".into(),
        min_eigenvalue: h.min_eigenvalue(),
    })
}

/// Per-node densities `S(x) G^{-1} S(x)^*`.
fn densities(h: &HermitianForm, basis: &SectionBasis) -> Result<Vec<CMatrix>> {
    let y = whitened_sections(h, basis)?;
    let r = basis.rank();
    Ok((0..basis.len())
        .into_par_iter()
        .with_min_len(PAR_MIN_LEN)
        .map(|q| {
            let block = y.columns(q * r, r);
            hermitian_part(&(block.adjoint() * block))
        })
        .collect())
}

fn invert_pd(m: &CMatrix) -> Option<CMatrix> {
    if m.nrows() == 1 {
        let d = m[(0, 0)].re;
        return (d > 0.0 && d.is_finite()).then(|| CMatrix::from_element(1, 1, Complex64::from(1.0 / d)));
    }
    let inv = cholesky_pd(m)?.inverse();
    Some(hermitian_part(&inv))
}

/// `FS(H)`: the fiber metric `h(x) = (S(x) G^{-1} S(x)^*)^{-1}`, for which an
/// `H`-orthonormal basis satisfies `Σ s_i ⊗ s_i^{*h} = Id`.
pub fn fs(h: &HermitianForm, basis: &SectionBasis) -> Result<FiberMetricField> {
    check_dims(h, basis)?;
    let dens = densities(h, basis)?;
    let inverted: Vec<Option<CMatrix>> =
        dens.par_iter().with_min_len(PAR_MIN_LEN).map(invert_pd).collect();
    let mut values = Vec::with_capacity(inverted.len());
    for (q, m) in inverted.into_iter().enumerate() {
        values.push(m.ok_or(Error::DegenerateDensity { node: q })?);
    }
    Ok(FiberMetricField::from_values_unchecked(basis.rank(), values))
}

/// Plain `L^2` Gram matrix `∫ s_i^* h s_j dVol`.
pub fn l2_gram(field: &FiberMetricField, basis: &SectionBasis, scheme: &QuadratureScheme) -> Result<CMatrix> {
    check_field(field, basis)?;
    if scheme.len() != basis.len() {
        return Err(Error::invalid("quadrature scheme does not match the section basis"));
    }
    let r = basis.rank();
    let n = basis.dim();
    // X_q = sqrt(w_q) L_q^* S_q with h_q = L_q L_q^*, so Σ_q X_q^* X_q = ∫ S^* h S.
    let blocks: Vec<Result<CMatrix>> = (0..basis.len())
        .into_par_iter()
        .with_min_len(PAR_MIN_LEN)
        .map(|q| {
            let w = scheme.weights()[q].sqrt();
            let hq = field.at(q);
            let s = basis.at(q);
            if r == 1 {
                let d = hq[(0, 0)].re;
                if !(d > 0.0) || !d.is_finite() {
                    return Err(Error::NumericalDomain { node: q, what: "fiber metric not positive".into() });
                }
                return Ok(s.map(|z| z * (w * d.sqrt())));
            }
            let l = cholesky_pd(hq)
                .ok_or_else(|| Error::NumericalDomain { node: q, what: "fiber metric not positive-definite".into() })?
                .unpack();
            Ok((l.adjoint() * s).map(|z| z * w))
        })
        .collect();
    let mut x = DMatrix::zeros(basis.len() * r, n);
    for (q, block) in blocks.into_iter().enumerate() {
        x.view_mut((q * r, 0), (r, n)).copy_from(&block?);
    }
    Ok(hermitian_part(&(x.adjoint() * &x)))
}

/// `Hilb(h)`: `(N / (V r)) ∫ ⟨s_i, s_j⟩_h dVol`.
pub fn hilb(field: &FiberMetricField, basis: &SectionBasis, scheme: &QuadratureScheme) -> Result<HermitianForm> {
    let g = l2_gram(field, basis, scheme)?;
    let factor = basis.dim() as f64 / (scheme.volume() * basis.rank() as f64);
    HermitianForm::from_hermitian(g.map(|z| z * factor), "Hilb")
}

/// `T(H) = Hilb(FS(H))`.
pub fn t_operator(h: &HermitianForm, basis: &SectionBasis, scheme: &QuadratureScheme) -> Result<HermitianForm> {
    hilb(&fs(h, basis)?, basis, scheme)
}

/// Pointwise endomorphisms of `E`, one `r × r` matrix per node.
#[derive(Debug, Clone)]
pub struct EndomorphismField {
    values: Vec<CMatrix>,
}

impl EndomorphismField {
    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn integrate_trace(&self, scheme: &QuadratureScheme) -> Result<f64> {
        let tr: Vec<f64> = self.values.iter().map(|m| m.trace().re).collect();
        scheme.integrate_real(&tr)
    }

    /// `max_q ‖B(x_q) - c·Id‖_op`.
    pub fn sup_deviation_from_scalar(&self, c: f64) -> f64 {
        self.values
            .iter()
            .map(|m| {
                let d = m - CMatrix::identity(m.nrows(), m.ncols()).scale(c);
                op_norm(&d)
            })
            .fold(0.0, f64::max)
    }
}

/// Bergman kernel `B(h)(x) = S(x) G^{-1} S(x)^* h(x)` with `G` the plain
/// `L^2(h)` Gram matrix.
pub fn bergman(field: &FiberMetricField, basis: &SectionBasis, scheme: &QuadratureScheme) -> Result<EndomorphismField> {
    let g = l2_gram(field, basis, scheme)?;
    let gram = HermitianForm::from_hermitian(g, "Bergman L2 Gram")?;
    let dens = densities(&gram, basis)?;
    let values = dens.iter().zip(field.values()).map(|(d, h)| d * h).collect();
    Ok(EndomorphismField { values })
}

/// Bergman kernel of `FS(H)`.
pub fn bergman_of_form(h: &HermitianForm, basis: &SectionBasis, scheme: &QuadratureScheme) -> Result<EndomorphismField> {
    bergman(&fs(h, basis)?, basis, scheme)
}

fn pointwise_log_dets(field: &FiberMetricField) -> Result<Vec<f64>> {
    field
        .values()
        .iter()
        .enumerate()
        .map(|(q, m)| {
            crate::form::log_det_pd(m).ok_or_else(|| Error::NumericalDomain {
                node: q,
                what: "non-positive fiber determinant".into(),
            })
        })
        .collect()
}

/// `I(h) - I(h_ref) = ∫ log det(h h_ref^{-1}) dVol`, the integral of
/// `dI/dt = ∫ tr(φ̇)` along any path from `h_ref` to `h`.
pub fn energy_i_relative(field: &FiberMetricField, reference: &FiberMetricField, scheme: &QuadratureScheme) -> Result<f64> {
    if field.len() != reference.len() || field.len() != scheme.len() {
        return Err(Error::invalid("fiber metrics and scheme have different node counts"));
    }
    let a = pointwise_log_dets(field)?;
    let b = pointwise_log_dets(reference)?;
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    scheme.integrate_real(&diff)
}

/// `I(h)` normalized so that the background metric has `I = 0`.
pub fn energy_i(field: &FiberMetricField, basis: &SectionBasis, scheme: &QuadratureScheme) -> Result<f64> {
    check_field(field, basis)?;
    energy_i_relative(field, &basis.background_metric(), scheme)
}

/// `Z = -I ∘ FS`.
pub fn z_functional(h: &HermitianForm, basis: &SectionBasis, scheme: &QuadratureScheme) -> Result<f64> {
    Ok(-energy_i(&fs(h, basis)?, basis, scheme)?)
}

/// `Z̃ = Z + (r V / N) log det`, invariant under `H -> cH`.
pub fn z_tilde(h: &HermitianForm, basis: &SectionBasis, scheme: &QuadratureScheme) -> Result<f64> {
    let z = z_functional(h, basis, scheme)?;
    Ok(z + log_det_weight(basis, scheme) * h.log_det()?)
}

/// The coefficient `r V / N` of `log det` in `Z̃`.
pub fn log_det_weight(basis: &SectionBasis, scheme: &QuadratureScheme) -> f64 {
    basis.rank() as f64 * scheme.volume() / basis.dim() as f64
}

/// `|Tr(T(H) H^{-1}) - N|`.
pub fn trace_identity_residual(h: &HermitianForm, basis: &SectionBasis, scheme: &QuadratureScheme) -> Result<f64> {
    let t = t_operator(h, basis, scheme)?;
    trace_residual_between(h, &t)
}

/// `|Tr(H_next H^{-1}) - N|` for a precomputed `H_next = T(H)`.
pub fn trace_residual_between(h: &HermitianForm, next: &HermitianForm) -> Result<f64> {
    let tr = h.trace_inverse_times(next.gram())?;
    Ok((tr.re - h.dim() as f64).abs())
}

/// A bundle together with the quadrature it is sampled on.
#[derive(Debug, Clone)]
pub struct Problem {
    pub scheme: QuadratureScheme,
    pub basis: SectionBasis,
}

impl Problem {
    pub fn new(bundle: BundleId, order: usize) -> Result<Self> {
        let scheme = build_quadrature(bundle.manifold(), order)?;
        let basis = build_sections(bundle, &scheme)?;
        Ok(Self { scheme, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn eps_quad(&self) -> f64 {
        self.scheme.eps_quad()
    }

    pub fn fs(&self, h: &HermitianForm) -> Result<FiberMetricField> {
        fs(h, &self.basis)
    }

    pub fn hilb(&self, field: &FiberMetricField) -> Result<HermitianForm> {
        hilb(field, &self.basis, &self.scheme)
    }

    pub fn t(&self, h: &HermitianForm) -> Result<HermitianForm> {
        t_operator(h, &self.basis, &self.scheme)
    }

    pub fn bergman(&self, h: &HermitianForm) -> Result<EndomorphismField> {
        bergman_of_form(h, &self.basis, &self.scheme)
    }

    pub fn energy_i(&self, field: &FiberMetricField) -> Result<f64> {
        energy_i(field, &self.basis, &self.scheme)
    }

    pub fn z(&self, h: &HermitianForm) -> Result<f64> {
        z_functional(h, &self.basis, &self.scheme)
    }

    pub fn z_tilde(&self, h: &HermitianForm) -> Result<f64> {
        z_tilde(h, &self.basis, &self.scheme)
    }

    pub fn trace_residual(&self, h: &HermitianForm) -> Result<f64> {
        trace_identity_residual(h, &self.basis, &self.scheme)
    }

    /// `N / (r V)`, the constant value of the Bergman kernel at a balanced
    /// metric.
    pub fn balanced_constant(&self) -> f64 {
        1.0 / log_det_weight(&self.basis, &self.scheme)
    }
}
