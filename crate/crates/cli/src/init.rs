//! Initial Gram matrices and seeded random samples.

use std::path::Path;

use balanced::{CMatrix, HermitianForm};
use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::InitSpec;
use crate::{CliError, Result};

/// Eigenvalue floor applied to random initial Grams, relative to the largest.
pub const INIT_EIGEN_FLOOR: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian matrix with independent standard entries.
pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn gaussian_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let a = gaussian_matrix(rng, n);
    (&a + a.adjoint()).scale(0.5)
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Clamps the spectrum of a Hermitian matrix from below at
/// `INIT_EIGEN_FLOOR · λ_max`.
fn floor_spectrum(m: CMatrix) -> CMatrix {
    let eig = SymmetricEigen::new(m);
    let top = eig.eigenvalues.max().max(f64::MIN_POSITIVE);
    let floored: DVector<Complex64> = eig.eigenvalues.map(|l| Complex64::from(l.max(INIT_EIGEN_FLOOR * top)));
    symmetrize(&(&eig.eigenvectors * CMatrix::from_diagonal(&floored) * eig.eigenvectors.adjoint()))
}

/// `H0 = L L^*` with `L = I + amplitude · G`, `G` a seeded Gaussian Hermitian
/// matrix.
pub fn random_perturbation(n: usize, seed: u64, amplitude: f64) -> Result<HermitianForm> {
    let g = gaussian_hermitian(&mut rng(seed), n);
    let l = CMatrix::identity(n, n) + g.scale(amplitude);
    let h = floor_spectrum(symmetrize(&(&l * l.adjoint())));
    Ok(HermitianForm::new(h)?)
}

/// A generic positive-definite Gram: `A A^* + I/4` with Gaussian `A`, scaled
/// by `10^u`, `u` uniform in `[-1, 1]`.
pub fn random_positive_form(rng: &mut ChaCha8Rng, n: usize) -> Result<HermitianForm> {
    let a = gaussian_matrix(rng, n);
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    let g = symmetrize(&(&a * a.adjoint() + CMatrix::identity(n, n).scale(0.25))).scale(scale);
    Ok(HermitianForm::new(g)?)
}

/// Row-major `[re, im]` pairs.
pub fn gram_to_pairs(g: &CMatrix) -> Vec<[f64; 2]> {
    let n = g.nrows();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| [g[(i, j)].re, g[(i, j)].im]).collect()
}

pub fn gram_from_pairs(pairs: &[[f64; 2]]) -> Result<CMatrix> {
    let n = (pairs.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != pairs.len() {
        return Err(CliError::Config(format!("{} entries do not form a square matrix", pairs.len())));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(pairs[i * n + j][0], pairs[i * n + j][1])))
}

/// Reads a Gram from JSON: either a bare array of `[re, im]` pairs or a result
/// file carrying `final_gram`.
pub fn read_gram_file(path: &Path) -> Result<HermitianForm> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Read { path: path.display().to_string(), source })?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let pairs = value.get("final_gram").cloned().unwrap_or(value);
    let pairs: Vec<[f64; 2]> =
        serde_json::from_value(pairs).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(HermitianForm::new(gram_from_pairs(&pairs)?)?)
}

pub fn initial_gram(spec: &InitSpec, n: usize) -> Result<HermitianForm> {
    let h = match spec {
        InitSpec::Identity => HermitianForm::identity(n),
        InitSpec::Random { seed, amplitude } => random_perturbation(n, *seed, *amplitude)?,
        InitSpec::File { path } => read_gram_file(path)?,
    };
    if h.dim() != n {
        return Err(CliError::Config(format!("initial Gram is {0}x{0}, bundle has N = {n}", h.dim())));
    }
    Ok(h)
}
