#![allow(dead_code)]

use balanced::{CMatrix, HermitianForm};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// `A A^* + I/4` with Gaussian `A`, scaled by a random factor in [0.1, 10].
pub fn random_form(rng: &mut ChaCha8Rng, n: usize) -> HermitianForm {
    let a = gaussian_matrix(rng, n);
    let g = &a * a.adjoint() + CMatrix::identity(n, n).scale(0.25);
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    HermitianForm::new((&g + g.adjoint()).scale(0.5 * scale)).unwrap()
}

/// Random traceless Hermitian direction.
pub fn random_traceless(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let a = gaussian_matrix(rng, n);
    let mut h = (&a + a.adjoint()).scale(0.5);
    let tr = h.trace() / Complex64::from(n as f64);
    for i in 0..n {
        h[(i, i)] -= tr;
    }
    h
}

/// Random unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    gaussian_matrix(rng, n).qr().q()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}
