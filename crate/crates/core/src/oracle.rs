//! Closed-form reference values.
//!
//! Moments of the unit-volume Fubini–Study measure against the weights
//! `|z|^{2j} (1+|z|^2)^{-k}` reduce to Beta (on P1) and Dirichlet (on P2)
//! integrals, so every value is an exact rational. They validate the
//! quadrature rules, `hilb`, and the fixed points reached by iteration.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::form::HermitianForm;
use crate::geometry::Manifold;

pub type Rational = Ratio<i128>;

/// Largest weight degree the exact tables support without overflow.
pub const MAX_MOMENT_DEGREE: usize = 60;

/// `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `k! / (a! b! (k-a-b)!)`.
pub fn multinomial(k: usize, a: usize, b: usize) -> u128 {
    binomial(k, a) * binomial(k - a, b)
}

/// `∫_{P1} |z|^{2j} (1+|z|^2)^{-k} dVol = 1 / ((k+1) C(k,j))`.
pub fn monomial_moment_p1(j: usize, k: usize) -> Result<Rational> {
    if j > k || k > MAX_MOMENT_DEGREE {
        return Err(Error::invalid(format!(
            "P1 moment needs 0 <= j <= k <= {MAX_MOMENT_DEGREE}, got j={j}, k={k}"
        )));
    }
    let den = (k as u128 + 1) * binomial(k, j);
    Ok(Rational::new(1, den as i128))
}

/// `∫_{P2} |z1|^{2a} |z2|^{2b} (1+|z|^2)^{-k} dVol = 2 a! b! (k-a-b)! / (k+2)!`.
pub fn monomial_moment_p2(a: usize, b: usize, k: usize) -> Result<Rational> {
    if a + b > k || k > MAX_MOMENT_DEGREE {
        return Err(Error::invalid(format!(
            "P2 moment needs a + b <= k <= {MAX_MOMENT_DEGREE}, got a={a}, b={b}, k={k}"
        )));
    }
    let den = (k as u128 + 2) * (k as u128 + 1) * multinomial(k, a, b);
    Ok(Rational::new(2, den as i128))
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// The Gram matrix `diag(1/C(k,j))` of the monomial basis of `O(k) -> P1` at
/// the balanced point.
pub fn balanced_gram_line_p1(k: usize) -> Result<HermitianForm> {
    if k == 0 || k > MAX_MOMENT_DEGREE {
        return Err(Error::invalid(format!("line degree must be in 1..={MAX_MOMENT_DEGREE}")));
    }
    let diag: Vec<Complex64> = (0..=k)
        .map(|j| Complex64::new(1.0 / binomial(k, j) as f64, 0.0))
        .collect();
    HermitianForm::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// Balanced Gram `diag(a! b! c! / k!)` for `O(k) -> P2`, in the monomial
/// ordering used by [`crate::sections`].
pub fn balanced_gram_line_p2(k: usize) -> Result<HermitianForm> {
    if k == 0 || k > MAX_MOMENT_DEGREE {
        return Err(Error::invalid(format!("line degree must be in 1..={MAX_MOMENT_DEGREE}")));
    }
    let diag: Vec<Complex64> = crate::sections::p2_exponents(k)
        .into_iter()
        .map(|(a, b)| Complex64::new(1.0 / multinomial(k, a, b) as f64, 0.0))
        .collect();
    HermitianForm::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// Key of a moment table entry: P1 uses `(j, 0, k)`, P2 uses `(a, b, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MomentKey {
    pub manifold: Manifold,
    pub a: usize,
    pub b: usize,
    pub k: usize,
}

impl MomentKey {
    pub fn exact(&self) -> Result<Rational> {
        match self.manifold {
            Manifold::P1 => monomial_moment_p1(self.a, self.k),
            Manifold::P2 => monomial_moment_p2(self.a, self.b, self.k),
        }
    }

    /// Total degree of the monomial weight.
    pub fn degree(&self) -> usize {
        self.k
    }
}

/// Exact moments indexed by manifold, exponents and weight degree.
///
/// Text form, one entry per line: `P1 j k num den` or `P2 a b k num den`.
/// Lines starting with `#` are comments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MomentTable {
    pub entries: BTreeMap<MomentKey, Rational>,
}

impl MomentTable {
    /// Every moment of weight degree `<= max_degree` on `manifold`.
    pub fn generate(manifold: Manifold, max_degree: usize) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for key in moment_keys(manifold, max_degree) {
            entries.insert(key, key.exact()?);
        }
        Ok(Self { entries })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::invalid(format!("moment table line {}: `{raw}`", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let manifold: Manifold = fields.first().ok_or_else(bad)?.parse()?;
            let ints: Vec<i128> = fields[1..]
                .iter()
                .map(|f| f.parse::<i128>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            let (key, num, den) = match (manifold, ints.as_slice()) {
                (Manifold::P1, [j, k, n, d]) => (
                    MomentKey { manifold, a: *j as usize, b: 0, k: *k as usize },
                    *n,
                    *d,
                ),
                (Manifold::P2, [a, b, k, n, d]) => (
                    MomentKey { manifold, a: *a as usize, b: *b as usize, k: *k as usize },
                    *n,
                    *d,
                ),
                _ => return Err(bad()),
            };
            if den <= 0 || num <= 0 {
                return Err(bad());
            }
            entries.insert(key, Rational::new(num, den));
        }
        Ok(Self { entries })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# manifold indices... numerator denominator\n");
        for (key, q) in &self.entries {
            match key.manifold {
                Manifold::P1 => {
                    let _ = writeln!(out, "P1 {} {} {} {}", key.a, key.k, q.numer(), q.denom());
                }
                Manifold::P2 => {
                    let _ = writeln!(
                        out,
                        "P2 {} {} {} {} {}",
                        key.a,
                        key.b,
                        key.k,
                        q.numer(),
                        q.denom()
                    );
                }
            }
        }
        out
    }
}

/// All `(a, b, k)` index triples up to the given weight degree.
pub fn moment_keys(manifold: Manifold, max_degree: usize) -> Vec<MomentKey> {
    let mut keys = Vec::new();
    for k in 0..=max_degree {
        match manifold {
            Manifold::P1 => {
                for j in 0..=k {
                    keys.push(MomentKey { manifold, a: j, b: 0, k });
                }
            }
            Manifold::P2 => {
                for a in 0..=k {
                    for b in 0..=(k - a) {
                        keys.push(MomentKey { manifold, a, b, k });
                    }
                }
            }
        }
    }
    keys
}
