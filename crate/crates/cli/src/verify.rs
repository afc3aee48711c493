//! Invariant suite run against a configured problem.

use std::fmt;
use std::path::Path;

use balanced::gieseker::gieseker_point;
use balanced::{GeodesicSpec, Problem};

use crate::config::{InitSpec, RunConfig};
use crate::init::{gaussian_hermitian, random_positive_form, rng};
use crate::run::{exit_code_for, with_threads, ExitCode};
use crate::Result;

/// Random Grams sampled for the trace and monotonicity checks.
pub const VERIFY_SAMPLES: usize = 10;
/// Random geodesics (and Kempf–Ness directions) sampled for convexity.
pub const VERIFY_GEODESICS: usize = 5;
pub const GEODESIC_GRID: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Pass when `value <= bound`.
    AtMost,
    /// Pass when `value >= bound`.
    AtLeast,
    /// Pass when `value == bound`.
    Equal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub kind: Bound,
    pub passed: bool,
}

impl CheckRow {
    fn new(name: &'static str, value: f64, kind: Bound, bound: f64) -> Self {
        let passed = match kind {
            Bound::AtMost => value <= bound,
            Bound::AtLeast => value >= bound,
            Bound::Equal => value == bound,
        };
        Self { name, value, bound, kind, passed }
    }
}

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.kind {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
            Bound::Equal => "==",
        };
        write!(
            f,
            "{:<24} {:>14.6e} {op} {:<14.6e} {}",
            self.name,
            self.value,
            self.bound,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

fn second_differences(f: &[f64]) -> impl Iterator<Item = f64> + '_ {
    f.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2])
}

pub fn verify_problem(problem: &Problem, seed: u64) -> Result<Vec<CheckRow>> {
    let n = problem.dim();
    let eps = problem.eps_quad();
    let mut r = rng(seed);
    let mut rows = Vec::new();

    let mut trace = 0.0f64;
    let (mut dz, mut dlog, mut dzt) = (f64::MIN, f64::MIN, f64::MIN);
    for _ in 0..VERIFY_SAMPLES {
        let h = random_positive_form(&mut r, n)?;
        let th = problem.t(&h)?;
        trace = trace.max(balanced::maps::trace_residual_between(&h, &th)?);
        dz = dz.max(problem.z(&th)? - problem.z(&h)?);
        dlog = dlog.max(th.log_det()? - h.log_det()?);
        dzt = dzt.max(problem.z_tilde(&th)? - problem.z_tilde(&h)?);
    }
    rows.push(CheckRow::new("trace identity", trace, Bound::AtMost, 100.0 * eps));
    rows.push(CheckRow::new("monotone Z", dz, Bound::AtMost, 100.0 * eps));
    rows.push(CheckRow::new("monotone log det", dlog, Bound::AtMost, 100.0 * eps));
    rows.push(CheckRow::new("monotone Z-tilde", dzt, Bound::AtMost, 100.0 * eps));

    let mut convex = f64::MAX;
    for _ in 0..VERIFY_GEODESICS {
        let spec = GeodesicSpec::new(&random_positive_form(&mut r, n)?, &random_positive_form(&mut r, n)?)?;
        let z: Vec<f64> = (0..GEODESIC_GRID)
            .map(|i| spec.at(i as f64 / (GEODESIC_GRID - 1) as f64).and_then(|h| problem.z(&h)))
            .collect::<balanced::Result<_>>()?;
        convex = second_differences(&z).fold(convex, f64::min);
    }
    rows.push(CheckRow::new("geodesic convexity", convex, Bound::AtLeast, -10.0 * eps));

    let point = gieseker_point(&problem.basis)?;
    rows.push(CheckRow::new(
        "gieseker rank",
        point.numerical_rank() as f64,
        Bound::Equal,
        point.target_dim() as f64,
    ));
    let ts: Vec<f64> = (0..=40).map(|i| -3.0 + 0.15 * i as f64).collect();
    let mut kn = f64::MAX;
    for _ in 0..VERIFY_GEODESICS {
        let mut dir = gaussian_hermitian(&mut r, n);
        let shift = dir.trace() / num_complex::Complex64::from(n as f64);
        for i in 0..n {
            dir[(i, i)] -= shift;
        }
        let f = point.kempf_ness_profile(&dir, &ts)?;
        kn = second_differences(&f).fold(kn, f64::min);
    }
    rows.push(CheckRow::new("kempf-ness convexity", kn, Bound::AtLeast, 0.0));
    Ok(rows)
}

pub fn verify_config(cfg: &RunConfig) -> Result<Vec<CheckRow>> {
    cfg.validate()?;
    let bundle = cfg.bundle()?;
    let seed = match cfg.init {
        InitSpec::Random { seed, .. } => seed,
        _ => 0,
    };
    let order = cfg.order;
    with_threads(cfg.deterministic, || {
        let problem = Problem::new(bundle, order)?;
        verify_problem(&problem, seed)
    })
}

pub fn verify_command(config_path: &Path) -> ExitCode {
    match RunConfig::load(config_path).and_then(|cfg| verify_config(&cfg)) {
        Ok(rows) => {
            println!("{:<24} {:>14}    {:<14} status", "check", "value", "bound");
            for row in &rows {
                println!("{row}");
            }
            if rows.iter().all(|r| r.passed) {
                ExitCode::Converged
            } else {
                ExitCode::Failed
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

