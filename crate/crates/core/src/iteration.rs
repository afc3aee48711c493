//! Fixed-point iteration `H_{n+1} = T(H_n)` with per-step diagnostics.
//!
//! Convergence is judged on determinant-normalized forms `H̃_n`, divergence on
//! their eigenvalue spread. Every step also checks that `Z̃` and `log det` do
//! not increase, which holds exactly for the discretized maps.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::form::{op_norm, HermitianForm};
use crate::maps::{self, Problem};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SPREAD_MAX: f64 = 1e6;
pub const DEFAULT_MAX_ITER: usize = 500;

/// Monotonicity slack, in units of the scheme's `eps_quad`.
pub const MONOTONICITY_SLACK: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub tol: f64,
    pub spread_max: f64,
    pub max_iter: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, spread_max: DEFAULT_SPREAD_MAX, max_iter: DEFAULT_MAX_ITER }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.spread_max > 1.0) {
            return Err(Error::invalid(format!("spread_max must exceed 1, got {}", self.spread_max)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be >= 1"));
        }
        Ok(())
    }
}

/// Diagnostics of step `n`, computed from `H_n` and `H_{n+1} = T(H_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// `Z̃(H_n)`.
    pub z_tilde: f64,
    /// `log det H_n`.
    pub log_det: f64,
    /// `det(H_{n+1} H_n^{-1})`.
    pub det_ratio: f64,
    /// `|Tr(H_{n+1} H_n^{-1}) - N|`.
    pub trace_residual: f64,
    /// `max(λ_max(H̃_n), 1/λ_min(H̃_n))`.
    pub spread: f64,
    /// `‖H̃_{n+1} - H̃_n‖_op`.
    pub delta: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub steps: Vec<StepRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.steps.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Converged,
    MaxIterations,
    Diverged,
    NumericalFailure,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Converged => "Converged",
            Classification::MaxIterations => "MaxIterations",
            Classification::Diverged => "Diverged",
            Classification::NumericalFailure => "NumericalFailure",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Converged" => Ok(Classification::Converged),
            "MaxIterations" => Ok(Classification::MaxIterations),
            "Diverged" => Ok(Classification::Diverged),
            "NumericalFailure" => Ok(Classification::NumericalFailure),
            other => Err(Error::invalid(format!("unknown classification `{other}`"))),
        }
    }
}

/// Classification from the thresholds alone. Divergence wins over the other
/// outcomes; convergence requires the last recorded delta to be within `tol`.
pub fn classify(trace: &IterationTrace, tol: f64, spread_max: f64, max_iter: usize) -> Classification {
    if trace.steps.iter().any(|s| s.spread > spread_max) {
        return Classification::Diverged;
    }
    match trace.last() {
        Some(last) if last.delta <= tol => Classification::Converged,
        _ => {
            debug_assert!(trace.len() <= max_iter);
            Classification::MaxIterations
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub classification: Classification,
    /// Last computed iterate.
    pub final_gram: HermitianForm,
    /// Number of applications of `T`.
    pub iterations: usize,
    pub final_step: Option<StepRecord>,
    /// `sup_x ‖B(FS(H_final))(x) - (N / rV) Id‖_op`, when computable.
    pub bergman_sup_residual: Option<f64>,
    /// Ratio of the last two step deltas, an empirical contraction rate.
    pub contraction_estimate: Option<f64>,
    pub failure: Option<String>,
}

/// Iterates `T` from `h0` until convergence, divergence, `max_iter` steps, or a
/// numerical failure.
pub fn run(h0: &HermitianForm, problem: &Problem, opts: &RunOptions) -> Result<(RunResult, IterationTrace)> {
    opts.validate()?;
    if h0.dim() != problem.dim() {
        return Err(Error::invalid(format!(
            "initial Gram is {}x{}, problem has N = {}",
            h0.dim(),
            h0.dim(),
            problem.dim()
        )));
    }
    let slack = MONOTONICITY_SLACK * problem.eps_quad();
    let weight = maps::log_det_weight(&problem.basis, &problem.scheme);
    let mut trace = IterationTrace::default();
    let mut current = h0.clone();
    let mut failure: Option<String> = None;
    let mut applied = 0usize;

    for n in 0..opts.max_iter {
        let step = (|| -> Result<(StepRecord, HermitianForm)> {
            let field = problem.fs(&current)?;
            let log_det = current.log_det()?;
            let z_tilde = -problem.energy_i(&field)? + weight * log_det;
            let next = problem.hilb(&field)?;
            let next_log_det = next.log_det()?;
            let delta = op_norm(&(next.normalize()?.gram() - current.normalize()?.gram()));
            let record = StepRecord {
                step: n,
                z_tilde,
                log_det,
                det_ratio: (next_log_det - log_det).exp(),
                trace_residual: maps::trace_residual_between(&current, &next)?,
                spread: current.boundedness_radius()?,
                delta,
            };
            Ok((record, next))
        })();
        let (record, next) = match step {
            Ok(v) => v,
            Err(e) => {
                failure = Some(format!("step {n}: {e}"));
                break;
            }
        };
        if let Some(prev) = trace.last() {
            if record.z_tilde > prev.z_tilde + slack {
                failure = Some(format!(
                    "step {n}: Z̃ increased from {:e} to {:e}",
                    prev.z_tilde, record.z_tilde
                ));
            } else if record.log_det > prev.log_det + slack {
                failure = Some(format!(
                    "step {n}: log det increased from {:e} to {:e}",
                    prev.log_det, record.log_det
                ));
            }
        }
        trace.steps.push(record);
        if failure.is_some() {
            break;
        }
        current = next;
        applied += 1;
        if record.spread > opts.spread_max || record.delta <= opts.tol {
            break;
        }
    }

    let classification = if failure.is_some() {
        Classification::NumericalFailure
    } else {
        classify(&trace, opts.tol, opts.spread_max, opts.max_iter)
    };
    let bergman_sup_residual = problem
        .bergman(&current)
        .ok()
        .map(|b| b.sup_deviation_from_scalar(problem.balanced_constant()));
    let contraction_estimate = match trace.steps.as_slice() {
        [.., a, b] if a.delta > 0.0 => Some(b.delta / a.delta),
        _ => None,
    };
    let result = RunResult {
        classification,
        final_gram: current,
        iterations: applied,
        final_step: trace.last().copied(),
        bergman_sup_residual,
        contraction_estimate,
        failure,
    };
    Ok((result, trace))
}
