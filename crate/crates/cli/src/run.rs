use std::path::Path;

use balanced::iteration::{self, Classification, IterationTrace, RunResult};
use balanced::Problem;

use crate::config::RunConfig;
use crate::init::initial_gram;
use crate::output::{write_result_json, write_trace_csv, ResultFile};
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Converged = 0,
    Failed = 1,
    MaxIterations = 2,
    Diverged = 3,
    InvalidInput = 4,
    NumericalFailure = 5,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl From<Classification> for ExitCode {
    fn from(c: Classification) -> Self {
        match c {
            Classification::Converged => ExitCode::Converged,
            Classification::MaxIterations => ExitCode::MaxIterations,
            Classification::Diverged => ExitCode::Diverged,
            Classification::NumericalFailure => ExitCode::NumericalFailure,
        }
    }
}

/// Runs `f` on a single-threaded pool when `deterministic` is set.
pub fn with_threads<T: Send>(deterministic: bool, f: impl FnOnce() -> T + Send) -> T {
    if deterministic {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool")
            .install(f)
    } else {
        f()
    }
}

pub struct RunOutcome {
    pub problem: Problem,
    pub result: RunResult,
    pub trace: IterationTrace,
    pub file: ResultFile,
}

/// Builds the problem, iterates and writes both output files.
pub fn run_config(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let bundle = cfg.bundle()?;
    let init = cfg.init.clone();
    let opts = cfg.options();
    let order = cfg.order;
    let (problem, result, trace) = with_threads(cfg.deterministic, || -> Result<_> {
        let problem = Problem::new(bundle, order)?;
        let h0 = initial_gram(&init, problem.dim())?;
        let (result, trace) = iteration::run(&h0, &problem, &opts)?;
        Ok((problem, result, trace))
    })?;
    let file = ResultFile::new(&result, &problem);
    write_trace_csv(&cfg.output.trace_csv, &trace)?;
    write_result_json(&cfg.output.result_json, &file)?;
    Ok(RunOutcome { problem, result, trace, file })
}

pub fn exit_code_for(err: &CliError) -> ExitCode {
    match err {
        CliError::Core(balanced::Error::InvalidInput(_)) | CliError::Config(_) | CliError::Read { .. } => {
            ExitCode::InvalidInput
        }
        CliError::Write { .. } => ExitCode::InvalidInput,
        CliError::Core(_) => ExitCode::NumericalFailure,
    }
}

pub fn run_command(config_path: &Path) -> ExitCode {
    let outcome = RunConfig::load(config_path).and_then(|cfg| run_config(&cfg));
    match outcome {
        Ok(o) => {
            let r = &o.result;
            println!("bundle          {}", o.problem.basis.bundle());
            println!("classification  {}", r.classification);
            println!("iterations      {}", r.iterations);
            if let Some(s) = r.final_step {
                println!("spread          {:.6e}", s.spread);
                println!("delta           {:.6e}", s.delta);
            }
            if let Some(b) = r.bergman_sup_residual {
                println!("bergman sup     {b:.6e}");
            }
            if let Some(rate) = r.contraction_estimate {
                println!("contraction     {rate:.4}");
            }
            if let Some(msg) = &r.failure {
                eprintln!("numerical failure: {msg}");
            }
            r.classification.into()
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
