//! Batch front end for the `bcmac` solvers: scenario configs in, CSV and JSON
//! metadata out.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

pub use config::{Objective, Overrides, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] bcmac::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Files written by one run. `partial` is set when some sweep points failed.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub partial: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.partial {
            3
        } else {
            0
        }
    }
}

/// Runs the subcommand `mode` on `cfg` and writes its result files.
pub fn execute(mode: Objective, cfg: &ScenarioConfig) -> Result<Outcome, CliError> {
    if cfg.objective != mode {
        return Err(CliError::Config(format!(
            "config objective is {:?}, which belongs to the `{}` subcommand",
            cfg.objective,
            cfg.objective.subcommand()
        )));
    }
    let stem = cfg.stem();
    let dir = cfg.out_dir();
    let sub = mode.subcommand();
    let (files, partial) = match mode {
        Objective::WsrRegion => {
            let r = run::run_region(cfg)?;
            let l = cfg.constraints.len();
            let mut out = vec![(format!("{stem}.csv"), output::region_csv(&r.points, l)?)];
            if let Some(h) = &r.heuristic {
                out.push((format!("{stem}_heuristic.csv"), output::heuristic_csv(h, l)?));
            }
            for f in &r.failures {
                log::error!("weight {:?} failed: {}", f.weights, f.error);
            }
            let partial = !r.failures.is_empty();
            let summary = serde_json::json!({ "points": r.points.len(), "failures": r.failures });
            (output::write_results(&dir, &stem, sub, partial, cfg, out, summary)?, partial)
        }
        Objective::SinrBalance | Objective::PowerBalance => {
            let r = if mode == Objective::SinrBalance { run::run_balance(cfg)? } else { run::run_powermin(cfg)? };
            let out = vec![(format!("{stem}.csv"), output::beam_trace_csv(&r)?)];
            (output::write_results(&dir, &stem, sub, false, cfg, out, &r)?, false)
        }
        Objective::NonlinearWsr => {
            let r = run::run_nonlinear(cfg)?;
            let out = vec![(format!("{stem}.csv"), output::cut_trace_csv(&r)?)];
            (output::write_results(&dir, &stem, sub, false, cfg, out, &r)?, false)
        }
    };
    Ok(Outcome { files, partial })
}
