//! Command-line front end: runs check suites and writes JSON reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::time::Instant;

use serde_json::json;

use crate::config::{CommandName, IndexParams, RoundtripParams, RunConfig, SchrodingerParams, Tolerances, WaParams};
use crate::error::{CliError, Result};
use crate::report::RunReport;

/// Runs the configured command on a pool of `jobs` threads (rayon default when `None`).
pub fn run(config: &RunConfig, jobs: Option<usize>) -> Result<RunReport> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    pool.install(|| execute(config))
}

fn execute(config: &RunConfig) -> Result<RunReport> {
    let tol = Tolerances::resolve(config)?;
    let start = Instant::now();
    let (cases, params) = match config.command {
        CommandName::Gallery => (commands::run_gallery(&tol), serde_json::Value::Null),
        CommandName::Schrodinger => {
            let p: SchrodingerParams = config.params()?;
            (commands::run_schrodinger(&p, &tol)?, json!(p))
        }
        CommandName::Index => {
            let p: IndexParams = config.params()?;
            (commands::run_index(&p, &tol)?, json!(p))
        }
        CommandName::BsRoundtrip => {
            let p: RoundtripParams = config.params()?;
            let seed = config.seed.ok_or_else(|| CliError::Config("bs-roundtrip needs a seed (--seed or config \"seed\")".into()))?;
            (commands::run_bs_roundtrip(&p, seed, &tol)?, json!(p))
        }
        CommandName::Wa => {
            let p: WaParams = config.params()?;
            (commands::run_wa(&p, config.seed, &tol)?, json!(p))
        }
    };
    let wall = start.elapsed().as_secs_f64();
    let echo = json!({
        "seed": config.seed,
        "tolerance": tol.default,
        "tolerances": tol.overrides,
        "params": params,
    });
    Ok(RunReport::new(config.command.as_str(), echo, cases, wall))
}
