//! Scenario runner, comparison harness and graph checker built on
//! `surfacing-core`.

pub mod check;
pub mod compare;
pub mod scenario;
pub mod traces;

use std::fmt;

use surfacing_core::{monitors_with, run, run_periodic, MonitorConfig, SimResult};

pub use compare::{compare, Comparison, Row};
pub use scenario::{AlgorithmSpec, Scenario, ScenarioError};

/// Environment variable that overrides the contribution tolerance of the
/// invariant monitors.
pub const TOL_ENV: &str = "CONSENSUS_SIM_TOL";

/// `V` threshold used for time-to-converge columns.
pub const CONVERGED_V: f64 = 1e-3;

/// Process exit status of the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    Violation = 1,
    Usage = 2,
}

/// Error carrying the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub msg: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError {
            status: Status::Usage,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl std::error::Error for CliError {}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::usage(e.to_string())
    }
}

/// Reads [`TOL_ENV`]. Unset means default tolerances.
pub fn monitor_config_from_env() -> Result<MonitorConfig, CliError> {
    match std::env::var(TOL_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(MonitorConfig::default()),
        Err(e) => Err(CliError::usage(format!("{TOL_ENV}: {e}"))),
        Ok(v) => match v.trim().parse::<f64>() {
            Ok(tol) if tol >= 0.0 && tol.is_finite() => Ok(MonitorConfig::with_tol(tol)),
            _ => Err(CliError::usage(format!(
                "{TOL_ENV} must be a nonnegative number, got {v:?}"
            ))),
        },
    }
}

/// Runs a scenario and re-checks it under `monitor`.
///
/// Setup problems are usage errors. A numerical fault during the run is
/// reported with the violation status.
pub fn execute(s: &Scenario, monitor: &MonitorConfig) -> Result<SimResult, CliError> {
    let outcome = match s.algorithm {
        AlgorithmSpec::SelfTriggered => run(&s.graph, &s.x0, &s.config, &s.schedule, s.t_end),
        AlgorithmSpec::Periodic(period) => run_periodic(&s.graph, &s.x0, period, s.t_end),
    };
    match outcome {
        Ok(mut result) => {
            result.violations = monitors_with(&result, monitor);
            Ok(result)
        }
        Err(e @ surfacing_core::Error::NumericalFault { .. }) => Err(CliError {
            status: Status::Violation,
            msg: format!("{}: {e}", s.name),
        }),
        Err(e) => Err(CliError::usage(format!("{}: {e}", s.name))),
    }
}

/// One-paragraph summary printed by `run`.
pub fn summary(s: &Scenario, r: &SimResult) -> String {
    let v_end = r
        .objective_at(s.t_end)
        .expect("t_end is within the horizon");
    let converged = r
        .first_time_below(CONVERGED_V)
        .map_or_else(|| "never".to_string(), |t| format!("{t:.6}"));
    format!(
        "scenario   {}\nalgorithm  {}\nt_end      {}\nN_S(t_end) {}\nV(t_end)   {v_end:.6e}\nV < {CONVERGED_V:e} at {converged}\nviolations {}\n",
        s.name,
        s.algorithm,
        s.t_end,
        r.surfacing_count(),
        r.violations.len()
    )
}
