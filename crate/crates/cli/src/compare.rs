//! Side-by-side runs of scenarios that share a graph and initial state.

use std::cmp::Ordering;
use std::fmt;

use surfacing_core::{MonitorConfig, SimResult};

use crate::{execute, AlgorithmSpec, CliError, Scenario, CONVERGED_V};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub algorithm: AlgorithmSpec,
    pub t_end: f64,
    pub surfacings: usize,
    pub v_end: f64,
    /// First recorded time with `V < CONVERGED_V`.
    pub converged_at: Option<f64>,
    pub violations: usize,
}

impl Row {
    fn new(s: &Scenario, r: &SimResult) -> Self {
        Row {
            name: s.name.clone(),
            algorithm: s.algorithm,
            t_end: s.t_end,
            surfacings: r.surfacing_count(),
            v_end: r
                .objective_at(s.t_end)
                .expect("t_end is within the horizon"),
            converged_at: r.first_time_below(CONVERGED_V),
            violations: r.violations.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<Row>,
    /// One line per ordered pair and metric.
    pub verdicts: Vec<String>,
}

impl Comparison {
    pub fn any_violation(&self) -> bool {
        self.rows.iter().any(|r| r.violations > 0)
    }
}

/// Runs every scenario on its own thread and tabulates the results.
pub fn compare(scenarios: &[Scenario], monitor: &MonitorConfig) -> Result<Comparison, CliError> {
    let first = match scenarios {
        [first, _, ..] => first,
        _ => return Err(CliError::usage("compare needs at least two scenarios")),
    };
    for s in &scenarios[1..] {
        if s.graph != first.graph {
            return Err(CliError::usage(format!(
                "{} uses a different graph than {}",
                s.name, first.name
            )));
        }
        if s.x0 != first.x0 {
            return Err(CliError::usage(format!(
                "{} uses a different x0 than {}",
                s.name, first.name
            )));
        }
    }

    let results: Vec<Result<SimResult, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| scope.spawn(move || execute(s, monitor)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });

    let mut rows = Vec::with_capacity(scenarios.len());
    for (s, r) in scenarios.iter().zip(results) {
        rows.push(Row::new(s, &r?));
    }
    let mut verdicts = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            verdicts.extend(verdict(a, b));
        }
    }
    Ok(Comparison { rows, verdicts })
}

fn verdict(a: &Row, b: &Row) -> [String; 3] {
    let surfacings = match a.surfacings.cmp(&b.surfacings) {
        Ordering::Less => format!(
            "{} surfaces less than {} ({} vs {})",
            a.name, b.name, a.surfacings, b.surfacings
        ),
        Ordering::Greater => format!(
            "{} surfaces less than {} ({} vs {})",
            b.name, a.name, b.surfacings, a.surfacings
        ),
        Ordering::Equal => format!(
            "{} and {} surface equally often ({})",
            a.name, b.name, a.surfacings
        ),
    };
    let objective = if a.v_end < CONVERGED_V && b.v_end < CONVERGED_V {
        format!(
            "{} and {} reach comparable V (both below {CONVERGED_V:e}: {:.3e} vs {:.3e})",
            a.name, b.name, a.v_end, b.v_end
        )
    } else if a.v_end <= b.v_end {
        format!(
            "{} ends with lower V than {} ({:.3e} vs {:.3e})",
            a.name, b.name, a.v_end, b.v_end
        )
    } else {
        format!(
            "{} ends with lower V than {} ({:.3e} vs {:.3e})",
            b.name, a.name, b.v_end, a.v_end
        )
    };
    let speed = match (a.converged_at, b.converged_at) {
        (None, None) => format!(
            "neither {} nor {} reaches V < {CONVERGED_V:e}",
            a.name, b.name
        ),
        (Some(ta), Some(tb)) if ta <= tb => {
            format!(
                "{} reaches V < {CONVERGED_V:e} first ({ta:.4} vs {tb:.4})",
                a.name
            )
        }
        (Some(ta), Some(tb)) => format!(
            "{} reaches V < {CONVERGED_V:e} first ({tb:.4} vs {ta:.4})",
            b.name
        ),
        (Some(ta), None) => format!("only {} reaches V < {CONVERGED_V:e} (at {ta:.4})", a.name),
        (None, Some(tb)) => format!("only {} reaches V < {CONVERGED_V:e} (at {tb:.4})", b.name),
    };
    [surfacings, objective, speed]
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .rows
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(0)
            .max(8);
        writeln!(
            f,
            "{:<width$}  {:<16}  {:>7}  {:>10}  {:>12}  {:>12}  {:>10}",
            "scenario", "algorithm", "t_end", "N_S(t_end)", "V(t_end)", "t(V<1e-3)", "violations"
        )?;
        for r in &self.rows {
            let t = r
                .converged_at
                .map_or_else(|| "never".into(), |t| format!("{t:.4}"));
            writeln!(
                f,
                "{:<width$}  {:<16}  {:>7}  {:>10}  {:>12.4e}  {:>12}  {:>10}",
                r.name,
                r.algorithm.to_string(),
                r.t_end,
                r.surfacings,
                r.v_end,
                t,
                r.violations
            )?;
        }
        writeln!(f)?;
        for v in &self.verdicts {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}
