//! Graph sanity checks against known objective and period values.

use std::fmt::Write;

use surfacing_core::graph::find_matching_edge_sets;
use surfacing_core::{Graph, StateVector};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphCheck {
    pub objective: f64,
    pub threshold: f64,
    pub v_ok: Option<bool>,
    pub period_ok: Option<bool>,
    /// Edge sets matching both targets when a search was requested.
    pub matches: Option<Vec<Graph>>,
    pub report: String,
}

impl GraphCheck {
    pub fn passed(&self) -> bool {
        self.v_ok != Some(false) && self.period_ok != Some(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Targets {
    pub v: Option<f64>,
    pub period: Option<f64>,
    pub v_tol: f64,
    pub period_tol: f64,
    /// Also enumerate every edge set on the same agents matching the targets.
    pub search: bool,
}

pub fn check_graph(g: &Graph, x0: &StateVector, t: &Targets) -> Result<GraphCheck, CliError> {
    if x0.len() != g.n() {
        return Err(CliError::usage(format!(
            "x0 has {} entries but the graph has {} agents",
            x0.len(),
            g.n()
        )));
    }
    let objective = g
        .objective_value(x0.as_slice())
        .map_err(|e| CliError::usage(e.to_string()))?;
    let threshold = g.periodic_threshold();
    let mut report = String::new();

    let v_ok = t.v.map(|v| (objective - v).abs() <= t.v_tol);
    let period_ok = t.period.map(|p| (threshold - p).abs() <= t.period_tol);
    line(&mut report, "V(x0)", objective, t.v, t.v_tol, v_ok);
    line(
        &mut report,
        "2/lambda_max",
        threshold,
        t.period,
        t.period_tol,
        period_ok,
    );

    let matches = if t.search {
        let (Some(v), Some(p)) = (t.v, t.period) else {
            return Err(CliError::usage(
                "--search needs both --target-v and --target-period",
            ));
        };
        let tol = t.v_tol.max(t.period_tol);
        let found = find_matching_edge_sets(g.n(), x0.as_slice(), v, p, tol)
            .map_err(|e| CliError::usage(e.to_string()))?;
        let _ = writeln!(
            report,
            "{} edge set(s) on {} agents match both targets:",
            found.len(),
            g.n()
        );
        for m in &found {
            let edges: Vec<String> = m.edges().map(|(a, b)| format!("{a}-{b}")).collect();
            let mark = if m == g { "  (this graph)" } else { "" };
            let _ = writeln!(report, "  {}{mark}", edges.join(" "));
        }
        Some(found)
    } else {
        None
    };

    Ok(GraphCheck {
        objective,
        threshold,
        v_ok,
        period_ok,
        matches,
        report,
    })
}

fn line(
    out: &mut String,
    label: &str,
    value: f64,
    target: Option<f64>,
    tol: f64,
    ok: Option<bool>,
) {
    let _ = match (target, ok) {
        (Some(target), Some(ok)) => writeln!(
            out,
            "{label:<13} {value:.12}  target {target} +/- {tol:e}  {}",
            if ok { "ok" } else { "MISMATCH" }
        ),
        _ => writeln!(out, "{label:<13} {value:.12}"),
    };
}
