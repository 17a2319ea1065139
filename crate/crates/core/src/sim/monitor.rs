//! Post-run invariant checks. Failures are reported as data.

use std::fmt;

use super::{integrate_vdot, Algorithm, SimResult};
use crate::graph::AgentId;
use crate::trigger::NeighborView;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    /// Upper bound on each completed `ΔV_i^ℓ`.
    pub dv_tol: f64,
    /// Slack on the dwell gap, in addition to a few ulps of the surfacing time.
    pub dwell_slack: f64,
    /// Absolute slack on speed-versus-promise comparisons.
    pub promise_tol: f64,
    /// Number of evenly spaced times probed by the reachable-set check.
    pub reach_samples: usize,
    pub reach_tol: f64,
    /// Allowed mismatch between `V` and `V(0)` plus accumulated contributions.
    pub drift_tol: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            dv_tol: 1e-9,
            dwell_slack: 1e-15,
            promise_tol: 1e-12,
            reach_samples: 1000,
            reach_tol: 1e-9,
            drift_tol: 1e-6,
        }
    }
}

impl MonitorConfig {
    /// Defaults with the contribution tolerance replaced.
    pub fn with_tol(tol: f64) -> Self {
        MonitorConfig {
            dv_tol: tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    PositiveContribution {
        agent: AgentId,
        index: usize,
        dv: f64,
    },
    DwellGap {
        agent: AgentId,
        t_prev: f64,
        t: f64,
        dwell: f64,
    },
    PromiseBroken {
        agent: AgentId,
        neighbor: AgentId,
        time: f64,
        speed: f64,
        promise: f64,
    },
    OutsideReachableSet {
        observer: AgentId,
        agent: AgentId,
        time: f64,
        distance: f64,
        radius: f64,
    },
    ObjectiveDrift {
        time: f64,
        expected: f64,
        actual: f64,
    },
    Starved {
        agent: AgentId,
        surfacings: usize,
        required: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PositiveContribution { agent, index, dv } => {
                write!(f, "agent {agent} interval {index}: contribution {dv:e} > 0")
            }
            Violation::DwellGap { agent, t_prev, t, dwell } => write!(
                f,
                "agent {agent} surfaced at {t_prev} and {t}, gap {:e} below dwell {dwell:e}",
                t - t_prev
            ),
            Violation::PromiseBroken { agent, neighbor, time, speed, promise } => write!(
                f,
                "agent {agent} at t={time} moves at {speed} but neighbor {neighbor} holds promise {promise}"
            ),
            Violation::OutsideReachableSet { observer, agent, time, distance, radius } => write!(
                f,
                "agent {agent} at t={time} is {distance:e} from where agent {observer} expects it (radius {radius:e})"
            ),
            Violation::ObjectiveDrift { time, expected, actual } => write!(
                f,
                "V({time}) = {actual} but accumulated contributions give {expected}"
            ),
            Violation::Starved { agent, surfacings, required } => {
                write!(f, "agent {agent} surfaced {surfacings} times, at least {required} required")
            }
        }
    }
}

/// All checks at default tolerances.
pub fn monitors(result: &SimResult) -> Vec<Violation> {
    monitors_with(result, &MonitorConfig::default())
}

/// All checks. Protocol-specific ones (contributions, dwell, promises,
/// reachable sets, starvation) apply to self-triggered runs only; the
/// objective bookkeeping check applies to both algorithms.
pub fn monitors_with(result: &SimResult, cfg: &MonitorConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    if let Algorithm::SelfTriggered { config, schedule } = &result.algorithm {
        check_contributions(result, cfg, &mut out);
        check_dwell(result, config.dwell, cfg, &mut out);
        check_promises(result, cfg, &mut out);
        check_reachable(result, cfg, &mut out);
        check_starvation(result, config.t_max, schedule, &mut out);
    }
    check_drift(result, cfg, &mut out);
    out
}

/// Interval 0 runs on the deployment control, which no trigger certified.
fn check_contributions(result: &SimResult, cfg: &MonitorConfig, out: &mut Vec<Violation>) {
    for c in &result.contributions {
        if c.complete && c.index >= 1 && c.dv > cfg.dv_tol {
            out.push(Violation::PositiveContribution {
                agent: c.agent,
                index: c.index,
                dv: c.dv,
            });
        }
    }
}

fn check_dwell(result: &SimResult, dwell: f64, cfg: &MonitorConfig, out: &mut Vec<Violation>) {
    for (i, times) in result.surfacings.iter().enumerate() {
        for w in times.windows(2) {
            let slack = cfg.dwell_slack.max(4.0 * ulp(w[1]));
            if w[1] - w[0] < dwell - slack {
                out.push(Violation::DwellGap {
                    agent: AgentId::from_index(i),
                    t_prev: w[0],
                    t: w[1],
                    dwell,
                });
            }
        }
    }
}

fn ulp(t: f64) -> f64 {
    let t = t.abs();
    f64::from_bits(t.to_bits() + 1) - t
}

/// Promise abidance. Neighbor `j` relies on agent `i`'s promise only once
/// it has passed the `t_next_i` it read at its own last surfacing (before
/// that it knows `i` exactly). From then on `|u_i|` must not exceed the
/// promise `j` believes. Belief only changes when `j` surfaces, so each
/// moving segment is checked at its start and at every surfacing of `j`
/// inside it.
fn check_promises(result: &SimResult, cfg: &MonitorConfig, out: &mut Vec<Violation>) {
    let Algorithm::SelfTriggered { schedule, .. } = &result.algorithm else {
        return;
    };
    let n = result.n();
    // horizons[j] = (surfacing time of j, t_next of each neighbor as read then)
    let mut horizons: Vec<Vec<(f64, &[NeighborView])>> = vec![Vec::new(); n];
    for (e, rep) in result.events.iter().zip(&result.reports) {
        horizons[e.agent.index()].push((e.time, &rep.snapshot.views));
    }
    let horizon_at = |j: AgentId, i: AgentId, t: f64| -> f64 {
        let h = &horizons[j.index()];
        let k = h.partition_point(|(s, _)| *s <= t);
        match k.checked_sub(1) {
            Some(k) => h[k]
                .1
                .iter()
                .find(|v| v.id == i)
                .map_or(f64::INFINITY, |v| v.t_next),
            None => schedule[i.index()],
        }
    };

    for (idx, ledger) in result.ledgers.iter().enumerate() {
        let agent = AgentId::from_index(idx);
        for seg in &result.segments[idx] {
            if seg.u == 0.0 {
                continue;
            }
            let speed = seg.u.abs();
            for j in ledger.neighbors() {
                let inside = result.surfacings[j.index()]
                    .iter()
                    .filter(|&&s| s > seg.t0 && s < seg.t1);
                for t in std::iter::once(seg.t0).chain(inside.copied()) {
                    if t < horizon_at(j, agent, t) {
                        continue;
                    }
                    let Some(belief) = ledger.believed_by(j, t) else {
                        continue;
                    };
                    if speed > belief.value + cfg.promise_tol {
                        out.push(Violation::PromiseBroken {
                            agent,
                            neighbor: j,
                            time: t,
                            speed,
                            promise: belief.value,
                        });
                    }
                }
            }
        }
    }
}

/// At sampled times, each agent's last downloaded view of each neighbor
/// (exact before the neighbor's announced surfacing, a promise ball after)
/// must contain the neighbor's true position.
fn check_reachable(result: &SimResult, cfg: &MonitorConfig, out: &mut Vec<Violation>) {
    if cfg.reach_samples == 0 || result.reports.is_empty() {
        return;
    }
    let n = result.n();
    let mut latest: Vec<Option<&[NeighborView]>> = vec![None; n];
    let mut next_event = 0;
    let horizon = result.horizon;
    for k in 0..cfg.reach_samples {
        let t = horizon * k as f64 / (cfg.reach_samples - 1).max(1) as f64;
        while next_event < result.events.len() && result.events[next_event].time <= t {
            let e = result.events[next_event];
            latest[e.agent.index()] = Some(&result.reports[next_event].snapshot.views);
            next_event += 1;
        }
        let Ok(x) = result.state_at(t) else { continue };
        for (i, views) in latest.iter().enumerate() {
            let Some(views) = views else { continue };
            for v in views.iter() {
                let anchor = t.min(v.t_next);
                let center = v.position_at(anchor);
                let radius = if t > v.t_next {
                    v.promise * (t - v.t_next)
                } else {
                    0.0
                };
                let distance = (x.get(v.id) - center).abs();
                let tol = cfg.reach_tol * (1.0 + center.abs());
                if distance > radius + tol {
                    out.push(Violation::OutsideReachableSet {
                        observer: AgentId::from_index(i),
                        agent: v.id,
                        time: t,
                        distance,
                        radius,
                    });
                }
            }
        }
    }
}

/// `V` at every surfacing must equal `V(0)` plus all contributions
/// accumulated so far: completed intervals from the table, and each agent's
/// open interval integrated up to that instant.
fn check_drift(result: &SimResult, cfg: &MonitorConfig, out: &mut Vec<Violation>) {
    let n = result.n();
    let v0 = result.v_trace[0].1;
    let mut closed = vec![0.0; n];
    let mut open_since = vec![0.0; n];
    for (k, e) in result.events.iter().enumerate() {
        let i = e.agent.index();
        closed[i] += integrate_vdot(result, e.agent, open_since[i], e.time);
        open_since[i] = e.time;
        let mut expected = v0;
        for a in 0..n {
            expected += closed[a];
            if open_since[a] < e.time {
                expected += integrate_vdot(result, AgentId::from_index(a), open_since[a], e.time);
            }
        }
        let (time, actual) = result.v_trace[k + 1];
        if (expected - actual).abs() > cfg.drift_tol {
            out.push(Violation::ObjectiveDrift {
                time,
                expected,
                actual,
            });
        }
    }
}

/// Every agent must surface at least once per `t_max` before `t_end`.
fn check_starvation(result: &SimResult, t_max: f64, schedule: &[f64], out: &mut Vec<Violation>) {
    for (i, times) in result.surfacings.iter().enumerate() {
        let mut required = 0;
        let mut t = schedule[i];
        while t < result.t_end {
            required += 1;
            t += t_max;
        }
        let surfacings = times.iter().filter(|&&s| s < result.t_end).count();
        if surfacings < required {
            out.push(Violation::Starved {
                agent: AgentId::from_index(i),
                surfacings,
                required,
            });
        }
    }
}
