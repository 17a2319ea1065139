//! Deterministic event-driven simulation.
//!
//! Controls are piecewise constant, so every trajectory is exactly piecewise
//! linear and the simulator never integrates an ODE: it jumps from surfacing
//! to surfacing, recording one [`TrajectorySegment`] per constant-control
//! span. Objective values and per-interval contributions are evaluated in
//! closed form from the segments.
//!
//! A run processes surfacings in time order (ties by agent id) and stops
//! right after the first surfacing at or beyond `t_end`, so the reported
//! event count includes the session that crosses the horizon.

mod monitor;
mod queue;
mod timeline;

pub use monitor::{monitors, monitors_with, MonitorConfig, Violation};
pub use queue::{EventQueue, Pending};
pub use timeline::{integrate_vdot, Contribution};

use crate::error::{Error, Result};
use crate::graph::{AgentId, Graph, StateVector};
use crate::protocol::{
    cloud_init, ideal_control, reconstruct, surface, Cloud, CloudRecord, PromiseLedger,
    SurfacingReport, TriggerConfig,
};

/// Motion of one agent under a constant control on `[t0, t1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySegment {
    pub agent: AgentId,
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub u: f64,
}

impl TrajectorySegment {
    pub fn position_at(&self, t: f64) -> f64 {
        self.x0 + self.u * (t - self.t0)
    }
}

/// Which triggering rule produced a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    SelfTriggered {
        config: TriggerConfig,
        schedule: Vec<f64>,
    },
    /// Every agent surfaces at multiples of `period` and applies `u*`.
    Periodic { period: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacingEvent {
    pub time: f64,
    pub agent: AgentId,
}

/// Promise and applied speed uploaded at one surfacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PromiseStep {
    pub time: f64,
    pub agent: AgentId,
    pub promise: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub algorithm: Algorithm,
    pub graph: Graph,
    pub x0: StateVector,
    pub t_end: f64,
    /// End of the recorded trajectories: `max(t_end, last surfacing)`.
    pub horizon: f64,
    /// Per agent, contiguous and ordered.
    pub segments: Vec<Vec<TrajectorySegment>>,
    /// Per agent surfacing times.
    pub surfacings: Vec<Vec<f64>>,
    /// All surfacings in processing order.
    pub events: Vec<SurfacingEvent>,
    /// `V(x(t))` at t = 0 and after every surfacing.
    pub v_trace: Vec<(f64, f64)>,
    /// Cumulative surfacing count `N_S(t)`.
    pub ns_trace: Vec<(f64, usize)>,
    pub contributions: Vec<Contribution>,
    pub promise_trace: Vec<PromiseStep>,
    /// Self-triggered runs only: one report per entry of `events`.
    pub reports: Vec<SurfacingReport>,
    /// Self-triggered runs only: final promise ledgers.
    pub ledgers: Vec<PromiseLedger>,
    pub violations: Vec<Violation>,
}

impl SimResult {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Total surfacings processed.
    pub fn surfacing_count(&self) -> usize {
        self.events.len()
    }

    /// Surfacings at or before `t`.
    pub fn ns_at(&self, t: f64) -> usize {
        self.events.iter().filter(|e| e.time <= t).count()
    }

    pub fn state_at(&self, t: f64) -> Result<StateVector> {
        state_at(self, t)
    }

    pub fn objective_at(&self, t: f64) -> Result<f64> {
        self.graph.objective_value(self.state_at(t)?.as_slice())
    }

    /// Objective at the end of the recorded trajectories.
    pub fn final_objective(&self) -> f64 {
        self.objective_at(self.horizon)
            .expect("horizon is in range")
    }

    /// First recorded time at which `V` drops below `threshold`, checked at
    /// t = 0 and after every surfacing.
    pub fn first_time_below(&self, threshold: f64) -> Option<f64> {
        self.v_trace
            .iter()
            .find(|(_, v)| *v < threshold)
            .map(|(t, _)| *t)
    }

    /// Control in effect for `agent` at `t` (right-continuous).
    pub fn velocity_at(&self, agent: AgentId, t: f64) -> f64 {
        segment_at(&self.segments[agent.index()], t).map_or(0.0, |s| s.u)
    }
}

fn segment_at(segments: &[TrajectorySegment], t: f64) -> Option<&TrajectorySegment> {
    let k = segments.partition_point(|s| s.t0 <= t);
    segments.get(k.checked_sub(1)?)
}

/// Exact positions at `t ∈ [0, horizon]`.
pub fn state_at(result: &SimResult, t: f64) -> Result<StateVector> {
    if !(0.0..=result.horizon).contains(&t) {
        return Err(Error::OutOfRange {
            t,
            horizon: result.horizon,
        });
    }
    let x = result
        .segments
        .iter()
        .enumerate()
        .map(|(i, segs)| segment_at(segs, t).map_or(result.x0[i], |s| s.position_at(t)))
        .collect();
    StateVector::new(x)
}

/// `ΔV_i^ℓ` for a completed interval. Interval 0 runs from deployment to
/// the first surfacing; interval `ℓ ≥ 1` starts at the `ℓ`-th surfacing.
pub fn interval_contribution(result: &SimResult, agent: AgentId, index: usize) -> Result<f64> {
    result.graph.check(agent)?;
    let times = &result.surfacings[agent.index()];
    if index >= times.len() {
        return Err(Error::InvalidSetup(format!(
            "interval {index} of agent {agent} is not complete"
        )));
    }
    let start = if index == 0 { 0.0 } else { times[index - 1] };
    Ok(integrate_vdot(result, agent, start, times[index]))
}

/// Constant-control plan an agent follows between two surfacings.
#[derive(Debug, Clone, Copy)]
struct Plan {
    t_last: f64,
    x_last: f64,
    u: f64,
    t_expire: f64,
}

impl Plan {
    fn position_at(&self, t: f64) -> f64 {
        reconstruct(self.x_last, self.u, self.t_last, self.t_expire, t)
    }

    /// Emits the segments covering `[t_last, until)`.
    fn close(&self, agent: AgentId, until: f64, out: &mut Vec<TrajectorySegment>) {
        let moving_end = self.t_expire.min(until);
        if moving_end > self.t_last {
            out.push(TrajectorySegment {
                agent,
                t0: self.t_last,
                t1: moving_end,
                x0: self.x_last,
                u: self.u,
            });
        }
        let idle_start = self.t_expire.max(self.t_last);
        if until > idle_start {
            out.push(TrajectorySegment {
                agent,
                t0: idle_start,
                t1: until,
                x0: self.position_at(idle_start),
                u: 0.0,
            });
        }
    }
}

struct Recorder {
    graph: Graph,
    segments: Vec<Vec<TrajectorySegment>>,
    surfacings: Vec<Vec<f64>>,
    events: Vec<SurfacingEvent>,
    v_trace: Vec<(f64, f64)>,
    ns_trace: Vec<(f64, usize)>,
    promise_trace: Vec<PromiseStep>,
}

impl Recorder {
    fn new(graph: &Graph, x0: &StateVector) -> Result<Self> {
        let n = graph.n();
        Ok(Recorder {
            graph: graph.clone(),
            segments: vec![Vec::new(); n],
            surfacings: vec![Vec::new(); n],
            events: Vec::new(),
            v_trace: vec![(0.0, graph.objective_value(x0.as_slice())?)],
            ns_trace: vec![(0.0, 0)],
            promise_trace: Vec::new(),
        })
    }

    fn surfaced(&mut self, time: f64, agent: AgentId, plans: &[Plan]) -> Result<()> {
        self.surfacings[agent.index()].push(time);
        self.events.push(SurfacingEvent { time, agent });
        self.ns_trace.push((time, self.events.len()));
        let x: Vec<f64> = plans.iter().map(|p| p.position_at(time)).collect();
        self.v_trace.push((time, self.graph.objective_value(&x)?));
        Ok(())
    }

    fn finish(
        mut self,
        algorithm: Algorithm,
        x0: StateVector,
        t_end: f64,
        plans: &[Plan],
        reports: Vec<SurfacingReport>,
        ledgers: Vec<PromiseLedger>,
    ) -> SimResult {
        let horizon = self.events.last().map_or(t_end, |e| e.time.max(t_end));
        for (i, plan) in plans.iter().enumerate() {
            plan.close(AgentId::from_index(i), horizon, &mut self.segments[i]);
        }
        let mut result = SimResult {
            algorithm,
            graph: self.graph,
            x0,
            t_end,
            horizon,
            segments: self.segments,
            surfacings: self.surfacings,
            events: self.events,
            v_trace: self.v_trace,
            ns_trace: self.ns_trace,
            contributions: Vec::new(),
            promise_trace: self.promise_trace,
            reports,
            ledgers,
            violations: Vec::new(),
        };
        result.contributions = timeline::contribution_table(&result);
        result
    }
}

fn validate_setup(g: &Graph, x0: &StateVector, t_end: f64) -> Result<()> {
    if x0.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: x0.len(),
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidSetup(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    Ok(())
}

/// Runs the self-triggered protocol from deployment until the first
/// surfacing at or after `t_end`. Monitor violations are attached to the
/// result; they are data, not errors.
pub fn run(
    g: &Graph,
    x0: &StateVector,
    cfg: &TriggerConfig,
    schedule: &[f64],
    t_end: f64,
) -> Result<SimResult> {
    validate_setup(g, x0, t_end)?;
    cfg.validate()?;
    let (mut cloud, mut ledgers) = cloud_init(g, x0, schedule, cfg)?;

    let mut plans: Vec<Plan> = g
        .agents()
        .map(|a| {
            let r = cloud.get(a).expect("initialized");
            Plan {
                t_last: r.t_last,
                x_last: r.x_last,
                u: r.u_last,
                t_expire: r.t_expire,
            }
        })
        .collect();
    let mut queue = EventQueue::new(g.n());
    for a in g.agents() {
        queue.push(schedule[a.index()], a);
    }

    let mut rec = Recorder::new(g, x0)?;
    let mut reports = Vec::new();
    while let Some(Pending { time, agent }) = queue.pop() {
        let i = agent.index();
        let x_true = plans[i].position_at(time);
        plans[i].close(agent, time, &mut rec.segments[i]);

        if !x_true.is_finite() {
            return Err(Error::NumericalFault {
                time,
                detail: format!("agent {agent} reached x = {x_true}; plan {:?}", plans[i]),
            });
        }
        let report = surface(agent, x_true, &mut cloud, &mut ledgers[i], cfg, g, time)?;
        let d = report.decision;
        plans[i] = Plan {
            t_last: time,
            x_last: x_true,
            u: d.u,
            t_expire: d.t_expire,
        };
        rec.promise_trace.push(PromiseStep {
            time,
            agent,
            promise: d.promise,
            speed: d.u.abs(),
        });
        rec.surfaced(time, agent, &plans)?;
        reports.push(report);

        if time >= t_end {
            break;
        }
        queue.push(d.t_next, agent);
    }

    let algorithm = Algorithm::SelfTriggered {
        config: cfg.clone(),
        schedule: schedule.to_vec(),
    };
    let mut result = rec.finish(algorithm, x0.clone(), t_end, &plans, reports, ledgers);
    result.violations = monitors(&result);
    Ok(result)
}

/// Baseline: all agents surface at `k·period` and hold `u*` until the next
/// multiple. No promises, no dwell logic.
pub fn run_periodic(g: &Graph, x0: &StateVector, period: f64, t_end: f64) -> Result<SimResult> {
    validate_setup(g, x0, t_end)?;
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidSetup(format!(
            "period must be positive, got {period}"
        )));
    }

    let mut cloud = Cloud::with_capacity(g.n());
    for a in g.agents() {
        let x = x0.get(a);
        let rec = CloudRecord {
            t_last: 0.0,
            t_expire: 0.0,
            t_next: 0.0,
            x_last: x,
            u_last: 0.0,
            promise: f64::INFINITY,
        };
        cloud.upload(a, rec);
    }
    let mut plans: Vec<Plan> = g
        .agents()
        .map(|a| Plan {
            t_last: 0.0,
            x_last: x0.get(a),
            u: 0.0,
            t_expire: 0.0,
        })
        .collect();
    let mut rounds = vec![0u64; g.n()];
    let mut queue = EventQueue::new(g.n());
    for a in g.agents() {
        queue.push(0.0, a);
    }

    let mut rec = Recorder::new(g, x0)?;
    while let Some(Pending { time, agent }) = queue.pop() {
        let i = agent.index();
        let x_true = plans[i].position_at(time);
        plans[i].close(agent, time, &mut rec.segments[i]);

        let mut positions = Vec::new();
        for &j in g.neighbors(agent)? {
            let r = cloud.get(j)?;
            positions.push(reconstruct(r.x_last, r.u_last, r.t_last, r.t_expire, time));
        }
        let u = ideal_control(x_true, &positions);
        rounds[i] += 1;
        let t_next = rounds[i] as f64 * period;
        if !u.is_finite() {
            return Err(Error::NumericalFault {
                time,
                detail: format!("agent {agent}: u* = {u}, neighbors at {positions:?}"),
            });
        }
        cloud.upload(
            agent,
            CloudRecord {
                t_last: time,
                t_expire: t_next,
                t_next,
                x_last: x_true,
                u_last: u,
                promise: f64::INFINITY,
            },
        );
        plans[i] = Plan {
            t_last: time,
            x_last: x_true,
            u,
            t_expire: t_next,
        };
        rec.promise_trace.push(PromiseStep {
            time,
            agent,
            promise: f64::INFINITY,
            speed: u.abs(),
        });
        rec.surfaced(time, agent, &plans)?;

        if time >= t_end {
            break;
        }
        queue.push(t_next, agent);
    }

    let mut result = rec.finish(
        Algorithm::Periodic { period },
        x0.clone(),
        t_end,
        &plans,
        Vec::new(),
        Vec::new(),
    );
    result.violations = monitors(&result);
    Ok(result)
}
