//! Agent-side surfacing routine, cloud record store and promise bookkeeping.
//!
//! The cloud is a passive key/value store with one [`CloudRecord`] per agent.
//! Everything else, including the history of promises an agent has issued and
//! when each neighbor will first see them, lives in the agent's private
//! [`PromiseLedger`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{AgentId, Graph, StateVector};
use crate::trigger::{
    compute_t_star_tol, compute_t_total_tol, NeighborView, TriggerSnapshot, SIGN_TOL,
};

/// `x_last + u_last · (min(t, t_expire) - t_last)`.
pub fn reconstruct(x_last: f64, u_last: f64, t_last: f64, t_expire: f64, t: f64) -> f64 {
    x_last + u_last * (t.min(t_expire) - t_last)
}

/// Per-agent entry on the cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudRecord {
    pub t_last: f64,
    pub t_expire: f64,
    pub t_next: f64,
    pub x_last: f64,
    pub u_last: f64,
    pub promise: f64,
}

impl CloudRecord {
    fn validate(&self) -> bool {
        self.t_last <= self.t_expire && self.t_expire <= self.t_next && self.promise >= 0.0
    }
}

/// Exact position of the agent behind `r` at `t ≤ r.t_next`.
pub fn reconstruct_position(r: &CloudRecord, t: f64) -> Result<f64> {
    if t > r.t_next {
        return Err(Error::BeyondSchedule {
            t,
            t_next: r.t_next,
        });
    }
    Ok(reconstruct(r.x_last, r.u_last, r.t_last, r.t_expire, t))
}

/// Computation-free record store shared by all agents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cloud {
    records: Vec<Option<CloudRecord>>,
}

impl Cloud {
    pub fn with_capacity(n: usize) -> Self {
        Cloud {
            records: vec![None; n],
        }
    }

    pub fn get(&self, id: AgentId) -> Result<&CloudRecord> {
        self.records
            .get(id.index())
            .and_then(Option::as_ref)
            .ok_or(Error::MissingRecord(id))
    }

    pub fn upload(&mut self, id: AgentId, record: CloudRecord) {
        debug_assert!(record.validate(), "malformed record for {id}: {record:?}");
        if id.index() >= self.records.len() {
            self.records.resize(id.index() + 1, None);
        }
        self.records[id.index()] = Some(record);
    }

    pub fn len(&self) -> usize {
        self.records.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One issued promise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PromiseEntry {
    pub index: usize,
    pub value: f64,
    pub issued_at: f64,
}

/// An agent's private history of promises, plus for each neighbor the time
/// at which that neighbor sees each promise (its `t_next` as read when the
/// promise was uploaded).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PromiseLedger {
    history: Vec<PromiseEntry>,
    seen_at: BTreeMap<AgentId, Vec<f64>>,
}

impl PromiseLedger {
    pub fn history(&self) -> &[PromiseEntry] {
        &self.history
    }

    pub fn neighbors(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.seen_at.keys().copied()
    }

    /// Times at which `neighbor` sees each promise, parallel to [`history`](Self::history).
    pub fn seen_times(&self, neighbor: AgentId) -> &[f64] {
        self.seen_at.get(&neighbor).map_or(&[], Vec::as_slice)
    }

    pub fn next_index(&self) -> usize {
        self.history.last().map_or(0, |e| e.index + 1)
    }

    /// Records a new promise together with when each neighbor will see it.
    pub fn record(
        &mut self,
        value: f64,
        issued_at: f64,
        seen: impl IntoIterator<Item = (AgentId, f64)>,
    ) {
        let index = self.next_index();
        self.history.push(PromiseEntry {
            index,
            value,
            issued_at,
        });
        let len = self.history.len();
        for (j, tau) in seen {
            debug_assert!(tau >= issued_at, "promise seen before it was issued");
            let times = self.seen_at.entry(j).or_default();
            times.resize(len - 1, f64::INFINITY);
            times.push(tau);
        }
    }

    /// The most recent promise `neighbor` is aware of at time `t`.
    pub fn believed_by(&self, neighbor: AgentId, t: f64) -> Option<&PromiseEntry> {
        let times = self.seen_at.get(&neighbor)?;
        times
            .iter()
            .rposition(|&tau| tau <= t)
            .map(|k| &self.history[k])
    }

    /// Overwrites a stored promise value. Fault injection for monitor tests.
    #[doc(hidden)]
    pub fn corrupt_promise(&mut self, position: usize, value: f64) {
        self.history[position].value = value;
    }
}

/// Monotone nonnegative map from `|u*|` to the promised speed bound.
#[derive(Clone)]
pub enum PromiseFn {
    /// `f(x) = c·x`.
    Linear(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl PromiseFn {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            PromiseFn::Linear(c) => c * x,
            PromiseFn::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for PromiseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromiseFn::Linear(c) => write!(f, "Linear({c})"),
            PromiseFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PartialEq for PromiseFn {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PromiseFn::Linear(a), PromiseFn::Linear(b)) => a == b,
            (PromiseFn::Custom(a), PromiseFn::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Default for PromiseFn {
    fn default() -> Self {
        PromiseFn::Linear(1.0)
    }
}

/// Tuning shared by every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerConfig {
    /// Interpolation weight between `T*` (0) and `T_total` (1).
    pub sigma: f64,
    /// Minimum submerged duration.
    pub dwell: f64,
    /// Maximum submerged duration.
    pub t_max: f64,
    pub promise: PromiseFn,
    /// Absolute tolerance for the trigger sign tests.
    pub sign_tol: f64,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        TriggerConfig {
            sigma: 0.5,
            dwell: 1e-8,
            t_max: 5.0,
            promise: PromiseFn::default(),
            sign_tol: SIGN_TOL,
        }
    }
}

impl TriggerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.sigma) {
            return bad(format!("sigma must be in [0, 1], got {}", self.sigma));
        }
        if !(self.dwell > 0.0 && self.dwell.is_finite()) {
            return bad(format!("dwell must be positive, got {}", self.dwell));
        }
        if !(self.t_max >= self.dwell && self.t_max.is_finite()) {
            return bad(format!(
                "t_max must be finite and at least dwell, got {}",
                self.t_max
            ));
        }
        if let PromiseFn::Linear(c) = self.promise {
            if !(c > 0.0 && c.is_finite()) {
                return bad(format!("promise scale must be positive, got {c}"));
            }
        }
        if self.sign_tol.is_nan() || self.sign_tol < 0.0 {
            return bad(format!(
                "sign tolerance must be nonnegative, got {}",
                self.sign_tol
            ));
        }
        Ok(())
    }
}

/// Which branch of the scheduling rule fixed the next surfacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Ideal time beyond `t_now + t_max`: capped.
    MaxSubmerged,
    /// Ideal time inside the dwell window: control expires early, agent idles.
    Dwell,
    /// Surface exactly at the ideal time.
    Ideal,
}

/// What an agent uploads when it leaves the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacingDecision {
    pub u: f64,
    pub t_expire: f64,
    pub t_next: f64,
    pub promise: f64,
    pub x_reported: f64,
}

/// A decision together with the intermediate quantities that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacingReport {
    pub decision: SurfacingDecision,
    pub snapshot: TriggerSnapshot,
    pub u_star: f64,
    pub u_max: f64,
    pub t_star: f64,
    pub t_total: f64,
    pub t_ideal: f64,
    pub branch: Branch,
}

/// `u* = -Σ_j (x_i - x_j)`.
pub fn ideal_control(x_i: f64, neighbor_positions: &[f64]) -> f64 {
    -neighbor_positions.iter().map(|x_j| x_i - x_j).sum::<f64>()
}

/// Speed cap honoring every promise a neighbor currently believes, plus the
/// promise about to be uploaded. Neighbors that have not seen any promise
/// impose no constraint.
pub fn control_cap(ledger: &PromiseLedger, t_now: f64, new_promise: f64) -> f64 {
    ledger
        .neighbors()
        .filter_map(|j| ledger.believed_by(j, t_now))
        .map(|e| e.value)
        .fold(new_promise, f64::min)
}

pub fn saturate_control(u_star: f64, u_max: f64) -> f64 {
    debug_assert!(u_max >= 0.0);
    if u_star.abs() <= u_max {
        u_star
    } else {
        u_max.copysign(u_star)
    }
}

pub fn make_promise(cfg: &TriggerConfig, u_star: f64) -> f64 {
    cfg.promise.apply(u_star.abs())
}

/// `(1-σ)·T* + σ·T_total`, never past `T_total`.
pub fn ideal_time(sigma: f64, t_star: f64, t_total: f64) -> f64 {
    if sigma == 0.0 {
        return t_star;
    }
    if !t_total.is_finite() || !t_star.is_finite() {
        return f64::INFINITY;
    }
    (t_star + sigma * (t_total - t_star)).min(t_total)
}

/// Runs one surfacing session for agent `i` at `t_now`: downloads neighbor
/// records, picks the control and next surfacing time, and uploads the new
/// record and promise.
pub fn surface(
    i: AgentId,
    x_true: f64,
    cloud: &mut Cloud,
    ledger: &mut PromiseLedger,
    cfg: &TriggerConfig,
    g: &Graph,
    t_now: f64,
) -> Result<SurfacingReport> {
    let neighbors = g.neighbors(i)?;
    let mut views = Vec::with_capacity(neighbors.len());
    for &j in neighbors {
        views.push(NeighborView::from_record(j, cloud.get(j)?));
    }
    let positions: Vec<f64> = views.iter().map(|v| v.position_at(t_now)).collect();

    let u_star = ideal_control(x_true, &positions);
    let promise = make_promise(cfg, u_star);
    let u_max = control_cap(ledger, t_now, promise);
    let u = saturate_control(u_star, u_max);

    let snapshot = TriggerSnapshot {
        self_id: i,
        t_now,
        x_self: x_true,
        u_self: u,
        views,
    };
    let t_star = compute_t_star_tol(&snapshot, cfg.sign_tol);
    let t_total = compute_t_total_tol(&snapshot, cfg.sign_tol);
    let t_ideal = ideal_time(cfg.sigma, t_star, t_total);

    let (branch, t_expire, t_next) = if t_ideal > t_now + cfg.t_max {
        let t = t_now + cfg.t_max;
        (Branch::MaxSubmerged, t, t)
    } else if t_ideal < t_now + cfg.dwell {
        (Branch::Dwell, t_ideal, t_now + cfg.dwell)
    } else {
        (Branch::Ideal, t_ideal, t_ideal)
    };

    if ![u, t_expire, t_next].iter().all(|v| v.is_finite()) || promise.is_nan() || promise < 0.0 {
        return Err(Error::NumericalFault {
            time: t_now,
            detail: format!(
                "agent {i} produced a non-finite decision: u*={u_star} u={u} M={promise} \
                 T*={t_star} T_total={t_total} t_expire={t_expire} t_next={t_next}; {snapshot:?}"
            ),
        });
    }

    ledger.record(
        promise,
        t_now,
        snapshot.views.iter().map(|v| (v.id, v.t_next)),
    );
    cloud.upload(
        i,
        CloudRecord {
            t_last: t_now,
            t_expire,
            t_next,
            x_last: x_true,
            u_last: u,
            promise,
        },
    );

    Ok(SurfacingReport {
        decision: SurfacingDecision {
            u,
            t_expire,
            t_next,
            promise,
            x_reported: x_true,
        },
        snapshot,
        u_star,
        u_max,
        t_star,
        t_total,
        t_ideal,
        branch,
    })
}

/// Deployment-time initialization: every agent starts from `x0` with the
/// consensus control computed from full knowledge of `x0` and dives until its
/// first scheduled surfacing. Neighbors know this trajectory exactly until
/// then, so the initial promise only constrains later intervals.
pub fn cloud_init(
    g: &Graph,
    x0: &StateVector,
    schedule: &[f64],
    cfg: &TriggerConfig,
) -> Result<(Cloud, Vec<PromiseLedger>)> {
    let n = g.n();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if schedule.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: schedule.len(),
        });
    }
    if let Some(t) = schedule.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidSetup(format!(
            "first surfacing times must be positive, got {t}"
        )));
    }

    let mut cloud = Cloud::with_capacity(n);
    let mut ledgers = Vec::with_capacity(n);
    for i in g.agents() {
        let neighbors = g.neighbors(i)?;
        let positions: Vec<f64> = neighbors.iter().map(|&j| x0.get(j)).collect();
        let u_star = ideal_control(x0.get(i), &positions);
        let promise = make_promise(cfg, u_star);
        let t_first = schedule[i.index()];
        cloud.upload(
            i,
            CloudRecord {
                t_last: 0.0,
                t_expire: t_first,
                t_next: t_first,
                x_last: x0.get(i),
                u_last: u_star,
                promise,
            },
        );
        let mut ledger = PromiseLedger::default();
        ledger.record(promise, 0.0, neighbors.iter().map(|&j| (j, 0.0)));
        ledgers.push(ledger);
    }
    Ok((cloud, ledgers))
}
