//! Exact integration of per-agent objective contributions.

use super::{SimResult, TrajectorySegment};
use crate::graph::AgentId;

/// `ΔV_i^ℓ` for one submerged interval of one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub agent: AgentId,
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub dv: f64,
    /// False for the trailing interval cut off by the end of the run.
    pub complete: bool,
}

/// Cursor over one agent's segments, advanced monotonically in time.
struct Track<'a> {
    segs: &'a [TrajectorySegment],
    k: usize,
}

impl<'a> Track<'a> {
    fn new(segs: &'a [TrajectorySegment], t: f64) -> Self {
        let k = segs.partition_point(|s| s.t1 <= t);
        Track { segs, k }
    }

    /// Segment covering `[t, ...)`, plus the time it ends.
    fn at(&mut self, t: f64) -> Option<&'a TrajectorySegment> {
        while self.k < self.segs.len() && self.segs[self.k].t1 <= t {
            self.k += 1;
        }
        self.segs.get(self.k)
    }
}

/// `∫ V̇_i` over `[start, end]` where `V̇_i = -u_i Σ_j (x_j - x_i)`.
///
/// Splits at every segment boundary of `agent` and its neighbors; on each
/// sub-span all positions are linear, so the integrand is linear and
/// integrates to `-u_i Σ_j [(x_j - x_i) h + ½ (u_j - u_i) h²]`.
pub fn integrate_vdot(result: &SimResult, agent: AgentId, start: f64, end: f64) -> f64 {
    let neighbors = result
        .graph
        .neighbors(agent)
        .expect("agent checked by caller");
    let mut own = Track::new(&result.segments[agent.index()], start);
    let mut others: Vec<Track> = neighbors
        .iter()
        .map(|j| Track::new(&result.segments[j.index()], start))
        .collect();

    let mut total = 0.0;
    let mut a = start;
    while a < end {
        let Some(si) = own.at(a) else { break };
        let mut b = si.t1.min(end);
        let mut span = 0.0;
        let mut sum_dx = 0.0;
        let mut sum_du = 0.0;
        for tr in &mut others {
            let Some(sj) = tr.at(a) else { continue };
            b = b.min(sj.t1);
            sum_dx += sj.position_at(a) - si.position_at(a);
            sum_du += sj.u - si.u;
        }
        let h = b - a;
        if si.u != 0.0 {
            span = -si.u * (sum_dx * h + 0.5 * sum_du * h * h);
        }
        total += span;
        a = b;
    }
    total
}

/// One row per agent interval: interval 0 from deployment to the first
/// surfacing, interval ℓ from the ℓ-th surfacing to the next, and a final
/// incomplete interval up to the horizon.
pub(super) fn contribution_table(result: &SimResult) -> Vec<Contribution> {
    let mut rows = Vec::new();
    for (i, times) in result.surfacings.iter().enumerate() {
        let agent = AgentId::from_index(i);
        let mut t_start = 0.0;
        for (index, &t_end) in times.iter().enumerate() {
            let dv = integrate_vdot(result, agent, t_start, t_end);
            rows.push(Contribution {
                agent,
                index,
                t_start,
                t_end,
                dv,
                complete: true,
            });
            t_start = t_end;
        }
        if t_start < result.horizon {
            let dv = integrate_vdot(result, agent, t_start, result.horizon);
            rows.push(Contribution {
                agent,
                index: times.len(),
                t_start,
                t_end: result.horizon,
                dv,
                complete: false,
            });
        }
    }
    rows
}
