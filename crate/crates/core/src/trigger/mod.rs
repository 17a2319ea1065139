//! Surfacing-time triggers.
//!
//! At a surfacing, agent `i` knows every neighbor's trajectory exactly until
//! that neighbor's next scheduled surfacing `t_next_j`, and afterwards only
//! that the neighbor stays within a ball growing at its promised speed `M_j`.
//! From this it builds two piecewise upper bounds, on its instantaneous
//! contribution `V̇_i(t)` and on the accumulated contribution
//! `∫_{t_now}^t V̇_i`, and solves for the first time each can become positive:
//!
//! * `T*` ([`compute_t_star`]): first time `V̇_i` may be positive.
//! * `T_total` ([`compute_t_total`]): first time the accumulated
//!   contribution may be positive.
//!
//! Both bounds are sums of per-neighbor pieces. Each neighbor contributes
//! three phases: its posted control until `t_expire_j`, zero control until
//! `t_next_j`, and the promise ball afterwards. Breakpoints are the union of
//! all neighbors' phase boundaries, so the bounds have `O(|N_i|)` pieces and
//! cost `O(|N_i|²)` to assemble.
//!
//! Polynomials are stored in the shifted variable `s = t - t_now`.

mod poly;

pub use poly::{infimum_positive, infimum_positive_tol, Quadratic, DISCRIMINANT_CLAMP, SIGN_TOL};

use crate::graph::AgentId;
use crate::protocol::{reconstruct, CloudRecord};

/// One neighbor's cloud record as seen by the surfacing agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborView {
    pub id: AgentId,
    pub t_last: f64,
    pub t_expire: f64,
    pub t_next: f64,
    pub x_last: f64,
    pub u_last: f64,
    /// Promised bound on the neighbor's speed; `+∞` when nothing was promised.
    pub promise: f64,
}

impl NeighborView {
    pub fn from_record(id: AgentId, r: &CloudRecord) -> Self {
        NeighborView {
            id,
            t_last: r.t_last,
            t_expire: r.t_expire,
            t_next: r.t_next,
            x_last: r.x_last,
            u_last: r.u_last,
            promise: r.promise,
        }
    }

    /// Exact position for `t ≤ t_next`.
    pub fn position_at(&self, t: f64) -> f64 {
        reconstruct(self.x_last, self.u_last, self.t_last, self.t_expire, t)
    }

    /// Control in effect at `t ∈ [t_last, t_next)`.
    pub fn velocity_at(&self, t: f64) -> f64 {
        if t < self.t_expire {
            self.u_last
        } else {
            0.0
        }
    }
}

/// Everything a surfacing agent downloads, plus its own state and the
/// (already saturated) control it intends to apply.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerSnapshot {
    pub self_id: AgentId,
    pub t_now: f64,
    pub x_self: f64,
    pub u_self: f64,
    pub views: Vec<NeighborView>,
}

/// Coefficients of one neighbor pair's contribution bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// `α = -u_i (x_j - x_i)`, `β = -u_i (u_j - u_i)`, `γ = |u_i| M_j + u_i²`.
///
/// `γ` is `+∞` for an unbounded promise unless `u_i = 0`, in which case the
/// pair contributes nothing at all.
pub fn pair_coefficients(u_i: f64, x_i: f64, x_j: f64, u_j: f64, m_j: f64) -> PairCoefficients {
    if u_i == 0.0 {
        return PairCoefficients {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        };
    }
    PairCoefficients {
        alpha: -u_i * (x_j - x_i),
        beta: -u_i * (u_j - u_i),
        gamma: u_i.abs() * m_j + u_i * u_i,
    }
}

/// One polynomial piece on `[start, end]` (shifted time). `unbounded` marks a
/// piece whose bound is `+∞` for every `s > start` because some neighbor in
/// its ball phase has no finite promise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub poly: Quadratic,
    pub unbounded: bool,
}

/// Piecewise quadratic in `s = t - origin`; the last piece ends at `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseQuadratic {
    origin: f64,
    pieces: Vec<Piece>,
}

impl PiecewiseQuadratic {
    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Piece end times in absolute time; the last is `+∞`.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| self.origin + p.end).collect()
    }

    /// Value at absolute time `t ≥ origin`. At a shared breakpoint the
    /// earlier piece wins.
    pub fn eval(&self, t: f64) -> f64 {
        let s = t - self.origin;
        let piece = self
            .pieces
            .iter()
            .find(|p| s <= p.end)
            .unwrap_or_else(|| self.pieces.last().expect("at least one piece"));
        if piece.unbounded && s > piece.start {
            f64::INFINITY
        } else {
            piece.poly.eval(s)
        }
    }

    /// First absolute time at which the function may be positive, or `+∞`.
    pub fn first_positive(&self, tol: f64) -> f64 {
        for piece in &self.pieces {
            let s = if piece.unbounded {
                piece.start
            } else {
                infimum_positive_tol(&piece.poly, piece.start, piece.end, tol)
            };
            if s.is_finite() {
                return self.origin + s;
            }
        }
        f64::INFINITY
    }
}

/// Per-neighbor phase description in shifted time.
struct NeighborPhases {
    /// End of the posted-control phase.
    expire: f64,
    /// Start of the ball phase.
    next: f64,
    vdot: [Quadratic; 3],
    integral: [Quadratic; 3],
    ball_unbounded: bool,
}

impl NeighborPhases {
    fn new(s: &TriggerSnapshot, view: &NeighborView) -> Self {
        let u = s.u_self;
        let next = (view.t_next - s.t_now).max(0.0);
        let expire = (view.t_expire - s.t_now).clamp(0.0, next);
        let v_j = if expire > 0.0 { view.u_last } else { 0.0 };
        let d0 = view.position_at(s.t_now) - s.x_self;

        // Posted-control phase: exact.
        let a = pair_coefficients(u, s.x_self, s.x_self + d0, v_j, view.promise);
        let vdot_a = Quadratic::linear(a.alpha, a.beta);
        let int_a = Quadratic::new(0.0, a.alpha, 0.5 * a.beta);

        // Zero-control phase: exact, neighbor frozen at its expiry position.
        let frozen = d0 + v_j * expire;
        let alpha_b = -u * frozen;
        let vdot_b = Quadratic::linear(alpha_b, u * u);
        let int_at_expire = int_a.eval(expire);
        let int_b = Quadratic::new(
            int_at_expire - alpha_b * expire - 0.5 * u * u * expire * expire,
            alpha_b,
            0.5 * u * u,
        );

        // Ball phase: bounded through the promise.
        let alpha_n = if u == 0.0 {
            0.0
        } else {
            -u * (frozen - u * next)
        };
        let gamma = a.gamma;
        let ball_unbounded = gamma.is_infinite();
        let int_at_next = int_b.eval(next);
        let (vdot_c, int_c) = if ball_unbounded {
            (
                Quadratic::linear(alpha_n, 0.0),
                Quadratic::constant(int_at_next),
            )
        } else {
            (
                Quadratic::linear(alpha_n - gamma * next, gamma),
                Quadratic::new(
                    int_at_next - alpha_n * next + 0.5 * gamma * next * next,
                    alpha_n - gamma * next,
                    0.5 * gamma,
                ),
            )
        };

        NeighborPhases {
            expire,
            next,
            vdot: [vdot_a, vdot_b, vdot_c],
            integral: [int_a, int_b, int_c],
            ball_unbounded,
        }
    }

    /// Phase containing the interval `[_, end]`, given breakpoints include
    /// both phase boundaries.
    fn phase(&self, end: f64) -> usize {
        if end <= self.expire {
            0
        } else if end <= self.next {
            1
        } else {
            2
        }
    }
}

impl Quadratic {
    const fn constant(c0: f64) -> Self {
        Quadratic::new(c0, 0.0, 0.0)
    }
}

fn assemble(s: &TriggerSnapshot, integral: bool) -> PiecewiseQuadratic {
    let phases: Vec<NeighborPhases> = s.views.iter().map(|v| NeighborPhases::new(s, v)).collect();

    let mut cuts: Vec<f64> = phases
        .iter()
        .flat_map(|p| [p.expire, p.next])
        .filter(|&c| c > 0.0)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.push(f64::INFINITY);

    let mut pieces = Vec::with_capacity(cuts.len());
    let mut start = 0.0;
    for end in cuts {
        let mut poly = Quadratic::ZERO;
        let mut unbounded = false;
        for p in &phases {
            let k = p.phase(end);
            poly += if integral { p.integral[k] } else { p.vdot[k] };
            unbounded |= k == 2 && p.ball_unbounded;
            hooks::count_evaluation();
        }
        pieces.push(Piece {
            start,
            end,
            poly,
            unbounded,
        });
        start = end;
    }
    PiecewiseQuadratic {
        origin: s.t_now,
        pieces,
    }
}

/// Upper bound on `V̇_i(t)` for `t ≥ t_now`, valid for every neighbor
/// trajectory consistent with the snapshot and the neighbors' promises.
/// Exact before the earliest neighbor surfacing.
pub fn bound_vdot(s: &TriggerSnapshot) -> PiecewiseQuadratic {
    assemble(s, false)
}

/// Upper bound on `∫_{t_now}^t V̇_i`. Continuous and zero at `t_now`.
pub fn bound_integral(s: &TriggerSnapshot) -> PiecewiseQuadratic {
    assemble(s, true)
}

/// First time the agent can no longer guarantee `V̇_i ≤ 0`.
pub fn compute_t_star(s: &TriggerSnapshot) -> f64 {
    compute_t_star_tol(s, SIGN_TOL)
}

pub fn compute_t_star_tol(s: &TriggerSnapshot, tol: f64) -> f64 {
    bound_vdot(s).first_positive(tol)
}

/// First time the agent can no longer guarantee a nonpositive accumulated
/// contribution since `t_now`.
pub fn compute_t_total(s: &TriggerSnapshot) -> f64 {
    compute_t_total_tol(s, SIGN_TOL)
}

pub fn compute_t_total_tol(s: &TriggerSnapshot, tol: f64) -> f64 {
    bound_integral(s).first_positive(tol)
}

/// Test instrumentation: counts per-neighbor coefficient evaluations made
/// while assembling bounds on the current thread.
#[doc(hidden)]
pub mod hooks {
    use std::cell::Cell;

    thread_local! {
        static EVALS: Cell<u64> = const { Cell::new(0) };
    }

    pub(super) fn count_evaluation() {
        EVALS.with(|c| c.set(c.get() + 1));
    }

    pub fn reset() {
        EVALS.with(|c| c.set(0));
    }

    pub fn evaluations() -> u64 {
        EVALS.with(Cell::get)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(t_expire: f64, t_next: f64, x_last: f64, u_last: f64, promise: f64) -> NeighborView {
        NeighborView {
            id: AgentId::new(2),
            t_last: 0.0,
            t_expire,
            t_next,
            x_last,
            u_last,
            promise,
        }
    }

    fn snap(u_self: f64, views: Vec<NeighborView>) -> TriggerSnapshot {
        TriggerSnapshot {
            self_id: AgentId::new(1),
            t_now: 0.0,
            x_self: 0.0,
            u_self,
            views,
        }
    }

    #[test]
    fn pair_coefficient_examples() {
        let c = pair_coefficients(1.0, 0.0, 2.0, 0.0, 0.5);
        assert_eq!((c.alpha, c.beta, c.gamma), (-2.0, 1.0, 1.5));
        let c = pair_coefficients(0.0, 3.0, -4.0, 7.0, 9.0);
        assert_eq!((c.alpha, c.beta, c.gamma), (0.0, 0.0, 0.0));
        let c = pair_coefficients(-1.0, 1.0, 0.0, -1.0, 2.0);
        assert_eq!((c.alpha, c.beta, c.gamma), (-1.0, 0.0, 3.0));
        let c = pair_coefficients(0.0, 0.0, 1.0, 0.0, f64::INFINITY);
        assert_eq!(c.gamma, 0.0);
    }

    #[test]
    fn single_neighbor_vdot_bound() {
        let s = snap(1.0, vec![view(10.0, 10.0, 2.0, 0.0, 0.5)]);
        let b = bound_vdot(&s);
        for t in [0.0, 1.0, 2.5, 9.99, 10.0] {
            assert!((b.eval(t) - (-2.0 + t)).abs() < 1e-12, "t={t}");
        }
        for t in [10.5, 12.0, 20.0] {
            assert!(
                (b.eval(t) - (8.0 + 1.5 * (t - 10.0))).abs() < 1e-12,
                "t={t}"
            );
        }
        assert_eq!(b.breakpoints(), vec![10.0, f64::INFINITY]);
    }

    #[test]
    fn zero_control_bounds_vanish() {
        let s = snap(0.0, vec![view(1.0, 3.0, 5.0, -2.0, f64::INFINITY)]);
        for t in [0.0, 0.5, 2.0, 10.0] {
            assert_eq!(bound_vdot(&s).eval(t), 0.0);
            assert_eq!(bound_integral(&s).eval(t), 0.0);
        }
        assert_eq!(compute_t_star(&s), f64::INFINITY);
        assert_eq!(compute_t_total(&s), f64::INFINITY);
    }

    #[test]
    fn single_neighbor_integral_bound() {
        let s = snap(1.0, vec![view(10.0, 10.0, 2.0, 0.0, 0.5)]);
        let i = bound_integral(&s);
        for t in [0.0, 1.0, 4.0, 10.0] {
            assert!((i.eval(t) - (-2.0 * t + 0.5 * t * t)).abs() < 1e-12);
        }
        assert_eq!(compute_t_star(&s), 2.0);
        assert_eq!(compute_t_total(&s), 4.0);
    }

    #[test]
    fn integral_is_additive_over_neighbors() {
        // (α, β) = (-2, 1) and (-1, 0) with u_i = 1, x_i = 0.
        let s = snap(
            1.0,
            vec![
                view(10.0, 10.0, 2.0, 0.0, 0.5),
                view(10.0, 10.0, 1.0, 1.0, 0.5),
            ],
        );
        let i = bound_integral(&s);
        for t in [0.5, 3.0, 7.0] {
            assert!((i.eval(t) - (-3.0 * t + 0.5 * t * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn expiry_adds_breakpoint_and_freezes_neighbor() {
        // Neighbor moves away at speed 1 until t=1, then stops until t=4.
        let s = snap(1.0, vec![view(1.0, 4.0, 3.0, 1.0, 1.0)]);
        let b = bound_vdot(&s);
        assert_eq!(b.breakpoints(), vec![1.0, 4.0, f64::INFINITY]);
        // Gap d(t) = 3 + t - t on [0,1], then 4 - t.
        assert!((b.eval(0.5) + 3.0).abs() < 1e-12);
        assert!((b.eval(2.0) + 2.0).abs() < 1e-12);
        // T*: -(4 - t) > 0 at t = 4, which is also where the ball begins.
        assert!((compute_t_star(&s) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_promise_triggers_at_ball_start() {
        let s = snap(1.0, vec![view(2.0, 2.0, 10.0, 0.0, f64::INFINITY)]);
        assert_eq!(compute_t_star(&s), 2.0);
        assert_eq!(compute_t_total(&s), 2.0);
    }

    #[test]
    fn neighbor_surfacing_now_starts_in_ball() {
        let s = snap(-1.0, vec![view(0.0, 0.0, -3.0, 0.0, 1.0)]);
        // α = -u·d = -(-1)(-3) = -3, γ = 1 + 1 = 2
        assert!((compute_t_star(&s) - 1.5).abs() < 1e-12);
        assert!((compute_t_total(&s) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bound_is_continuous_integral_and_starts_at_zero() {
        let s = TriggerSnapshot {
            self_id: AgentId::new(1),
            t_now: 3.0,
            x_self: 1.0,
            u_self: 0.7,
            views: vec![
                NeighborView {
                    t_last: 2.5,
                    ..view(3.4, 4.0, 1.2, 0.8, 0.9)
                },
                NeighborView {
                    t_last: 1.0,
                    ..view(2.0, 3.7, 4.0, -0.3, 2.0)
                },
            ],
        };
        let i = bound_integral(&s);
        assert_eq!(i.eval(3.0), 0.0);
        for bp in i.breakpoints().into_iter().filter(|b| b.is_finite()) {
            let (l, r) = (i.eval(bp - 1e-9), i.eval(bp + 1e-9));
            assert!((l - r).abs() < 1e-7, "jump at {bp}: {l} vs {r}");
        }
    }

    #[test]
    fn coefficient_work_is_quadratic_in_degree() {
        let build = |k: usize| {
            let views = (0..k)
                .map(|j| view(0.5 + j as f64, 1.0 + j as f64, j as f64, 0.1, 1.0))
                .collect();
            snap(1.0, views)
        };
        hooks::reset();
        let _ = bound_vdot(&build(10));
        let small = hooks::evaluations();
        hooks::reset();
        let _ = bound_vdot(&build(40));
        let large = hooks::evaluations();
        assert_eq!(small, 10 * 21);
        assert_eq!(large, 40 * 81);
    }
}
