#![allow(dead_code)]

use rand::Rng;
use surfacing_core::{AgentId, Graph, NeighborView, StateVector, TriggerSnapshot};

pub const REFERENCE_EDGES: [(usize, usize); 6] = [(1, 2), (1, 4), (2, 3), (2, 4), (3, 5), (4, 5)];
pub const REFERENCE_X0: [f64; 5] = [9.0, -2.0, 0.5, 8.5, 4.0];
pub const REFERENCE_SCHEDULE: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

pub fn reference_graph() -> Graph {
    Graph::new(5, REFERENCE_EDGES).unwrap()
}

pub fn reference_x0() -> StateVector {
    StateVector::new(REFERENCE_X0.to_vec()).unwrap()
}

/// Snapshot with 1..=max_neighbors neighbors, all records consistent with a
/// surfacing at `t_now`.
pub fn random_snapshot(rng: &mut impl Rng, max_neighbors: usize) -> TriggerSnapshot {
    let t_now = rng.gen_range(0.0..5.0);
    let k = rng.gen_range(1..=max_neighbors);
    let views = (0..k)
        .map(|m| {
            let t_last = t_now - rng.gen_range(0.0..2.0);
            let t_next = t_now + rng.gen_range(0.0..2.0);
            let t_expire = if rng.gen_bool(0.3) {
                rng.gen_range(t_last..=t_next)
            } else {
                t_next
            };
            NeighborView {
                id: AgentId::new(m + 2),
                t_last,
                t_expire,
                t_next,
                x_last: rng.gen_range(-10.0..10.0),
                u_last: rng.gen_range(-5.0..5.0),
                promise: rng.gen_range(0.0..5.0),
            }
        })
        .collect();
    TriggerSnapshot {
        self_id: AgentId::new(1),
        t_now,
        x_self: rng.gen_range(-10.0..10.0),
        u_self: if rng.gen_bool(0.05) {
            0.0
        } else {
            rng.gen_range(-5.0..5.0)
        },
        views,
    }
}
