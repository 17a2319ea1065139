//! Fixtures shared by the benchmarks under `benches/`.

use surfacing_core::{AgentId, Graph, NeighborView, StateVector, TriggerSnapshot};

/// Five agents, six links; the scenario used throughout the test suites.
pub fn reference_setup() -> (Graph, StateVector, Vec<f64>) {
    let g = Graph::new(5, [(1, 2), (1, 4), (2, 3), (2, 4), (3, 5), (4, 5)]).expect("valid graph");
    let x0 = StateVector::new(vec![9.0, -2.0, 0.5, 8.5, 4.0]).expect("finite state");
    (g, x0, vec![0.1, 0.2, 0.3, 0.4, 0.5])
}

/// Ring of `n` agents with evenly spread initial positions.
pub fn ring_setup(n: usize) -> (Graph, StateVector, Vec<f64>) {
    let g = Graph::new(n, (1..=n).map(|i| (i, i % n + 1))).expect("valid ring");
    let x0 = StateVector::new((0..n).map(|i| (i as f64 * 2.399).sin() * 10.0).collect())
        .expect("finite state");
    let schedule = (1..=n).map(|i| i as f64 / (2 * n) as f64).collect();
    (g, x0, schedule)
}

/// A surfacing agent with `degree` neighbors whose records are staggered so
/// every neighbor contributes distinct phase boundaries.
pub fn snapshot(degree: usize) -> TriggerSnapshot {
    let t_now = 1.0;
    let views = (0..degree)
        .map(|k| {
            let f = k as f64;
            let t_next = t_now + 0.05 + 0.37 * ((f * 0.618).fract());
            NeighborView {
                id: AgentId::new(k + 2),
                t_last: t_now - 0.2 - 0.1 * ((f * 0.414).fract()),
                t_expire: if k % 3 == 0 { t_now + 0.02 } else { t_next },
                t_next,
                x_last: 5.0 * (f * 1.3).sin(),
                u_last: 2.0 * (f * 0.7).cos(),
                promise: 1.0 + (f * 0.9).sin().abs(),
            }
        })
        .collect();
    TriggerSnapshot {
        self_id: AgentId::new(1),
        t_now,
        x_self: 0.25,
        u_self: -0.8,
        views,
    }
}
