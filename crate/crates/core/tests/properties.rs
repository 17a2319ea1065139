mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use surfacing_core::graph::lambda_max_pair;
use surfacing_core::protocol::ideal_control;
use surfacing_core::trigger::{bound_integral, bound_vdot, infimum_positive, Quadratic};
use surfacing_core::{compute_t_star, compute_t_total, Graph};

/// Connected graph on `n` agents: a random spanning tree plus extra edges.
fn connected_graph() -> impl Strategy<Value = Graph> {
    (2usize..=8)
        .prop_flat_map(|n| {
            let parents = (1..n).map(|k| 0..k).collect::<Vec<_>>();
            let extra = proptest::collection::vec((0..n, 0..n), 0..n * 2);
            (Just(n), parents, extra)
        })
        .prop_map(|(n, parents, extra)| {
            let mut edges: Vec<(usize, usize)> = parents
                .iter()
                .enumerate()
                .map(|(k, &p)| (p + 1, k + 2))
                .collect();
            for (a, b) in extra {
                let (a, b) = (a.min(b) + 1, a.max(b) + 1);
                if a != b && !edges.iter().any(|&(x, y)| (x.min(y), x.max(y)) == (a, b)) {
                    edges.push((a, b));
                }
            }
            Graph::new(n, edges).unwrap()
        })
}

fn graph_and_state() -> impl Strategy<Value = (Graph, Vec<f64>)> {
    connected_graph().prop_flat_map(|g| {
        let n = g.n();
        (Just(g), proptest::collection::vec(-10.0f64..10.0, n))
    })
}

proptest! {
    #[test]
    fn laplacian_rows_sum_to_zero(g in connected_graph()) {
        let l = g.laplacian();
        for r in 0..g.n() {
            prop_assert_eq!(l.row(r).sum(), 0.0);
        }
        prop_assert_eq!(&l, &l.transpose());
    }

    #[test]
    fn objective_is_half_quadratic_form((g, x) in graph_and_state()) {
        let l = g.laplacian();
        let xv = nalgebra::DVector::from_vec(x.clone());
        let quad = (xv.transpose() * &l * &xv)[(0, 0)];
        let v = g.objective_value(&x).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!((2.0 * v - quad).abs() <= 1e-9 * (1.0 + quad.abs()));
    }

    #[test]
    fn objective_and_control_translation_invariant((g, x) in graph_and_state(), shift in -50.0f64..50.0) {
        let moved: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let (a, b) = (g.objective_value(&x).unwrap(), g.objective_value(&moved).unwrap());
        prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a));
        for i in g.agents() {
            let nb = |xs: &[f64]| g.neighbors(i).unwrap().iter().map(|j| xs[j.index()]).collect::<Vec<_>>();
            let u0 = ideal_control(x[i.index()], &nb(&x));
            let u1 = ideal_control(moved[i.index()], &nb(&moved));
            prop_assert!((u0 - u1).abs() <= 1e-9 * (1.0 + u0.abs() + shift.abs()));
        }
    }

    #[test]
    fn lambda_max_is_an_eigenpair(g in connected_graph()) {
        let l = g.laplacian();
        let (lambda, v) = lambda_max_pair(&l).unwrap();
        let residual = (&l * &v - &v * lambda).norm();
        prop_assert!(residual <= 1e-9 * (1.0 + lambda));
        // Gershgorin: λ_max ≤ 2·max degree.
        let dmax = g.agents().map(|a| g.degree(a).unwrap()).max().unwrap() as f64;
        prop_assert!(lambda <= 2.0 * dmax + 1e-9);
    }

    #[test]
    fn t_star_never_exceeds_t_total(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let snap = common::random_snapshot(&mut rng, 6);
        let (t_star, t_total) = (compute_t_star(&snap), compute_t_total(&snap));
        prop_assert!(t_star >= snap.t_now);
        prop_assert!(t_star <= t_total, "T*={t_star} T_total={t_total}");
    }

    #[test]
    fn integral_bound_is_continuous_and_starts_at_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let snap = common::random_snapshot(&mut rng, 6);
        let b = bound_integral(&snap);
        prop_assert_eq!(b.eval(snap.t_now), 0.0);
        let pieces = b.pieces();
        for w in pieces.windows(2) {
            if w[1].unbounded || w[0].unbounded {
                continue;
            }
            let (left, right) = (w[0].poly.eval(w[0].end), w[1].poly.eval(w[1].start));
            prop_assert!((left - right).abs() <= 1e-9 * (1.0 + left.abs()), "{left} vs {right}");
        }
        let v = bound_vdot(&snap);
        prop_assert_eq!(v.breakpoints(), b.breakpoints());
    }

    /// The returned infimum is a point after which `g` is positive, and no
    /// earlier probe in the interval is positive.
    #[test]
    fn infimum_is_first_positive_point(
        c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, c2 in -5.0f64..5.0,
        s1 in -3.0f64..3.0, len in 0.01f64..6.0,
    ) {
        let g = Quadratic::new(c0, c1, c2);
        let s2 = s1 + len;
        let r = infimum_positive(&g, s1, s2);
        let probes = 2000;
        let first_probe = (0..=probes)
            .map(|k| s1 + len * k as f64 / probes as f64)
            .find(|&s| g.eval(s) > 1e-9);
        match first_probe {
            Some(p) => {
                prop_assert!(r <= p + 1e-12, "r={r} but g({p}) > 0");
                prop_assert!(g.eval(r) >= -1e-9);
            }
            None => {
                if r.is_finite() {
                    // Positive only on a window narrower than the probe grid.
                    prop_assert!(g.eval(r + 1e-9) > -1e-9);
                }
            }
        }
    }

    /// Shrinking the interval from the right never moves the infimum earlier.
    #[test]
    fn infimum_is_monotone_in_interval(
        c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, c2 in -5.0f64..5.0,
        s1 in -3.0f64..3.0, a in 0.0f64..4.0, b in 0.0f64..4.0,
    ) {
        let g = Quadratic::new(c0, c1, c2);
        let (short, long) = (s1 + a.min(b), s1 + a.max(b));
        let r_short = infimum_positive(&g, s1, short);
        let r_long = infimum_positive(&g, s1, long);
        prop_assert!(r_long <= r_short);
        if r_long <= short {
            prop_assert_eq!(r_long, r_short);
        }
    }

    #[test]
    fn real_roots_are_roots(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, c2 in -5.0f64..5.0) {
        let g = Quadratic::new(c0, c1, c2);
        for r in g.real_roots() {
            let scale = c0.abs() + (c1 * r).abs() + (c2 * r * r).abs();
            prop_assert!(g.eval(r).abs() <= 1e-9 * (1.0 + scale), "g({r}) = {}", g.eval(r));
        }
    }
}
