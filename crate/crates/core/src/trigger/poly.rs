//! Quadratic polynomials and the "first time positive" query over an interval.

/// Default absolute tolerance for the sign tests in [`infimum_positive`].
pub const SIGN_TOL: f64 = 1e-12;

/// Discriminants in `[-DISCRIMINANT_CLAMP, 0)` are treated as a double root.
pub const DISCRIMINANT_CLAMP: f64 = 1e-12;

/// `c0 + c1·s + c2·s²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quadratic {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Quadratic {
    pub const ZERO: Quadratic = Quadratic {
        c0: 0.0,
        c1: 0.0,
        c2: 0.0,
    };

    pub const fn new(c0: f64, c1: f64, c2: f64) -> Self {
        Quadratic { c0, c1, c2 }
    }

    pub const fn linear(c0: f64, c1: f64) -> Self {
        Quadratic { c0, c1, c2: 0.0 }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.c0 + s * (self.c1 + s * self.c2)
    }

    pub fn derivative(&self) -> Quadratic {
        Quadratic::linear(self.c1, 2.0 * self.c2)
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0.0 && self.c1 == 0.0 && self.c2 == 0.0
    }

    /// Sign of `g(s)` as `s → +∞`, or `None` for the zero polynomial.
    fn sign_at_infinity(&self) -> Option<f64> {
        [self.c2, self.c1, self.c0]
            .into_iter()
            .find(|c| *c != 0.0)
            .map(f64::signum)
    }

    /// Real roots, ascending, with multiplicity collapsed.
    pub fn real_roots(&self) -> Vec<f64> {
        let Quadratic { c0, c1, c2 } = *self;
        if c2 == 0.0 {
            if c1 == 0.0 {
                return Vec::new();
            }
            return vec![-c0 / c1];
        }
        let mut disc = c1 * c1 - 4.0 * c2 * c0;
        if disc < 0.0 {
            if disc >= -DISCRIMINANT_CLAMP {
                disc = 0.0;
            } else {
                return Vec::new();
            }
        }
        if disc == 0.0 {
            return vec![-c1 / (2.0 * c2)];
        }
        // Cancellation-free form: one root from q/c2, the other from c0/q.
        let sign = if c1 >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (c1 + sign * disc.sqrt());
        let r1 = q / c2;
        let r2 = if q != 0.0 { c0 / q } else { r1 };
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        if lo == hi {
            vec![lo]
        } else {
            vec![lo, hi]
        }
    }
}

impl std::ops::Add for Quadratic {
    type Output = Quadratic;

    fn add(self, o: Quadratic) -> Quadratic {
        Quadratic::new(self.c0 + o.c0, self.c1 + o.c1, self.c2 + o.c2)
    }
}

impl std::ops::AddAssign for Quadratic {
    fn add_assign(&mut self, o: Quadratic) {
        *self = *self + o;
    }
}

/// `inf { s ∈ [s1, s2] : g(s) > 0 }`, or `+∞` if the set is empty.
///
/// Candidates are `s1` and the roots of `g` in `(s1, s2)`; the answer is the
/// first candidate `r_k` with `g` positive on `(r_k, r_{k+1})`, probed at
/// the midpoint. `s1` must also satisfy `g(s1) ≥ -tol`; roots are not
/// re-evaluated, since rounding can leave them on either side of zero.
/// `s2` may be `+∞`, in which case the last gap is probed through the sign
/// of `g` at infinity.
pub fn infimum_positive(g: &Quadratic, s1: f64, s2: f64) -> f64 {
    infimum_positive_tol(g, s1, s2, SIGN_TOL)
}

/// [`infimum_positive`] with an explicit sign tolerance.
pub fn infimum_positive_tol(g: &Quadratic, s1: f64, s2: f64, tol: f64) -> f64 {
    debug_assert!(s1 <= s2, "empty interval [{s1}, {s2}]");
    if g.is_zero() {
        return f64::INFINITY;
    }
    let mut candidates = Vec::with_capacity(4);
    candidates.push(s1);
    candidates.extend(g.real_roots().into_iter().filter(|&r| r > s1 && r < s2));
    candidates.push(s2);

    for (k, pair) in candidates.windows(2).enumerate() {
        let (r, next) = (pair[0], pair[1]);
        if k == 0 && g.eval(r) < -tol {
            continue;
        }
        let positive_after = if next.is_finite() {
            r < next && g.eval(0.5 * (r + next)) > tol
        } else if g.c1 == 0.0 && g.c2 == 0.0 {
            g.c0 > tol
        } else {
            // No roots beyond `r`, so the sign is that of the leading term.
            g.sign_at_infinity() == Some(1.0)
        };
        if positive_after {
            return r;
        }
    }
    // Degenerate interval: a single point that is positive.
    if s1 == s2 && g.eval(s1) > tol {
        return s1;
    }
    f64::INFINITY
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_linear_and_quadratic() {
        assert_eq!(Quadratic::linear(-1.0, 1.0).real_roots(), vec![1.0]);
        assert!(Quadratic::linear(-1.0, 0.0).real_roots().is_empty());
        // (s - 1)(s - 3) = s² - 4s + 3
        let r = Quadratic::new(3.0, -4.0, 1.0).real_roots();
        assert_eq!(r.len(), 2);
        assert!((r[0] - 1.0).abs() < 1e-15 && (r[1] - 3.0).abs() < 1e-15);
        // -(s + 2)(s - 5) = -s² + 3s + 10
        let r = Quadratic::new(10.0, 3.0, -1.0).real_roots();
        assert!((r[0] + 2.0).abs() < 1e-14 && (r[1] - 5.0).abs() < 1e-14);
        // (s - 1)²
        assert_eq!(Quadratic::new(1.0, -2.0, 1.0).real_roots(), vec![1.0]);
        assert!(Quadratic::new(1.0, 0.0, 1.0).real_roots().is_empty());
        // s² - 4: zero linear term
        let r = Quadratic::new(-4.0, 0.0, 1.0).real_roots();
        assert!((r[0] + 2.0).abs() < 1e-15 && (r[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn small_root_is_accurate() {
        // Roots 1e-9 and 1e9: naive formula loses the small one entirely.
        let g = Quadratic::new(1.0, -(1e9 + 1e-9), 1.0);
        let r = g.real_roots();
        assert!((r[0] - 1e-9).abs() < 1e-22, "{:e}", r[0]);
        assert!((r[1] - 1e9).abs() < 1e-6);
    }

    #[test]
    fn clamps_tiny_negative_discriminant() {
        // c1² - 4 c2 c0 = -5e-13
        let g = Quadratic::new(1.0 + 1.25e-13, -2.0, 1.0);
        assert_eq!(g.real_roots().len(), 1);
    }

    #[test]
    fn infimum_examples() {
        assert_eq!(
            infimum_positive(&Quadratic::linear(-1.0, 1.0), 0.0, 2.0),
            1.0
        );
        assert_eq!(
            infimum_positive(&Quadratic::linear(-1.0, 0.0), 0.0, 2.0),
            f64::INFINITY
        );
        assert_eq!(
            infimum_positive(&Quadratic::new(1.0, -2.0, 1.0), 0.0, 2.0),
            0.0
        );
        assert_eq!(infimum_positive(&Quadratic::ZERO, 0.0, 2.0), f64::INFINITY);
    }

    #[test]
    fn infimum_unbounded_interval() {
        assert_eq!(
            infimum_positive(&Quadratic::linear(-2.0, 1.0), 0.0, f64::INFINITY),
            2.0
        );
        assert_eq!(
            infimum_positive(&Quadratic::linear(-2.0, -1.0), 0.0, f64::INFINITY),
            f64::INFINITY
        );
        // Positive hump then negative forever: -(s-1)(s-3)
        let hump = Quadratic::new(-3.0, 4.0, -1.0);
        assert_eq!(infimum_positive(&hump, 0.0, f64::INFINITY), 1.0);
        assert_eq!(infimum_positive(&hump, 3.0, f64::INFINITY), f64::INFINITY);
        assert_eq!(
            infimum_positive(&Quadratic::linear(0.5, 0.0), 4.0, f64::INFINITY),
            4.0
        );
    }

    #[test]
    fn rounded_roots_are_found_without_tolerance() {
        let mut below_zero = 0;
        for k in 1..2000 {
            let g = Quadratic::new(
                -0.1 * k as f64,
                0.3 + 1e-3 * k as f64,
                1e-4 * (k % 7) as f64,
            );
            let r = g.real_roots().into_iter().find(|&r| r > 0.0).unwrap();
            if g.eval(r) < 0.0 {
                below_zero += 1;
            }
            assert_eq!(
                infimum_positive_tol(&g, 0.0, f64::INFINITY, 0.0),
                r,
                "k = {k}"
            );
        }
        assert!(below_zero > 0);
    }

    #[test]
    fn touching_zero_from_below_is_not_positive() {
        // -(s-1)² touches 0 at s=1 but never exceeds it.
        let g = Quadratic::new(-1.0, 2.0, -1.0);
        assert_eq!(infimum_positive(&g, 0.0, 2.0), f64::INFINITY);
    }

    #[test]
    fn second_root_window() {
        // (s-1)(s-3): positive on [0,1), negative on (1,3), positive after 3.
        let g = Quadratic::new(3.0, -4.0, 1.0);
        assert_eq!(infimum_positive(&g, 1.5, 5.0), 3.0);
        assert_eq!(infimum_positive(&g, 1.5, 2.5), f64::INFINITY);
    }
}
