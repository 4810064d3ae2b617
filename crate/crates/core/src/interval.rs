//! One-dimensional feasibility by interval arithmetic.
//!
//! With every variable but one fixed, a constraint instance forbids an open
//! interval of the free variable (possibly unbounded or empty). The feasible
//! set is the complement of the union: a finite list of closed gaps.

use alloc::vec::Vec;

use crate::catalog::{AffineForm, ConstraintInstance, Var};

/// Open interval `(lo, hi)`; either end may be infinite. Empty when
/// `lo >= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Open {
    pub lo: f64,
    pub hi: f64,
}

impl Open {
    pub const EMPTY: Open = Open {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };
    pub const ALL: Open = Open {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    fn intersect(self, other: Open) -> Open {
        Open {
            lo: f64::max(self.lo, other.lo),
            hi: f64::min(self.hi, other.hi),
        }
    }
}

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
}

impl Gap {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Values of `free` forbidden by `arm ≥ threshold` failing.
fn arm_forbidden(arm: &AffineForm, threshold: f64, free: Var, value: &mut impl FnMut(Var) -> f64) -> Open {
    let a = arm.coefficient(free);
    let rest = arm.eval(|v| if v == free { 0.0 } else { value(v) });
    if a == 0.0 {
        return if rest >= threshold { Open::EMPTY } else { Open::ALL };
    }
    let t = (threshold - rest) / a;
    if a > 0.0 {
        Open {
            lo: f64::NEG_INFINITY,
            hi: t,
        }
    } else {
        Open {
            lo: t,
            hi: f64::INFINITY,
        }
    }
}

/// The open set of values of `free` that violate `inst` once every other
/// variable takes `value(var)`.
///
/// A constraint holds when any of its arms holds, so the forbidden set is the
/// intersection of the per-arm forbidden half-lines, which is again an open
/// interval.
pub fn forbidden_interval(
    inst: &ConstraintInstance,
    free: Var,
    mut value: impl FnMut(Var) -> f64,
) -> Open {
    inst.arms()
        .iter()
        .map(|arm| arm_forbidden(arm, inst.threshold, free, &mut value))
        .fold(Open::ALL, Open::intersect)
}

/// Closed gaps left by removing every open interval from the real line, in
/// increasing order. Touching intervals leave a single-point gap.
pub fn feasible_gaps(forbidden: &[Open]) -> Vec<Gap> {
    let mut sorted: Vec<Open> = forbidden.iter().copied().filter(|o| !o.is_empty()).collect();
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
    let mut gaps = Vec::new();
    // every point strictly below `frontier` is covered
    let mut frontier = f64::NEG_INFINITY;
    for o in &sorted {
        if o.lo >= frontier {
            gaps.push(Gap {
                lo: frontier,
                hi: o.lo,
            });
        }
        frontier = f64::max(frontier, o.hi);
    }
    if frontier < f64::INFINITY {
        gaps.push(Gap {
            lo: frontier,
            hi: f64::INFINITY,
        });
    }
    // a point gap at -inf is not a point
    gaps.retain(|g| g.lo.is_finite() || g.hi.is_finite());
    gaps
}

/// Widest gap, first one on ties.
pub fn widest_gap(gaps: &[Gap]) -> Option<Gap> {
    gaps.iter()
        .copied()
        .fold(None, |best: Option<Gap>, g| match best {
            Some(b) if b.width() >= g.width() => Some(b),
            _ => Some(g),
        })
}

/// A point covered by the fewest forbidden intervals, lowest on ties.
/// Candidates are the finite endpoints and the midpoints between them.
pub fn least_covered_point(forbidden: &[Open]) -> f64 {
    let mut pts: Vec<f64> = forbidden
        .iter()
        .filter(|o| !o.is_empty())
        .flat_map(|o| [o.lo, o.hi])
        .filter(|x| x.is_finite())
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mids: Vec<f64> = pts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    pts.extend(mids);
    if pts.is_empty() {
        return 0.0;
    }
    pts.sort_by(f64::total_cmp);
    let cover = |x: f64| forbidden.iter().filter(|o| o.contains(x)).count();
    let mut best = pts[0];
    let mut best_cover = cover(best);
    for &x in &pts[1..] {
        let c = cover(x);
        if c < best_cover {
            best = x;
            best_cover = c;
        }
    }
    best
}
