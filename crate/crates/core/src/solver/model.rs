// Column-indexed form of the constraint list for one solve.
//
// Columns 0..n are node frequencies, n..n+d are CZ drives; anharmonicities
// are substituted by the configured constant. Every instance becomes one or
// two arms `g(x) ≥ δ + r`.

use alloc::vec::Vec;

use arrayvec::ArrayVec;

use crate::catalog::{ConstraintInstance, ConstraintType, Var, MAX_TERMS};

#[derive(Debug, Clone)]
pub(crate) struct Lin {
    pub constant: f64,
    pub terms: ArrayVec<(usize, f64), MAX_TERMS>,
}

impl Lin {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(j, a)| acc + a * x[j])
    }

    fn range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut min = self.constant;
        let mut max = self.constant;
        for &(_, a) in &self.terms {
            if a > 0.0 {
                min += a * lo;
                max += a * hi;
            } else {
                min += a * hi;
                max += a * lo;
            }
        }
        (min, max)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Con {
    pub ctype: ConstraintType,
    pub delta: f64,
    pub arms: ArrayVec<Lin, 2>,
    /// Smallest value of each arm over the box.
    pub lows: ArrayVec<f64, 2>,
    /// Largest margin this instance can reach in the box, capped.
    pub rcap: f64,
    /// Uniform big-M from the configuration, if any.
    pub fixed_m: Option<f64>,
}

impl Con {
    pub fn is_disjunctive(&self) -> bool {
        self.arms.len() == 2
    }

    /// Big-M of arm `i` for a radius bounded by `rcap`.
    pub fn big_m(&self, i: usize, rcap: f64) -> f64 {
        if let Some(m) = self.fixed_m {
            return m;
        }
        f64::max(self.delta + rcap - self.lows[i], 1.0)
    }

    /// Best achieved margin over the arms.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.arms
            .iter()
            .map(|a| a.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
            - self.delta
    }

    /// Index of the arm with the larger value at `x`.
    pub fn best_side(&self, x: &[f64]) -> u8 {
        if self.arms.len() == 2 && self.arms[1].eval(x) > self.arms[0].eval(x) {
            1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Model {
    pub nodes: usize,
    pub drives: usize,
    pub band: (f64, f64),
    pub alpha: f64,
    pub cons: Vec<Con>,
}

impl Model {
    pub fn new(
        nodes: usize,
        drives: usize,
        band: (f64, f64),
        alpha: f64,
        radius_cap: f64,
        big_m: Option<f64>,
        instances: &[ConstraintInstance],
    ) -> Self {
        let col = |v: Var| -> Option<usize> {
            match v {
                Var::Freq(i) => Some(i),
                Var::Drive(e) => Some(nodes + e),
                Var::Anharm(_) => None,
            }
        };
        let lin = |form: &crate::catalog::AffineForm| -> Lin {
            let mut constant = form.constant;
            let mut terms = ArrayVec::new();
            for &(v, a) in &form.terms {
                match col(v) {
                    Some(j) => terms.push((j, a)),
                    None => constant += a * alpha,
                }
            }
            Lin { constant, terms }
        };
        let cons = instances
            .iter()
            .map(|inst| {
                let arms: ArrayVec<Lin, 2> = inst.arms().iter().map(lin).collect();
                let ranges: ArrayVec<(f64, f64), 2> =
                    arms.iter().map(|a| a.range(band.0, band.1)).collect();
                let lows = ranges.iter().map(|r| r.0).collect();
                let top = ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
                let mut rcap = f64::min(radius_cap, top - inst.threshold);
                if let Some(m) = big_m {
                    for r in &ranges {
                        rcap = f64::min(rcap, m - inst.threshold + r.0);
                    }
                }
                Con {
                    ctype: inst.ctype,
                    delta: inst.threshold,
                    arms,
                    lows,
                    rcap,
                    fixed_m: big_m,
                }
            })
            .collect();
        Self {
            nodes,
            drives,
            band,
            alpha,
            cons,
        }
    }

    pub fn num_cols(&self) -> usize {
        self.nodes + self.drives
    }
}
