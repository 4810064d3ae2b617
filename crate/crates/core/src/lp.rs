//! Dense dictionary simplex for small bounded linear programs.
//!
//! Maximizes `c·x` subject to sparse `≤`/`≥` rows and finite lower bounds.
//! Variables are shifted to a zero lower bound, finite upper bounds become
//! rows, and an auxiliary variable drives phase 1 when the origin is
//! infeasible. Pricing is Dantzig's rule, falling back to Bland's rule after
//! a run of degenerate pivots.

use alloc::vec;
use alloc::vec::Vec;

pub const TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    PivotLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; meaningful only for `Optimal`.
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: u64,
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: Vec<f64>,
    /// `Σ a·x ≤ b`
    rows: Vec<(Vec<(usize, f64)>, f64)>,
}

impl LinearProgram {
    /// `n` variables in `[0, ∞)` with a zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            objective: vec![0.0; n],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// `lo` must be finite.
    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        debug_assert!(lo.is_finite());
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn set_objective(&mut self, j: usize, c: f64) {
        self.objective[j] = c;
    }

    pub fn add_le(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.rows.push((coeffs, rhs));
    }

    pub fn add_ge(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        let neg = coeffs.into_iter().map(|(j, a)| (j, -a)).collect();
        self.rows.push((neg, -rhs));
    }

    pub fn truncate_rows(&mut self, len: usize) {
        self.rows.truncate(len);
    }

    pub fn solve(&self, max_pivots: u64) -> LpSolution {
        let n = self.num_vars();
        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::with_capacity(self.rows.len() + n);
        for (coeffs, b) in &self.rows {
            let shift: f64 = coeffs.iter().map(|&(j, a)| a * self.lower[j]).sum();
            rows.push((coeffs.clone(), b - shift));
        }
        for j in 0..n {
            if self.upper[j].is_finite() {
                rows.push((vec![(j, 1.0)], self.upper[j] - self.lower[j]));
            }
        }
        let mut d = Dictionary::new(n, &rows);
        let mut pivots = 0u64;
        let fail = |status, pivots| LpSolution {
            status,
            x: Vec::new(),
            objective: f64::NAN,
            pivots,
        };

        if d.rows.iter().any(|r| r[0] < -TOL) {
            match d.phase_one(max_pivots, &mut pivots) {
                Ok(true) => {}
                Ok(false) => return fail(LpStatus::Infeasible, pivots),
                Err(status) => return fail(status, pivots),
            }
        }
        d.set_objective(&self.objective);
        if let Err(status) = d.optimize(max_pivots, &mut pivots) {
            return fail(status, pivots);
        }
        let y = d.primal(n);
        let x: Vec<f64> = y.iter().zip(&self.lower).map(|(y, l)| l + y).collect();
        let objective = x.iter().zip(&self.objective).map(|(x, c)| x * c).sum();
        LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            pivots,
        }
    }
}

/// `x_B[r] = rows[r][0] + Σ_k rows[r][k+1] · x_N[k]`, `z = obj[0] + Σ obj[k+1] · x_N[k]`.
///
/// Variable ids: `0..n` structural, `n..n+m` slacks, `n+m` the phase-1
/// auxiliary.
struct Dictionary {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
}

impl Dictionary {
    fn new(n: usize, rows: &[(Vec<(usize, f64)>, f64)]) -> Self {
        let m = rows.len();
        let mut t = Vec::with_capacity(m);
        for (coeffs, b) in rows {
            let mut r = vec![0.0; n + 1];
            r[0] = *b;
            for &(j, a) in coeffs {
                r[j + 1] -= a;
            }
            t.push(r);
        }
        Self {
            rows: t,
            obj: vec![0.0; n + 1],
            basic: (n..n + m).collect(),
            nonbasic: (0..n).collect(),
        }
    }

    fn pivot(&mut self, r: usize, k: usize) {
        let col = k + 1;
        let a = self.rows[r][col];
        let mut prow = core::mem::take(&mut self.rows[r]);
        for (idx, v) in prow.iter_mut().enumerate() {
            *v = if idx == col { 1.0 / a } else { -*v / a };
        }
        let apply = |target: &mut Vec<f64>, prow: &[f64]| {
            let f = target[col];
            if f == 0.0 {
                return;
            }
            target[col] = 0.0;
            for (t, p) in target.iter_mut().zip(prow) {
                *t += f * p;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                apply(row, &prow);
            }
        }
        apply(&mut self.obj, &prow);
        self.rows[r] = prow;
        core::mem::swap(&mut self.basic[r], &mut self.nonbasic[k]);
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for k in 0..self.nonbasic.len() {
            let c = self.obj[k + 1];
            if c <= TOL {
                continue;
            }
            best = match best {
                None => Some(k),
                Some(b) if bland && self.nonbasic[k] < self.nonbasic[b] => Some(k),
                Some(b) if !bland && c > self.obj[b + 1] => Some(k),
                keep => keep,
            };
        }
        best
    }

    fn leaving(&self, k: usize) -> Option<usize> {
        let col = k + 1;
        let mut best: Option<(usize, f64)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            let a = row[col];
            if a >= -TOL {
                continue;
            }
            let ratio = f64::max(row[0], 0.0) / -a;
            best = match best {
                None => Some((r, ratio)),
                Some((b, br)) => {
                    if ratio < br - TOL
                        || (ratio <= br + TOL && self.basic[r] < self.basic[b])
                    {
                        Some((r, ratio))
                    } else {
                        Some((b, br))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn optimize(&mut self, max_pivots: u64, pivots: &mut u64) -> Result<(), LpStatus> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let Some(k) = self.entering(bland) else {
                return Ok(());
            };
            let Some(r) = self.leaving(k) else {
                return Err(LpStatus::Unbounded);
            };
            if *pivots >= max_pivots {
                return Err(LpStatus::PivotLimit);
            }
            let before = self.obj[0];
            self.pivot(r, k);
            *pivots += 1;
            if self.obj[0] > before + TOL {
                degenerate = 0;
            } else {
                degenerate += 1;
            }
        }
    }

    /// Finds a feasible basis. `Ok(false)` when none exists.
    fn phase_one(&mut self, max_pivots: u64, pivots: &mut u64) -> Result<bool, LpStatus> {
        let aux = self.nonbasic.len() + self.rows.len();
        for row in &mut self.rows {
            row.push(1.0);
        }
        self.nonbasic.push(aux);
        let ka = self.nonbasic.len() - 1;
        self.obj = vec![0.0; self.nonbasic.len() + 1];
        self.obj[ka + 1] = -1.0;

        let r = (0..self.rows.len())
            .min_by(|&a, &b| self.rows[a][0].total_cmp(&self.rows[b][0]))
            .expect("phase one needs a row");
        self.pivot(r, ka);
        self.optimize(max_pivots, pivots)?;
        if self.obj[0] < -1e-7 {
            return Ok(false);
        }
        if let Some(r) = self.basic.iter().position(|&v| v == aux) {
            // degenerate: the auxiliary sits at zero in the basis
            let k = (0..self.nonbasic.len())
                .max_by(|&a, &b| self.rows[r][a + 1].abs().total_cmp(&self.rows[r][b + 1].abs()))
                .expect("nonbasic set is nonempty");
            if self.rows[r][k + 1].abs() > TOL {
                self.pivot(r, k);
            } else {
                // the row pins the auxiliary to zero and nothing else
                self.rows.remove(r);
                self.basic.remove(r);
            }
        }
        if let Some(ka) = self.nonbasic.iter().position(|&v| v == aux) {
            for row in &mut self.rows {
                row.remove(ka + 1);
            }
            self.nonbasic.remove(ka);
        }
        for row in &mut self.rows {
            if row[0] < 0.0 {
                row[0] = 0.0;
            }
        }
        Ok(true)
    }

    fn set_objective(&mut self, c: &[f64]) {
        let mut obj = vec![0.0; self.nonbasic.len() + 1];
        for (k, &v) in self.nonbasic.iter().enumerate() {
            if v < c.len() {
                obj[k + 1] += c[v];
            }
        }
        for (r, &v) in self.basic.iter().enumerate() {
            if v < c.len() && c[v] != 0.0 {
                for (o, a) in obj.iter_mut().zip(&self.rows[r]) {
                    *o += c[v] * a;
                }
            }
        }
        self.obj = obj;
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let mut y = vec![0.0; n];
        for (r, &v) in self.basic.iter().enumerate() {
            if v < n {
                y[v] = f64::max(self.rows[r][0], 0.0);
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_maximum() {
        // max 5x + 4y + 3z; 2x+3y+z ≤ 5, 4x+y+2z ≤ 11, 3x+4y+2z ≤ 8
        let mut lp = LinearProgram::new(3);
        lp.set_objective(0, 5.0);
        lp.set_objective(1, 4.0);
        lp.set_objective(2, 3.0);
        lp.add_le(vec![(0, 2.0), (1, 3.0), (2, 1.0)], 5.0);
        lp.add_le(vec![(0, 4.0), (1, 1.0), (2, 2.0)], 11.0);
        lp.add_le(vec![(0, 3.0), (1, 4.0), (2, 2.0)], 8.0);
        let s = lp.solve(1000);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 13.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[2], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn needs_phase_one() {
        // max -x - y; x + y ≥ 2, x ≤ 3, y ∈ [1, 4]
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, -1.0);
        lp.set_objective(1, -1.0);
        lp.set_bounds(0, 0.0, 3.0);
        lp.set_bounds(1, 1.0, 4.0);
        lp.add_ge(vec![(0, 1.0), (1, 1.0)], 2.0);
        let s = lp.solve(1000);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, -2.0, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_ge(vec![(0, 1.0)], 3.0);
        lp.add_le(vec![(0, 1.0)], 2.0);
        assert_eq!(lp.solve(100).status, LpStatus::Infeasible);
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, 1.0);
        assert_eq!(lp.solve(100).status, LpStatus::Unbounded);
    }

    #[test]
    fn shifted_bounds() {
        // max r; f1 - f0 ≥ 17 + r, f ∈ [4800, 5200]
        let mut lp = LinearProgram::new(3);
        lp.set_bounds(0, 4800.0, 5200.0);
        lp.set_bounds(1, 4800.0, 5200.0);
        lp.set_bounds(2, 0.0, 1000.0);
        lp.set_objective(2, 1.0);
        lp.add_ge(vec![(1, 1.0), (0, -1.0), (2, -1.0)], 17.0);
        let s = lp.solve(100);
        assert_abs_diff_eq!(s.objective, 383.0, epsilon = 1e-9);
    }

    #[test]
    fn pivot_limit() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 1.0);
        lp.add_le(vec![(0, 1.0)], 1.0);
        lp.add_le(vec![(1, 1.0)], 1.0);
        assert_eq!(lp.solve(1).status, LpStatus::PivotLimit);
    }
}
