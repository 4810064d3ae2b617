// Branch-and-bound over arm choices with an LP relaxation at every node.
//
// An unfixed disjunction `g1 ≥ δ + r ∨ g2 ≥ δ + r` enters the relaxation in
// its big-M form with the binary projected out:
//
//     (δ + r − g1)/M1 + (δ + r − g2)/M2 ≤ 1
//
// which rearranges to `r ≤ w1·g1 + w2·g2 − δ + h` with `w1 = M2/(M1+M2)`,
// `w2 = M1/(M1+M2)` and `h = M1·M2/(M1+M2)`. A fixed disjunction keeps only
// its chosen arm.

use alloc::collections::BinaryHeap;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::model::{Con, Model};
use super::Clock;
use crate::lp::{LinearProgram, LpStatus};

const FEAS_TOL: f64 = 1e-7;
const UNFIXED: i8 = -1;

/// Radius layout of one step.
#[derive(Debug, Clone)]
pub(crate) enum Radii {
    /// One LP column per group; `group[c]` names the column of instance `c`.
    Columns {
        group: Vec<usize>,
        bounds: Vec<(f64, f64)>,
    },
    /// Per-instance radii substituted out, each bounded below by its floor.
    Eliminated { floors: Vec<f64> },
}

#[derive(Debug, Clone)]
pub(crate) struct Limits {
    pub nodes: u64,
    pub seconds: f64,
    pub pivots_per_lp: u64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BnbStatus {
    Optimal,
    Infeasible,
    LimitReached,
}

#[derive(Debug, Clone)]
pub(crate) struct Incumbent {
    /// Node and drive columns.
    pub x: Vec<f64>,
    /// Radius columns, or per-instance radii when eliminated.
    pub radii: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct BnbOutcome {
    pub status: BnbStatus,
    pub best: Option<Incumbent>,
    pub root_bound: f64,
    pub nodes: u64,
    pub pivots: u64,
}

struct Fix {
    con: usize,
    side: u8,
    parent: Option<Rc<Fix>>,
}

struct Node {
    bound: f64,
    seq: u64,
    fixes: Option<Rc<Fix>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Relaxation {
    x: Vec<f64>,
    radii: Vec<f64>,
    objective: f64,
}

pub(crate) struct Search<'a> {
    model: &'a Model,
    radii: Radii,
    limits: Limits,
    pivots: u64,
    incomplete: bool,
}

impl<'a> Search<'a> {
    pub fn new(model: &'a Model, radii: Radii, limits: Limits) -> Self {
        Self {
            model,
            radii,
            limits,
            pivots: 0,
            incomplete: false,
        }
    }

    fn cap(&self, c: usize) -> f64 {
        match &self.radii {
            Radii::Columns { group, bounds } => bounds[group[c]].1,
            Radii::Eliminated { .. } => self.model.cons[c].rcap,
        }
    }

    /// `(w1, w2, h)` of the projected big-M row.
    fn weights(&self, c: usize) -> (f64, f64, f64) {
        let con = &self.model.cons[c];
        let cap = self.cap(c);
        let m1 = con.big_m(0, cap);
        let m2 = con.big_m(1, cap);
        (m2 / (m1 + m2), m1 / (m1 + m2), m1 * m2 / (m1 + m2))
    }

    fn relax(&mut self, sides: &[i8]) -> Option<Relaxation> {
        let model = self.model;
        let nx = model.num_cols();
        let nr = match &self.radii {
            Radii::Columns { bounds, .. } => bounds.len(),
            Radii::Eliminated { .. } => 0,
        };
        let mut lp = LinearProgram::new(nx + nr);
        for j in 0..nx {
            lp.set_bounds(j, model.band.0, model.band.1);
        }
        let mut obj_const = 0.0;
        let mut obj = vec![0.0; nx + nr];
        if let Radii::Columns { bounds, .. } = &self.radii {
            for (k, &(lo, hi)) in bounds.iter().enumerate() {
                if hi < lo {
                    return None;
                }
                lp.set_bounds(nx + k, lo, hi);
                obj[nx + k] = 1.0;
            }
        }
        for (c, con) in model.cons.iter().enumerate() {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * con.arms[0].terms.len() + 1);
            let mut constant;
            if sides[c] == UNFIXED {
                let (w1, w2, h) = self.weights(c);
                constant = h - con.delta;
                for (arm, w) in con.arms.iter().zip([w1, w2]) {
                    constant += w * arm.constant;
                    for &(j, a) in &arm.terms {
                        match row.iter_mut().find(|(jj, _)| *jj == j) {
                            Some(entry) => entry.1 += w * a,
                            None => row.push((j, w * a)),
                        }
                    }
                }
            } else {
                let arm = &con.arms[sides[c] as usize];
                constant = arm.constant - con.delta;
                row.extend(arm.terms.iter().copied());
            }
            // row·x + constant is the instance radius
            match &self.radii {
                Radii::Columns { group, .. } => {
                    row.push((nx + group[c], -1.0));
                    lp.add_ge(row, -constant);
                }
                Radii::Eliminated { floors } => {
                    for &(j, a) in &row {
                        obj[j] += a;
                    }
                    obj_const += constant;
                    lp.add_ge(row, floors[c] - constant);
                }
            }
        }
        for (j, &c) in obj.iter().enumerate() {
            lp.set_objective(j, c);
        }
        let sol = lp.solve(self.limits.pivots_per_lp);
        self.pivots += sol.pivots;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return None,
            LpStatus::Unbounded | LpStatus::PivotLimit => {
                self.incomplete = true;
                return None;
            }
        }
        let mut x = sol.x;
        let radii = match &self.radii {
            Radii::Columns { .. } => x.split_off(nx),
            Radii::Eliminated { .. } => model
                .cons
                .iter()
                .enumerate()
                .map(|(c, con)| match sides[c] {
                    UNFIXED => {
                        let (w1, w2, h) = self.weights(c);
                        w1 * con.arms[0].eval(&x) + w2 * con.arms[1].eval(&x) + h - con.delta
                    }
                    s => con.arms[s as usize].eval(&x) - con.delta,
                })
                .collect(),
        };
        Some(Relaxation {
            x,
            radii,
            objective: sol.objective + obj_const,
        })
    }

    /// Radius an instance must reach at the relaxation point.
    fn required(&self, c: usize, rel: &Relaxation) -> f64 {
        match &self.radii {
            Radii::Columns { group, .. } => rel.radii[group[c]],
            Radii::Eliminated { floors } => floors[c],
        }
    }

    /// Scaled violation of each arm at the relaxation point.
    fn violations(&self, c: usize, rel: &Relaxation) -> (f64, f64) {
        let con: &Con = &self.model.cons[c];
        let need = con.delta + self.required(c, rel);
        let cap = self.cap(c);
        let v = |i: usize| (need - con.arms[i].eval(&rel.x)) / con.big_m(i, cap);
        (v(0), v(1))
    }

    fn base_sides(&self) -> Vec<i8> {
        self.model
            .cons
            .iter()
            .map(|c| if c.is_disjunctive() { UNFIXED } else { 0 })
            .collect()
    }

    /// Exact optimum with every arm fixed to the larger one at `x`.
    pub fn polish(&mut self, x: &[f64]) -> Option<Incumbent> {
        let sides: Vec<i8> = self
            .model
            .cons
            .iter()
            .map(|c| c.best_side(x) as i8)
            .collect();
        self.relax(&sides).map(|r| Incumbent {
            x: r.x,
            radii: r.radii,
            objective: r.objective,
        })
    }

    pub fn run(&mut self, start: Option<&[f64]>, clock: &Clock) -> BnbOutcome {
        let mut best: Option<Incumbent> = start.and_then(|x| self.polish(x));
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        let mut nodes = 0u64;
        let mut root_bound = f64::NAN;
        let mut limited = false;
        let base = self.base_sides();
        let mut sides = base.clone();

        let mut current = Some(Node {
            bound: f64::INFINITY,
            seq,
            fixes: None,
        });
        loop {
            let node = match current.take().or_else(|| heap.pop()) {
                Some(n) => n,
                None => break,
            };
            let cutoff = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.objective + self.limits.gap);
            if node.bound <= cutoff {
                continue;
            }
            if nodes >= self.limits.nodes
                || (self.limits.seconds.is_finite() && clock.elapsed() > self.limits.seconds)
            {
                limited = true;
                break;
            }
            nodes += 1;

            sides.copy_from_slice(&base);
            let mut link = node.fixes.as_deref();
            while let Some(f) = link {
                sides[f.con] = f.side as i8;
                link = f.parent.as_deref();
            }
            let Some(rel) = self.relax(&sides) else {
                if nodes == 1 {
                    root_bound = f64::NEG_INFINITY;
                }
                continue;
            };
            if nodes == 1 {
                root_bound = rel.objective;
            }
            if rel.objective <= cutoff {
                continue;
            }

            // most violated disjunction, ties by type priority then index
            let mut pick: Option<(usize, f64, u8)> = None;
            for (c, con) in self.model.cons.iter().enumerate() {
                if sides[c] != UNFIXED {
                    continue;
                }
                let (v1, v2) = self.violations(c, &rel);
                let score = f64::min(v1, v2);
                if score <= FEAS_TOL {
                    continue;
                }
                let near = if v1 <= v2 { 0 } else { 1 };
                let better = match pick {
                    None => true,
                    Some((p, ps, _)) => {
                        score > ps + 1e-9
                            || (score >= ps - 1e-9
                                && con.ctype.priority() < self.model.cons[p].ctype.priority())
                    }
                };
                if better {
                    pick = Some((c, score, near));
                }
            }

            if pick.is_none() {
                // the relaxation point satisfies every disjunction
                let exact = match &self.radii {
                    Radii::Columns { .. } => Some(Incumbent {
                        x: rel.x.clone(),
                        radii: rel.radii.clone(),
                        objective: rel.objective,
                    }),
                    Radii::Eliminated { .. } => self.polish(&rel.x),
                };
                if let Some(inc) = exact {
                    if best.as_ref().is_none_or(|b| inc.objective > b.objective) {
                        best = Some(inc);
                    }
                }
                let cutoff = best.as_ref().map_or(f64::NEG_INFINITY, |b| b.objective + self.limits.gap);
                if rel.objective <= cutoff {
                    continue;
                }
                // eliminated radii overestimate on unfixed rows: branch on the loosest
                let mut loosest: Option<(usize, f64)> = None;
                for (c, con) in self.model.cons.iter().enumerate() {
                    if sides[c] != UNFIXED {
                        continue;
                    }
                    let slack = rel.radii[c] - con.margin(&rel.x);
                    if slack > FEAS_TOL && loosest.is_none_or(|(_, s)| slack > s) {
                        loosest = Some((c, slack));
                    }
                }
                match loosest {
                    Some((c, _)) => {
                        pick = Some((c, 0.0, self.model.cons[c].best_side(&rel.x)));
                    }
                    None => continue,
                }
            }

            let (c, _, near) = pick.expect("branch candidate");
            let child = |side: u8| {
                Some(Rc::new(Fix {
                    con: c,
                    side,
                    parent: node.fixes.clone(),
                }))
            };
            seq += 1;
            heap.push(Node {
                bound: rel.objective,
                seq,
                fixes: child(1 - near),
            });
            seq += 1;
            current = Some(Node {
                bound: rel.objective,
                seq,
                fixes: child(near),
            });
        }

        let status = if limited || self.incomplete {
            BnbStatus::LimitReached
        } else if best.is_some() {
            BnbStatus::Optimal
        } else {
            BnbStatus::Infeasible
        };
        BnbOutcome {
            status,
            best,
            root_bound,
            nodes,
            pivots: self.pivots,
        }
    }
}
