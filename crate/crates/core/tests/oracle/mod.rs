//! Reference computations for the solver and the CZ drive search, written
//! without the branch-and-bound or interval code.

#![allow(dead_code)]

use freqalloc_core::lp::{LinearProgram, LpStatus};
use freqalloc_core::{
    instantiate_constraints, AffineForm, ConstraintInstance, DeviceGraph, FrequencyAssignment,
    SolveConfig, ThresholdTable, Var,
};

/// Largest common radius by depth-first enumeration of every arm choice.
/// A partial choice is dropped only when its LP is already infeasible.
/// Node frequencies only; anharmonicities are fixed at `config.alpha`.
pub fn enumerated_radius(graph: &DeviceGraph, table: &ThresholdTable, config: &SolveConfig) -> Option<f64> {
    let insts = instantiate_constraints(graph, table);
    let n = graph.node_count();
    let r = n;
    let mut lp = LinearProgram::new(n + 1);
    for j in 0..n {
        lp.set_bounds(j, config.band.0, config.band.1);
    }
    lp.set_bounds(r, 0.0, config.radius_cap);
    lp.set_objective(r, 1.0);
    let mut best: Option<f64> = None;
    descend(&insts, 0, &mut lp, config.alpha, &mut best);
    best
}

fn add_arm(lp: &mut LinearProgram, arm: &AffineForm, threshold: f64, alpha: f64) {
    // arm - R >= threshold
    let r = lp.num_vars() - 1;
    let mut coeffs = vec![(r, -1.0)];
    let mut constant = arm.constant;
    for &(v, c) in &arm.terms {
        match v {
            Var::Freq(i) => coeffs.push((i, c)),
            Var::Anharm(_) => constant += c * alpha,
            Var::Drive(_) => panic!("drive variables are not enumerated"),
        }
    }
    lp.add_ge(coeffs, threshold - constant);
}

fn descend(insts: &[ConstraintInstance], k: usize, lp: &mut LinearProgram, alpha: f64, best: &mut Option<f64>) {
    let sol = lp.solve(1_000_000);
    if sol.status != LpStatus::Optimal {
        return;
    }
    if k == insts.len() {
        if best.is_none_or(|b| sol.objective > b) {
            *best = Some(sol.objective);
        }
        return;
    }
    let rows = lp.num_rows();
    for arm in insts[k].arms() {
        add_arm(lp, &arm, insts[k].threshold, alpha);
        descend(insts, k + 1, lp, alpha, best);
        lp.truncate_rows(rows);
    }
}

/// Best smallest margin over a square grid of node frequencies, with the
/// margins restricted to the instances `keep` accepts.
pub fn grid_radius(
    graph: &DeviceGraph,
    table: &ThresholdTable,
    config: &SolveConfig,
    step: f64,
    keep: impl Fn(&ConstraintInstance) -> bool,
) -> f64 {
    let insts: Vec<ConstraintInstance> = instantiate_constraints(graph, table).into_iter().filter(|i| keep(i)).collect();
    let n = graph.node_count();
    let points = ((config.band.1 - config.band.0) / step).round() as usize + 1;
    let mut idx = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        let freqs: Vec<f64> = idx.iter().map(|&k| config.band.0 + k as f64 * step).collect();
        let a = FrequencyAssignment::uniform(freqs, config.alpha);
        let m = insts
            .iter()
            .map(|inst| inst.margin_with(|v| a.value(v).unwrap()))
            .fold(config.radius_cap, f64::min);
        best = best.max(m);
        let mut d = 0;
        loop {
            if d == n {
                return best;
            }
            idx[d] += 1;
            if idx[d] < points {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Whether some drive on a grid of `step` over `[lo, hi]` satisfies every
/// instance that involves drive `edge`, all other values held at `value`.
pub fn scan_drive(
    insts: &[ConstraintInstance],
    edge: usize,
    lo_hundredths: i64,
    hi_hundredths: i64,
    value: impl Fn(Var) -> f64,
) -> Option<f64> {
    let mine: Vec<&ConstraintInstance> = insts.iter().filter(|i| i.drive_edge() == Some(edge)).collect();
    (lo_hundredths..=hi_hundredths).map(|h| h as f64 / 100.0).find(|&fd| {
        mine.iter().all(|inst| {
            inst.margin_with(|v| match v {
                Var::Drive(e) if e == edge => fd,
                other => value(other),
            }) >= 0.0
        })
    })
}
