//! Monte-Carlo fabrication yield and the unit-cell scaling law.
//!
//! Each trial draws every node frequency from `Normal(target, σ)` with the
//! anharmonicities held fixed. Trial `t` uses a ChaCha8 stream seeded by
//! `seed` and positioned at stream `t`, so any split of the trial range
//! across workers reproduces the same counts.
//!
//! A CR trial is zero-collision when no collision family is violated. The
//! C1 gate window is tracked in the per-type counts but does not fail a
//! trial. A CZ trial re-chooses every drive: node-only families must hold
//! and every edge must keep a nonempty feasible drive set after removing
//! the exclusion intervals of its drive constraints from the drive band.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::catalog::{
    instantiate_constraints, ConstraintInstance, ConstraintType, FrequencyAssignment, ThresholdTable, Var,
};
use crate::graph::{Architecture, DeviceGraph};
use crate::interval::{feasible_gaps, forbidden_interval, least_covered_point, widest_gap, Open};
use crate::math::{powf, sqrt};

/// Upper end of the σ search in [`dispersion_for_target_yield`], MHz.
pub const SIGMA_SEARCH_MAX: f64 = 200.0;
/// Bisection stops once the bracket is this narrow, MHz.
pub const SIGMA_TOLERANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DispersionModel {
    /// Standard deviation of every node frequency, MHz.
    pub sigma: f64,
    pub trials: u64,
    pub seed: u64,
}

impl DispersionModel {
    pub fn validate(&self) -> Result<(), YieldError> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(YieldError::InvalidSigma(self.sigma));
        }
        if self.trials == 0 {
            return Err(YieldError::NoTrials);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct YieldEstimate {
    pub sigma: f64,
    #[cfg_attr(feature = "serde", serde(rename = "yield"))]
    pub yield_fraction: f64,
    /// `sqrt(y(1-y)/trials)`.
    pub stderr: f64,
    pub trials: u64,
    pub zero_collision_trials: u64,
    /// Mean violated instances per trial, for every family in the list.
    pub per_type_collision_freq: BTreeMap<ConstraintType, f64>,
}

impl YieldEstimate {
    /// Normal-approximation 95% interval, clipped to `[0, 1]`.
    pub fn ci95(&self) -> (f64, f64) {
        let h = 1.96 * self.stderr;
        (f64::max(self.yield_fraction - h, 0.0), f64::min(self.yield_fraction + h, 1.0))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum YieldError {
    #[error("dispersion must be finite and non-negative, got {0}")]
    InvalidSigma(f64),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("layout has {found} entries where the graph has {expected} nodes")]
    LayoutSize { expected: usize, found: usize },
    #[error("{0} is not supported by this estimator")]
    Architecture(Architecture),
    #[error("scaling law domain: {0}")]
    Domain(&'static str),
    #[error("target yield {target} is not crossed for sigma in [0, {sigma_max}] MHz")]
    Unreachable { target: f64, sigma_max: f64 },
}

/// Integer trial counts; merging is order independent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub zero_collision: u64,
    pub violations: BTreeMap<ConstraintType, u64>,
}

impl Tally {
    pub fn merge(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.zero_collision += other.zero_collision;
        for (&t, &n) in &other.violations {
            *self.violations.entry(t).or_insert(0) += n;
        }
    }
}

/// Trial kernel for one layout, graph and threshold table.
#[derive(Debug, Clone)]
pub struct YieldEngine {
    arch: Architecture,
    targets: Vec<f64>,
    anharms: Vec<f64>,
    instances: Vec<ConstraintInstance>,
    types: Vec<ConstraintType>,
    /// CZ: instances free of drives.
    node_only: Vec<usize>,
    /// CZ: instances per drive.
    per_edge: Vec<Vec<usize>>,
}

impl YieldEngine {
    pub fn new(
        layout: &FrequencyAssignment,
        graph: &DeviceGraph,
        table: &ThresholdTable,
    ) -> Result<Self, YieldError> {
        let n = graph.node_count();
        for len in [layout.freqs.len(), layout.anharms.len()] {
            if len != n {
                return Err(YieldError::LayoutSize { expected: n, found: len });
            }
        }
        let instances = instantiate_constraints(graph, table);
        let mut types: Vec<ConstraintType> = instances.iter().map(|i| i.ctype).collect();
        types.sort();
        types.dedup();
        let mut node_only = Vec::new();
        let mut per_edge = alloc::vec![Vec::new(); graph.directed_edges().len()];
        if table.architecture.is_cz() {
            for (k, inst) in instances.iter().enumerate() {
                match inst.drive_edge() {
                    Some(e) => per_edge[e].push(k),
                    None => node_only.push(k),
                }
            }
        }
        Ok(Self {
            arch: table.architecture,
            targets: layout.freqs.clone(),
            anharms: layout.anharms.clone(),
            instances,
            types,
            node_only,
            per_edge,
        })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    pub fn instances(&self) -> &[ConstraintInstance] {
        &self.instances
    }

    /// Families present in the instance list, in order.
    pub fn types(&self) -> &[ConstraintType] {
        &self.types
    }

    /// Node frequencies of trial `trial`.
    pub fn sample(&self, sigma: f64, seed: u64, trial: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        self.targets
            .iter()
            .map(|&f| {
                let z: f64 = rng.sample(StandardNormal);
                f + sigma * z
            })
            .collect()
    }

    fn value<'a>(&'a self, freqs: &'a [f64], drives: &'a [f64]) -> impl Fn(Var) -> f64 + 'a {
        move |v| match v {
            Var::Freq(i) => freqs[i],
            Var::Anharm(i) => self.anharms[i],
            Var::Drive(e) => drives[e],
        }
    }

    /// Exclusion intervals of every drive constraint on edge `e`.
    pub fn drive_exclusions(&self, freqs: &[f64], e: usize) -> Vec<Open> {
        let value = self.value(freqs, &[]);
        self.per_edge[e]
            .iter()
            .map(|&k| forbidden_interval(&self.instances[k], Var::Drive(e), &value))
            .collect()
    }

    /// Per-edge feasibility and chosen drive: the midpoint of the widest
    /// feasible gap, or the least-covered point when there is none.
    pub fn choose_drives(&self, freqs: &[f64]) -> (Vec<bool>, Vec<f64>) {
        (0..self.per_edge.len())
            .map(|e| {
                let ex = self.drive_exclusions(freqs, e);
                match widest_gap(&feasible_gaps(&ex)) {
                    Some(g) => (true, g.midpoint()),
                    None => (false, least_covered_point(&ex)),
                }
            })
            .unzip()
    }

    /// Outcome of one trial at the given frequencies.
    pub fn trial(&self, freqs: &[f64], tally: &mut Tally) {
        let mut ok = true;
        let drives = if self.arch.is_cz() {
            let value = self.value(freqs, &[]);
            for &k in &self.node_only {
                let inst = &self.instances[k];
                if inst.ctype.is_collision() && inst.margin_with(&value) < 0.0 {
                    ok = false;
                }
            }
            let (feasible, drives) = self.choose_drives(freqs);
            ok &= feasible.iter().all(|&f| f);
            drives
        } else {
            Vec::new()
        };
        let value = self.value(freqs, &drives);
        for inst in &self.instances {
            if inst.margin_with(&value) < 0.0 {
                *tally.violations.entry(inst.ctype).or_insert(0) += 1;
                if !self.arch.is_cz() && inst.ctype.is_collision() {
                    ok = false;
                }
            }
        }
        tally.trials += 1;
        tally.zero_collision += u64::from(ok);
    }

    /// Counts for the trial indices in `range`.
    pub fn tally(&self, sigma: f64, seed: u64, range: Range<u64>) -> Tally {
        let mut tally = Tally::default();
        for t in range {
            let freqs = self.sample(sigma, seed, t);
            self.trial(&freqs, &mut tally);
        }
        tally
    }

    pub fn finish(&self, sigma: f64, tally: &Tally) -> YieldEstimate {
        let n = tally.trials as f64;
        let y = tally.zero_collision as f64 / n;
        YieldEstimate {
            sigma,
            yield_fraction: y,
            stderr: sqrt(y * (1.0 - y) / n),
            trials: tally.trials,
            zero_collision_trials: tally.zero_collision,
            per_type_collision_freq: self
                .types
                .iter()
                .map(|&t| (t, tally.violations.get(&t).copied().unwrap_or(0) as f64 / n))
                .collect(),
        }
    }

    pub fn estimate(&self, model: &DispersionModel) -> Result<YieldEstimate, YieldError> {
        model.validate()?;
        let tally = self.tally(model.sigma, model.seed, 0..model.trials);
        Ok(self.finish(model.sigma, &tally))
    }
}

/// Yield of a CR layout (qubit or qutrit).
pub fn estimate_yield(
    layout: &FrequencyAssignment,
    graph: &DeviceGraph,
    table: &ThresholdTable,
    model: &DispersionModel,
) -> Result<YieldEstimate, YieldError> {
    if table.architecture.is_cz() {
        return Err(YieldError::Architecture(table.architecture));
    }
    YieldEngine::new(layout, graph, table)?.estimate(model)
}

/// Yield of a CZ layout with drives re-chosen in every trial.
pub fn estimate_yield_cz(
    layout: &FrequencyAssignment,
    graph: &DeviceGraph,
    table: &ThresholdTable,
    model: &DispersionModel,
) -> Result<YieldEstimate, YieldError> {
    if !table.architecture.is_cz() {
        return Err(YieldError::Architecture(table.architecture));
    }
    YieldEngine::new(layout, graph, table)?.estimate(model)
}

/// One estimate per σ, dispatching on the architecture.
pub fn yield_sweep(
    layout: &FrequencyAssignment,
    graph: &DeviceGraph,
    table: &ThresholdTable,
    sigmas: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<(f64, YieldEstimate)>, YieldError> {
    let engine = YieldEngine::new(layout, graph, table)?;
    sigmas
        .iter()
        .map(|&sigma| {
            engine
                .estimate(&DispersionModel { sigma, trials, seed })
                .map(|y| (sigma, y))
        })
        .collect()
}

/// `y_m^(N / n_m)`: lower bound on the yield of an `N`-site device tiled
/// from `n_m`-site cells of yield `y_m`.
pub fn scale_yield(y_m: f64, n_m: u64, n_total: u64) -> Result<f64, YieldError> {
    if !(0.0..=1.0).contains(&y_m) {
        return Err(YieldError::Domain("y_m must lie in [0, 1]"));
    }
    if n_m == 0 || n_total == 0 {
        return Err(YieldError::Domain("cell and device sizes must be positive"));
    }
    Ok(if n_total == n_m {
        y_m
    } else if n_total == 2 * n_m {
        y_m * y_m
    } else {
        powf(y_m, n_total as f64 / n_m as f64)
    })
}

/// Largest σ (to within ±0.5 MHz) at which the scaled yield of an
/// `n_total`-site device still reaches `target`. Every σ probe reuses the
/// same trial streams.
pub fn dispersion_for_target_yield(
    layout: &FrequencyAssignment,
    graph: &DeviceGraph,
    table: &ThresholdTable,
    target: f64,
    n_total: u64,
    trials: u64,
    seed: u64,
) -> Result<f64, YieldError> {
    if !(0.0..=1.0).contains(&target) {
        return Err(YieldError::Domain("target yield must lie in [0, 1]"));
    }
    let engine = YieldEngine::new(layout, graph, table)?;
    let n_m = graph.node_count() as u64;
    let scaled = |sigma: f64| -> Result<f64, YieldError> {
        let y = engine.estimate(&DispersionModel { sigma, trials, seed })?;
        scale_yield(y.yield_fraction, n_m, n_total)
    };
    let unreachable = YieldError::Unreachable {
        target,
        sigma_max: SIGMA_SEARCH_MAX,
    };
    if scaled(0.0)? < target || scaled(SIGMA_SEARCH_MAX)? >= target {
        return Err(unreachable);
    }
    let (mut lo, mut hi) = (0.0, SIGMA_SEARCH_MAX);
    while hi - lo > SIGMA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if scaled(mid)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pair() -> (DeviceGraph, FrequencyAssignment) {
        let g = DeviceGraph::new(2, vec![(0, 1)], None).unwrap();
        (g, FrequencyAssignment::uniform(vec![5100.0, 5000.0], -270.0))
    }

    #[test]
    fn zero_sigma_is_deterministic() {
        let (g, a) = pair();
        let t = ThresholdTable::default();
        let m = DispersionModel { sigma: 0.0, trials: 50, seed: 3 };
        assert_eq!(estimate_yield(&a, &g, &t, &m).unwrap().yield_fraction, 1.0);
        let bad = FrequencyAssignment::uniform(vec![5000.0, 5000.0], -270.0);
        assert_eq!(estimate_yield(&bad, &g, &t, &m).unwrap().yield_fraction, 0.0);
    }

    #[test]
    fn split_ranges_merge_to_the_whole() {
        let (g, a) = pair();
        let e = YieldEngine::new(&a, &g, &ThresholdTable::default()).unwrap();
        let whole = e.tally(40.0, 9, 0..300);
        let mut parts = e.tally(40.0, 9, 200..300);
        parts.merge(&e.tally(40.0, 9, 0..200));
        assert_eq!(whole, parts);
    }

    #[test]
    fn cz_drive_gap() {
        let g = DeviceGraph::new(2, vec![(0, 1)], None).unwrap();
        let t = ThresholdTable::for_architecture(Architecture::CzQubit);
        let a = FrequencyAssignment::uniform(vec![5000.0, 5100.0], -270.0);
        let e = YieldEngine::new(&a, &g, &t).unwrap();
        let gaps = feasible_gaps(&e.drive_exclusions(&a.freqs, 0));
        assert_eq!(gaps.len(), 1);
        assert_eq!((gaps[0].lo, gaps[0].hi), (5017.0, 5083.0));
        let (ok, d) = e.choose_drives(&a.freqs);
        assert!(ok[0]);
        assert_eq!(d[0], 5050.0);
        let close = [5000.0, 5008.0];
        assert!(!e.choose_drives(&close).0[0]);
    }

    #[test]
    fn scaling_law() {
        assert_eq!(scale_yield(0.5, 8, 8).unwrap(), 0.5);
        assert_eq!(scale_yield(1.0, 8, 1234).unwrap(), 1.0);
        let y = scale_yield(0.9, 16, 1000).unwrap();
        assert!((y - 0.9f64.powf(62.5)).abs() < 1e-15);
        assert!((y - 1.37e-3).abs() < 1e-4);
        assert!(scale_yield(1.5, 8, 8).is_err());
        assert!(scale_yield(0.5, 0, 8).is_err());
    }

    #[test]
    fn unreachable_target() {
        let g = DeviceGraph::new(2, vec![(0, 1)], None).unwrap();
        let bad = FrequencyAssignment::uniform(vec![5000.0, 5000.0], -270.0);
        let r = dispersion_for_target_yield(&bad, &g, &ThresholdTable::default(), 0.1, 2, 100, 1);
        assert!(matches!(r, Err(YieldError::Unreachable { .. })));
    }
}
