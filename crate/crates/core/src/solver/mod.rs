//! Max-margin frequency allocation.
//!
//! Three steps, each a disjunctive program over arm choices:
//!
//! 1. one common radius `R` for every instance;
//! 2. one radius per constraint type, each at least `R`, maximizing their sum;
//! 3. one radius per instance, each at least a fraction of its type radius,
//!    maximizing their sum. The step-3 point is the shipped layout.
//!
//! Each step is solved by best-first branch-and-bound with plunging over
//! the dense simplex in [`crate::lp`]. Every result is re-checked with
//! [`crate::catalog::evaluate`] before it is reported as collision free.

mod anneal;
mod bnb;
mod model;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::{
    evaluate, instantiate_constraints, ConstraintInstance, ConstraintType, FrequencyAssignment,
    ThresholdError, ThresholdTable,
};
use crate::graph::DeviceGraph;
use bnb::{BnbOutcome, BnbStatus, Incumbent, Limits, Radii, Search};
use model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Fallback {
    None,
    Anneal,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SolveConfig {
    /// Allocation window `[f_min, f_max]` in MHz.
    pub band: (f64, f64),
    /// Anharmonicity shared by every transmon, MHz.
    pub alpha: f64,
    /// Uniform big-M. `None` derives a tight value per arm from the band.
    pub big_m: Option<f64>,
    /// Upper bound on every radius, MHz.
    pub radius_cap: f64,
    pub node_limit: u64,
    /// Per step, seconds. Only enforced with the `std` feature.
    pub time_limit: f64,
    pub fallback: Fallback,
    pub seed: u64,
    /// Step-3 floor as a fraction of the step-2 type radius.
    pub step3_floor_fraction: f64,
    pub anneal_iterations: u64,
    pub lp_pivot_limit: u64,
    /// Absolute optimality gap, MHz.
    pub gap: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            band: (4800.0, 5200.0),
            alpha: -270.0,
            big_m: None,
            radius_cap: 1000.0,
            node_limit: 200_000,
            time_limit: 60.0,
            fallback: Fallback::Anneal,
            seed: 0,
            step3_floor_fraction: 1.0,
            anneal_iterations: 200_000,
            lp_pivot_limit: 100_000,
            gap: 1e-7,
        }
    }
}

impl SolveConfig {
    /// Band width + 2|α| + largest threshold + 1 MHz.
    pub fn default_big_m(&self, table: &ThresholdTable) -> f64 {
        (self.band.1 - self.band.0) + 2.0 * self.alpha.abs() + table.max_delta() + 1.0
    }

    pub fn validate(&self, table: &ThresholdTable) -> Result<(), SolveError> {
        let (lo, hi) = self.band;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(SolveError::InvalidBand { lo, hi });
        }
        if !self.alpha.is_finite() {
            return Err(SolveError::InvalidConfig("alpha must be finite"));
        }
        if !(self.radius_cap.is_finite() && self.radius_cap >= 0.0) {
            return Err(SolveError::InvalidConfig("radius_cap must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&self.step3_floor_fraction) {
            return Err(SolveError::InvalidConfig("step3_floor_fraction must lie in [0, 1]"));
        }
        if !(self.gap >= 0.0) {
            return Err(SolveError::InvalidConfig("gap must be non-negative"));
        }
        if let Some(m) = self.big_m {
            let need = self.default_big_m(table) - 1.0;
            if !(m >= need) {
                return Err(SolveError::BigMTooSmall { big_m: m, required: need });
            }
        }
        table.validate()?;
        Ok(())
    }

    fn limits(&self) -> Limits {
        Limits {
            nodes: self.node_limit,
            seconds: self.time_limit,
            pivots_per_lp: self.lp_pivot_limit,
            gap: self.gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("allocation band [{lo}, {hi}] is empty or not finite")]
    InvalidBand { lo: f64, hi: f64 },
    #[error("big-M {big_m} is below the required {required}")]
    BigMTooSmall { big_m: f64, required: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SolveStatus {
    /// Branch-and-bound closed the gap in every step that ran.
    Optimal,
    /// Collision free, found by the annealing fallback.
    FeasibleHeuristic,
    /// No collision-free layout found; `assignment` holds the best point, if any.
    Infeasible,
    /// A limit stopped the search; `assignment` is the incumbent, if any.
    LimitReached,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::FeasibleHeuristic => "feasible-heuristic",
            Self::Infeasible => "infeasible",
            Self::LimitReached => "limit-reached",
        }
    }
}

impl core::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_pivots: u64,
    pub wall_time_s: f64,
    /// Root relaxation bound of the last branch-and-bound run.
    pub root_bound: Option<f64>,
    pub anneal_used: bool,
}

impl SolveStats {
    fn absorb(&mut self, other: &SolveStats) {
        self.nodes += other.nodes;
        self.lp_pivots += other.lp_pivots;
        self.wall_time_s += other.wall_time_s;
        self.anneal_used |= other.anneal_used;
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveResult {
    pub status: SolveStatus,
    pub assignment: Option<FrequencyAssignment>,
    /// Common radius of step 1, MHz.
    pub radius: f64,
    /// Per-type radii of step 2.
    pub type_radii: BTreeMap<ConstraintType, f64>,
    /// Per-instance radii of step 3, aligned with the instance list.
    pub instance_radii: Vec<f64>,
    /// Smallest margin of `assignment` under the independent evaluator;
    /// `None` without an assignment or without constraints.
    pub min_margin: Option<f64>,
    pub stats: SolveStats,
    pub notes: Vec<String>,
}

impl SolveResult {
    pub fn is_zero_collision(&self) -> bool {
        self.assignment.is_some() && self.min_margin.is_none_or(|m| m >= 0.0)
    }

    pub fn freqs(&self) -> Option<&[f64]> {
        self.assignment.as_ref().map(|a| a.freqs.as_slice())
    }
}

#[cfg(feature = "std")]
pub(crate) struct Clock(std::time::Instant);

#[cfg(feature = "std")]
impl Clock {
    pub fn start() -> Self {
        Clock(std::time::Instant::now())
    }
    pub fn elapsed(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(not(feature = "std"))]
pub(crate) struct Clock;

#[cfg(not(feature = "std"))]
impl Clock {
    pub fn start() -> Self {
        Clock
    }
    pub fn elapsed(&self) -> f64 {
        0.0
    }
}

struct Setup {
    instances: Vec<ConstraintInstance>,
    model: Model,
}

fn setup(graph: &DeviceGraph, table: &ThresholdTable, config: &SolveConfig) -> Result<Setup, SolveError> {
    config.validate(table)?;
    let instances = instantiate_constraints(graph, table);
    let drives = if table.architecture.is_cz() {
        graph.directed_edges().len()
    } else {
        0
    };
    let model = Model::new(
        graph.node_count(),
        drives,
        config.band,
        config.alpha,
        config.radius_cap,
        config.big_m,
        &instances,
    );
    Ok(Setup { instances, model })
}

fn present_types(model: &Model) -> Vec<ConstraintType> {
    let mut types: Vec<ConstraintType> = model.cons.iter().map(|c| c.ctype).collect();
    types.sort();
    types.dedup();
    types
}

fn assignment_of(model: &Model, x: &[f64]) -> FrequencyAssignment {
    let a = FrequencyAssignment::uniform(x[..model.nodes].to_vec(), model.alpha);
    if model.drives > 0 {
        a.with_drives(x[model.nodes..].to_vec())
    } else {
        a
    }
}

/// Packs a search outcome into a result and re-checks it.
fn finish(
    s: &Setup,
    out: BnbOutcome,
    clock: &Clock,
    fill: impl FnOnce(&mut SolveResult, &Incumbent),
) -> SolveResult {
    let mut result = SolveResult {
        status: match out.status {
            BnbStatus::Optimal => SolveStatus::Optimal,
            BnbStatus::Infeasible => SolveStatus::Infeasible,
            BnbStatus::LimitReached => SolveStatus::LimitReached,
        },
        assignment: None,
        radius: 0.0,
        type_radii: BTreeMap::new(),
        instance_radii: Vec::new(),
        min_margin: None,
        stats: SolveStats {
            nodes: out.nodes,
            lp_pivots: out.pivots,
            wall_time_s: clock.elapsed(),
            root_bound: out.root_bound.is_finite().then_some(out.root_bound),
            anneal_used: false,
        },
        notes: Vec::new(),
    };
    if let Some(inc) = &out.best {
        result.assignment = Some(assignment_of(&s.model, &inc.x));
        fill(&mut result, inc);
    }
    recheck(s, &mut result);
    result
}

/// Independent evaluation; a layout that fails it is never reported as a
/// success.
fn recheck(s: &Setup, result: &mut SolveResult) {
    let Some(a) = &result.assignment else {
        return;
    };
    let report = evaluate(a, &s.instances).expect("assignment covers every variable");
    result.min_margin = report.min_margin.is_finite().then_some(report.min_margin);
    if s.instances.is_empty() {
        result
            .notes
            .push("no constraints: radius clamped to the configured cap".into());
    }
    if !report.is_zero_collision() && result.status != SolveStatus::Infeasible {
        result.status = SolveStatus::Infeasible;
        result
            .notes
            .push(alloc::format!("evaluator rejected the layout (min margin {})", report.min_margin));
    }
}

fn step1(s: &Setup, config: &SolveConfig) -> SolveResult {
    let clock = Clock::start();
    let cap = s
        .model
        .cons
        .iter()
        .map(|c| c.rcap)
        .fold(config.radius_cap, f64::min);
    let radii = Radii::Columns {
        group: vec![0; s.model.cons.len()],
        bounds: vec![(0.0, cap)],
    };
    let out = Search::new(&s.model, radii, config.limits()).run(None, &clock);
    finish(s, out, &clock, |r, inc| r.radius = inc.radii[0])
}

fn step2(s: &Setup, config: &SolveConfig, floor: f64, start: Option<&[f64]>) -> SolveResult {
    let clock = Clock::start();
    let types = present_types(&s.model);
    let mut bounds: Vec<(f64, f64)> = vec![(floor, config.radius_cap); types.len()];
    let group: Vec<usize> = s
        .model
        .cons
        .iter()
        .map(|c| types.binary_search(&c.ctype).expect("type is present"))
        .collect();
    for (c, &g) in s.model.cons.iter().zip(&group) {
        bounds[g].1 = f64::min(bounds[g].1, c.rcap);
    }
    let radii = Radii::Columns { group, bounds };
    let out = Search::new(&s.model, radii, config.limits()).run(start, &clock);
    finish(s, out, &clock, |r, inc| {
        r.radius = floor;
        r.type_radii = types.iter().copied().zip(inc.radii.iter().copied()).collect();
    })
}

fn step3(
    s: &Setup,
    config: &SolveConfig,
    type_floors: &BTreeMap<ConstraintType, f64>,
    start: Option<&[f64]>,
) -> SolveResult {
    let clock = Clock::start();
    let floors = s
        .model
        .cons
        .iter()
        .map(|c| config.step3_floor_fraction * type_floors.get(&c.ctype).copied().unwrap_or(0.0))
        .collect();
    let radii = Radii::Eliminated { floors };
    let out = Search::new(&s.model, radii, config.limits()).run(start, &clock);
    finish(s, out, &clock, |r, inc| {
        r.type_radii = type_floors.clone();
        r.instance_radii = inc.radii.clone();
    })
}

fn point_of(result: &SolveResult) -> Option<Vec<f64>> {
    result.assignment.as_ref().map(|a| {
        let mut x = a.freqs.clone();
        if let Some(d) = &a.drives {
            x.extend_from_slice(d);
        }
        x
    })
}

/// Step 1: the largest common radius.
pub fn solve_step1(
    graph: &DeviceGraph,
    table: &ThresholdTable,
    config: &SolveConfig,
) -> Result<SolveResult, SolveError> {
    let s = setup(graph, table, config)?;
    Ok(step1(&s, config))
}

/// Step 2: per-type radii, each at least `r_floor`, maximizing their sum.
pub fn solve_step2(
    graph: &DeviceGraph,
    table: &ThresholdTable,
    config: &SolveConfig,
    r_floor: f64,
) -> Result<SolveResult, SolveError> {
    let s = setup(graph, table, config)?;
    Ok(step2(&s, config, r_floor, None))
}

/// Step 3: per-instance radii above `step3_floor_fraction` times the type
/// radius, maximizing their sum. Types missing from `type_floors` get a
/// zero floor.
pub fn solve_step3(
    graph: &DeviceGraph,
    table: &ThresholdTable,
    config: &SolveConfig,
    type_floors: &BTreeMap<ConstraintType, f64>,
) -> Result<SolveResult, SolveError> {
    let s = setup(graph, table, config)?;
    Ok(step3(&s, config, type_floors, None))
}

/// Annealing on the smallest margin, from a seeded random start.
pub fn anneal_fallback(
    graph: &DeviceGraph,
    table: &ThresholdTable,
    config: &SolveConfig,
) -> Result<SolveResult, SolveError> {
    let s = setup(graph, table, config)?;
    Ok(anneal_on(&s, config))
}

fn anneal_on(s: &Setup, config: &SolveConfig) -> SolveResult {
    let clock = Clock::start();
    let (x, min) = anneal::anneal(&s.model, config.anneal_iterations, config.seed, None);
    let mut result = SolveResult {
        status: if min >= 0.0 {
            SolveStatus::FeasibleHeuristic
        } else {
            SolveStatus::Infeasible
        },
        assignment: Some(assignment_of(&s.model, &x)),
        radius: if min.is_finite() { f64::max(min, 0.0) } else { config.radius_cap },
        type_radii: BTreeMap::new(),
        instance_radii: Vec::new(),
        min_margin: None,
        stats: SolveStats {
            wall_time_s: clock.elapsed(),
            anneal_used: true,
            ..SolveStats::default()
        },
        notes: Vec::new(),
    };
    recheck(s, &mut result);
    result
}

/// Runs the three steps, threading radii and incumbents forward.
///
/// Infeasibility is reported through [`SolveStatus`]; errors are reserved
/// for invalid inputs.
pub fn solve(
    graph: &DeviceGraph,
    table: &ThresholdTable,
    config: &SolveConfig,
) -> Result<SolveResult, SolveError> {
    let s = setup(graph, table, config)?;
    let mut stats = SolveStats::default();

    let mut first = step1(&s, config);
    stats.absorb(&first.stats);
    stats.root_bound = first.stats.root_bound;
    let mut heuristic = false;
    if first.assignment.is_none() || !first.is_zero_collision() {
        if config.fallback == Fallback::None {
            first.stats = stats;
            return Ok(first);
        }
        let mut annealed = anneal_on(&s, config);
        stats.absorb(&annealed.stats);
        if annealed.status != SolveStatus::FeasibleHeuristic {
            annealed.notes.push("branch-and-bound and annealing found no collision-free layout".into());
            annealed.stats = stats;
            return Ok(annealed);
        }
        heuristic = true;
        first = annealed;
    }
    let radius = first.radius;
    let mut limited = first.status == SolveStatus::LimitReached;
    let mut notes = first.notes.clone();

    let start1 = point_of(&first);
    let second = step2(&s, config, radius, start1.as_deref());
    stats.absorb(&second.stats);
    limited |= second.status == SolveStatus::LimitReached;
    notes.extend(second.notes.iter().cloned());
    let (type_radii, start2) = if second.is_zero_collision() {
        (second.type_radii.clone(), point_of(&second))
    } else {
        notes.push("step 2 produced no layout; keeping the step-1 point".into());
        let floors = present_types(&s.model).into_iter().map(|t| (t, radius)).collect();
        (floors, start1.clone())
    };

    let third = step3(&s, config, &type_radii, start2.as_deref());
    stats.absorb(&third.stats);
    limited |= third.status == SolveStatus::LimitReached;
    notes.extend(third.notes.iter().cloned());

    let mut result = if third.is_zero_collision() {
        third
    } else {
        notes.push("step 3 produced no layout; keeping the previous point".into());
        let mut fallback = if second.is_zero_collision() { second } else { first };
        fallback.type_radii = type_radii.clone();
        fallback
    };
    result.radius = radius;
    result.type_radii = type_radii;
    result.notes = notes;
    result.notes.dedup();
    result.stats = stats;
    result.status = if !result.is_zero_collision() {
        SolveStatus::Infeasible
    } else if heuristic {
        SolveStatus::FeasibleHeuristic
    } else if limited {
        SolveStatus::LimitReached
    } else {
        SolveStatus::Optimal
    };
    Ok(result)
}
