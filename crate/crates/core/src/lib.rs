//! Frequency allocation for fixed-frequency transmon processors.
//!
//! The crate covers the whole pipeline that turns a device connectivity graph
//! into a robust frequency layout and a fabrication-yield estimate:
//!
//! * [`graph`] and [`lattice`]: device graphs, spectator sets and periodic
//!   unit cells for the standard lattices.
//! * [`catalog`]: the collision-constraint catalog for the CR-qubit,
//!   CR-qutrit and CZ (differential AC-Stark) architectures, and the
//!   margin evaluator.
//! * [`solver`]: the three-step max-margin allocation, solved as a
//!   disjunctive program by branch-and-bound over an embedded simplex.
//! * [`yields`]: Monte-Carlo yield under Gaussian frequency dispersion and
//!   the unit-cell scaling law.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. Wall-clock time limits are only enforced with `std`.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

pub mod catalog;
pub mod graph;
pub mod interval;
pub mod lattice;
pub mod lp;
mod math;
pub mod solver;
pub mod yields;

pub use catalog::{
    evaluate, instantiate_constraints, is_zero_collision, AffineForm, CollisionReport,
    ConstraintInstance, ConstraintType, EvalError, FrequencyAssignment, Participants, Sense,
    ThresholdError, ThresholdTable, Var,
};
pub use graph::{Architecture, DeviceGraph, GraphError, GraphViolation, SpectatorTriple};
pub use lattice::{build_lattice, LatticeError, LatticeKind, LatticeSpec};
pub use solver::{
    anneal_fallback, solve, solve_step1, solve_step2, solve_step3, Fallback, SolveConfig,
    SolveError, SolveResult, SolveStats, SolveStatus,
};
pub use yields::{
    dispersion_for_target_yield, estimate_yield, estimate_yield_cz, scale_yield, yield_sweep,
    DispersionModel, Tally, YieldEngine, YieldError, YieldEstimate,
};
