//! Collision-constraint catalog and margin evaluation.
//!
//! Every constraint is an affine form over node frequencies, node
//! anharmonicities and (for CZ) per-edge drive frequencies, compared against
//! a threshold. Signed margins are `|e| - δ` for avoided crossings and
//! `e - δ` for one-sided bounds; a margin of exactly zero is satisfied.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use arrayvec::ArrayVec;

use crate::graph::{Architecture, DeviceGraph, SpectatorTriple};
use crate::math::abs;

/// Constraint families. The first nine are the qubit catalog; the `Q*` and
/// `L*` families are added for the qutrit architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConstraintType {
    A1,
    A2,
    C1,
    E1,
    E2,
    D1,
    S1,
    S2,
    T1,
    /// Single-qutrit 1→2 drive against a neighbor's 0→1 transition.
    QA1,
    /// Single-qutrit 1→2 drive against a neighbor's 1→2 transition.
    QA2,
    /// 1→2 entangling drive against the control's transitions.
    QE1,
    QE2,
    QD1,
    /// 1→2 entangling drive against spectators.
    QS1,
    QS2,
    QT1,
    /// Single-transmon drives against a neighbor's 2→3 transition.
    L1,
    /// Entangling drives against the 2→3 transition of the control and the
    /// spectators.
    L2,
}

impl ConstraintType {
    pub const ALL: [ConstraintType; 19] = [
        Self::A1,
        Self::A2,
        Self::C1,
        Self::E1,
        Self::E2,
        Self::D1,
        Self::S1,
        Self::S2,
        Self::T1,
        Self::QA1,
        Self::QA2,
        Self::QE1,
        Self::QE2,
        Self::QD1,
        Self::QS1,
        Self::QS2,
        Self::QT1,
        Self::L1,
        Self::L2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::A1 => "A1",
            Self::A2 => "A2",
            Self::C1 => "C1",
            Self::E1 => "E1",
            Self::E2 => "E2",
            Self::D1 => "D1",
            Self::S1 => "S1",
            Self::S2 => "S2",
            Self::T1 => "T1",
            Self::QA1 => "QA1",
            Self::QA2 => "QA2",
            Self::QE1 => "QE1",
            Self::QE2 => "QE2",
            Self::QD1 => "QD1",
            Self::QS1 => "QS1",
            Self::QS2 => "QS2",
            Self::QT1 => "QT1",
            Self::L1 => "L1",
            Self::L2 => "L2",
        }
    }

    /// C1 is the gate-speed (straddling) requirement. It has no collision
    /// bound of its own; every other family is a frequency collision.
    pub fn is_collision(self) -> bool {
        !matches!(self, Self::C1)
    }

    /// Branching priority group: addressability, gate window, entanglement,
    /// two-photon, spectators, T-type, leakage.
    pub fn priority(self) -> u8 {
        match self {
            Self::A1 | Self::A2 | Self::QA1 | Self::QA2 => 0,
            Self::C1 => 1,
            Self::E1 | Self::E2 | Self::QE1 | Self::QE2 => 2,
            Self::D1 | Self::QD1 => 3,
            Self::S1 | Self::S2 | Self::QS1 | Self::QS2 => 4,
            Self::T1 | Self::QT1 => 5,
            Self::L1 | Self::L2 => 6,
        }
    }
}

impl fmt::Display for ConstraintType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThresholdError {
    #[error("threshold {name} must be finite and strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

/// Collision thresholds in MHz plus the architecture selector.
///
/// Defaults are the bounds of the qubit constraint catalog: A1 17, A2 30,
/// E1 17, E2 30, D1 2, S1 17, S2 25, T1 17 MHz, and a 5 MHz gate-window
/// margin for C1. Qutrit families reuse the value of their qubit analog.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ThresholdTable {
    pub architecture: Architecture,
    #[cfg_attr(feature = "serde", serde(rename = "A1"))]
    pub delta_a1: f64,
    #[cfg_attr(feature = "serde", serde(rename = "A2"))]
    pub delta_a2: f64,
    #[cfg_attr(feature = "serde", serde(rename = "C1"))]
    pub delta_c1: f64,
    #[cfg_attr(feature = "serde", serde(rename = "E1"))]
    pub delta_e1: f64,
    #[cfg_attr(feature = "serde", serde(rename = "E2"))]
    pub delta_e2: f64,
    #[cfg_attr(feature = "serde", serde(rename = "D1"))]
    pub delta_d1: f64,
    #[cfg_attr(feature = "serde", serde(rename = "S1"))]
    pub delta_s1: f64,
    #[cfg_attr(feature = "serde", serde(rename = "S2"))]
    pub delta_s2: f64,
    #[cfg_attr(feature = "serde", serde(rename = "T1"))]
    pub delta_t1: f64,
}

impl Default for ThresholdTable {
    fn default() -> Self {
        Self {
            architecture: Architecture::CrQubit,
            delta_a1: 17.0,
            delta_a2: 30.0,
            delta_c1: 5.0,
            delta_e1: 17.0,
            delta_e2: 30.0,
            delta_d1: 2.0,
            delta_s1: 17.0,
            delta_s2: 25.0,
            delta_t1: 17.0,
        }
    }
}

impl ThresholdTable {
    pub fn for_architecture(architecture: Architecture) -> Self {
        Self {
            architecture,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ThresholdError> {
        let named = [
            ("A1", self.delta_a1),
            ("A2", self.delta_a2),
            ("C1", self.delta_c1),
            ("E1", self.delta_e1),
            ("E2", self.delta_e2),
            ("D1", self.delta_d1),
            ("S1", self.delta_s1),
            ("S2", self.delta_s2),
            ("T1", self.delta_t1),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(ThresholdError::NonPositive { name, value });
            }
        }
        Ok(())
    }

    pub fn delta(&self, ctype: ConstraintType) -> f64 {
        use ConstraintType::*;
        match ctype {
            A1 | QA1 => self.delta_a1,
            A2 | QA2 => self.delta_a2,
            C1 => self.delta_c1,
            E1 | QE1 => self.delta_e1,
            E2 | QE2 => self.delta_e2,
            D1 | QD1 => self.delta_d1,
            S1 | QS1 => self.delta_s1,
            S2 | QS2 | L1 | L2 => self.delta_s2,
            T1 | QT1 => self.delta_t1,
        }
    }

    pub fn max_delta(&self) -> f64 {
        ConstraintType::ALL
            .iter()
            .map(|&t| self.delta(t))
            .fold(0.0, f64::max)
    }
}

/// A variable of the allocation problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Freq(usize),
    Anharm(usize),
    /// Drive frequency of the directed edge with this index (CZ only).
    Drive(usize),
}

pub const MAX_TERMS: usize = 6;

/// `constant + Σ coeff · var`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineForm {
    pub constant: f64,
    pub terms: ArrayVec<(Var, f64), MAX_TERMS>,
}

impl AffineForm {
    pub fn constant(constant: f64) -> Self {
        Self {
            constant,
            terms: ArrayVec::new(),
        }
    }

    /// Adds `coeff · var`, merging repeated variables and dropping zeros.
    pub fn plus(mut self, coeff: f64, var: Var) -> Self {
        if let Some(pos) = self.terms.iter().position(|(v, _)| *v == var) {
            self.terms[pos].1 += coeff;
            if self.terms[pos].1 == 0.0 {
                self.terms.remove(pos);
            }
        } else if coeff != 0.0 {
            self.terms.push((var, coeff));
        }
        self
    }

    pub fn negated(&self) -> Self {
        Self {
            constant: -self.constant,
            terms: self.terms.iter().map(|&(v, c)| (v, -c)).collect(),
        }
    }

    pub fn coefficient(&self, var: Var) -> f64 {
        self.terms
            .iter()
            .find(|(v, _)| *v == var)
            .map_or(0.0, |&(_, c)| c)
    }

    pub fn eval(&self, mut value: impl FnMut(Var) -> f64) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(v, c)| acc + c * value(v))
    }

    pub fn drive_edge(&self) -> Option<usize> {
        self.terms.iter().find_map(|(v, _)| match v {
            Var::Drive(e) => Some(*e),
            _ => None,
        })
    }
}

/// How an expression is compared with its threshold.
#[derive(Debug, Clone, PartialEq)]
pub enum Sense {
    /// `|e| ≥ δ`: the expression must avoid the open band `(-δ, δ)`.
    Avoid,
    /// `e ≥ δ`. Upper bounds are written on the negated expression.
    AtLeast,
    /// `e ≥ δ` or `other ≥ δ`.
    AnyAtLeast(AffineForm),
}

/// Which graph elements a constraint instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Participants {
    /// A coupled pair; `a` is the driven transmon for ordered families.
    Pair { a: usize, b: usize },
    /// A directed edge, anchored on the driven endpoint `control`.
    Edge {
        edge: usize,
        control: usize,
        target: usize,
    },
    Triple(SpectatorTriple),
}

impl Participants {
    pub fn edge(&self) -> Option<usize> {
        match self {
            Self::Pair { .. } => None,
            Self::Edge { edge, .. } => Some(*edge),
            Self::Triple(t) => Some(t.edge),
        }
    }
}

impl fmt::Display for Participants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pair { a, b } => write!(f, "{a}-{b}"),
            Self::Edge {
                control, target, ..
            } => write!(f, "{control}->{target}"),
            Self::Triple(t) => write!(f, "{}->{}|{}", t.control, t.target, t.spectator),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintInstance {
    pub ctype: ConstraintType,
    pub participants: Participants,
    pub expression: AffineForm,
    pub sense: Sense,
    pub threshold: f64,
}

impl ConstraintInstance {
    /// The one-sided forms whose disjunction is the constraint: each arm
    /// must reach the threshold for the constraint to hold on that side.
    pub fn arms(&self) -> ArrayVec<AffineForm, 2> {
        let mut out = ArrayVec::new();
        out.push(self.expression.clone());
        match &self.sense {
            Sense::Avoid => out.push(self.expression.negated()),
            Sense::AtLeast => {}
            Sense::AnyAtLeast(other) => out.push(other.clone()),
        }
        out
    }

    pub fn is_disjunctive(&self) -> bool {
        !matches!(self.sense, Sense::AtLeast)
    }

    pub fn drive_edge(&self) -> Option<usize> {
        self.expression.drive_edge().or(match &self.sense {
            Sense::AnyAtLeast(other) => other.drive_edge(),
            _ => None,
        })
    }

    /// Signed margin given variable values.
    pub fn margin_with(&self, mut value: impl FnMut(Var) -> f64) -> f64 {
        let e = self.expression.eval(&mut value);
        let reach = match &self.sense {
            Sense::Avoid => abs(e),
            Sense::AtLeast => e,
            Sense::AnyAtLeast(other) => f64::max(e, other.eval(&mut value)),
        };
        reach - self.threshold
    }

    fn variables(&self) -> impl Iterator<Item = Var> + '_ {
        let other = match &self.sense {
            Sense::AnyAtLeast(o) => Some(o),
            _ => None,
        };
        self.expression
            .terms
            .iter()
            .chain(other.into_iter().flat_map(|o| o.terms.iter()))
            .map(|&(v, _)| v)
    }
}

/// Emits every constraint instance for `graph` under `table.architecture`.
///
/// Stored directed edges are the oriented set: C1, E, D and spectator
/// families run over them. A1 runs once per coupling and A2 over both
/// orders of each coupling. For CR the drive is substituted by the target
/// frequency; for CZ each directed edge gets a free drive variable.
pub fn instantiate_constraints(
    graph: &DeviceGraph,
    table: &ThresholdTable,
) -> Vec<ConstraintInstance> {
    use ConstraintType::*;
    use Var::{Anharm, Drive, Freq};

    let arch = table.architecture;
    let mut out = Vec::new();
    let mut push = |ctype: ConstraintType, participants, expression, sense| {
        out.push(ConstraintInstance {
            ctype,
            participants,
            expression,
            sense,
            threshold: table.delta(ctype),
        });
    };
    let diff = |a: Var, b: Var| AffineForm::constant(0.0).plus(1.0, a).plus(-1.0, b);

    let pairs = graph.undirected_edges();
    let ordered = graph.symmetric_edges();
    let edges = graph.directed_edges();
    let triples = graph.spectator_triples(arch);

    for &(a, b) in &pairs {
        push(A1, Participants::Pair { a, b }, diff(Freq(a), Freq(b)), Sense::Avoid);
    }
    for &(a, b) in &ordered {
        let e = diff(Freq(a), Freq(b)).plus(-1.0, Anharm(b));
        push(A2, Participants::Pair { a, b }, e, Sense::Avoid);
    }

    // Drive of edge `e`: the target frequency for CR, a free variable for CZ.
    let drive = |e: usize| -> Var {
        if arch.is_cz() {
            Drive(e)
        } else {
            Freq(edges[e].1)
        }
    };
    let anchors = |e: usize| -> ArrayVec<(usize, usize), 2> {
        let (i, j) = edges[e];
        let mut v = ArrayVec::new();
        v.push((i, j));
        if arch.is_cz() {
            v.push((j, i));
        }
        v
    };

    for (e, &(i, j)) in edges.iter().enumerate() {
        let edge = |control, target| Participants::Edge {
            edge: e,
            control,
            target,
        };
        if arch.is_cz() {
            // drive strictly inside the band spanned by the two qubits
            push(
                C1,
                edge(i, j),
                diff(Drive(e), Freq(i)),
                Sense::AnyAtLeast(diff(Drive(e), Freq(j))),
            );
            push(
                C1,
                edge(i, j),
                diff(Freq(i), Drive(e)),
                Sense::AnyAtLeast(diff(Freq(j), Drive(e))),
            );
        } else {
            // straddling: f_i + α_i ≤ f_d ≤ f_i with f_d = f_j
            push(
                C1,
                edge(i, j),
                diff(Freq(j), Freq(i)).plus(-1.0, Anharm(i)),
                Sense::AtLeast,
            );
            push(C1, edge(i, j), diff(Freq(i), Freq(j)), Sense::AtLeast);
        }
    }
    for e in 0..edges.len() {
        for (c, t) in anchors(e) {
            let p = Participants::Edge {
                edge: e,
                control: c,
                target: t,
            };
            push(E1, p, diff(drive(e), Freq(c)), Sense::Avoid);
        }
    }
    for e in 0..edges.len() {
        for (c, t) in anchors(e) {
            let p = Participants::Edge {
                edge: e,
                control: c,
                target: t,
            };
            let form = diff(drive(e), Freq(c)).plus(-1.0, Anharm(c));
            push(E2, p, form, Sense::Avoid);
        }
    }
    for e in 0..edges.len() {
        for (c, t) in anchors(e) {
            let p = Participants::Edge {
                edge: e,
                control: c,
                target: t,
            };
            let form = diff(drive(e), Freq(c)).plus(-0.5, Anharm(c));
            push(D1, p, form, Sense::Avoid);
        }
    }
    for t in &triples {
        let form = diff(drive(t.edge), Freq(t.spectator));
        push(S1, Participants::Triple(*t), form, Sense::Avoid);
    }
    for t in &triples {
        let form = diff(drive(t.edge), Freq(t.spectator)).plus(-1.0, Anharm(t.spectator));
        push(S2, Participants::Triple(*t), form, Sense::Avoid);
    }
    for t in &triples {
        let form = AffineForm::constant(0.0)
            .plus(1.0, drive(t.edge))
            .plus(1.0, Freq(t.spectator))
            .plus(-2.0, Freq(t.control))
            .plus(-1.0, Anharm(t.control));
        push(T1, Participants::Triple(*t), form, Sense::Avoid);
    }

    if arch == Architecture::CrQutrit {
        // single-qutrit drive at the 1→2 transition f_a + α_a
        let one_two = |a: usize| AffineForm::constant(0.0).plus(1.0, Freq(a)).plus(1.0, Anharm(a));
        // entangling 1→2 drive at the target's 1→2 transition
        let ent = |e: usize| one_two(edges[e].1);
        let minus = |mut f: AffineForm, terms: &[(f64, Var)]| {
            for &(c, v) in terms {
                f = f.plus(-c, v);
            }
            f
        };
        for &(a, b) in &ordered {
            let p = Participants::Pair { a, b };
            push(QA1, p, minus(one_two(a), &[(1.0, Freq(b))]), Sense::Avoid);
        }
        for &(a, b) in &ordered {
            let p = Participants::Pair { a, b };
            let f = minus(one_two(a), &[(1.0, Freq(b)), (1.0, Anharm(b))]);
            push(QA2, p, f, Sense::Avoid);
        }
        for &(a, b) in &ordered {
            let p = Participants::Pair { a, b };
            let leak = [(1.0, Freq(b)), (2.0, Anharm(b))];
            let zero_one = AffineForm::constant(0.0).plus(1.0, Freq(a));
            push(L1, p, minus(zero_one, &leak), Sense::Avoid);
            push(L1, p, minus(one_two(a), &leak), Sense::Avoid);
        }
        for (e, &(i, j)) in edges.iter().enumerate() {
            let p = Participants::Edge {
                edge: e,
                control: i,
                target: j,
            };
            push(QE1, p, minus(ent(e), &[(1.0, Freq(i))]), Sense::Avoid);
            let f = minus(ent(e), &[(1.0, Freq(i)), (1.0, Anharm(i))]);
            push(QE2, p, f, Sense::Avoid);
            let f = minus(ent(e), &[(1.0, Freq(i)), (0.5, Anharm(i))]);
            push(QD1, p, f, Sense::Avoid);
        }
        for t in &triples {
            let p = Participants::Triple(*t);
            let k = t.spectator;
            push(QS1, p, minus(ent(t.edge), &[(1.0, Freq(k))]), Sense::Avoid);
            let f = minus(ent(t.edge), &[(1.0, Freq(k)), (1.0, Anharm(k))]);
            push(QS2, p, f, Sense::Avoid);
            let f = ent(t.edge)
                .plus(1.0, Freq(k))
                .plus(-2.0, Freq(t.control))
                .plus(-1.0, Anharm(t.control));
            push(QT1, p, f, Sense::Avoid);
        }
        for (e, &(i, j)) in edges.iter().enumerate() {
            let p = Participants::Edge {
                edge: e,
                control: i,
                target: j,
            };
            let leak = [(1.0, Freq(i)), (2.0, Anharm(i))];
            let zero_one = AffineForm::constant(0.0).plus(1.0, Freq(j));
            push(L2, p, minus(zero_one, &leak), Sense::Avoid);
            push(L2, p, minus(ent(e), &leak), Sense::Avoid);
        }
        for t in &triples {
            let p = Participants::Triple(*t);
            let leak = [(1.0, Freq(t.spectator)), (2.0, Anharm(t.spectator))];
            let zero_one = AffineForm::constant(0.0).plus(1.0, Freq(t.target));
            push(L2, p, minus(zero_one, &leak), Sense::Avoid);
            push(L2, p, minus(ent(t.edge), &leak), Sense::Avoid);
        }
    }
    out
}

/// Per-node frequencies and anharmonicities, plus per-edge drives for CZ.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrequencyAssignment {
    pub freqs: Vec<f64>,
    pub anharms: Vec<f64>,
    /// Indexed like the graph's directed edges. Unused for CR, where the
    /// drive is the target frequency.
    #[cfg_attr(feature = "serde", serde(default))]
    pub drives: Option<Vec<f64>>,
}

impl FrequencyAssignment {
    /// Frequencies with one shared anharmonicity and no drives.
    pub fn uniform(freqs: Vec<f64>, alpha: f64) -> Self {
        let anharms = alloc::vec![alpha; freqs.len()];
        Self {
            freqs,
            anharms,
            drives: None,
        }
    }

    pub fn with_drives(mut self, drives: Vec<f64>) -> Self {
        self.drives = Some(drives);
        self
    }

    pub fn value(&self, var: Var) -> Option<f64> {
        match var {
            Var::Freq(i) => self.freqs.get(i).copied(),
            Var::Anharm(i) => self.anharms.get(i).copied(),
            Var::Drive(e) => self.drives.as_ref().and_then(|d| d.get(e).copied()),
        }
    }

    /// True when every node frequency lies in `[lo, hi]`.
    pub fn within_band(&self, lo: f64, hi: f64) -> bool {
        self.freqs.iter().all(|&f| f >= lo && f <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("no drive frequency for edge {edge}")]
    MissingDrive { edge: usize },
    #[error("no frequency or anharmonicity for node {node}")]
    MissingNode { node: usize },
}

/// Outcome of checking an assignment against a constraint list.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionReport {
    /// Violation count per family, with an entry for every family present.
    pub counts: BTreeMap<ConstraintType, usize>,
    /// Signed margin per instance, aligned with the instance list.
    pub margins: Vec<f64>,
    /// `+∞` for an empty instance list.
    pub min_margin: f64,
    pub min_margin_instance: Option<usize>,
}

impl CollisionReport {
    pub fn is_zero_collision(&self) -> bool {
        self.min_margin >= 0.0
    }

    pub fn total_violations(&self) -> usize {
        self.counts.values().sum()
    }
}

/// Evaluates every instance at `assignment`.
pub fn evaluate(
    assignment: &FrequencyAssignment,
    instances: &[ConstraintInstance],
) -> Result<CollisionReport, EvalError> {
    let mut counts = BTreeMap::new();
    let mut margins = Vec::with_capacity(instances.len());
    let mut min_margin = f64::INFINITY;
    let mut min_margin_instance = None;
    for (idx, inst) in instances.iter().enumerate() {
        for var in inst.variables() {
            if assignment.value(var).is_none() {
                return Err(match var {
                    Var::Drive(edge) => EvalError::MissingDrive { edge },
                    Var::Freq(node) | Var::Anharm(node) => EvalError::MissingNode { node },
                });
            }
        }
        let m = inst.margin_with(|v| assignment.value(v).unwrap_or(f64::NAN));
        let count = counts.entry(inst.ctype).or_insert(0usize);
        if m < 0.0 {
            *count += 1;
        }
        if m < min_margin {
            min_margin = m;
            min_margin_instance = Some(idx);
        }
        margins.push(m);
    }
    Ok(CollisionReport {
        counts,
        margins,
        min_margin,
        min_margin_instance,
    })
}

pub fn is_zero_collision(
    assignment: &FrequencyAssignment,
    instances: &[ConstraintInstance],
) -> Result<bool, EvalError> {
    evaluate(assignment, instances).map(|r| r.is_zero_collision())
}

/// Instance count per family, in family order.
pub fn family_counts(instances: &[ConstraintInstance]) -> BTreeMap<ConstraintType, usize> {
    let mut out = BTreeMap::new();
    for inst in instances {
        *out.entry(inst.ctype).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_way_pair(arch: Architecture) -> (DeviceGraph, Vec<ConstraintInstance>) {
        let g = DeviceGraph::new(2, vec![(0, 1), (1, 0)], None).unwrap();
        let inst = instantiate_constraints(&g, &ThresholdTable::for_architecture(arch));
        (g, inst)
    }

    #[test]
    fn two_way_pair_counts() {
        let (_, inst) = two_way_pair(Architecture::CrQubit);
        let c = family_counts(&inst);
        use ConstraintType::*;
        assert_eq!(c.get(&A1), Some(&1));
        assert_eq!(c.get(&A2), Some(&2));
        assert_eq!(c.get(&C1), Some(&4));
        assert_eq!(c.get(&E1), Some(&2));
        assert_eq!(c.get(&E2), Some(&2));
        assert_eq!(c.get(&D1), Some(&2));
        assert_eq!(c.get(&S1), None);
        assert_eq!(c.get(&T1), None);
    }

    #[test]
    fn equal_frequencies_collide_on_a1() {
        let (_, inst) = two_way_pair(Architecture::CrQubit);
        let a = FrequencyAssignment::uniform(vec![5000.0, 5000.0], -270.0);
        let r = evaluate(&a, &inst).unwrap();
        let a1 = inst.iter().position(|i| i.ctype == ConstraintType::A1).unwrap();
        assert_eq!(r.margins[a1], -17.0);
        assert!(r.counts[&ConstraintType::A1] >= 1);
        assert!(!r.is_zero_collision());
    }

    #[test]
    fn straddling_margins() {
        let (_, inst) = two_way_pair(Architecture::CrQubit);
        let a = FrequencyAssignment::uniform(vec![5000.0, 5100.0], -270.0);
        let r = evaluate(&a, &inst).unwrap();
        let c1: Vec<(Participants, f64)> = inst
            .iter()
            .zip(&r.margins)
            .filter(|(i, _)| i.ctype == ConstraintType::C1)
            .map(|(i, &m)| (i.participants, m))
            .collect();
        // edge 0 = (0,1): f_d = 5100 lies above f_0
        assert_eq!(c1[0].1, 5100.0 - 5000.0 + 270.0 - 5.0);
        assert_eq!(c1[1].1, -100.0 - 5.0);
        // edge 1 = (1,0): f_d = 5000 inside [4830, 5100]
        assert_eq!(c1[2].1, 170.0 - 5.0);
        assert_eq!(c1[3].1, 100.0 - 5.0);
        let a2 = inst
            .iter()
            .zip(&r.margins)
            .find(|(i, _)| {
                i.ctype == ConstraintType::A2 && i.participants == Participants::Pair { a: 0, b: 1 }
            })
            .unwrap();
        assert_eq!(*a2.1, 140.0);
    }

    #[test]
    fn empty_list_is_zero_collision() {
        let a = FrequencyAssignment::uniform(vec![5000.0], -270.0);
        assert!(is_zero_collision(&a, &[]).unwrap());
    }

    #[test]
    fn missing_drive_is_an_error() {
        let (_, inst) = two_way_pair(Architecture::CzQubit);
        let a = FrequencyAssignment::uniform(vec![4900.0, 5100.0], -270.0);
        assert!(matches!(
            evaluate(&a, &inst),
            Err(EvalError::MissingDrive { .. })
        ));
        let a = a.with_drives(vec![5000.0, 5000.0]);
        assert!(evaluate(&a, &inst).is_ok());
    }

    #[test]
    fn cz_band_instance() {
        let g = DeviceGraph::new(2, vec![(0, 1)], None).unwrap();
        let inst = instantiate_constraints(&g, &ThresholdTable::for_architecture(Architecture::CzQubit));
        let c1: Vec<_> = inst.iter().filter(|i| i.ctype == ConstraintType::C1).collect();
        assert_eq!(c1.len(), 2);
        let a = FrequencyAssignment::uniform(vec![5100.0, 4900.0], -270.0).with_drives(vec![5003.0]);
        let lo = c1[0].margin_with(|v| a.value(v).unwrap());
        let hi = c1[1].margin_with(|v| a.value(v).unwrap());
        assert_eq!(lo, 103.0 - 5.0);
        assert_eq!(hi, 97.0 - 5.0);
        let outside = a.clone().with_drives(vec![5102.0]);
        assert!(c1[1].margin_with(|v| outside.value(v).unwrap()) < 0.0);
    }

    #[test]
    fn threshold_validation() {
        let mut t = ThresholdTable::default();
        assert!(t.validate().is_ok());
        t.delta_d1 = 0.0;
        assert!(t.validate().is_err());
        t.delta_d1 = f64::NAN;
        assert!(t.validate().is_err());
    }
}
