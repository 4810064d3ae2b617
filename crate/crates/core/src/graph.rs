//! Device connectivity graphs.
//!
//! Nodes are transmons. Each stored directed edge `(control, target)` is a
//! possible entangling operation; its orientation is the CR gate direction.
//! The undirected coupling set is the symmetrization of the stored edges and
//! carries the addressability constraints.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Gate architecture that decides which constraint families apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Architecture {
    /// Cross-resonance entangling gate, transmons used as qubits.
    CrQubit,
    /// Cross-resonance entangling gate, transmons used as qutrits.
    CrQutrit,
    /// Off-resonant CZ gate (differential AC-Stark shift) with a free drive
    /// frequency per directed edge.
    CzQubit,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Self::CrQubit, Self::CrQutrit, Self::CzQubit];

    pub fn is_cz(self) -> bool {
        matches!(self, Self::CzQubit)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::CrQubit => "cr-qubit",
            Self::CrQutrit => "cr-qutrit",
            Self::CzQubit => "cz-qubit",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cr-qubit" | "cr" => Ok(Self::CrQubit),
            "cr-qutrit" | "qutrit" => Ok(Self::CrQutrit),
            "cz-qubit" | "cz" => Ok(Self::CzQubit),
            _ => Err(GraphError::UnknownArchitecture),
        }
    }
}

/// A broken [`DeviceGraph`] invariant. Violations are reported as data by
/// [`DeviceGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphViolation {
    EmptyGraph,
    SelfLoop { node: usize },
    DuplicateEdge { control: usize, target: usize },
    NodeOutOfRange { control: usize, target: usize },
    LabelCount { expected: usize, found: usize },
}

impl fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyGraph => write!(f, "graph has no nodes"),
            Self::SelfLoop { node } => write!(f, "self-loop on node {node}"),
            Self::DuplicateEdge { control, target } => {
                write!(f, "duplicate edge ({control}, {target})")
            }
            Self::NodeOutOfRange { control, target } => {
                write!(f, "edge ({control}, {target}) references a missing node")
            }
            Self::LabelCount { expected, found } => {
                write!(f, "expected {expected} labels, found {found}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(GraphViolation),
    #[error("unknown architecture (expected cr-qubit, cr-qutrit or cz-qubit)")]
    UnknownArchitecture,
}

/// A (control, target, spectator) triple: `spectator` neighbors the driven
/// transmon `control` and is not the gate partner `target`.
///
/// `edge` indexes the stored directed edge the drive belongs to. For CR the
/// triple's `(control, target)` is that edge; for CZ either endpoint may be
/// the anchor, so `(control, target)` may be the reversed edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpectatorTriple {
    pub control: usize,
    pub target: usize,
    pub spectator: usize,
    pub edge: usize,
}

/// Immutable device graph with cached adjacency.
#[derive(Debug, Clone)]
pub struct DeviceGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    labels: Option<Vec<String>>,
    neighbors: Vec<Vec<usize>>,
}

impl PartialEq for DeviceGraph {
    fn eq(&self, other: &Self) -> bool {
        self.node_count == other.node_count
            && self.edges == other.edges
            && self.labels == other.labels
    }
}

impl Eq for DeviceGraph {}

impl DeviceGraph {
    /// Builds a graph and rejects it if any invariant is broken.
    pub fn new(
        node_count: usize,
        edges: Vec<(usize, usize)>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, GraphError> {
        let graph = Self::from_parts(node_count, edges, labels);
        match graph.validate().into_iter().next() {
            Some(v) => Err(GraphError::Invalid(v)),
            None => Ok(graph),
        }
    }

    /// Builds a graph without validation. Out-of-range edges and self-loops
    /// are left out of the adjacency cache.
    pub fn from_parts(
        node_count: usize,
        edges: Vec<(usize, usize)>,
        labels: Option<Vec<String>>,
    ) -> Self {
        let mut neighbors = vec![Vec::new(); node_count];
        for &(a, b) in &edges {
            if a == b || a >= node_count || b >= node_count {
                continue;
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Self {
            node_count,
            edges,
            labels,
            neighbors,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// The oriented edge set, in storage order. Edge indices used elsewhere
    /// (drive variables, triples) refer to this order.
    pub fn directed_edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Sorted undirected neighbors of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    /// Undirected couplings `{i, j}` as sorted pairs `i < j`, each once.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, list) in self.neighbors.iter().enumerate() {
            out.extend(list.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Every coupling in both orientations.
    pub fn symmetric_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, list) in self.neighbors.iter().enumerate() {
            out.extend(list.iter().map(|&j| (i, j)));
        }
        out
    }

    pub fn edge_index(&self, control: usize, target: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == (control, target))
    }

    /// Two-coloring from a BFS rooted at the lowest node of each component,
    /// or `None` when the graph has an odd cycle.
    pub fn two_coloring(&self) -> Option<Vec<u8>> {
        bipartition(self.node_count, &self.neighbors)
    }

    /// Checks every invariant and returns the violations found.
    pub fn validate(&self) -> Vec<GraphViolation> {
        let mut out = Vec::new();
        if self.node_count == 0 {
            out.push(GraphViolation::EmptyGraph);
        }
        let mut seen: Vec<(usize, usize)> = Vec::with_capacity(self.edges.len());
        for &(a, b) in &self.edges {
            if a >= self.node_count || b >= self.node_count {
                out.push(GraphViolation::NodeOutOfRange {
                    control: a,
                    target: b,
                });
            } else if a == b {
                out.push(GraphViolation::SelfLoop { node: a });
            } else if seen.contains(&(a, b)) {
                out.push(GraphViolation::DuplicateEdge {
                    control: a,
                    target: b,
                });
            } else {
                seen.push((a, b));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.node_count {
                out.push(GraphViolation::LabelCount {
                    expected: self.node_count,
                    found: labels.len(),
                });
            }
        }
        out
    }

    /// Spectator triples of the entangling drives.
    ///
    /// For CR the drive sits on the control only, so the triples are the
    /// neighbors of the control other than the target. For CZ both endpoints
    /// are driven and each endpoint's other neighbors are included, anchored
    /// on that endpoint.
    pub fn spectator_triples(&self, arch: Architecture) -> Vec<SpectatorTriple> {
        let mut out = Vec::new();
        for (edge, &(i, j)) in self.edges.iter().enumerate() {
            if i == j || i >= self.node_count || j >= self.node_count {
                continue;
            }
            let anchors: &[(usize, usize)] = if arch.is_cz() {
                &[(i, j), (j, i)]
            } else {
                &[(i, j)]
            };
            for &(anchor, other) in anchors {
                for &k in &self.neighbors[anchor] {
                    if k != other {
                        out.push(SpectatorTriple {
                            control: anchor,
                            target: other,
                            spectator: k,
                            edge,
                        });
                    }
                }
            }
        }
        out
    }
}

pub(crate) fn bipartition(n: usize, neighbors: &[Vec<usize>]) -> Option<Vec<u8>> {
    const UNSET: u8 = u8::MAX;
    let mut color = vec![UNSET; n];
    let mut queue = Vec::new();
    for root in 0..n {
        if color[root] != UNSET {
            continue;
        }
        color[root] = 0;
        queue.clear();
        queue.push(root);
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &v in &neighbors[u] {
                if color[v] == UNSET {
                    color[v] = 1 - color[u];
                    queue.push(v);
                } else if color[v] == color[u] {
                    return None;
                }
            }
        }
    }
    Some(color)
}
