//! Standard lattice unit cells.
//!
//! A periodic cell is an ordinary graph whose wraparound couplings are plain
//! edges, so the solver needs no tiling awareness.
//!
//! Node layout per kind:
//!
//! * chain: nodes `0..n` along the chain.
//! * square: `rows x cols` grid, node `r * cols + c`, with the squarest
//!   factorization of the cell size.
//! * hexagon (periodic): honeycomb quotient with `m = n / 2` primitive cells.
//!   Cell `x` holds sites `A(x) = 2x` and `B(x) = 2x + 1`; `A(x)` couples to
//!   `B(x)`, `B(x - 1)` and `B(x - s)` (indices mod `m`), with the smallest
//!   shift `s` that leaves no 4-cycles. The 20-site cell uses `s = 3`.
//! * heavy-hexagon (periodic): the honeycomb quotient with `m = n / 5` cells
//!   and the smallest shift giving a simple graph, with a bridge site added
//!   on every coupling. Degree-3 sites come first (`0..2m`), then one bridge
//!   per honeycomb edge. The 15-site cell is the subdivided `K_{3,3}`.
//! * hexagon / heavy-hexagon (open): brick-wall patch, vertical coupling
//!   between `(r, c)` and `(r + 1, c)` when `r + c` is even; the heavy variant
//!   subdivides every coupling.
//!
//! Edges are oriented from the sublattice that contains node 0 to the other
//! one when the graph is bipartite, and from lower to higher index otherwise.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::graph::{bipartition, DeviceGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum LatticeKind {
    Chain,
    Square,
    Hexagon,
    HeavyHexagon,
    Custom,
}

impl LatticeKind {
    pub const STANDARD: [LatticeKind; 4] = [
        Self::Chain,
        Self::Square,
        Self::Hexagon,
        Self::HeavyHexagon,
    ];

    /// Unit-cell size of the periodic cell used for the standard lattices.
    pub fn standard_cell_size(self) -> Option<usize> {
        match self {
            Self::Chain => Some(8),
            Self::Square => Some(16),
            Self::Hexagon => Some(20),
            Self::HeavyHexagon => Some(15),
            Self::Custom => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Chain => "chain",
            Self::Square => "square",
            Self::Hexagon => "hexagon",
            Self::HeavyHexagon => "heavy-hexagon",
            Self::Custom => "custom",
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LatticeKind {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chain" | "ring" => Ok(Self::Chain),
            "square" => Ok(Self::Square),
            "hexagon" | "hex" => Ok(Self::Hexagon),
            "heavy-hexagon" | "heavy-hex" => Ok(Self::HeavyHexagon),
            "custom" => Ok(Self::Custom),
            _ => Err(LatticeError::UnknownKind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub unit_cell_size: usize,
    pub periodic: bool,
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, unit_cell_size: usize, periodic: bool) -> Self {
        Self {
            kind,
            unit_cell_size,
            periodic,
        }
    }

    /// The periodic cell of a standard lattice kind.
    pub fn standard(kind: LatticeKind) -> Option<Self> {
        kind.standard_cell_size().map(|n| Self::new(kind, n, true))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("unknown lattice kind")]
    UnknownKind,
    #[error("custom lattices are loaded from a graph file, not generated")]
    CustomKind,
    #[error("lattice needs at least one site")]
    Empty,
    #[error("{kind} cell of {size} sites is incompatible: {reason}")]
    IncompatibleSize {
        kind: LatticeKind,
        size: usize,
        reason: &'static str,
    },
}

/// Generates the graph described by `spec`.
pub fn build_lattice(spec: &LatticeSpec) -> Result<DeviceGraph, LatticeError> {
    let n = spec.unit_cell_size;
    if n == 0 {
        return Err(LatticeError::Empty);
    }
    let incompatible = |reason| LatticeError::IncompatibleSize {
        kind: spec.kind,
        size: n,
        reason,
    };
    let (nodes, undirected) = match (spec.kind, spec.periodic) {
        (LatticeKind::Custom, _) => return Err(LatticeError::CustomKind),
        (LatticeKind::Chain, true) => {
            if n < 3 {
                return Err(incompatible("a periodic chain needs at least 3 sites"));
            }
            (n, (0..n).map(|i| (i, (i + 1) % n)).collect())
        }
        (LatticeKind::Chain, false) => (n, (1..n).map(|i| (i - 1, i)).collect()),
        (LatticeKind::Square, periodic) => {
            let (rows, cols) = squarest_factors(n);
            if periodic && rows < 3 {
                return Err(incompatible(
                    "a periodic square cell needs both sides of at least 3",
                ));
            }
            (n, square_edges(rows, cols, periodic))
        }
        (LatticeKind::Hexagon, true) => {
            if n % 2 != 0 {
                return Err(incompatible("a honeycomb cell has an even number of sites"));
            }
            let cells = n / 2;
            let shift = (2..cells)
                .find(|&s| honeycomb_girth_six(cells, s))
                .ok_or_else(|| incompatible("no periodic honeycomb closure without 4-cycles"))?;
            (n, honeycomb_edges(cells, shift))
        }
        (LatticeKind::Hexagon, false) => {
            let (rows, cols) = squarest_factors(n);
            (n, brick_wall_edges(rows, cols))
        }
        (LatticeKind::HeavyHexagon, true) => {
            if n % 5 != 0 || n < 15 {
                return Err(incompatible(
                    "a periodic heavy-hexagon cell has 5m sites with m >= 3",
                ));
            }
            let cells = n / 5;
            // offsets {0, 1, s} must be distinct mod m
            let shift = 2;
            let base = honeycomb_edges(cells, shift);
            (n, subdivide(2 * cells, &base))
        }
        (LatticeKind::HeavyHexagon, false) => {
            let (rows, cols) = heavy_brick_dims(n)
                .ok_or_else(|| incompatible("no open heavy-hexagon patch has this many sites"))?;
            let base = brick_wall_edges(rows, cols);
            (n, subdivide(rows * cols, &base))
        }
    };
    Ok(orient(nodes, undirected))
}

fn squarest_factors(n: usize) -> (usize, usize) {
    let mut rows = 1;
    let mut r = 1;
    while r * r <= n {
        if n % r == 0 {
            rows = r;
        }
        r += 1;
    }
    (rows, n / rows)
}

fn square_edges(rows: usize, cols: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                out.push((i, i + 1));
            } else if periodic {
                out.push((i, r * cols));
            }
            if r + 1 < rows {
                out.push((i, i + cols));
            } else if periodic {
                out.push((i, c));
            }
        }
    }
    out
}

/// A honeycomb quotient is free of 4-cycles iff the six neighbor-offset
/// differences `±1, ±s, ±(s - 1)` are pairwise distinct mod `cells`.
fn honeycomb_girth_six(cells: usize, shift: usize) -> bool {
    let m = cells as i64;
    let s = shift as i64;
    let mut diffs = [1, -1, s, -s, s - 1, 1 - s].map(|d: i64| d.rem_euclid(m));
    diffs.sort_unstable();
    diffs.windows(2).all(|w| w[0] != w[1]) && diffs[0] != 0
}

fn honeycomb_edges(cells: usize, shift: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(3 * cells);
    for x in 0..cells {
        for offset in [0, 1, shift] {
            let y = (x + cells - offset % cells) % cells;
            out.push((2 * x, 2 * y + 1));
        }
    }
    out
}

fn brick_wall_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                out.push((i, i + 1));
            }
            if r + 1 < rows && (r + c) % 2 == 0 {
                out.push((i, i + cols));
            }
        }
    }
    out
}

fn brick_wall_edge_count(rows: usize, cols: usize) -> usize {
    brick_wall_edges(rows, cols).len()
}

fn heavy_brick_dims(n: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for rows in 1..=n {
        for cols in rows..=n {
            let sites = rows * cols;
            if sites > n {
                break;
            }
            if sites + brick_wall_edge_count(rows, cols) == n {
                let better = match best {
                    Some((r, c)) => cols - rows < c - r,
                    None => true,
                };
                if better {
                    best = Some((rows, cols));
                }
            }
        }
    }
    best
}

/// Inserts a bridge site on every edge. Bridges are numbered from
/// `nodes` upward in edge order.
fn subdivide(nodes: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(2 * edges.len());
    for (k, &(a, b)) in edges.iter().enumerate() {
        let bridge = nodes + k;
        out.push((a, bridge));
        out.push((bridge, b));
    }
    out
}

fn orient(nodes: usize, undirected: Vec<(usize, usize)>) -> DeviceGraph {
    let mut pairs: Vec<(usize, usize)> = undirected
        .into_iter()
        .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    let mut neighbors = alloc::vec![Vec::new(); nodes];
    for &(a, b) in &pairs {
        neighbors[a].push(b);
        neighbors[b].push(a);
    }
    let edges = match bipartition(nodes, &neighbors) {
        Some(color) => pairs
            .into_iter()
            .map(|(a, b)| if color[a] == 0 { (a, b) } else { (b, a) })
            .collect(),
        None => pairs,
    };
    DeviceGraph::from_parts(nodes, edges, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degree_histogram(g: &DeviceGraph) -> Vec<(usize, usize)> {
        let mut h: Vec<(usize, usize)> = Vec::new();
        for i in 0..g.node_count() {
            let d = g.degree(i);
            match h.iter_mut().find(|(k, _)| *k == d) {
                Some(e) => e.1 += 1,
                None => h.push((d, 1)),
            }
        }
        h.sort_unstable();
        h
    }

    #[test]
    fn periodic_chain() {
        let g = build_lattice(&LatticeSpec::new(LatticeKind::Chain, 8, true)).unwrap();
        assert_eq!(g.node_count(), 8);
        assert_eq!(g.undirected_edges().len(), 8);
        assert_eq!(degree_histogram(&g), vec![(2, 8)]);
        // even sublattice controls
        assert!(g.directed_edges().iter().all(|&(c, _)| c % 2 == 0));
    }

    #[test]
    fn open_chain_of_two() {
        let g = build_lattice(&LatticeSpec::new(LatticeKind::Chain, 2, false)).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.directed_edges(), &[(0, 1)]);
    }

    #[test]
    fn odd_ring_orients_low_to_high() {
        let g = build_lattice(&LatticeSpec::new(LatticeKind::Chain, 5, true)).unwrap();
        assert!(g.directed_edges().iter().all(|&(a, b)| a < b));
    }

    #[test]
    fn standard_cells() {
        let expect = [
            (LatticeKind::Chain, vec![(2, 8)], 8),
            (LatticeKind::Square, vec![(4, 16)], 32),
            (LatticeKind::Hexagon, vec![(3, 20)], 30),
            (LatticeKind::HeavyHexagon, vec![(2, 9), (3, 6)], 18),
        ];
        for (kind, hist, edges) in expect {
            let g = build_lattice(&LatticeSpec::standard(kind).unwrap()).unwrap();
            assert!(g.validate().is_empty(), "{kind}");
            assert_eq!(degree_histogram(&g), hist, "{kind}");
            assert_eq!(g.directed_edges().len(), edges, "{kind}");
            assert!(g.two_coloring().is_some(), "{kind}");
        }
    }

    #[test]
    fn incompatible_sizes() {
        for (kind, n) in [
            (LatticeKind::Chain, 2),
            (LatticeKind::Square, 10),
            (LatticeKind::Hexagon, 7),
            (LatticeKind::HeavyHexagon, 12),
        ] {
            assert!(matches!(
                build_lattice(&LatticeSpec::new(kind, n, true)),
                Err(LatticeError::IncompatibleSize { .. })
            ));
        }
        assert_eq!(
            build_lattice(&LatticeSpec::new(LatticeKind::Custom, 4, false)),
            Err(LatticeError::CustomKind)
        );
        assert_eq!("kagome".parse::<LatticeKind>(), Err(LatticeError::UnknownKind));
    }

    #[test]
    fn open_patches() {
        let g = build_lattice(&LatticeSpec::new(LatticeKind::Square, 6, false)).unwrap();
        assert_eq!(g.undirected_edges().len(), 7);
        let g = build_lattice(&LatticeSpec::new(LatticeKind::Hexagon, 12, false)).unwrap();
        assert!((0..12).all(|i| g.degree(i) <= 3));
        let g = build_lattice(&LatticeSpec::new(LatticeKind::HeavyHexagon, 12, false)).unwrap();
        assert_eq!(g.node_count(), 12);
        assert!((0..12).all(|i| g.degree(i) <= 3));
    }
}
