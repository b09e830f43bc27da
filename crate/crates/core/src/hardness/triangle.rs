//! The graph `G_x` behind degree, neighbor, pair and edge-sample queries.
//!
//! For a bit string `x` of length `M = (√m/2)²` the graph has `2√m`
//! vertices `u_1..u_√m`, `v_1..v_√m` split into halves `U1, U2, V1, V2` of
//! size `√m/2`, and `m = 4M` edges:
//!
//! - all of `U1 × V1` and all of `U2 × V2`;
//! - for each pair `(i, j)`, `i ∈ [1, √m/2]`, `j ∈ [√m/2+1, √m]`: the red
//!   edges `(u_i, u_j)` and `(v_i, v_j)` when `x_ij = 1`, otherwise the
//!   cross edges `(u_i, v_j)` and `(v_i, u_j)`.
//!
//! Bit `(i, j)` lives at position `(i-1)·(√m/2) + (j - √m/2 - 1)`. Every
//! vertex has degree `√m`. Neighbor ranks `1..=√m/2` enumerate the
//! complete-bipartite partner half in index order; ranks above enumerate the
//! routed edge of each opposite-half index in order.
//!
//! Nothing is materialised: every answer is computed from `x`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, OracleError, Result};
use crate::hardness::ptp::BitString;
use crate::rng::RngHandle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    U,
    V,
}

impl Side {
    fn other(self) -> Self {
        match self {
            Side::U => Side::V,
            Side::V => Side::U,
        }
    }
}

/// `u_index` or `v_index`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub side: Side,
    pub index: usize,
}

impl Vertex {
    pub fn u(index: usize) -> Self {
        Self { side: Side::U, index }
    }

    pub fn v(index: usize) -> Self {
        Self { side: Side::V, index }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.side {
            Side::U => 'u',
            Side::V => 'v',
        };
        write!(f, "{s}{}", self.index)
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse(format!("vertex must look like u3 or v5, got {s:?}"));
        let mut chars = s.chars();
        let side = match chars.next() {
            Some('u') => Side::U,
            Some('v') => Side::V,
            _ => return Err(err()),
        };
        let index = chars.as_str().parse().map_err(|_| err())?;
        Ok(Self { side, index })
    }
}

/// An undirected edge with endpoints in vertex order.
pub type Edge = (Vertex, Vertex);

pub fn edge(a: Vertex, b: Vertex) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryCounts {
    pub degree: u64,
    pub neighbor: u64,
    pub pair: u64,
    pub edge_sample: u64,
}

impl QueryCounts {
    pub fn total(&self) -> u64 {
        self.degree + self.neighbor + self.pair + self.edge_sample
    }
}

#[derive(Debug, Clone)]
pub struct TriangleOracle {
    x: BitString,
    root_m: usize,
    half: usize,
    counts: QueryCounts,
    budget: Option<u64>,
}

impl TriangleOracle {
    /// Requires `|x| = M` to be a positive perfect square; then `√m = 2√M`.
    pub fn new(x: BitString) -> Result<Self> {
        let len = x.len();
        let half = (len as f64).sqrt().round() as usize;
        if len == 0 || half * half != len {
            return Err(Error::invalid(format!(
                "G_x needs |x| to be a positive perfect square, got {len}"
            )));
        }
        Ok(Self {
            x,
            root_m: 2 * half,
            half,
            counts: QueryCounts::default(),
            budget: None,
        })
    }

    /// Caps the total number of answered queries across all kinds.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn x(&self) -> &BitString {
        &self.x
    }

    /// Number of edges.
    pub fn m(&self) -> u64 {
        (self.root_m * self.root_m) as u64
    }

    pub fn root_m(&self) -> usize {
        self.root_m
    }

    /// Number of vertices, `2√m`.
    pub fn num_vertices(&self) -> usize {
        2 * self.root_m
    }

    pub fn counts(&self) -> QueryCounts {
        self.counts
    }

    pub fn total_queries(&self) -> u64 {
        self.counts.total()
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        let r = self.root_m;
        (1..=r).map(Vertex::u).chain((1..=r).map(Vertex::v))
    }

    /// `x_ij` for `i` in the first half and `j` in the second.
    pub fn bit(&self, i: usize, j: usize) -> bool {
        debug_assert!((1..=self.half).contains(&i) && (self.half + 1..=self.root_m).contains(&j));
        self.x.get((i - 1) * self.half + (j - self.half - 1))
    }

    fn in_first_half(&self, v: Vertex) -> bool {
        v.index <= self.half
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v.index == 0 || v.index > self.root_m {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        Ok(())
    }

    fn charge(&mut self, kind: fn(&mut QueryCounts) -> &mut u64) -> Result<()> {
        if let Some(budget) = self.budget {
            if self.counts.total() >= budget {
                return Err(OracleError::BudgetExhausted { budget }.into());
            }
        }
        *kind(&mut self.counts) += 1;
        Ok(())
    }

    pub fn degree(&mut self, v: Vertex) -> Result<u64> {
        self.check_vertex(v)?;
        self.charge(|c| &mut c.degree)?;
        Ok(self.root_m as u64)
    }

    /// The `rank`-th neighbor (1-based), `None` past the degree.
    pub fn neighbor(&mut self, v: Vertex, rank: usize) -> Result<Option<Vertex>> {
        self.check_vertex(v)?;
        let max = self.num_vertices();
        if rank == 0 || rank > max {
            return Err(Error::InvalidRank { rank, max });
        }
        self.charge(|c| &mut c.neighbor)?;
        Ok(self.neighbor_uncounted(v, rank))
    }

    fn neighbor_uncounted(&self, v: Vertex, rank: usize) -> Option<Vertex> {
        let half = self.half;
        if rank > self.root_m {
            return None;
        }
        let same = v.side;
        let other = same.other();
        let first = self.in_first_half(v);
        Some(if rank <= half {
            // partner block: first half pairs with first half, second with second
            let offset = if first { 0 } else { half };
            Vertex {
                side: other,
                index: offset + rank,
            }
        } else if first {
            let j = rank;
            let side = if self.bit(v.index, j) { same } else { other };
            Vertex { side, index: j }
        } else {
            let i = rank - half;
            let side = if self.bit(i, v.index) { same } else { other };
            Vertex { side, index: i }
        })
    }

    pub fn pair(&mut self, a: Vertex, b: Vertex) -> Result<bool> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Err(Error::SelfPair(a.to_string()));
        }
        self.charge(|c| &mut c.pair)?;
        Ok(self.adjacent(a, b))
    }

    fn adjacent(&self, a: Vertex, b: Vertex) -> bool {
        let (fa, fb) = (self.in_first_half(a), self.in_first_half(b));
        if fa == fb {
            // U1-V1 and U2-V2 are complete; inside one block nothing
            return a.side != b.side;
        }
        let (lo, hi) = if fa { (a, b) } else { (b, a) };
        let bit = self.bit(lo.index, hi.index);
        if lo.side == hi.side {
            bit
        } else {
            !bit
        }
    }

    /// A uniform vertex, then a uniform neighbor of it. `G_x` is regular,
    /// so the edge is uniform over all edges.
    pub fn edge_sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Edge> {
        self.charge(|c| &mut c.edge_sample)?;
        let n = self.num_vertices();
        let idx = rng.random_range(0..n);
        let v = if idx < self.root_m {
            Vertex::u(idx + 1)
        } else {
            Vertex::v(idx - self.root_m + 1)
        };
        let rank = rng.random_range(1..=self.root_m);
        let w = self.neighbor_uncounted(v, rank).expect("rank within degree");
        Ok(edge(v, w))
    }

    /// Edge sample drawing from a handle's stream.
    pub fn edge_sample_with(&mut self, handle: &RngHandle) -> Result<Edge> {
        self.edge_sample(&mut handle.rng())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RedEdge {
    pub side: Side,
    pub i: usize,
    pub j: usize,
}

impl RedEdge {
    pub fn endpoints(&self) -> Edge {
        edge(
            Vertex {
                side: self.side,
                index: self.i,
            },
            Vertex {
                side: self.side,
                index: self.j,
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedEdgeStats {
    pub red_edges: Vec<RedEdge>,
    /// Red degree of `u_1..u_√m` followed by `v_1..v_√m`.
    pub reddeg: Vec<u64>,
    pub triangle_total: u64,
}

impl RedEdgeStats {
    pub fn reddeg_of(&self, v: Vertex, root_m: usize) -> u64 {
        let base = if v.side == Side::U { 0 } else { root_m };
        self.reddeg[base + v.index - 1]
    }
}

/// Red edges read straight from `x`. Each red edge `(·_i, ·_j)` lies in
/// `√m − r_i − c_j` triangles, where `r_i` and `c_j` are the row and
/// column popcounts of `x` (the red degrees of its two endpoints).
/// Does not touch query counters.
#[allow(clippy::needless_range_loop)]
pub fn red_edge_stats(o: &TriangleOracle) -> RedEdgeStats {
    let (half, root) = (o.half, o.root_m);
    let mut row = vec![0u64; half + 1];
    let mut col = vec![0u64; root + 1];
    let mut red_edges = Vec::new();
    for side in [Side::U, Side::V] {
        for i in 1..=half {
            for j in half + 1..=root {
                if o.bit(i, j) {
                    red_edges.push(RedEdge { side, i, j });
                    if side == Side::U {
                        row[i] += 1;
                        col[j] += 1;
                    }
                }
            }
        }
    }
    let mut reddeg = vec![0u64; 2 * root];
    for e in &red_edges {
        let base = if e.side == Side::U { 0 } else { root };
        reddeg[base + e.i - 1] += 1;
        reddeg[base + e.j - 1] += 1;
    }
    let triangle_total = red_edges.iter().map(|e| root as u64 - row[e.i] - col[e.j]).sum();
    RedEdgeStats {
        red_edges,
        reddeg,
        triangle_total,
    }
}

/// Cap on the number of edges for naive materialisation.
pub const NAIVE_EDGE_CAP: u64 = 4096;

/// `G_x` built edge by edge from its definition, independent of the query
/// answering code.
#[derive(Debug, Clone)]
pub struct NaiveGraph {
    pub root_m: usize,
    pub edges: BTreeSet<Edge>,
    pub adjacency: std::collections::BTreeMap<Vertex, BTreeSet<Vertex>>,
}

impl NaiveGraph {
    pub fn build(x: &BitString) -> Result<Self> {
        let len = x.len();
        let half = (len as f64).sqrt().round() as usize;
        if len == 0 || half * half != len {
            return Err(Error::invalid(format!(
                "G_x needs |x| to be a positive perfect square, got {len}"
            )));
        }
        let root = 2 * half;
        if (root * root) as u64 > NAIVE_EDGE_CAP {
            return Err(Error::TooLarge(format!(
                "{} edges exceed the cap of {NAIVE_EDGE_CAP}",
                root * root
            )));
        }
        let mut edges = BTreeSet::new();
        let first: Vec<usize> = (1..=half).collect();
        let second: Vec<usize> = (half + 1..=root).collect();
        for &a in &first {
            for &b in &first {
                edges.insert(edge(Vertex::u(a), Vertex::v(b)));
            }
        }
        for &a in &second {
            for &b in &second {
                edges.insert(edge(Vertex::u(a), Vertex::v(b)));
            }
        }
        for &i in &first {
            for &j in &second {
                let bit = x.get((i - 1) * half + (j - half - 1));
                if bit {
                    edges.insert(edge(Vertex::u(i), Vertex::u(j)));
                    edges.insert(edge(Vertex::v(i), Vertex::v(j)));
                } else {
                    edges.insert(edge(Vertex::u(i), Vertex::v(j)));
                    edges.insert(edge(Vertex::v(i), Vertex::u(j)));
                }
            }
        }
        let mut adjacency: std::collections::BTreeMap<Vertex, BTreeSet<Vertex>> = std::collections::BTreeMap::new();
        for v in (1..=root).map(Vertex::u).chain((1..=root).map(Vertex::v)) {
            adjacency.insert(v, BTreeSet::new());
        }
        for &(a, b) in &edges {
            adjacency.get_mut(&a).unwrap().insert(b);
            adjacency.get_mut(&b).unwrap().insert(a);
        }
        Ok(Self {
            root_m: root,
            edges,
            adjacency,
        })
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.edges.contains(&edge(a, b))
    }

    /// All triangles `(a, b, c)` with `a < b < c`, enumerated over adjacent
    /// pairs.
    pub fn triangles(&self) -> Vec<(Vertex, Vertex, Vertex)> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            for &c in self.adjacency[&b].range(b..) {
                if c != b && self.adjacency[&a].contains(&c) {
                    out.push((a, b, c));
                }
            }
        }
        out
    }
}

/// Exact triangle count by enumeration over a materialised copy of `G_x`.
/// Does not touch query counters.
pub fn naive_triangle_count(o: &TriangleOracle) -> Result<u64> {
    Ok(NaiveGraph::build(o.x())?.triangles().len() as u64)
}
