//! Fibonacci and Lucas cubes as explicit graphs.
//!
//! A vertex is an `n`-bit word. Coordinate `x_i` of the string
//! `(x_1, ..., x_n)` lives in bit `i - 1`, so bit 0 is the leftmost
//! character when a vertex is printed.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Widest dimension supported by the `u32` bit encoding.
pub const MAX_DIMENSION: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CubeError {
    #[error("dimension {n} out of range 1..={max}")]
    DimensionOutOfRange { n: usize, max: usize },
    #[error("{bits:#b} is not a vertex of the {kind} cube of dimension {n}")]
    UnknownVertex { kind: CubeKind, n: usize, bits: u32 },
    #[error("cannot parse bitstring {0:?}")]
    BadBitstring(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CubeKind {
    Fibonacci,
    Lucas,
}

impl CubeKind {
    pub fn name(self) -> &'static str {
        match self {
            CubeKind::Fibonacci => "fibonacci",
            CubeKind::Lucas => "lucas",
        }
    }

    /// Short graph name used in DOT output, e.g. `F` in `F_5`.
    pub fn symbol(self) -> char {
        match self {
            CubeKind::Fibonacci => 'F',
            CubeKind::Lucas => 'L',
        }
    }
}

impl fmt::Display for CubeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CubeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fibonacci" | "f" => Ok(CubeKind::Fibonacci),
            "lucas" | "l" => Ok(CubeKind::Lucas),
            other => Err(format!("unknown cube kind {other:?}")),
        }
    }
}

fn mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

fn check_dimension(n: usize) -> Result<(), CubeError> {
    if n == 0 || n > MAX_DIMENSION {
        return Err(CubeError::DimensionOutOfRange {
            n,
            max: MAX_DIMENSION,
        });
    }
    Ok(())
}

/// Membership test for the vertex set of the `kind` cube of dimension `n`.
///
/// `bits` must be below `2^n`.
pub fn is_vertex(kind: CubeKind, n: usize, bits: u32) -> bool {
    debug_assert!((1..=MAX_DIMENSION).contains(&n));
    debug_assert!(bits & !mask(n) == 0, "bits wider than the dimension");
    if bits & (bits >> 1) != 0 {
        return false;
    }
    match kind {
        CubeKind::Fibonacci => true,
        // For n = 1 the single position is its own cyclic neighbour.
        CubeKind::Lucas if n == 1 => bits == 0,
        CubeKind::Lucas => !(bits & 1 == 1 && (bits >> (n - 1)) & 1 == 1),
    }
}

/// Renders `bits` as `x_1 x_2 ... x_n` (bit 0 first).
pub fn bitstring(bits: u32, n: usize) -> String {
    (0..n)
        .map(|i| if (bits >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`bitstring`].
pub fn parse_bitstring(s: &str) -> Result<(u32, usize), CubeError> {
    let n = s.len();
    if n == 0 || n > MAX_DIMENSION {
        return Err(CubeError::BadBitstring(s.to_string()));
    }
    let mut bits = 0u32;
    for (i, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => bits |= 1 << i,
            _ => return Err(CubeError::BadBitstring(s.to_string())),
        }
    }
    Ok((bits, n))
}

/// An `n`-bit word. Membership in a particular cube is checked by
/// [`is_vertex`] or [`CubeGraph::index_of`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    bits: u32,
    n: u8,
}

impl Vertex {
    pub fn new(bits: u32, n: usize) -> Self {
        debug_assert!((1..=MAX_DIMENSION).contains(&n));
        Vertex {
            bits: bits & mask(n),
            n: n as u8,
        }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn dimension(self) -> usize {
        self.n as usize
    }

    /// Coordinate `x_i`, 1-based.
    pub fn coord(self, i: usize) -> bool {
        (self.bits >> (i - 1)) & 1 == 1
    }

    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bitstring(self.bits, self.n as usize))
    }
}

impl Serialize for Vertex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::str::FromStr for Vertex {
    type Err = CubeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (bits, n) = parse_bitstring(s)?;
        Ok(Vertex::new(bits, n))
    }
}

/// `F_n` or `L_n` with vertices sorted by bit value.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct CubeGraph {
    kind: CubeKind,
    n: usize,
    vertices: Vec<u32>,
    adjacency: Vec<Vec<usize>>,
}

pub fn build_cube(kind: CubeKind, n: usize) -> Result<CubeGraph, CubeError> {
    CubeGraph::new(kind, n)
}

impl CubeGraph {
    pub fn new(kind: CubeKind, n: usize) -> Result<Self, CubeError> {
        check_dimension(n)?;
        let vertices = enumerate_vertices(kind, n);
        let lookup = |bits: u32| vertices.binary_search(&bits).ok();
        let adjacency = vertices
            .iter()
            .map(|&v| {
                let mut nbrs: Vec<usize> = (0..n).filter_map(|i| lookup(v ^ (1 << i))).collect();
                nbrs.sort_unstable();
                nbrs
            })
            .collect();
        Ok(CubeGraph {
            kind,
            n,
            vertices,
            adjacency,
        })
    }

    pub fn kind(&self) -> CubeKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertex bit values in ascending order.
    pub fn vertex_bits(&self) -> &[u32] {
        &self.vertices
    }

    pub fn vertex(&self, index: usize) -> Vertex {
        Vertex::new(self.vertices[index], self.n)
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = Vertex> + '_ {
        self.vertices.iter().map(move |&b| Vertex::new(b, self.n))
    }

    pub fn contains(&self, bits: u32) -> bool {
        bits & !mask(self.n) == 0 && is_vertex(self.kind, self.n, bits)
    }

    pub fn index_of(&self, bits: u32) -> Option<usize> {
        if bits & !mask(self.n) != 0 {
            return None;
        }
        self.vertices.binary_search(&bits).ok()
    }

    pub fn require_index(&self, bits: u32) -> Result<usize, CubeError> {
        self.index_of(bits).ok_or(CubeError::UnknownVertex {
            kind: self.kind,
            n: self.n,
            bits,
        })
    }

    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.adjacency[index]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Undirected edges `(a, b)` with `a < b`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, nbrs)| {
            nbrs.iter()
                .copied()
                .filter(move |&b| b > a)
                .map(move |b| (a, b))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// BFS distances from `source` (by index) to every vertex.
    pub fn bfs_from(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1;
            for &w in &self.adjacency[u] {
                if dist[w] == u32::MAX {
                    dist[w] = next;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Graph distance between two vertices given by bit value.
    pub fn distance(&self, u: u32, v: u32) -> Result<u32, CubeError> {
        let a = self.require_index(u)?;
        let b = self.require_index(v)?;
        Ok(self.bfs_from(a)[b])
    }

    /// All-pairs distances, row-major `len() x len()`.
    pub fn distance_table(&self) -> DistanceTable {
        let n = self.len();
        let mut dist = Vec::with_capacity(n * n);
        for s in 0..n {
            dist.extend(self.bfs_from(s).into_iter().map(|d| d as u16));
        }
        DistanceTable { len: n, dist }
    }
}

/// Dense all-pairs BFS distances between vertex indices.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    len: usize,
    dist: Vec<u16>,
}

impl DistanceTable {
    pub fn get(&self, a: usize, b: usize) -> u32 {
        u32::from(self.dist[a * self.len + b])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

fn enumerate_vertices(kind: CubeKind, n: usize) -> Vec<u32> {
    // Words with no two adjacent ones, generated in ascending order by
    // extending from the high bit down.
    fn extend(pos: usize, prefix: u32, prev_set: bool, out: &mut Vec<u32>) {
        if pos == 0 {
            out.push(prefix);
            return;
        }
        let bit = pos - 1;
        extend(bit, prefix, false, out);
        if !prev_set {
            extend(bit, prefix | (1 << bit), true, out);
        }
    }
    let mut out = Vec::new();
    extend(n, 0, false, &mut out);
    if kind == CubeKind::Lucas {
        out.retain(|&b| is_vertex(kind, n, b));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

#[derive(Serialize)]
struct GraphJson<'a> {
    kind: &'a str,
    n: usize,
    vertices: Vec<String>,
    edges: Vec<[usize; 2]>,
}

pub fn export_graph(g: &CubeGraph, format: ExportFormat) -> String {
    match format {
        ExportFormat::Json => {
            let doc = GraphJson {
                kind: g.kind.name(),
                n: g.n,
                vertices: g.vertices().map(|v| v.to_string()).collect(),
                edges: g.edges().map(|(a, b)| [a, b]).collect(),
            };
            serde_json::to_string(&doc).expect("graph JSON serializes")
        }
        ExportFormat::Dot => {
            let mut out = format!("graph {}_{} {{\n", g.kind.symbol(), g.n);
            for (i, v) in g.vertices().enumerate() {
                out.push_str(&format!("  {i} [label=\"{v}\"];\n"));
            }
            for (a, b) in g.edges() {
                out.push_str(&format!("  {a} -- {b};\n"));
            }
            out.push_str("}\n");
            out
        }
    }
}
