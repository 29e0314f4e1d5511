//! Goodness of matrices and the groups of good matrices.
//!
//! A matrix `A` is good for a cube when it is invertible and maps every
//! vertex to a vertex. The good matrices of a fixed cube form a group under
//! multiplication; this module enumerates it (exhaustively or from closed
//! forms) and identifies its structure.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::cube::{build_cube, is_vertex, CubeError, CubeGraph, CubeKind, Vertex};
use crate::gf2::{matvec_rows, BinMatrix, Gf2Error};

/// Largest dimension the exhaustive scan accepts (`2^(n^2)` candidates).
pub const MAX_BRUTE_DIMENSION: usize = 5;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error(transparent)]
    Matrix(#[from] Gf2Error),
    #[error("brute-force enumeration supports n <= {MAX_BRUTE_DIMENSION}, got {0}")]
    DimensionTooLarge(usize),
    #[error("no closed form for the {kind} cube of dimension {n}")]
    UnsupportedDimension { kind: CubeKind, n: usize },
    #[error("empty element list")]
    Empty,
    #[error("element {0:?} appears more than once")]
    Duplicate(BinMatrix),
    #[error("element {index} is not good for the {kind} cube: {matrix:?}")]
    NotGood {
        kind: CubeKind,
        index: usize,
        matrix: BinMatrix,
    },
    #[error("not closed: elements {left} * {right} = {product:?} is missing")]
    NotClosed {
        left: usize,
        right: usize,
        product: BinMatrix,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoodnessVerdict {
    pub good: bool,
    pub invertible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vertex>,
}

/// Decides whether `a` is good for `g`.
///
/// The witness is the first vertex (in vertex order) whose image leaves the
/// cube; it is only reported for invertible matrices.
pub fn is_good(a: &BinMatrix, g: &CubeGraph) -> Result<GoodnessVerdict, ClassifyError> {
    if a.dimension() != g.dimension() {
        return Err(Gf2Error::DimensionMismatch {
            left: a.dimension(),
            right: g.dimension(),
        }
        .into());
    }
    if !a.is_invertible() {
        return Ok(GoodnessVerdict {
            good: false,
            invertible: false,
            witness: None,
        });
    }
    let witness = g
        .vertex_bits()
        .iter()
        .find(|&&x| !g.contains(a.matvec(x)))
        .map(|&x| Vertex::new(x, g.dimension()));
    Ok(GoodnessVerdict {
        good: witness.is_none(),
        invertible: true,
        witness,
    })
}

pub(crate) fn maps_into(rows: &[u32], g: &CubeGraph) -> bool {
    let (kind, n) = (g.kind(), g.dimension());
    g.vertex_bits()
        .iter()
        .all(|&x| is_vertex(kind, n, matvec_rows(rows, x)))
}

/// Every good `n x n` matrix, found by scanning all `2^(n^2)` candidates.
///
/// Uses the current rayon pool; see [`enumerate_brute_with_jobs`].
pub fn enumerate_brute(kind: CubeKind, n: usize) -> Result<Vec<BinMatrix>, ClassifyError> {
    if n > MAX_BRUTE_DIMENSION {
        return Err(ClassifyError::DimensionTooLarge(n));
    }
    let g = build_cube(kind, n)?;
    let total: u64 = 1 << (n * n);
    let chunk: u64 = 1 << 16;
    let chunks = total.div_ceil(chunk);
    let row_mask = (1u32 << n) - 1;
    let decode = |code: u64| -> [u32; MAX_BRUTE_DIMENSION] {
        let mut rows = [0; MAX_BRUTE_DIMENSION];
        for (i, r) in rows.iter_mut().take(n).enumerate() {
            *r = ((code >> (i * n)) as u32) & row_mask;
        }
        rows
    };
    let mut found: Vec<BinMatrix> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(total);
            let g = &g;
            (lo..hi).filter_map(move |code| {
                let rows = decode(code);
                let rows = &rows[..n];
                if maps_into(rows, g) && crate::gf2::rank_rows(rows, n) == n {
                    Some(BinMatrix::from_rows(n, rows.to_vec()).expect("rows fit the dimension"))
                } else {
                    None
                }
            })
        })
        .collect();
    found.sort();
    Ok(found)
}

/// [`enumerate_brute`] on a dedicated pool of `jobs` workers (0 = default).
pub fn enumerate_brute_with_jobs(
    kind: CubeKind,
    n: usize,
    jobs: usize,
) -> Result<Vec<BinMatrix>, ClassifyError> {
    if jobs == 0 {
        return enumerate_brute(kind, n);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| enumerate_brute(kind, n))
}

fn plus(a: &BinMatrix, i: usize, j: usize) -> BinMatrix {
    a.clone().plus_unit(i, j).expect("index in range")
}

/// The eight Fibonacci-good candidates built from `I`, `C` and the unit
/// offsets `E_{1,3}`, `E_{n,n-2}`, `E_{n,3}`, `E_{1,n-2}`.
pub fn fibonacci_family(n: usize) -> Vec<BinMatrix> {
    assert!(n >= 3);
    let id = BinMatrix::identity(n);
    let c = BinMatrix::reversal(n);
    vec![
        id.clone(),
        plus(&id, 1, 3),
        plus(&id, n, n - 2),
        plus(&plus(&id, 1, 3), n, n - 2),
        c.clone(),
        plus(&c, n, 3),
        plus(&c, 1, n - 2),
        plus(&plus(&c, n, 3), 1, n - 2),
    ]
}

/// All cyclic row shifts of `I` and of `C`: the dihedral permutation matrices.
pub fn dihedral_permutations(n: usize) -> Vec<BinMatrix> {
    let id = BinMatrix::identity(n);
    let c = BinMatrix::reversal(n);
    let mut out: Vec<BinMatrix> = (0..n)
        .map(|k| id.cyclic_row_shift(k))
        .chain((0..n).map(|k| c.cyclic_row_shift(k)))
        .collect();
    out.sort();
    out.dedup();
    out
}

fn all_permutation_matrices(n: usize) -> Vec<BinMatrix> {
    fn rec(n: usize, used: u32, rows: &mut Vec<u32>, out: &mut Vec<BinMatrix>) {
        if rows.len() == n {
            out.push(BinMatrix::from_rows(n, rows.clone()).expect("permutation"));
            return;
        }
        for j in 0..n {
            if used & (1 << j) == 0 {
                rows.push(1 << j);
                rec(n, used | (1 << j), rows, out);
                rows.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, 0, &mut Vec::new(), &mut out);
    out
}

fn units_of(w: u32) -> [u32; 2] {
    let lo = w & w.wrapping_neg();
    [lo, w ^ lo]
}

/// The 72 good matrices of the Lucas cube of dimension 4.
///
/// Besides the 8 dihedral permutation matrices there are two families with
/// rows of weight two (`1010` or `0101`):
/// * one weight-2 row `w` at position `p`; rows `p-1`, `p+1` are the two unit
///   vectors outside `w` in either order, and row `p+2` is a unit vector
///   inside `w`;
/// * weight-2 rows `w`, `w'` at consecutive positions `p`, `p+1`; row `p+2` is
///   a unit vector inside the row at `p`, and row `p+3` one inside the row at
///   `p+1`.
fn lucas4_family() -> Vec<BinMatrix> {
    const PAIRS: [u32; 2] = [0b0101, 0b1010];
    let mut out = dihedral_permutations(4);
    let at = |p: usize| p % 4;
    for p in 0..4 {
        for w in PAIRS {
            let outside = units_of(0b1111 ^ w);
            let inside = units_of(w);
            for swap in [false, true] {
                for &mid in &inside {
                    let mut rows = [0u32; 4];
                    rows[at(p)] = w;
                    rows[at(p + 3)] = outside[usize::from(swap)];
                    rows[at(p + 1)] = outside[usize::from(!swap)];
                    rows[at(p + 2)] = mid;
                    out.push(BinMatrix::from_rows(4, rows.to_vec()).expect("4 rows"));
                }
            }
        }
        for (w, w2) in [(PAIRS[0], PAIRS[1]), (PAIRS[1], PAIRS[0])] {
            for &a in &units_of(w) {
                for &b in &units_of(w2) {
                    let mut rows = [0u32; 4];
                    rows[at(p)] = w;
                    rows[at(p + 1)] = w2;
                    rows[at(p + 2)] = a;
                    rows[at(p + 3)] = b;
                    out.push(BinMatrix::from_rows(4, rows.to_vec()).expect("4 rows"));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// The good matrices of a cube from their closed-form description.
///
/// Defined for Fibonacci `n >= 3` and Lucas `n >= 2`.
pub fn generate_analytic(kind: CubeKind, n: usize) -> Result<Vec<BinMatrix>, ClassifyError> {
    let unsupported = ClassifyError::UnsupportedDimension { kind, n };
    if n > crate::cube::MAX_DIMENSION {
        return Err(unsupported);
    }
    let mut out = match (kind, n) {
        (CubeKind::Fibonacci, 0..=2) | (CubeKind::Lucas, 0..=1) => return Err(unsupported),
        (CubeKind::Fibonacci, 3) => fibonacci_family(3)
            .into_iter()
            .filter(BinMatrix::is_invertible)
            .collect(),
        (CubeKind::Fibonacci, _) => fibonacci_family(n),
        (CubeKind::Lucas, 2) => vec![BinMatrix::identity(2), BinMatrix::reversal(2)],
        (CubeKind::Lucas, 3) => all_permutation_matrices(3),
        (CubeKind::Lucas, 4) => lucas4_family(),
        (CubeKind::Lucas, _) => dihedral_permutations(n),
    };
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupStructure {
    Trivial,
    Z2,
    S3,
    D4,
    /// Cyclic of the given order.
    Zn(usize),
    /// Dihedral of order `2k`, tagged with `k`.
    Dihedral(usize),
    L4Order72,
    Unknown,
}

impl fmt::Display for GroupStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupStructure::Trivial => f.write_str("Trivial"),
            GroupStructure::Z2 => f.write_str("Z2"),
            GroupStructure::S3 => f.write_str("S3"),
            GroupStructure::D4 => f.write_str("D4"),
            GroupStructure::Zn(k) => write!(f, "Z{k}"),
            GroupStructure::Dihedral(k) => write!(f, "D{k}"),
            GroupStructure::L4Order72 => f.write_str("L4Order72"),
            GroupStructure::Unknown => f.write_str("Unknown"),
        }
    }
}

impl Serialize for GroupStructure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GoodMatrixGroup {
    pub kind: CubeKind,
    pub n: usize,
    pub order: usize,
    pub structure: GroupStructure,
    pub elements: Vec<BinMatrix>,
    pub cayley: Vec<Vec<usize>>,
}

impl GoodMatrixGroup {
    pub fn identity_index(&self) -> usize {
        self.elements
            .iter()
            .position(BinMatrix::is_identity)
            .expect("groups contain the identity")
    }

    pub fn index_of(&self, a: &BinMatrix) -> Option<usize> {
        self.elements.binary_search(a).ok()
    }

    pub fn is_abelian(&self) -> bool {
        let k = self.order;
        (0..k).all(|a| (0..k).all(|b| self.cayley[a][b] == self.cayley[b][a]))
    }

    /// Multiplicative order of element `a`.
    pub fn element_order(&self, a: usize) -> usize {
        let e = self.identity_index();
        let mut x = a;
        let mut k = 1;
        while x != e {
            x = self.cayley[x][a];
            k += 1;
        }
        k
    }

    /// Inverse of element `a`, read off the Cayley table.
    pub fn inverse_of(&self, a: usize) -> Option<usize> {
        let e = self.identity_index();
        (0..self.order).find(|&b| self.cayley[a][b] == e)
    }
}

/// Builds the Cayley table of `elements` (sorted canonically) and tags the
/// group structure.
pub fn analyze_group(
    kind: CubeKind,
    elements: &[BinMatrix],
) -> Result<GoodMatrixGroup, ClassifyError> {
    let first = elements.first().ok_or(ClassifyError::Empty)?;
    let n = first.dimension();
    if let Some(bad) = elements.iter().find(|m| m.dimension() != n) {
        return Err(Gf2Error::DimensionMismatch {
            left: n,
            right: bad.dimension(),
        }
        .into());
    }
    let mut sorted = elements.to_vec();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(ClassifyError::Duplicate(w[0].clone()));
    }
    let g = build_cube(kind, n)?;
    for (index, m) in sorted.iter().enumerate() {
        if !is_good(m, &g)?.good {
            return Err(ClassifyError::NotGood {
                kind,
                index,
                matrix: m.clone(),
            });
        }
    }
    let index: HashMap<&BinMatrix, usize> =
        sorted.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut cayley = vec![vec![0; sorted.len()]; sorted.len()];
    for (a, ma) in sorted.iter().enumerate() {
        for (b, mb) in sorted.iter().enumerate() {
            let p = ma.mul_unchecked(mb);
            match index.get(&p) {
                Some(&c) => cayley[a][b] = c,
                None => {
                    return Err(ClassifyError::NotClosed {
                        left: a,
                        right: b,
                        product: p,
                    })
                }
            }
        }
    }
    let mut group = GoodMatrixGroup {
        kind,
        n,
        order: sorted.len(),
        structure: GroupStructure::Unknown,
        elements: sorted,
        cayley,
    };
    // A finite set of invertible matrices closed under products is a group,
    // so identity and inverses are present; the table lookups rely on it.
    group.structure = identify(&group);
    Ok(group)
}

fn identify(g: &GoodMatrixGroup) -> GroupStructure {
    let order = g.order;
    match order {
        1 => return GroupStructure::Trivial,
        2 => return GroupStructure::Z2,
        6 if !g.is_abelian() => return GroupStructure::S3,
        8 if has_d4_generators(g) => return GroupStructure::D4,
        72 => return GroupStructure::L4Order72,
        _ => {}
    }
    if (0..order).any(|a| g.element_order(a) == order) {
        return GroupStructure::Zn(order);
    }
    if order.is_multiple_of(2) && order >= 6 {
        if let Some(k) = dihedral_rank(g) {
            return GroupStructure::Dihedral(k);
        }
    }
    GroupStructure::Unknown
}

/// Checks `A^4 = B^2 = I`, `A^2 != I`, `BAB = A^3` for `A = C + E_{1,n-2}`,
/// `B = I + E_{1,3}`, both of which must be members.
fn has_d4_generators(g: &GoodMatrixGroup) -> bool {
    let n = g.n;
    if n < 4 {
        return false;
    }
    let a = plus(&BinMatrix::reversal(n), 1, n - 2);
    let b = plus(&BinMatrix::identity(n), 1, 3);
    if g.index_of(&a).is_none() || g.index_of(&b).is_none() {
        return false;
    }
    d4_relations(&a, &b)
}

/// The defining relations of the dihedral group of order 8 on `(A, B)`.
pub fn d4_relations(a: &BinMatrix, b: &BinMatrix) -> bool {
    a.pow(4).is_identity()
        && b.pow(2).is_identity()
        && !a.pow(2).is_identity()
        && b.mul_unchecked(a).mul_unchecked(b) == a.pow(3)
}

/// If the group is dihedral of order `2k`, returns `k`.
fn dihedral_rank(g: &GoodMatrixGroup) -> Option<usize> {
    let k = g.order / 2;
    let r = (0..g.order).find(|&a| g.element_order(a) == k)?;
    let mut rotations = vec![false; g.order];
    let mut x = g.identity_index();
    for _ in 0..k {
        rotations[x] = true;
        x = g.cayley[x][r];
    }
    let r_inv = g.inverse_of(r)?;
    let s = (0..g.order).find(|&s| !rotations[s] && g.element_order(s) == 2)?;
    (g.cayley[g.cayley[s][r]][s] == r_inv).then_some(k)
}

/// `true` iff every cyclic row shift of `a` is good for `g`.
pub fn check_cyclic_shift_closure(a: &BinMatrix, g: &CubeGraph) -> Result<bool, ClassifyError> {
    for k in 0..a.dimension() {
        if !is_good(&a.cyclic_row_shift(k), g)?.good {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    Brute { jobs: usize },
}

/// Enumerates the good matrices by `method` and analyzes the group.
pub fn classify(
    kind: CubeKind,
    n: usize,
    method: Method,
) -> Result<GoodMatrixGroup, ClassifyError> {
    let elements = match method {
        Method::Analytic => generate_analytic(kind, n)?,
        Method::Brute { jobs } => enumerate_brute_with_jobs(kind, n, jobs)?,
    };
    analyze_group(kind, &elements)
}
