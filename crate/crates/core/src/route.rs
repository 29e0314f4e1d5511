//! Off-line routing of vertex permutations.
//!
//! A routing is a sequence of steps. In each step every message either stays
//! or moves to a neighbouring vertex, and every vertex holds exactly one
//! message afterwards. Steps are applied first to last: the message that
//! starts at `v` ends at `s_k(...s_1(v))`.

pub mod synth;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{dihedral_permutations, fibonacci_family, is_good, ClassifyError};
use crate::cube::{build_cube, parse_bitstring, CubeError, CubeGraph, CubeKind, Vertex};
use crate::gf2::{BinMatrix, Gf2Error};

/// Largest dimension for which schedules are searched for.
pub const MAX_SYNTH_DIMENSION: usize = 12;

#[derive(Debug, Error)]
pub enum RouteError {
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error(transparent)]
    Matrix(#[from] Gf2Error),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("matrix is not good: vertex {witness} maps outside the cube")]
    NotGood { witness: Vertex },
    #[error("image is not a bijection on 0..{0}")]
    NotABijection(usize),
    #[error("{x}, {y}, {z} is not a path with distinct ends")]
    NotAPath { x: Vertex, y: Vertex, z: Vertex },
    #[error("invalid coordinate pair ({i}, {j}) for dimension {n}")]
    InvalidCoordinates { n: usize, i: usize, j: usize },
    #[error("swapping coordinates ({i}, {j}) sends {witness} outside the cube")]
    CoordinatesNotClosed { i: usize, j: usize, witness: Vertex },
    #[error("step moves {vertex} to a non-neighbour")]
    NotAStep { vertex: Vertex },
    #[error("no construction for {matrix:?} on the {kind} cube of dimension {n}")]
    Unsupported {
        kind: CubeKind,
        n: usize,
        matrix: BinMatrix,
    },
    #[error("schedule search is limited to n <= {MAX_SYNTH_DIMENSION}, got {0}")]
    TooLarge(usize),
    #[error("no schedule found within {0} steps")]
    SearchExhausted(usize),
    #[error("internal error: constructed plan failed validation: {0}")]
    Validation(String),
}

/// A bijection on vertex indices: `image[i]` is where the message starting
/// at vertex `i` ends up.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexPermutation {
    image: Vec<usize>,
}

impl VertexPermutation {
    pub fn identity(len: usize) -> Self {
        VertexPermutation {
            image: (0..len).collect(),
        }
    }

    pub fn from_image(image: Vec<usize>) -> Result<Self, RouteError> {
        let len = image.len();
        let mut seen = vec![false; len];
        for &d in &image {
            if d >= len || std::mem::replace(&mut seen[d], true) {
                return Err(RouteError::NotABijection(len));
            }
        }
        Ok(VertexPermutation { image })
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &VertexPermutation) -> VertexPermutation {
        VertexPermutation {
            image: self.image.iter().map(|&i| next.image[i]).collect(),
        }
    }

    pub fn inverse(&self) -> VertexPermutation {
        let mut inv = vec![0; self.len()];
        for (i, &d) in self.image.iter().enumerate() {
            inv[d] = i;
        }
        VertexPermutation { image: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &d)| i == d)
    }

    /// Number of vertices not fixed.
    pub fn moved(&self) -> usize {
        self.image
            .iter()
            .enumerate()
            .filter(|&(i, &d)| i != d)
            .count()
    }

    fn transposition(len: usize, a: usize, b: usize) -> Self {
        let mut image: Vec<usize> = (0..len).collect();
        image.swap(a, b);
        VertexPermutation { image }
    }
}

/// One routing step: a permutation moving every message at most one edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step(VertexPermutation);

impl Step {
    pub fn new(g: &CubeGraph, perm: VertexPermutation) -> Result<Self, RouteError> {
        if let Some(v) = first_long_move(g, &perm) {
            return Err(RouteError::NotAStep {
                vertex: g.vertex(v),
            });
        }
        Ok(Step(perm))
    }

    /// Skips the adjacency check. Meant for building deliberately broken
    /// plans; [`validate_plan`] still catches them.
    pub fn new_unchecked(perm: VertexPermutation) -> Self {
        Step(perm)
    }

    pub fn perm(&self) -> &VertexPermutation {
        &self.0
    }
}

fn first_long_move(g: &CubeGraph, perm: &VertexPermutation) -> Option<usize> {
    (0..perm.len()).find(|&v| {
        let d = perm.apply(v);
        d != v && !g.are_adjacent(v, d)
    })
}

#[derive(Debug, Clone)]
pub struct RoutingPlan {
    pub kind: CubeKind,
    pub n: usize,
    /// The matrix whose permutation is routed, if any.
    pub matrix: Option<BinMatrix>,
    pub target: VertexPermutation,
    pub steps: Vec<Step>,
    pub declared_bound: Option<usize>,
    /// Free-form remarks about how the plan was built.
    pub notes: Vec<String>,
}

impl RoutingPlan {
    fn empty(g: &CubeGraph, matrix: Option<BinMatrix>) -> Self {
        RoutingPlan {
            kind: g.kind(),
            n: g.dimension(),
            matrix,
            target: VertexPermutation::identity(g.len()),
            steps: Vec::new(),
            declared_bound: Some(0),
            notes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The permutation realized by running all steps.
    pub fn composition(&self) -> VertexPermutation {
        let start = VertexPermutation::identity(self.target.len());
        self.steps.iter().fold(start, |acc, s| acc.then(s.perm()))
    }

    fn append(&mut self, other: RoutingPlan) {
        self.steps.extend(other.steps);
        self.target = self.target.then(&other.target);
        self.declared_bound = match (self.declared_bound, other.declared_bound) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        self.notes.extend(other.notes);
    }

    pub fn to_file(&self, g: &CubeGraph) -> PlanFile {
        let steps = self
            .steps
            .iter()
            .map(|s| {
                (0..g.len())
                    .filter(|&v| s.perm().apply(v) != v)
                    .map(|v| {
                        (
                            g.vertex(v).to_string(),
                            g.vertex(s.perm().apply(v)).to_string(),
                        )
                    })
                    .collect()
            })
            .collect();
        PlanFile {
            kind: self.kind,
            n: self.n,
            matrix: self.matrix.clone(),
            declared_bound: self.declared_bound,
            steps,
            notes: self.notes.clone(),
        }
    }
}

/// Serialized plan. Each step lists only the messages that move, as
/// `(source, destination)` bitstrings sorted by source vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFile {
    pub kind: CubeKind,
    pub n: usize,
    pub matrix: Option<BinMatrix>,
    pub declared_bound: Option<usize>,
    pub steps: Vec<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    /// 1-based step index; 0 for problems not tied to a step.
    pub step: usize,
    pub vertex: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub steps: usize,
    pub bound_ok: bool,
    pub failures: Vec<Failure>,
}

fn fail(step: usize, vertex: impl Into<String>, reason: &str) -> Failure {
    Failure {
        step,
        vertex: vertex.into(),
        reason: reason.to_string(),
    }
}

/// Checks one step given as moves, returning its full image if it is a
/// legal step.
fn check_moves(
    g: &CubeGraph,
    step: usize,
    moves: &[(usize, usize)],
    failures: &mut Vec<Failure>,
) -> Option<Vec<usize>> {
    let before = failures.len();
    let mut image: Vec<usize> = (0..g.len()).collect();
    let mut sources = HashSet::new();
    let mut dests = HashSet::new();
    for &(s, d) in moves {
        if !sources.insert(s) {
            failures.push(fail(step, g.vertex(s).to_string(), "duplicate-source"));
            continue;
        }
        if s != d && !g.are_adjacent(s, d) {
            failures.push(fail(step, g.vertex(s).to_string(), "not-adjacent"));
        }
        if !dests.insert(d) {
            failures.push(fail(step, g.vertex(d).to_string(), "not-a-bijection"));
        }
        image[s] = d;
    }
    // Unlisted vertices stay put, so listed destinations must be exactly the
    // listed sources.
    let mut stray: Vec<usize> = dests.difference(&sources).copied().collect();
    stray.sort_unstable();
    for d in stray {
        failures.push(fail(step, g.vertex(d).to_string(), "not-a-bijection"));
    }
    (failures.len() == before).then_some(image)
}

fn finish(
    g: &CubeGraph,
    images: Option<Vec<Vec<usize>>>,
    count: usize,
    target: Option<&[usize]>,
    declared_bound: Option<usize>,
    mut failures: Vec<Failure>,
) -> ValidationReport {
    if let (Some(images), Some(target)) = (images, target) {
        let mut at: Vec<usize> = (0..g.len()).collect();
        for img in &images {
            for p in at.iter_mut() {
                *p = img[*p];
            }
        }
        if let Some(v) = (0..g.len()).find(|&v| at[v] != target[v]) {
            failures.push(fail(count, g.vertex(v).to_string(), "composition-mismatch"));
        }
    }
    let bound_ok = declared_bound.is_none_or(|b| count <= b);
    ValidationReport {
        valid: failures.is_empty() && bound_ok,
        steps: count,
        bound_ok,
        failures,
    }
}

/// Checks every step for adjacency and bijectivity, then that the steps
/// compose to the plan's target (and to `τ_A` when a matrix is attached).
pub fn validate_plan(g: &CubeGraph, plan: &RoutingPlan) -> ValidationReport {
    let mut failures = Vec::new();
    if plan.kind != g.kind() || plan.n != g.dimension() || plan.target.len() != g.len() {
        failures.push(fail(0, "", "wrong-cube"));
        return finish(g, None, plan.len(), None, plan.declared_bound, failures);
    }
    if let Some(a) = &plan.matrix {
        match perm_from_matrix(a, g) {
            Ok(p) if p == plan.target => {}
            Ok(_) => failures.push(fail(0, "", "target-mismatch")),
            Err(e) => failures.push(fail(0, "", &format!("bad-matrix: {e}"))),
        }
    }
    let mut images = Some(Vec::with_capacity(plan.len()));
    for (k, s) in plan.steps.iter().enumerate() {
        let moves: Vec<(usize, usize)> = (0..g.len()).map(|v| (v, s.perm().apply(v))).collect();
        match check_moves(g, k + 1, &moves, &mut failures) {
            Some(img) => images.as_mut().map(|all| all.push(img)),
            None => images.take().map(|_| ()),
        };
    }
    finish(
        g,
        images,
        plan.len(),
        Some(plan.target.image()),
        plan.declared_bound,
        failures,
    )
}

/// Validates a serialized plan. The target is `τ_A` for the attached matrix.
pub fn validate_plan_file(plan: &PlanFile) -> ValidationReport {
    let count = plan.steps.len();
    let g = match build_cube(plan.kind, plan.n) {
        Ok(g) => g,
        Err(e) => {
            return ValidationReport {
                valid: false,
                steps: count,
                bound_ok: plan.declared_bound.is_none_or(|b| count <= b),
                failures: vec![fail(0, "", &format!("bad-cube: {e}"))],
            }
        }
    };
    let mut failures = Vec::new();
    let target = match &plan.matrix {
        None => {
            failures.push(fail(0, "", "missing-matrix"));
            None
        }
        Some(a) => match perm_from_matrix(a, &g) {
            Ok(p) => Some(p),
            Err(RouteError::NotGood { witness }) => {
                failures.push(fail(0, witness.to_string(), "matrix-not-good"));
                None
            }
            Err(e) => {
                failures.push(fail(0, "", &format!("bad-matrix: {e}")));
                None
            }
        },
    };
    let parse = |s: &str| -> Option<usize> {
        let (bits, len) = parse_bitstring(s).ok()?;
        (len == g.dimension()).then_some(())?;
        g.index_of(bits)
    };
    let mut images = Some(Vec::with_capacity(count));
    for (k, step) in plan.steps.iter().enumerate() {
        let mut moves = Vec::with_capacity(step.len());
        let mut ok = true;
        for (s, d) in step {
            for v in [s, d] {
                if parse(v).is_none() {
                    failures.push(fail(k + 1, v.clone(), "unknown-vertex"));
                    ok = false;
                }
            }
            if let (Some(a), Some(b)) = (parse(s), parse(d)) {
                moves.push((a, b));
            }
        }
        match check_moves(&g, k + 1, &moves, &mut failures) {
            Some(img) if ok => images.as_mut().map(|all| all.push(img)),
            _ => images.take().map(|_| ()),
        };
    }
    finish(
        &g,
        images,
        count,
        target.as_ref().map(|t| t.image()),
        plan.declared_bound,
        failures,
    )
}

/// `τ_A` as a permutation of vertex indices.
pub fn perm_from_matrix(a: &BinMatrix, g: &CubeGraph) -> Result<VertexPermutation, RouteError> {
    let verdict = is_good(a, g)?;
    if !verdict.invertible {
        return Err(RouteError::NotInvertible);
    }
    if let Some(witness) = verdict.witness {
        return Err(RouteError::NotGood { witness });
    }
    let image = g
        .vertex_bits()
        .iter()
        .map(|&x| {
            g.index_of(a.matvec(x))
                .expect("good matrices preserve the cube")
        })
        .collect();
    Ok(VertexPermutation { image })
}

/// Largest graph distance travelled by any message under `p`.
pub fn measure_t(g: &CubeGraph, p: &VertexPermutation) -> u32 {
    (0..p.len())
        .filter(|&v| p.apply(v) != v)
        .map(|v| g.bfs_from(v)[p.apply(v)])
        .max()
        .unwrap_or(0)
}

fn swap_coords(x: u32, i: usize, j: usize) -> u32 {
    let (bi, bj) = ((x >> (i - 1)) & 1, (x >> (j - 1)) & 1);
    if bi == bj {
        x
    } else {
        x ^ (1 << (i - 1)) ^ (1 << (j - 1))
    }
}

fn check_coords(g: &CubeGraph, i: usize, j: usize) -> Result<(), RouteError> {
    let n = g.dimension();
    if i == 0 || i >= j || j > n {
        return Err(RouteError::InvalidCoordinates { n, i, j });
    }
    Ok(())
}

/// How the coordinate swap `(i j)` acts on a cube.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoordinateSwapReport {
    pub i: usize,
    pub j: usize,
    /// Whether the swap maps the vertex set onto itself.
    pub closed: bool,
    /// First vertex sent outside the cube, if any.
    pub escape: Option<Vertex>,
    /// Largest distance `d(x, x')` over vertices whose swapped image `x'` is
    /// still a vertex.
    pub t: u32,
}

pub fn coordinate_swap_report(
    g: &CubeGraph,
    i: usize,
    j: usize,
) -> Result<CoordinateSwapReport, RouteError> {
    check_coords(g, i, j)?;
    let mut escape = None;
    let mut t = 0;
    for (v, &x) in g.vertex_bits().iter().enumerate() {
        let y = swap_coords(x, i, j);
        match g.index_of(y) {
            Some(w) if w != v => t = t.max(g.bfs_from(v)[w]),
            Some(_) => {}
            None => {
                escape.get_or_insert(g.vertex(v));
            }
        }
    }
    Ok(CoordinateSwapReport {
        i,
        j,
        closed: escape.is_none(),
        escape,
        t,
    })
}

/// The vertex permutation swapping coordinates `i` and `j`, when the swap
/// preserves the cube.
pub fn coordinate_swap_permutation(
    g: &CubeGraph,
    i: usize,
    j: usize,
) -> Result<VertexPermutation, RouteError> {
    check_coords(g, i, j)?;
    let mut image = Vec::with_capacity(g.len());
    for (v, &x) in g.vertex_bits().iter().enumerate() {
        match g.index_of(swap_coords(x, i, j)) {
            Some(w) => image.push(w),
            None => {
                return Err(RouteError::CoordinatesNotClosed {
                    i,
                    j,
                    witness: g.vertex(v),
                })
            }
        }
    }
    Ok(VertexPermutation { image })
}

fn validated(g: &CubeGraph, plan: RoutingPlan) -> Result<RoutingPlan, RouteError> {
    let report = validate_plan(g, &plan);
    if !report.valid {
        return Err(RouteError::Validation(
            serde_json::to_string(&report).expect("report serializes"),
        ));
    }
    Ok(plan)
}

fn swap_step(len: usize, pairs: &[(usize, usize)]) -> Step {
    let mut image: Vec<usize> = (0..len).collect();
    for &(a, b) in pairs {
        image[a] = b;
        image[b] = a;
    }
    Step(VertexPermutation { image })
}

/// Routes the transposition `(x z)` along the path `x - y - z` in three
/// steps: swap `x,y`; swap `y,z`; swap `x,y`.
pub fn route_transposition_triple(
    g: &CubeGraph,
    x: u32,
    y: u32,
    z: u32,
) -> Result<RoutingPlan, RouteError> {
    let (a, b, c) = (
        g.require_index(x)?,
        g.require_index(y)?,
        g.require_index(z)?,
    );
    if a == c || !g.are_adjacent(a, b) || !g.are_adjacent(b, c) {
        return Err(RouteError::NotAPath {
            x: g.vertex(a),
            y: g.vertex(b),
            z: g.vertex(c),
        });
    }
    let mut plan = RoutingPlan::empty(g, None);
    plan.target = VertexPermutation::transposition(g.len(), a, c);
    plan.steps = vec![
        swap_step(g.len(), &[(a, b)]),
        swap_step(g.len(), &[(b, c)]),
        swap_step(g.len(), &[(a, b)]),
    ];
    plan.declared_bound = Some(3);
    validated(g, plan)
}

/// Routes the coordinate swap `(i j)` in three simultaneous rounds.
///
/// Each vertex `x` with `x_i = 1, x_j = 0` is exchanged with its partner
/// `x'` through `y = x` with both coordinates cleared, which is always a
/// vertex. Fails if the swap does not preserve the cube.
pub fn route_coord_transposition(
    g: &CubeGraph,
    i: usize,
    j: usize,
) -> Result<RoutingPlan, RouteError> {
    let target = coordinate_swap_permutation(g, i, j)?;
    let (bi, bj) = (1u32 << (i - 1), 1u32 << (j - 1));
    let mut first = Vec::new();
    let mut second = Vec::new();
    for &x in g.vertex_bits() {
        if x & bi != 0 && x & bj == 0 {
            let y = x & !bi;
            let partner = y | bj;
            let (xi, yi, pi) = (
                g.index_of(x).expect("vertex"),
                g.require_index(y)?,
                g.require_index(partner)?,
            );
            first.push((xi, yi));
            second.push((yi, pi));
        }
    }
    let mut plan = RoutingPlan::empty(g, None);
    plan.target = target;
    if first.is_empty() {
        return Ok(plan);
    }
    for pairs in [&first, &second] {
        let mut used = HashSet::new();
        for &(a, b) in pairs.iter() {
            assert!(
                used.insert(a) && used.insert(b),
                "swap pairs of one round overlap"
            );
        }
    }
    plan.steps = vec![
        swap_step(g.len(), &first),
        swap_step(g.len(), &second),
        swap_step(g.len(), &first),
    ];
    plan.declared_bound = Some(3);
    validated(g, plan)
}

fn searched_plan(
    g: &CubeGraph,
    matrix: Option<BinMatrix>,
    target: VertexPermutation,
    from: usize,
    to: usize,
) -> Result<RoutingPlan, RouteError> {
    if g.dimension() > MAX_SYNTH_DIMENSION {
        return Err(RouteError::TooLarge(g.dimension()));
    }
    let dist = g.distance_table();
    let schedule = synth::schedule_search(g, &dist, target.image(), from, to)
        .ok_or(RouteError::SearchExhausted(to))?;
    let mut plan = RoutingPlan::empty(g, matrix);
    plan.declared_bound = Some(schedule.len());
    plan.steps = schedule
        .into_iter()
        .map(|image| Step(VertexPermutation { image }))
        .collect();
    plan.target = target;
    validated(g, plan)
}

/// Routes the reversal `x -> (x_n, ..., x_1)` in `3 floor(n/2)` steps.
///
/// When every swap `(k, n+1-k)` preserves the cube, the swaps are routed one
/// after another. Otherwise (all `n >= 4`) the swaps are not permutations of
/// the cube and a schedule of `3 floor(n/2)` steps is searched for instead,
/// extending the horizon only if none exists.
pub fn route_reversal(g: &CubeGraph) -> Result<RoutingPlan, RouteError> {
    let n = g.dimension();
    if n < 2 {
        return Err(RouteError::InvalidCoordinates { n, i: 1, j: n });
    }
    let c = BinMatrix::reversal(n);
    let budget = 3 * (n / 2);
    let all_closed = (1..=n / 2).all(|k| coordinate_swap_permutation(g, k, n + 1 - k).is_ok());
    if all_closed {
        let mut plan = RoutingPlan::empty(g, None);
        for k in 1..=n / 2 {
            plan.append(route_coord_transposition(g, k, n + 1 - k)?);
        }
        plan.matrix = Some(c);
        return validated(g, plan);
    }
    let target = perm_from_matrix(&c, g)?;
    let mut plan = searched_plan(g, Some(c.clone()), target.clone(), budget, budget);
    if plan.is_err() {
        plan = searched_plan(g, Some(c), target, budget + 1, budget + n);
    }
    let mut plan = plan?;
    if plan.len() > budget {
        plan.notes.push(format!(
            "no {budget}-step schedule found; used {}",
            plan.len()
        ));
    }
    Ok(plan)
}

fn single_step(g: &CubeGraph, a: &BinMatrix) -> Result<RoutingPlan, RouteError> {
    let perm = perm_from_matrix(a, g)?;
    let mut plan = RoutingPlan::empty(g, Some(a.clone()));
    plan.steps = vec![Step::new(g, perm.clone())?];
    plan.target = perm;
    plan.declared_bound = Some(1);
    Ok(plan)
}

fn concat(
    g: &CubeGraph,
    matrix: &BinMatrix,
    parts: Vec<RoutingPlan>,
) -> Result<RoutingPlan, RouteError> {
    let mut plan = RoutingPlan::empty(g, None);
    for p in parts {
        plan.append(p);
    }
    plan.matrix = Some(matrix.clone());
    validated(g, plan)
}

/// Routes any of the eight good matrices of `F_n`, `n >= 4`.
///
/// `I + E_{1,3}` and `I + E_{n,n-2}` are single steps and their product is
/// two. Each `C`-family member is `F C` for one of those, found by checking
/// the product, and is routed as the reversal followed by the steps for `F`.
pub fn route_linear_fibonacci(g: &CubeGraph, a: &BinMatrix) -> Result<RoutingPlan, RouteError> {
    let n = g.dimension();
    let unsupported = || RouteError::Unsupported {
        kind: g.kind(),
        n,
        matrix: a.clone(),
    };
    if g.kind() != CubeKind::Fibonacci || n < 4 || a.dimension() != n {
        return Err(unsupported());
    }
    if !fibonacci_family(n).contains(a) {
        return Err(unsupported());
    }
    let b1 = BinMatrix::identity(n).plus_unit(1, 3)?;
    let b2 = BinMatrix::identity(n).plus_unit(n, n - 2)?;
    let b12 = b1.mul(&b2)?;
    // Step factors applied in order; `a == f_k ... f_1` is checked below.
    let factors = |f: &BinMatrix| -> Option<Vec<BinMatrix>> {
        if f.is_identity() {
            Some(vec![])
        } else if *f == b1 || *f == b2 {
            Some(vec![f.clone()])
        } else if *f == b12 {
            Some(vec![b2.clone(), b1.clone()])
        } else {
            None
        }
    };
    let c = BinMatrix::reversal(n);
    let (through_c, list) = match factors(a) {
        Some(list) => (false, list),
        None => (true, factors(&a.mul(&c)?).ok_or_else(unsupported)?),
    };
    let mut product = if through_c { c } else { BinMatrix::identity(n) };
    for f in &list {
        product = f.mul(&product)?;
    }
    if product != *a {
        return Err(RouteError::Validation(format!(
            "factorization of {a:?} does not multiply back"
        )));
    }
    let mut parts = Vec::new();
    if through_c {
        parts.push(route_reversal(g)?);
    }
    for f in &list {
        parts.push(single_step(g, f)?);
    }
    concat(g, a, parts)
}

fn require_lucas(g: &CubeGraph, a: &BinMatrix) -> Result<(), RouteError> {
    if g.kind() != CubeKind::Lucas || g.dimension() < 5 || a.dimension() != g.dimension() {
        return Err(RouteError::Unsupported {
            kind: g.kind(),
            n: g.dimension(),
            matrix: a.clone(),
        });
    }
    Ok(())
}

/// Routes the coordinate rotation `τ_A`, `A = cyclic_row_shift(I, k)`, on a
/// Lucas cube in at most `3(n-1)` steps.
///
/// The coordinate transpositions a rotation factors into are generally not
/// permutations of the cube, so the schedule is searched for directly,
/// starting from the displacement lower bound. The notes record, for each
/// transposition `(1 i)`, whether it preserves the cube and its displacement.
pub fn route_coordinate_cycle(g: &CubeGraph, k: usize) -> Result<RoutingPlan, RouteError> {
    let n = g.dimension();
    let a = BinMatrix::identity(n).cyclic_row_shift(k % n);
    require_lucas(g, &a)?;
    if k >= n {
        return Err(RouteError::InvalidCoordinates { n, i: k, j: n });
    }
    let ceiling = 3 * (n - 1);
    let target = perm_from_matrix(&a, g)?;
    let mut plan = searched_plan(g, Some(a), target, 0, ceiling)?;
    plan.declared_bound = Some(ceiling);
    for i in 2..=n {
        let r = coordinate_swap_report(g, 1, i)?;
        plan.notes.push(match r.escape {
            None => format!("transposition (1 {i}): closed, t = {}", r.t),
            Some(w) => format!(
                "transposition (1 {i}): sends {w} outside the cube, t = {} elsewhere",
                r.t
            ),
        });
    }
    Ok(plan)
}

/// Routes a good matrix of `L_n`, `n >= 5`: a row shift of `I` or of `C`.
///
/// Rotations go through [`route_coordinate_cycle`]. A reflection
/// `A = S C` with `S` a rotation is searched for directly; if that needs more
/// steps than the reversal followed by the rotation, the factored plan is
/// used instead.
pub fn route_lucas(g: &CubeGraph, a: &BinMatrix) -> Result<RoutingPlan, RouteError> {
    require_lucas(g, a)?;
    let n = g.dimension();
    if !dihedral_permutations(n).contains(a) {
        return Err(RouteError::Unsupported {
            kind: g.kind(),
            n,
            matrix: a.clone(),
        });
    }
    let id = BinMatrix::identity(n);
    if let Some(k) = (0..n).find(|&k| id.cyclic_row_shift(k) == *a) {
        return route_coordinate_cycle(g, k);
    }
    let c = BinMatrix::reversal(n);
    let k = (0..n)
        .find(|&k| id.cyclic_row_shift(k).mul_unchecked(&c) == *a)
        .expect("reflections are rotations times C");
    let mut factored = route_reversal(g)?;
    if k != 0 {
        factored.append(route_coordinate_cycle(g, k)?);
    }
    let factored = concat(g, a, vec![factored])?;
    let target = perm_from_matrix(a, g)?;
    if factored.len() <= 1 {
        return Ok(factored);
    }
    match searched_plan(g, Some(a.clone()), target, 0, factored.len() - 1) {
        Ok(mut direct) => {
            direct.notes.push(format!(
                "direct schedule of {} steps; reversal then rotation needs {}",
                direct.len(),
                factored.len()
            ));
            Ok(direct)
        }
        Err(RouteError::SearchExhausted(_)) => Ok(factored),
        Err(e) => Err(e),
    }
}

/// Routes `τ_A` for any good matrix `A`.
pub fn route_linear(g: &CubeGraph, a: &BinMatrix) -> Result<RoutingPlan, RouteError> {
    let n = g.dimension();
    let target = perm_from_matrix(a, g)?;
    match g.kind() {
        CubeKind::Fibonacci if n >= 4 => return route_linear_fibonacci(g, a),
        CubeKind::Lucas if n >= 5 => return route_lucas(g, a),
        _ => {}
    }
    if target.is_identity() {
        return Ok(RoutingPlan::empty(g, Some(a.clone())));
    }
    if first_long_move(g, &target).is_none() {
        return single_step(g, a);
    }
    if *a == BinMatrix::reversal(n) {
        return route_reversal(g);
    }
    searched_plan(g, Some(a.clone()), target, 0, 3 * n + 3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> u32 {
        parse_bitstring(s).unwrap().0
    }

    fn cube(kind: CubeKind, n: usize) -> CubeGraph {
        build_cube(kind, n).unwrap()
    }

    fn assert_valid(g: &CubeGraph, plan: &RoutingPlan) {
        let report = validate_plan(g, plan);
        assert!(report.valid, "{report:?}");
        let file_report = validate_plan_file(&plan.to_file(g));
        if plan.matrix.is_some() {
            assert!(file_report.valid, "{file_report:?}");
        }
    }

    #[test]
    fn permutations_from_matrices() {
        let f4 = cube(CubeKind::Fibonacci, 4);
        assert!(perm_from_matrix(&BinMatrix::identity(4), &f4)
            .unwrap()
            .is_identity());

        let f3 = cube(CubeKind::Fibonacci, 3);
        let c = perm_from_matrix(&BinMatrix::reversal(3), &f3).unwrap();
        for fixed in ["000", "010", "101"] {
            let i = f3.index_of(bits(fixed)).unwrap();
            assert_eq!(c.apply(i), i);
        }
        let (a, b) = (
            f3.index_of(bits("100")).unwrap(),
            f3.index_of(bits("001")).unwrap(),
        );
        assert_eq!((c.apply(a), c.apply(b)), (b, a));

        let b1 = BinMatrix::identity(4).plus_unit(1, 3).unwrap();
        let p = perm_from_matrix(&b1, &f4).unwrap();
        for (v, x) in f4.vertices().enumerate() {
            assert_eq!(p.apply(v) != v, x.coord(3));
        }

        let swap = BinMatrix::from_row_strings(&["0010", "0100", "1000", "0001"]).unwrap();
        assert!(matches!(
            perm_from_matrix(&swap, &f4),
            Err(RouteError::NotGood { .. })
        ));
    }

    #[test]
    fn displacement() {
        let f5 = cube(CubeKind::Fibonacci, 5);
        assert_eq!(measure_t(&f5, &VertexPermutation::identity(f5.len())), 0);
        let b1 = BinMatrix::identity(5).plus_unit(1, 3).unwrap();
        let both = b1.clone().plus_unit(5, 3).unwrap();
        assert_eq!(measure_t(&f5, &perm_from_matrix(&b1, &f5).unwrap()), 1);
        assert_eq!(measure_t(&f5, &perm_from_matrix(&both, &f5).unwrap()), 2);
    }

    #[test]
    fn coordinate_swaps() {
        let l5 = cube(CubeKind::Lucas, 5);
        let r = coordinate_swap_report(&l5, 1, 3).unwrap();
        assert!(!r.closed);
        assert_eq!(r.t, 2);
        let f4 = cube(CubeKind::Fibonacci, 4);
        let r = coordinate_swap_report(&f4, 1, 3).unwrap();
        assert_eq!(r.escape.unwrap().to_string(), "1001");
        assert!(matches!(
            route_coord_transposition(&f4, 1, 3),
            Err(RouteError::CoordinatesNotClosed { .. })
        ));
        assert!(matches!(
            coordinate_swap_report(&f4, 3, 3),
            Err(RouteError::InvalidCoordinates { .. })
        ));
        assert!(matches!(
            coordinate_swap_report(&f4, 2, 5),
            Err(RouteError::InvalidCoordinates { .. })
        ));

        let f3 = cube(CubeKind::Fibonacci, 3);
        let plan = route_coord_transposition(&f3, 1, 3).unwrap();
        assert_eq!(plan.len(), 3);
        assert_valid(&f3, &plan);
        // Every swap that preserves the cube routes in three rounds.
        for n in 2..=6 {
            for kind in [CubeKind::Fibonacci, CubeKind::Lucas] {
                let g = cube(kind, n);
                for i in 1..n {
                    for j in i + 1..=n {
                        if let Ok(plan) = route_coord_transposition(&g, i, j) {
                            assert_valid(&g, &plan);
                            assert_eq!(plan.target, coordinate_swap_permutation(&g, i, j).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn transposition_triple() {
        let f2 = cube(CubeKind::Fibonacci, 2);
        let plan = route_transposition_triple(&f2, bits("10"), bits("00"), bits("01")).unwrap();
        assert_eq!(plan.len(), 3);
        assert_valid(&f2, &plan);
        let (a, b) = (
            f2.index_of(bits("10")).unwrap(),
            f2.index_of(bits("01")).unwrap(),
        );
        let comp = plan.composition();
        assert_eq!((comp.apply(a), comp.apply(b)), (b, a));
        assert_eq!(comp.moved(), 2);
        assert!(route_transposition_triple(&f2, bits("10"), bits("00"), bits("10")).is_err());
        assert!(route_transposition_triple(&f2, bits("10"), bits("01"), bits("00")).is_err());
    }

    #[test]
    fn small_reversals() {
        for kind in [CubeKind::Fibonacci, CubeKind::Lucas] {
            for n in 2..=3 {
                let g = cube(kind, n);
                let plan = route_reversal(&g).unwrap();
                assert_eq!(plan.len(), 3 * (n / 2));
                assert_valid(&g, &plan);
            }
        }
        let f2 = cube(CubeKind::Fibonacci, 2);
        let comp = route_reversal(&f2).unwrap().composition();
        let (a, b) = (
            f2.index_of(bits("10")).unwrap(),
            f2.index_of(bits("01")).unwrap(),
        );
        assert_eq!(comp.apply(a), b);
    }

    #[test]
    fn validation_catches_corruption() {
        let f5 = cube(CubeKind::Fibonacci, 5);
        let b1 = BinMatrix::identity(5).plus_unit(1, 3).unwrap();
        let plan = route_linear_fibonacci(&f5, &b1).unwrap();
        assert_eq!(plan.len(), 1);
        let empty = RoutingPlan::empty(&f5, None);
        assert!(validate_plan(&f5, &empty).valid);

        let mut file = plan.to_file(&f5);
        // 00100 -> 10100 is legal; send it to 10001 instead (distance 2).
        let entry = file.steps[0]
            .iter_mut()
            .find(|(s, _)| s == "00100")
            .unwrap();
        entry.1 = "10001".into();
        let report = validate_plan_file(&file);
        assert!(!report.valid);
        assert!(report
            .failures
            .iter()
            .any(|f| f.step == 1 && f.vertex == "00100" && f.reason == "not-adjacent"));

        let mut file = plan.to_file(&f5);
        file.steps[0].push(("11000".into(), "01000".into()));
        let report = validate_plan_file(&file);
        assert!(report
            .failures
            .iter()
            .any(|f| f.reason == "unknown-vertex" && f.vertex == "11000"));

        let mut file = plan.to_file(&f5);
        file.steps.clear();
        let report = validate_plan_file(&file);
        assert_eq!(report.failures[0].reason, "composition-mismatch");

        let mut file = plan.to_file(&f5);
        file.declared_bound = Some(0);
        let report = validate_plan_file(&file);
        assert!(!report.valid && !report.bound_ok && report.failures.is_empty());

        // In-memory corruption through the unchecked constructor.
        let f2 = cube(CubeKind::Fibonacci, 2);
        let mut plan = route_reversal(&f2).unwrap();
        let (a, b) = (
            f2.index_of(bits("10")).unwrap(),
            f2.index_of(bits("01")).unwrap(),
        );
        plan.steps[0] = Step::new_unchecked(VertexPermutation::transposition(3, a, b));
        let report = validate_plan(&f2, &plan);
        assert!(!report.valid);
        assert_eq!(report.failures[0].vertex, "10");
        assert!(Step::new(&f2, VertexPermutation::transposition(3, a, b)).is_err());
    }

    #[test]
    fn bijection_checks() {
        assert!(VertexPermutation::from_image(vec![0, 0]).is_err());
        assert!(VertexPermutation::from_image(vec![0, 2]).is_err());
        let p = VertexPermutation::from_image(vec![2, 0, 1]).unwrap();
        assert!(p.then(&p.inverse()).is_identity());
        let f3 = cube(CubeKind::Fibonacci, 3);
        let g = route_coord_transposition(&f3, 1, 3).unwrap();
        let mut file = g.to_file(&f3);
        file.matrix = Some(BinMatrix::reversal(3));
        // Two messages into the same vertex.
        file.steps[0] = vec![("100".into(), "000".into()), ("010".into(), "000".into())];
        let report = validate_plan_file(&file);
        assert!(report
            .failures
            .iter()
            .any(|f| f.reason == "not-a-bijection"));
    }

    #[test]
    fn fibonacci_routes() {
        let f5 = cube(CubeKind::Fibonacci, 5);
        let a = BinMatrix::reversal(5).plus_unit(5, 3).unwrap();
        let plan = route_linear_fibonacci(&f5, &a).unwrap();
        assert_eq!(plan.len(), 7);
        assert_valid(&f5, &plan);

        let f6 = cube(CubeKind::Fibonacci, 6);
        let a = BinMatrix::reversal(6)
            .plus_unit(6, 3)
            .unwrap()
            .plus_unit(1, 4)
            .unwrap();
        let plan = route_linear_fibonacci(&f6, &a).unwrap();
        assert_eq!(plan.len(), 11);
        assert_valid(&f6, &plan);

        // Outside the good set.
        let bad = BinMatrix::reversal(5)
            .plus_unit(5, 3)
            .unwrap()
            .plus_unit(1, 2)
            .unwrap();
        assert!(route_linear_fibonacci(&f5, &bad).is_err());
    }

    #[test]
    fn lucas_routes() {
        let l5 = cube(CubeKind::Lucas, 5);
        assert!(route_coordinate_cycle(&l5, 0).unwrap().is_empty());
        let plan = route_coordinate_cycle(&l5, 1).unwrap();
        assert!(plan.len() <= 12);
        assert_valid(&l5, &plan);
        assert_eq!(plan.notes.len(), 4);
        let a = BinMatrix::identity(5).cyclic_row_shift(2);
        let plan = route_lucas(&l5, &a).unwrap();
        assert_eq!(plan.composition(), perm_from_matrix(&a, &l5).unwrap());
        assert!(route_lucas(&l5, &BinMatrix::identity(5))
            .unwrap()
            .is_empty());
        let refl = BinMatrix::reversal(5).cyclic_row_shift(3);
        assert_valid(&l5, &route_lucas(&l5, &refl).unwrap());
    }

    #[test]
    fn searched_routes_are_deterministic() {
        let f7 = cube(CubeKind::Fibonacci, 7);
        let a = route_reversal(&f7).unwrap().to_file(&f7);
        synth::clear_cache();
        let b = route_reversal(&f7).unwrap().to_file(&f7);
        assert_eq!(a, b);
    }

    #[test]
    fn every_small_good_matrix_routes() {
        for kind in [CubeKind::Fibonacci, CubeKind::Lucas] {
            for n in 1..=4 {
                let g = cube(kind, n);
                for a in crate::classify::enumerate_brute(kind, n).unwrap() {
                    let plan = route_linear(&g, &a).unwrap();
                    assert_valid(&g, &plan);
                }
            }
        }
    }
}
