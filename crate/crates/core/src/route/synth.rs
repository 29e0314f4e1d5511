//! Fixed-horizon schedule search.
//!
//! Every message sits on a vertex and must reach its destination within `T`
//! synchronous steps. At each step the messages are matched to next vertices
//! (stay or move to a neighbour) by a maximum-weight perfect assignment. A
//! move is only allowed if the destination is still reachable in the
//! remaining steps, so a completed schedule is always correct; an attempt
//! fails when no perfect assignment uses only allowed moves.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cube::{CubeGraph, CubeKind, DistanceTable};

/// Independent randomized attempts per horizon.
pub const SEEDS_PER_HORIZON: u64 = 16;

const FORBIDDEN: i64 = -1_000_000_000;
const GAIN_WEIGHT: i64 = 1_000;
const TIGHT_BONUS: i64 = 10_000;
const NOISE: i64 = 1_000;

/// A schedule: `steps[t][v]` is where the message at vertex `v` goes at step `t`.
pub type Schedule = Vec<Vec<usize>>;

type CacheKey = (CubeKind, usize, usize, Vec<usize>);

fn cache() -> &'static Mutex<HashMap<CacheKey, Option<Schedule>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Option<Schedule>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Forgets all memoized schedules.
pub fn clear_cache() {
    cache().lock().expect("cache lock").clear();
}

/// Largest displacement of any message: no schedule can be shorter.
pub fn lower_bound(dist: &DistanceTable, target: &[usize]) -> usize {
    target
        .iter()
        .enumerate()
        .map(|(v, &t)| dist.get(v, t) as usize)
        .max()
        .unwrap_or(0)
}

fn attempt(
    g: &CubeGraph,
    dist: &DistanceTable,
    target: &[usize],
    horizon: usize,
    seed: u64,
) -> Option<Schedule> {
    let size = g.len();
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ horizon as u64);
    // at[v] = message currently on v; messages are named by their start vertex.
    let mut at: Vec<usize> = (0..size).collect();
    let mut steps = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let rem = (horizon - t) as u32;
        let mut weights = Matrix::new(size, size, FORBIDDEN);
        for v in 0..size {
            let goal = target[at[v]];
            let here = dist.get(v, goal) as i64;
            for u in std::iter::once(v).chain(g.neighbors(v).iter().copied()) {
                let there = dist.get(u, goal);
                if there + 1 > rem {
                    continue;
                }
                let gain = here - there as i64;
                let mut w = gain * GAIN_WEIGHT + rng.gen_range(0..NOISE);
                if gain > 0 && there + 1 == rem {
                    w += TIGHT_BONUS;
                }
                weights[(v, u)] = w;
            }
        }
        let (_, assign) = kuhn_munkres(&weights);
        if (0..size).any(|v| weights[(v, assign[v])] == FORBIDDEN) {
            return None;
        }
        let mut next = vec![0; size];
        for (v, &u) in assign.iter().enumerate() {
            next[u] = at[v];
        }
        at = next;
        steps.push(assign);
    }
    debug_assert!((0..size).all(|v| target[at[v]] == v));
    Some(steps)
}

/// A schedule of exactly `horizon` steps realizing `target`, if the search
/// finds one. The lowest successful seed wins, so results are reproducible.
pub fn schedule_exact(
    g: &CubeGraph,
    dist: &DistanceTable,
    target: &[usize],
    horizon: usize,
) -> Option<Schedule> {
    if horizon < lower_bound(dist, target) {
        return None;
    }
    let key = (g.kind(), g.dimension(), horizon, target.to_vec());
    if let Some(hit) = cache().lock().expect("cache lock").get(&key) {
        return hit.clone();
    }
    let found = (0..SEEDS_PER_HORIZON)
        .into_par_iter()
        .find_map_first(|seed| attempt(g, dist, target, horizon, seed));
    cache()
        .lock()
        .expect("cache lock")
        .insert(key, found.clone());
    found
}

/// The shortest horizon in `from..=to` for which a schedule is found.
pub fn schedule_search(
    g: &CubeGraph,
    dist: &DistanceTable,
    target: &[usize],
    from: usize,
    to: usize,
) -> Option<Schedule> {
    let from = from.max(lower_bound(dist, target));
    (from..=to).find_map(|h| schedule_exact(g, dist, target, h))
}
