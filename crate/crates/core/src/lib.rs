//! Fibonacci and Lucas cubes, the groups of matrices over GF(2) that preserve
//! them, and off-line permutation routing on them.

pub mod classify;
pub mod cli;
pub mod cube;
pub mod gf2;
pub mod route;

pub use classify::{
    analyze_group, enumerate_brute, generate_analytic, is_good, GoodMatrixGroup, GroupStructure,
};
pub use cube::{build_cube, CubeGraph, CubeKind, Vertex};
pub use gf2::BinMatrix;
pub use route::{measure_t, perm_from_matrix, validate_plan, RoutingPlan, VertexPermutation};
