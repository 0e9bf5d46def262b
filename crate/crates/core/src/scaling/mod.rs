//! The indeterminacy group acting on parameter vectors, the orbit distance
//! it induces, and the iterated scaling construction.
//!
//! A group element permutes the `r` terms and rescales the factors of each
//! term by `θ_1, …, θ_d` with `θ_1 ⋯ θ_d = 1`. The distance from `p` to `q`
//! is the least Euclidean distance from `p` to the orbit of `q`.
//!
//! Scaling *both* arguments, `inf ‖T_1 p − T_2 q‖`, is not offered: that
//! quantity vanishes for distinct rank-1 tensors such as
//! `a_1⊗a_2⊗c` and `b_1⊗b_2⊗c` (take `T_1 = T_2 = diag(θ, θ, θ⁻²)` and
//! let `θ → 0`): both sides shrink to zero together.

mod assignment;
mod distance;
mod group;
mod isl;

pub use assignment::solve_assignment;
pub use distance::{distance, distance_with, pair_distance, DistanceOptions, DistanceResult, PairDistance};
pub use group::GroupElement;
pub use isl::{
    isl_lambda, isl_rescale_diagonal, iterated_scaling, iterated_scaling_with, IslOptions,
    IslResult,
};

pub fn apply_group(g: &GroupElement, p: &crate::tensor::Params) -> crate::error::Result<crate::tensor::Params> {
    g.apply(p)
}
