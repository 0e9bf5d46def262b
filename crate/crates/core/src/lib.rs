//! Condition numbers of the tensor rank (CP) decomposition problem.
//!
//! A rank-`r` decomposition of an order-`d` tensor is stored as a flat
//! parameter vector ([`Params`]); the Jacobian of the parameters-to-tensor
//! map is Terracini's matrix ([`terracini::build_terracini`]). The
//! norm-balanced condition number is the inverse of its `N = r(Σ+1)`th
//! singular value, scaled by `‖A‖/‖p‖` ([`conditioning::cpdcond`]).
//!
//! Beyond the condition number itself the crate provides the
//! scaling/permutation group acting on parameter vectors and the orbit
//! distance it induces ([`scaling`]), the iterated scaling construction
//! ([`scaling::iterated_scaling`]), Kruskal's identifiability check and a
//! direct GEVD decomposition for order-3 tensors ([`decomp`]), and a seeded
//! experiment harness ([`lab`]).

pub mod conditioning;
pub mod decomp;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod scaling;
pub mod tensor;
pub mod terracini;

pub use conditioning::{cpdcond, norm_balance, ConditionReport, ConditionState};
pub use decomp::{cpd_gevd, kruskal_check, kruskal_rank, KruskalInfo};
pub use error::{Error, Result};
pub use scaling::{apply_group, distance, iterated_scaling, DistanceResult, GroupElement, IslResult};
pub use tensor::{cpdgen, rank_one, DenseTensor, Params, Representative, Shape};
pub use terracini::{build_terracini, kernel_basis, KernelBasis, TerraciniMatrix};
