//! Identifiability checks and a direct rank-`r` decomposition for
//! third-order tensors.

mod gevd;
mod kruskal;

pub use gevd::{cpd_gevd, cpd_gevd_with, GevdOptions};
pub use kruskal::{kruskal_check, kruskal_check_with, kruskal_rank, KruskalInfo, DEFAULT_KRUSKAL_TOL};
