//! Seeded experiment harness: random instances, families of tensors that
//! approach ill-conditioned or ill-posed limits, and the error analysis that
//! compares computed decompositions against the truth.

mod analysis;
mod experiments;
pub mod fixtures;
mod random;
mod runner;
mod sequences;

pub use analysis::{run_error_analysis, write_error_rows, Decomposer, ErrorRow};
pub use experiments::{
    isl_convergence, odeco_params, odeco_sweep, rank1_sweep, worst_direction, worst_perturbation,
    write_csv, IslTraceRow, OdecoRow, Rank1Row, WorstDirection,
};
pub use random::{gen_random_factors, random_matrix, seeded_rng, unit_vector, SampleKind, SeededRng};
pub use runner::{run_experiment, sequence_rows, Experiment};
pub use sequences::{DeSilvaLim, IllConditioned, Paatero, Sequence};
