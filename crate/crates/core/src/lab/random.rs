use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tensor::{Params, Shape};

/// The experiment generator: ChaCha with 8 rounds. Its stream is fixed by
/// the seed on every platform. Normal variates use the ziggurat sampler of
/// `rand_distr`.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    /// Standard normal entries.
    #[default]
    Normal,
    /// Uniform entries on `[0, 1)`.
    Uniform,
}

fn sample<R: Rng + ?Sized>(rng: &mut R, kind: SampleKind) -> f64 {
    match kind {
        SampleKind::Normal => rng.sample(StandardNormal),
        SampleKind::Uniform => rng.random::<f64>(),
    }
}

/// Column-major fill, so a matrix is reproducible from the stream alone.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, kind: SampleKind) -> DMatrix<f64> {
    let values: Vec<f64> = (0..m * n).map(|_| sample(rng, kind)).collect();
    DMatrix::from_column_slice(m, n, &values)
}

/// Random unit vector with normal entries.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / nrm).collect()
}

/// Factor matrices drawn one after the other, each column-major.
pub fn gen_random_factors<R: Rng + ?Sized>(
    rng: &mut R,
    dims: &[usize],
    rank: usize,
    kind: SampleKind,
) -> Result<Params> {
    Shape::new(dims.to_vec(), rank)?;
    let factors: Vec<DMatrix<f64>> = dims
        .iter()
        .map(|&n| random_matrix(rng, n, rank, kind))
        .collect();
    Params::from_factors(&factors)
}
