//! Small fixed decompositions used by experiments and tests.

use nalgebra::DMatrix;

use crate::tensor::Params;

/// Norm-balanced rank-2 decomposition in `3 × 3 × 2` with integer factors
/// `A = [2 0; −1 1; 0 2]`, `B = [−1 −2; 2 0; 0 1]`, `C = [1 −2; 2 1]`.
pub fn integer_example() -> Params {
    Params::from_factors(&[
        DMatrix::from_row_slice(3, 2, &[2., 0., -1., 1., 0., 2.]),
        DMatrix::from_row_slice(3, 2, &[-1., -2., 2., 0., 0., 1.]),
        DMatrix::from_row_slice(2, 2, &[1., -2., 2., 1.]),
    ])
    .expect("fixed shapes")
}

/// Rank-2 decomposition in `3 × 3 × 2` with positive factors printed to
/// five significant digits. Its relative condition number is about
/// 18.410308.
pub fn positive_example() -> Params {
    Params::from_factors(&[
        DMatrix::from_row_slice(
            3,
            2,
            &[5.1518e-01, 8.8821e-01, 4.9802e-01, 3.6941e-01, 5.0806e-01, 1.1117e-01],
        ),
        DMatrix::from_row_slice(
            3,
            2,
            &[1.9032e-01, 7.5082e-01, 5.4218e-01, 1.6653e-01, 6.6436e-01, 5.8845e-01],
        ),
        DMatrix::from_row_slice(2, 2, &[7.2302e-01, 6.9447e-01, 4.9879e-01, 6.7487e-01]),
    ])
    .expect("fixed shapes")
}
