use nalgebra::DMatrix;
use rand::Rng;

use super::random::{random_matrix, SampleKind};
use crate::tensor::Params;

/// A family of decompositions indexed by an integer `s`.
pub trait Sequence: Sync {
    fn params(&self, s: u32) -> Params;
}

fn assemble(factors: [DMatrix<f64>; 3]) -> Params {
    Params::from_factors(&factors).expect("sequence factors have consistent shapes")
}

/// `a_1 ⊗ b_1 ⊗ (x + 2^{−s} c_1) + a_2 ⊗ b_2 ⊗ (x + 2^{−s} c_2)`: the third
/// factors become collinear as `s` grows.
#[derive(Clone, Debug)]
pub struct IllConditioned {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub x: DMatrix<f64>,
}

impl IllConditioned {
    /// Normal entries drawn in the order `A`, `B`, `C`, `x`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, dims: [usize; 3]) -> Self {
        IllConditioned {
            a: random_matrix(rng, dims[0], 2, SampleKind::Normal),
            b: random_matrix(rng, dims[1], 2, SampleKind::Normal),
            c: random_matrix(rng, dims[2], 2, SampleKind::Normal),
            x: random_matrix(rng, dims[2], 1, SampleKind::Normal),
        }
    }
}

impl Sequence for IllConditioned {
    fn params(&self, s: u32) -> Params {
        let h = (-(s as f64)).exp2();
        let third = DMatrix::from_fn(self.c.nrows(), 2, |i, j| self.x[(i, 0)] + h * self.c[(i, j)]);
        assemble([self.a.clone(), self.b.clone(), third])
    }
}

/// `t (a_1 + b_1/t) ⊗ (a_2 + b_2/t) ⊗ (a_3 + b_3/t) − t a_1 ⊗ a_2 ⊗ a_3` with
/// `t = 2^{s/5}`. The limit is the rank-3 tensor
/// `b_1⊗a_2⊗a_3 + a_1⊗b_2⊗a_3 + a_1⊗a_2⊗b_3`.
#[derive(Clone, Debug)]
pub struct DeSilvaLim {
    pub a: [Vec<f64>; 3],
    pub b: [Vec<f64>; 3],
}

impl DeSilvaLim {
    /// Normal entries drawn mode by mode, `a` before `b`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, dims: [usize; 3]) -> Self {
        let mut a: [Vec<f64>; 3] = Default::default();
        let mut b: [Vec<f64>; 3] = Default::default();
        for k in 0..3 {
            a[k] = random_matrix(rng, dims[k], 1, SampleKind::Normal).as_slice().to_vec();
            b[k] = random_matrix(rng, dims[k], 1, SampleKind::Normal).as_slice().to_vec();
        }
        DeSilvaLim { a, b }
    }

    /// The rank-3 limit as a decomposition.
    pub fn limit(&self) -> Params {
        let cols = |pick: [bool; 3]| -> Vec<Vec<f64>> {
            (0..3)
                .map(|k| if pick[k] { self.b[k].clone() } else { self.a[k].clone() })
                .collect()
        };
        let terms = [cols([true, false, false]), cols([false, true, false]), cols([false, false, true])];
        let factors: [DMatrix<f64>; 3] = std::array::from_fn(|k| {
            let n = self.a[k].len();
            DMatrix::from_fn(n, 3, |i, j| terms[j][k][i])
        });
        assemble(factors)
    }
}

impl Sequence for DeSilvaLim {
    fn params(&self, s: u32) -> Params {
        let t = (s as f64 / 5.0).exp2();
        let factors: [DMatrix<f64>; 3] = std::array::from_fn(|k| {
            let n = self.a[k].len();
            DMatrix::from_fn(n, 2, |i, j| {
                let (a, b) = (self.a[k][i], self.b[k][i]);
                let v = if j == 0 { a + b / t } else { a };
                match (k, j) {
                    (0, 0) => t * v,
                    (0, 1) => -t * v,
                    _ => v,
                }
            })
        });
        assemble(factors)
    }
}

/// Three-term family with `ε = 2^{−s/16}`; the terms grow like `1/ε` and
/// cancel to leading order.
#[derive(Clone, Debug)]
pub struct Paatero {
    pub ab: DMatrix<f64>,
    pub bb: DMatrix<f64>,
    pub cb: DMatrix<f64>,
}

impl Paatero {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, dims: [usize; 3]) -> Self {
        Paatero {
            ab: random_matrix(rng, dims[0], 3, SampleKind::Normal),
            bb: random_matrix(rng, dims[1], 3, SampleKind::Normal),
            cb: random_matrix(rng, dims[2], 3, SampleKind::Normal),
        }
    }

    /// Factors at an explicit `ε`.
    pub fn params_at(&self, e: f64) -> Params {
        let q = e * e / 2.0;
        let ab = &self.ab;
        let a = DMatrix::from_fn(ab.nrows(), 3, |i, j| match j {
            0 => -ab[(i, 0)] / e - ab[(i, 1)] / e,
            1 => ab[(i, 0)] / e + q * ab[(i, 2)],
            _ => ab[(i, 1)] / e,
        });
        let tail = |m: &DMatrix<f64>| {
            DMatrix::from_fn(m.nrows(), 3, |i, j| match j {
                0 => -m[(i, 0)] / e,
                1 => m[(i, 0)] / e + q * m[(i, 1)],
                _ => m[(i, 0)] / e + q * m[(i, 2)],
            })
        };
        assemble([a, tail(&self.bb), tail(&self.cb)])
    }
}

impl Sequence for Paatero {
    fn params(&self, s: u32) -> Params {
        self.params_at((-(s as f64) / 16.0).exp2())
    }
}
