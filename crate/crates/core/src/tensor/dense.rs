use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::params::norm;
use super::{Params, Representative};
use crate::error::{Error, Result};

/// Coordinate tensor stored in Kronecker order: `i_1` varies slowest and
/// `i_d` fastest, so `idx = ((i_1·n_2 + i_2)·n_3 + …)·n_d + i_d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Shape("tensor must have at least one mode".into()));
        }
        let len: usize = dims.iter().product();
        if values.len() != len {
            return Err(Error::Shape(format!(
                "tensor with dims {dims:?} needs {len} values, got {}",
                values.len()
            )));
        }
        Ok(DenseTensor { dims, values })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let len = dims.iter().product();
        DenseTensor {
            dims,
            values: vec![0.0; len],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn linear_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[self.linear_index(index)]
    }

    pub fn norm(&self) -> f64 {
        frobenius_norm(self)
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &DenseTensor) -> f64 {
        assert_eq!(self.dims, other.dims, "tensor dims differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, beta: f64) -> DenseTensor {
        DenseTensor {
            dims: self.dims.clone(),
            values: self.values.iter().map(|v| beta * v).collect(),
        }
    }

    /// Mode-`k` unfolding: an `n_k × (Π/n_k)` matrix whose columns run over
    /// the remaining indices in Kronecker order.
    pub fn unfold(&self, mode: usize) -> DMatrix<f64> {
        let n = self.dims[mode];
        let left: usize = self.dims[..mode].iter().product();
        let right: usize = self.dims[mode + 1..].iter().product();
        let mut m = DMatrix::zeros(n, left * right);
        for l in 0..left {
            for j in 0..n {
                let base = (l * n + j) * right;
                for r in 0..right {
                    m[(j, l * right + r)] = self.values[base + r];
                }
            }
        }
        m
    }

    /// Mode-`k` product `self ×_k Q` with `Q ∈ R^{m × n_k}`.
    pub fn mode_product(&self, mode: usize, q: &DMatrix<f64>) -> Result<DenseTensor> {
        let n = self.dims[mode];
        if q.ncols() != n {
            return Err(Error::Shape(format!(
                "mode-{mode} product needs a matrix with {n} columns, got {}",
                q.ncols()
            )));
        }
        let m = q.nrows();
        let left: usize = self.dims[..mode].iter().product();
        let right: usize = self.dims[mode + 1..].iter().product();
        let mut dims = self.dims.clone();
        dims[mode] = m;
        let mut out = vec![0.0; left * m * right];
        for l in 0..left {
            for j in 0..n {
                let src = (l * n + j) * right;
                for i in 0..m {
                    let qij = q[(i, j)];
                    if qij == 0.0 {
                        continue;
                    }
                    let dst = (l * m + i) * right;
                    for r in 0..right {
                        out[dst + r] += qij * self.values[src + r];
                    }
                }
            }
        }
        DenseTensor::new(dims, out)
    }
}

/// Kronecker product of two vectors.
pub fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

fn kron_all<'a>(vectors: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    vectors
        .into_iter()
        .fold(vec![1.0], |acc, v| kron(&acc, v))
}

/// The Segre map: `a^(1) ⊗ ⋯ ⊗ a^(d)` as a repeated Kronecker product.
pub fn rank_one(rep: &Representative) -> DenseTensor {
    let values = kron_all(rep.vectors.iter().map(Vec::as_slice));
    DenseTensor {
        dims: rep.dims(),
        values,
    }
}

/// `f(p) = Σ_i a_i^(1) ⊗ ⋯ ⊗ a_i^(d)`, accumulated term by term in index order.
pub fn cpdgen(p: &Params) -> DenseTensor {
    let shape = p.shape();
    let mut values = vec![0.0; shape.pi()];
    for i in 0..p.rank() {
        let term = kron_all((0..p.order()).map(|k| p.factor(i, k)));
        for (acc, t) in values.iter_mut().zip(term) {
            *acc += t;
        }
    }
    DenseTensor {
        dims: shape.dims().to_vec(),
        values,
    }
}

pub fn frobenius_norm(t: &DenseTensor) -> f64 {
    norm(&t.values)
}
