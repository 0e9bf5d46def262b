use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Shape;
use crate::error::{Error, Result};

/// One representative `(a^(1), …, a^(d))` of a rank-1 tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Representative {
    pub vectors: Vec<Vec<f64>>,
}

impl Representative {
    pub fn new(vectors: Vec<Vec<f64>>) -> Self {
        Representative { vectors }
    }

    pub fn order(&self) -> usize {
        self.vectors.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.vectors.iter().map(Vec::len).collect()
    }

    /// Concatenation `(a^(1); …; a^(d))`.
    pub fn flatten(&self) -> Vec<f64> {
        self.vectors.iter().flatten().copied().collect()
    }
}

/// Vectorized factor matrices: `r` consecutive blocks, block `i` being
/// `(a_i^(1); a_i^(2); …; a_i^(d))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    shape: Shape,
    data: Vec<f64>,
}

impl Params {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.n_params() {
            return Err(Error::Shape(format!(
                "parameter vector has length {}, expected {}",
                data.len(),
                shape.n_params()
            )));
        }
        Ok(Params { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        let data = vec![0.0; shape.n_params()];
        Params { shape, data }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.shape.rank()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    /// The block of term `i`.
    pub fn term(&self, i: usize) -> &[f64] {
        let len = self.shape.block_len();
        &self.data[i * len..(i + 1) * len]
    }

    pub fn term_mut(&mut self, i: usize) -> &mut [f64] {
        let len = self.shape.block_len();
        &mut self.data[i * len..(i + 1) * len]
    }

    /// Factor vector `a_i^(k)`.
    pub fn factor(&self, i: usize, k: usize) -> &[f64] {
        let off = self.shape.param_offset(i, k);
        &self.data[off..off + self.shape.dims()[k]]
    }

    pub fn factor_mut(&mut self, i: usize, k: usize) -> &mut [f64] {
        let off = self.shape.param_offset(i, k);
        let n = self.shape.dims()[k];
        &mut self.data[off..off + n]
    }

    pub fn representative(&self, i: usize) -> Representative {
        Representative::new(
            (0..self.order())
                .map(|k| self.factor(i, k).to_vec())
                .collect(),
        )
    }

    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Builds parameters from factor matrices `A_k ∈ R^{n_k × r}`.
    pub fn from_factors(factors: &[DMatrix<f64>]) -> Result<Self> {
        let rank = factors
            .first()
            .ok_or_else(|| Error::Shape("no factor matrices given".into()))?
            .ncols();
        if factors.iter().any(|f| f.ncols() != rank) {
            return Err(Error::Shape(
                "factor matrices have differing column counts".into(),
            ));
        }
        let shape = Shape::new(factors.iter().map(|f| f.nrows()).collect(), rank)?;
        let mut data = Vec::with_capacity(shape.n_params());
        for i in 0..rank {
            for f in factors {
                data.extend(f.column(i).iter());
            }
        }
        Params::new(shape, data)
    }

    pub fn to_factors(&self) -> Vec<DMatrix<f64>> {
        let r = self.rank();
        self.shape
            .dims()
            .iter()
            .enumerate()
            .map(|(k, &n)| DMatrix::from_fn(n, r, |row, i| self.factor(i, k)[row]))
            .collect()
    }

    /// Elementwise `self + scale·other`.
    pub fn axpy(&self, scale: f64, other: &[f64]) -> Result<Params> {
        if other.len() != self.data.len() {
            return Err(Error::Shape(format!(
                "cannot add vector of length {} to parameters of length {}",
                other.len(),
                self.data.len()
            )));
        }
        let data = self
            .data
            .iter()
            .zip(other)
            .map(|(a, b)| a + scale * b)
            .collect();
        Ok(Params {
            shape: self.shape.clone(),
            data,
        })
    }
}

/// `vecr`: concatenates representatives in term-major, factor-minor order.
pub fn vecr(reps: &[Representative], shape: &Shape) -> Result<Params> {
    if reps.len() != shape.rank() {
        return Err(Error::Shape(format!(
            "expected {} representatives, got {}",
            shape.rank(),
            reps.len()
        )));
    }
    let mut data = Vec::with_capacity(shape.n_params());
    for (i, rep) in reps.iter().enumerate() {
        if rep.dims() != shape.dims() {
            return Err(Error::Shape(format!(
                "representative {i} has dims {:?}, expected {:?}",
                rep.dims(),
                shape.dims()
            )));
        }
        data.extend(rep.vectors.iter().flatten());
    }
    Params::new(shape.clone(), data)
}

/// Inverse of [`vecr`].
pub fn unvecr(p: &Params) -> Vec<Representative> {
    (0..p.rank()).map(|i| p.representative(i)).collect()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vecr_rank_one_unit_vectors() {
        let shape = Shape::new(vec![2, 2, 2], 1).unwrap();
        let rep = Representative::new(vec![vec![1.0, 0.0]; 3]);
        let p = vecr(&[rep], &shape).unwrap();
        assert_eq!(p.data(), &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn vecr_of_factor_matrices_matches_listing() {
        let a = DMatrix::from_row_slice(3, 2, &[2.0, 0.0, -1.0, 1.0, 0.0, 2.0]);
        let b = DMatrix::from_row_slice(3, 2, &[-1.0, -2.0, 2.0, 0.0, 0.0, 1.0]);
        let c = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 2.0, 1.0]);
        let p = Params::from_factors(&[a.clone(), b, c]).unwrap();
        assert_eq!(
            p.data(),
            &[
                2.0, -1.0, 0.0, -1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 1.0, 2.0, -2.0, 0.0, 1.0, -2.0,
                1.0
            ]
        );
        assert_eq!(p.to_factors()[0], a);
    }

    #[test]
    fn vecr_rejects_mismatched_dims() {
        let shape = Shape::new(vec![2, 3], 1).unwrap();
        let rep = Representative::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(vecr(&[rep], &shape), Err(Error::Shape(_))));
        assert!(vecr(&[], &shape).is_err());
    }

    #[test]
    fn unvecr_inverts_vecr() {
        let shape = Shape::new(vec![3, 2], 2).unwrap();
        let data: Vec<f64> = (0..10).map(|x| x as f64 * 0.37 - 1.0).collect();
        let p = Params::new(shape.clone(), data).unwrap();
        let back = vecr(&unvecr(&p), &shape).unwrap();
        assert_eq!(back, p);
    }
}
