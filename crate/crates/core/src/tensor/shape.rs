use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions `n_1, …, n_d` of an order-`d` tensor together with a rank `r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    dims: Vec<usize>,
    rank: usize,
}

impl Shape {
    /// Requires `d ≥ 2`, every `n_k ≥ 2` and `r ≥ 1`.
    pub fn new(dims: Vec<usize>, rank: usize) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Shape(format!(
                "tensor order must be at least 2, got {}",
                dims.len()
            )));
        }
        if let Some(&n) = dims.iter().find(|&&n| n < 2) {
            return Err(Error::Shape(format!(
                "every dimension must be at least 2, got {n}"
            )));
        }
        if rank == 0 {
            return Err(Error::Shape("rank must be at least 1".into()));
        }
        Ok(Shape { dims, rank })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Order `d`.
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// `Σ = Σ_k (n_k − 1)`.
    pub fn sigma(&self) -> usize {
        self.dims.iter().map(|n| n - 1).sum()
    }

    /// `Π = Π_k n_k`, the number of tensor entries.
    pub fn pi(&self) -> usize {
        self.dims.iter().product()
    }

    /// Length of one term block, `Σ + d = Σ_k n_k`.
    pub fn block_len(&self) -> usize {
        self.dims.iter().sum()
    }

    /// `N = r(Σ+1)`, the expected rank of Terracini's matrix.
    pub fn expected_rank(&self) -> usize {
        self.rank * (self.sigma() + 1)
    }

    /// `M = r(Σ+d)`, the number of parameters.
    pub fn n_params(&self) -> usize {
        self.rank * self.block_len()
    }

    /// Whether `r(Σ+1) ≤ Π`, the necessary condition for a finite condition number.
    pub fn is_subgeneric(&self) -> bool {
        self.expected_rank() <= self.pi()
    }

    /// Offset of factor `k` inside a term block.
    pub fn factor_offset(&self, k: usize) -> usize {
        self.dims[..k].iter().sum()
    }

    /// Offset of factor `k` of term `i` inside the flat parameter vector.
    pub fn param_offset(&self, term: usize, k: usize) -> usize {
        term * self.block_len() + self.factor_offset(k)
    }

    pub fn with_rank(&self, rank: usize) -> Result<Self> {
        Shape::new(self.dims.clone(), rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let s = Shape::new(vec![3, 3, 2], 2).unwrap();
        assert_eq!(s.order(), 3);
        assert_eq!(s.sigma(), 5);
        assert_eq!(s.pi(), 18);
        assert_eq!(s.expected_rank(), 12);
        assert_eq!(s.n_params(), 16);
        assert_eq!(s.block_len(), 8);
        assert_eq!(s.param_offset(1, 2), 14);
        assert!(s.is_subgeneric());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Shape::new(vec![3], 1).is_err());
        assert!(Shape::new(vec![3, 1], 1).is_err());
        assert!(Shape::new(vec![3, 3], 0).is_err());
    }

    #[test]
    fn subgeneric_boundary() {
        // 2x2x2: N = r*4, Pi = 8.
        assert!(Shape::new(vec![2, 2, 2], 2).unwrap().is_subgeneric());
        assert!(!Shape::new(vec![2, 2, 2], 3).unwrap().is_subgeneric());
    }
}
