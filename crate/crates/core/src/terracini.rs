//! Terracini's matrix (the Jacobian of `p ↦ cpdgen(p)`) and the analytic
//! basis of its kernel.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::params::{dot, norm};
use crate::tensor::{kron, Params, Shape};

/// Dense `Π × M` Jacobian. Column `(i, k, j)` (term `i`, factor `k`, entry
/// `j`) is `a_i^(1) ⊗ ⋯ ⊗ e_j ⊗ ⋯ ⊗ a_i^(d)` with `e_j` in slot `k`.
#[derive(Clone, Debug)]
pub struct TerraciniMatrix {
    pub shape: Shape,
    pub matrix: DMatrix<f64>,
}

impl TerraciniMatrix {
    /// All singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        linalg::singular_values(&self.matrix)
    }

    /// Numerical rank; a singular value counts when it exceeds
    /// `rel_tol · ς_1`. `None` uses `max(Π, M)·ε`.
    pub fn numerical_rank(&self, rel_tol: Option<f64>) -> usize {
        let tol = rel_tol
            .unwrap_or_else(|| linalg::default_rank_tol(self.matrix.nrows(), self.matrix.ncols()));
        linalg::numerical_rank(&self.singular_values(), tol)
    }
}

pub fn build_terracini(p: &Params) -> TerraciniMatrix {
    let shape = p.shape().clone();
    let d = shape.order();
    let dims = shape.dims();
    let mut matrix = DMatrix::zeros(shape.pi(), shape.n_params());
    for i in 0..p.rank() {
        for k in 0..d {
            let left = (0..k).fold(vec![1.0], |acc, l| kron(&acc, p.factor(i, l)));
            let right = (k + 1..d).fold(vec![1.0], |acc, l| kron(&acc, p.factor(i, l)));
            let n = dims[k];
            let rlen = right.len();
            let col0 = shape.param_offset(i, k);
            for j in 0..n {
                let mut col = matrix.column_mut(col0 + j);
                for (l, &x) in left.iter().enumerate() {
                    let base = (l * n + j) * rlen;
                    for (r, &y) in right.iter().enumerate() {
                        col[base + r] = x * y;
                    }
                }
            }
        }
    }
    TerraciniMatrix { shape, matrix }
}

/// Basis of `ker T_p` generated by the scaling indeterminacy: for term `i`
/// and `j = 2..d`, the column carrying `+a_i^(1)` in slot 1 and `−a_i^(j)`
/// in slot `j`.
#[derive(Clone, Debug)]
pub struct KernelBasis {
    pub shape: Shape,
    pub matrix: DMatrix<f64>,
    params: Params,
    sq_norms: Vec<f64>,
}

pub fn kernel_basis(p: &Params) -> Result<KernelBasis> {
    let shape = p.shape().clone();
    let d = shape.order();
    let r = shape.rank();
    let mut sq_norms = Vec::with_capacity(r * d);
    for i in 0..r {
        for k in 0..d {
            let n2 = dot(p.factor(i, k), p.factor(i, k));
            if n2 == 0.0 {
                return Err(Error::Degenerate(format!(
                    "factor vector {k} of term {i} is zero"
                )));
            }
            sq_norms.push(n2);
        }
    }
    let mut matrix = DMatrix::zeros(shape.n_params(), r * (d - 1));
    for i in 0..r {
        let off1 = shape.param_offset(i, 0);
        for j in 1..d {
            let col = i * (d - 1) + j - 1;
            for (row, &v) in p.factor(i, 0).iter().enumerate() {
                matrix[(off1 + row, col)] = v;
            }
            let offj = shape.param_offset(i, j);
            for (row, &v) in p.factor(i, j).iter().enumerate() {
                matrix[(offj + row, col)] = -v;
            }
        }
    }
    Ok(KernelBasis {
        shape,
        matrix,
        params: p.clone(),
        sq_norms,
    })
}

impl KernelBasis {
    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// The parameters this basis was built from.
    pub fn params(&self) -> &Params {
        &self.params
    }

    /// `Kᵀ x`, evaluated block-wise.
    pub fn transpose_apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.shape.order();
        let p = &self.params;
        let mut out = Vec::with_capacity(self.ncols());
        for i in 0..self.shape.rank() {
            let x1 = self.slot(x, i, 0);
            let base = dot(p.factor(i, 0), x1);
            for j in 1..d {
                out.push(base - dot(p.factor(i, j), self.slot(x, i, j)));
            }
        }
        out
    }

    /// `K v`, evaluated block-wise.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let d = self.shape.order();
        let p = &self.params;
        let mut out = vec![0.0; self.shape.n_params()];
        for i in 0..self.shape.rank() {
            let vi = &v[i * (d - 1)..(i + 1) * (d - 1)];
            let total: f64 = vi.iter().sum();
            let off1 = self.shape.param_offset(i, 0);
            for (o, a) in out[off1..].iter_mut().zip(p.factor(i, 0)) {
                *o += total * a;
            }
            for j in 1..d {
                let off = self.shape.param_offset(i, j);
                for (o, a) in out[off..].iter_mut().zip(p.factor(i, j)) {
                    *o -= vi[j - 1] * a;
                }
            }
        }
        out
    }

    /// `K† x = (KᵀK)⁻¹ Kᵀ x`. `KᵀK` is block diagonal with blocks
    /// `diag(‖a^(2)‖², …, ‖a^(d)‖²) + ‖a^(1)‖² 11ᵀ`, inverted in closed form
    /// by Sherman-Morrison.
    pub fn pinv_apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.shape.order();
        let y = self.transpose_apply(x);
        let mut v = Vec::with_capacity(y.len());
        for i in 0..self.shape.rank() {
            let norms = &self.sq_norms[i * d..(i + 1) * d];
            let yi = &y[i * (d - 1)..(i + 1) * (d - 1)];
            let h: Vec<f64> = norms[1..].iter().map(|n| 1.0 / n).collect();
            let hty: f64 = h.iter().zip(yi).map(|(a, b)| a * b).sum();
            let hsum: f64 = h.iter().sum();
            let coef = norms[0] * hty / (1.0 + norms[0] * hsum);
            v.extend(h.iter().zip(yi).map(|(hj, yj)| hj * yj - coef * hj));
        }
        v
    }

    /// Orthogonal projection onto `span(K)`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.apply(&self.pinv_apply(x))
    }

    /// `‖Kᵀ x‖`.
    pub fn transpose_norm(&self, x: &[f64]) -> f64 {
        norm(&self.transpose_apply(x))
    }

    fn slot<'a>(&self, x: &'a [f64], i: usize, k: usize) -> &'a [f64] {
        let off = self.shape.param_offset(i, k);
        &x[off..off + self.shape.dims()[k]]
    }
}
