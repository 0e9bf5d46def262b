//! Dense linear-algebra helpers. Matrices are `nalgebra` types; the SVD and
//! the nonsymmetric eigensolver run on `faer`.
//!
//! Everything here returns singular values in descending order.

use faer::Mat;
use nalgebra::{DMatrix, DVector};

/// Singular value decomposition `A = U diag(s) Vᵀ` with `s` descending.
#[derive(Clone, Debug)]
pub struct Svd {
    /// Left singular vectors, `m × k` with `k = min(m, n)`.
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    /// Right singular vectors as columns. `n × k`, or `n × n` when
    /// requested with [`svd_full_v`].
    pub v: DMatrix<f64>,
}

fn to_faer(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn empty_svd(m: usize, n: usize, full_v: bool) -> Svd {
    let k = m.min(n);
    Svd {
        u: DMatrix::zeros(m, k),
        s: vec![0.0; k],
        v: DMatrix::identity(n, if full_v { n } else { k }),
    }
}

fn has_non_finite(a: &DMatrix<f64>) -> bool {
    a.iter().any(|x| !x.is_finite())
}

/// All singular values, descending. Non-finite input yields NaNs.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let k = a.nrows().min(a.ncols());
    if k == 0 {
        return Vec::new();
    }
    if has_non_finite(a) {
        return vec![f64::NAN; k];
    }
    to_faer(a)
        .singular_values()
        .unwrap_or_else(|_| vec![f64::NAN; k])
}

fn svd_impl(a: &DMatrix<f64>, full_v: bool) -> Svd {
    let (m, n) = a.shape();
    if m.min(n) == 0 {
        return empty_svd(m, n, full_v);
    }
    if has_non_finite(a) {
        let mut out = empty_svd(m, n, full_v);
        out.s.fill(f64::NAN);
        return out;
    }
    let fa = to_faer(a);
    let k = m.min(n);
    let dec = if full_v { fa.svd() } else { fa.thin_svd() };
    match dec {
        Ok(dec) => {
            let s: Vec<f64> = dec.S().column_vector().iter().copied().collect();
            let u = from_faer(dec.U());
            Svd {
                u: u.columns(0, k).into_owned(),
                s: s[..k].to_vec(),
                v: from_faer(dec.V()),
            }
        }
        Err(_) => {
            let mut out = empty_svd(m, n, full_v);
            out.s.fill(f64::NAN);
            out
        }
    }
}

/// Thin SVD.
pub fn svd(a: &DMatrix<f64>) -> Svd {
    svd_impl(a, false)
}

/// SVD whose `v` is the full `n × n` orthogonal factor, even when `m < n`.
pub fn svd_full_v(a: &DMatrix<f64>) -> Svd {
    svd_impl(a, true)
}

/// Eigenvalues and eigenvectors of a real square matrix, split into real
/// and imaginary parts.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values_re: Vec<f64>,
    pub values_im: Vec<f64>,
    pub vectors_re: DMatrix<f64>,
    pub vectors_im: DMatrix<f64>,
}

/// Eigendecomposition of a general real matrix, `None` on non-convergence.
pub fn eigen(a: &DMatrix<f64>) -> Option<Eigen> {
    if has_non_finite(a) || a.nrows() != a.ncols() {
        return None;
    }
    let dec = to_faer(a).eigen().ok()?;
    let s = dec.S().column_vector();
    let u = dec.U();
    let n = a.nrows();
    Some(Eigen {
        values_re: s.iter().map(|z| z.re).collect(),
        values_im: s.iter().map(|z| z.im).collect(),
        vectors_re: DMatrix::from_fn(n, n, |i, j| u[(i, j)].re),
        vectors_im: DMatrix::from_fn(n, n, |i, j| u[(i, j)].im),
    })
}

/// Number of singular values strictly above `rel_tol · s[0]`.
pub fn numerical_rank(s: &[f64], rel_tol: f64) -> usize {
    match s.first() {
        Some(&s1) if s1 > 0.0 => s.iter().take_while(|&&x| x > rel_tol * s1).count(),
        _ => 0,
    }
}

/// Default rank tolerance `max(m, n)·ε`.
pub fn default_rank_tol(m: usize, n: usize) -> f64 {
    m.max(n) as f64 * f64::EPSILON
}

/// 2-norm condition number `s_max / s_min`, infinite for singular input.
pub fn cond2(a: &DMatrix<f64>) -> f64 {
    let s = singular_values(a);
    let min = s.last().copied().unwrap_or(0.0);
    if min == 0.0 {
        f64::INFINITY
    } else {
        s[0] / min
    }
}

/// Leading `k` left singular vectors.
pub fn leading_left_singular_vectors(a: &DMatrix<f64>, k: usize) -> (DMatrix<f64>, Vec<f64>) {
    let dec = svd(a);
    (dec.u.columns(0, k).into_owned(), dec.s)
}

/// Orthonormal basis for the column span of `a` (numerical rank at the
/// default tolerance).
pub fn orth(a: &DMatrix<f64>) -> DMatrix<f64> {
    let dec = svd(a);
    let rank = numerical_rank(&dec.s, default_rank_tol(a.nrows(), a.ncols()));
    dec.u.columns(0, rank).into_owned()
}

/// Cosines of the principal angles between the column spans of two
/// orthonormal bases, descending.
pub fn principal_cosines(q1: &DMatrix<f64>, q2: &DMatrix<f64>) -> Vec<f64> {
    singular_values(&(q1.transpose() * q2))
}

/// Least-squares solution of `a x = b` through the SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let dec = svd(a);
    let rank = numerical_rank(&dec.s, default_rank_tol(a.nrows(), a.ncols()));
    let mut x = DMatrix::zeros(a.ncols(), b.ncols());
    for i in 0..rank {
        let ui = dec.u.column(i);
        let vi = dec.v.column(i);
        let coef = ui.transpose() * b / dec.s[i];
        x += vi * coef;
    }
    x
}

pub fn dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
