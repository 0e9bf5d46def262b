use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{cond2, eigen, leading_left_singular_vectors, svd};
use crate::tensor::{DenseTensor, Params};

#[derive(Clone, Copy, Debug)]
pub struct GevdOptions {
    /// Smallest admissible `σ_k / σ_1` of the retained singular values of
    /// each unfolding.
    pub mlrank_tol: f64,
    /// Largest admissible pencil condition number.
    pub max_pencil_cond: f64,
    /// Seed of the slice mixing used on retry.
    pub seed: u64,
}

impl Default for GevdOptions {
    fn default() -> Self {
        GevdOptions {
            mlrank_tol: 1e-14,
            max_pencil_cond: 1e12,
            seed: 0x6e7d,
        }
    }
}

pub fn cpd_gevd(t: &DenseTensor, r: usize) -> Result<Params> {
    cpd_gevd_with(t, r, &GevdOptions::default())
}

/// Rank-`r` decomposition of a third-order tensor from the generalized
/// eigenvectors of two slices of its compressed core.
pub fn cpd_gevd_with(t: &DenseTensor, r: usize, opts: &GevdOptions) -> Result<Params> {
    let dims = t.dims().to_vec();
    if dims.len() != 3 {
        return Err(Error::Capability(format!(
            "direct decomposition needs an order-3 tensor, got order {}",
            dims.len()
        )));
    }
    if r == 0 || r > dims[0].min(dims[1]) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} exceeds min(n1, n2) = {}",
            dims[0].min(dims[1])
        )));
    }
    let unf1 = t.unfold(0);
    let u1 = compress(&unf1, r, opts.mlrank_tol, 1)?;
    let x = if r == 1 {
        DMatrix::identity(1, 1)
    } else {
        let u2 = compress(&t.unfold(1), r, opts.mlrank_tol, 2)?;
        let u3 = compress(&t.unfold(2), 2, opts.mlrank_tol, 3)?;
        let core = t
            .mode_product(0, &u1.transpose())?
            .mode_product(1, &u2.transpose())?
            .mode_product(2, &u3.transpose())?;
        let s0 = slice(&core, 0);
        let s1 = slice(&core, 1);
        match pencil_eigenvectors(&s0, &s1, opts.max_pencil_cond) {
            Ok(x) => x,
            Err(first) => {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                let angle = rng.random::<f64>() * std::f64::consts::PI;
                let (sn, cs) = angle.sin_cos();
                let m0 = &s0 * cs + &s1 * sn;
                let m1 = &s1 * cs - &s0 * sn;
                pencil_eigenvectors(&m0, &m1, opts.max_pencil_cond).map_err(|second| {
                    Error::DecompositionFailed(format!("{first}; after slice mixing: {second}"))
                })?
            }
        }
    };

    // W = A† T_(1) with A = U1 X; row i of W is b_i ⊗ c_i.
    let a = &u1 * &x;
    let w = x
        .clone()
        .lu()
        .solve(&(u1.transpose() * &unf1))
        .ok_or_else(|| Error::DecompositionFailed("singular eigenvector matrix".into()))?;
    let (n2, n3) = (dims[1], dims[2]);
    let mut data = Vec::with_capacity(r * (dims[0] + n2 + n3));
    for i in 0..r {
        let wi = DMatrix::from_fn(n2, n3, |j, k| w[(i, j * n3 + k)]);
        let dec = svd(&wi);
        data.extend(a.column(i).iter());
        data.extend(dec.u.column(0).iter().map(|v| v * dec.s[0]));
        data.extend(dec.v.column(0).iter());
    }
    let shape = crate::tensor::Shape::new(dims, r)?;
    Params::new(shape, data)
}

fn compress(unf: &DMatrix<f64>, k: usize, tol: f64, mode: usize) -> Result<DMatrix<f64>> {
    let (u, s) = leading_left_singular_vectors(unf, k);
    let ratio = if s[0] > 0.0 { s[k - 1] / s[0] } else { 0.0 };
    if s.len() < k || ratio <= tol {
        return Err(Error::DecompositionFailed(format!(
            "mode-{mode} multilinear rank below {k} (σ_{k}/σ_1 = {ratio:.3e})"
        )));
    }
    Ok(u)
}

fn slice(core: &DenseTensor, k: usize) -> DMatrix<f64> {
    let d = core.dims();
    DMatrix::from_fn(d[0], d[1], |i, j| core.get(&[i, j, k]))
}

/// Eigenvectors of `S_num S_den⁻¹`, with the better-conditioned slice as the
/// denominator.
fn pencil_eigenvectors(s0: &DMatrix<f64>, s1: &DMatrix<f64>, max_cond: f64) -> Result<DMatrix<f64>> {
    let c0 = cond2(s0);
    let c1 = cond2(s1);
    let (num, den, cden) = if c1 <= c0 { (s0, s1, c1) } else { (s1, s0, c0) };
    if cden > max_cond {
        return Err(Error::DecompositionFailed(format!(
            "pencil slice condition {cden:.3e}"
        )));
    }
    let m = den
        .transpose()
        .lu()
        .solve(&num.transpose())
        .ok_or_else(|| Error::DecompositionFailed("singular pencil slice".into()))?
        .transpose();
    let eig = eigen(&m)
        .ok_or_else(|| Error::DecompositionFailed("pencil eigensolver failed".into()))?;
    let scale = eig
        .values_re
        .iter()
        .zip(&eig.values_im)
        .map(|(a, b)| a.hypot(*b))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    if eig.values_im.iter().any(|im| im.abs() > 1e-10 * scale) {
        return Err(Error::DecompositionFailed(
            "pencil has complex eigenvalues".into(),
        ));
    }
    // Eigenvectors of real eigenvalues are real up to a unit phase.
    let r = m.nrows();
    let mut x = DMatrix::zeros(r, r);
    for j in 0..r {
        let re = eig.vectors_re.column(j);
        let im = eig.vectors_im.column(j);
        let best = if re.norm() >= im.norm() { re } else { im };
        x.set_column(j, &(best / best.norm()));
    }
    let cx = cond2(&x);
    if cx > max_cond {
        return Err(Error::DecompositionFailed(format!(
            "eigenvector matrix condition {cx:.3e}"
        )));
    }
    Ok(x)
}
