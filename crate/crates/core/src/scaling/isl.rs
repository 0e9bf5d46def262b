use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::params::norm;
use crate::tensor::Params;
use crate::terracini::kernel_basis;

#[derive(Clone, Copy, Debug)]
pub struct IslOptions {
    pub max_iter: usize,
    /// Absolute stopping threshold on `‖∇^(k)‖`.
    pub tol: f64,
}

impl Default for IslOptions {
    fn default() -> Self {
        IslOptions {
            max_iter: 200,
            tol: 10.0 * f64::EPSILON,
        }
    }
}

/// Output of [`iterated_scaling`]: `p + ∇ = p_dot + delta` up to the last
/// entry of `nabla_norms`, with `p_dot` in the scaling orbit of `p` and
/// `delta` orthogonal to the kernel basis at `p`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IslResult {
    pub p_dot: Params,
    pub delta: Vec<f64>,
    /// `gammas[i] = (γ_{2,i}, …, γ_{d,i})`; `p_dot = diag(γ) p` with
    /// `γ_{1,i} = (γ_{2,i} ⋯ γ_{d,i})⁻¹`.
    pub gammas: Vec<Vec<f64>>,
    /// `‖∇^(k)‖` for every iterate, starting with the projected input.
    pub nabla_norms: Vec<f64>,
    pub iterations: usize,
    pub lambda: f64,
    /// Whether `‖∇‖ ≤ 1/(2λ)`, under which the iteration is guaranteed to
    /// converge quadratically.
    pub precondition_ok: bool,
}

/// `λ = 2^(d+3) (d−1)^(3/2) max_i max_(k≥2) ‖a_i^(1)‖ / ‖a_i^(k)‖²`.
pub fn isl_lambda(p: &Params) -> f64 {
    let d = p.order();
    let mut worst: f64 = 0.0;
    for i in 0..p.rank() {
        let a1 = norm(p.factor(i, 0));
        for k in 1..d {
            let ak = norm(p.factor(i, k));
            worst = worst.max(a1 / (ak * ak));
        }
    }
    2f64.powi(d as i32 + 3) * ((d - 1) as f64).powf(1.5) * worst
}

pub fn iterated_scaling(p: &Params, nabla: &[f64]) -> Result<IslResult> {
    iterated_scaling_with(p, nabla, IslOptions::default())
}

/// Splits `p + ∇` into a scaled copy of `p` plus a part orthogonal to the
/// scaling directions at `p`. A component of `∇` outside the kernel span is
/// carried into `delta` unchanged.
pub fn iterated_scaling_with(p: &Params, nabla: &[f64], opts: IslOptions) -> Result<IslResult> {
    let shape = p.shape();
    if nabla.len() != shape.n_params() {
        return Err(Error::Shape(format!(
            "perturbation of length {} for {} parameters",
            nabla.len(),
            shape.n_params()
        )));
    }
    let kb = kernel_basis(p)?;
    let r = shape.rank();
    let d = shape.order();
    let lambda = isl_lambda(p);

    let mut grad = kb.project(nabla);
    let mut delta: Vec<f64> = nabla.iter().zip(&grad).map(|(a, b)| a - b).collect();
    let precondition_ok = norm(nabla) <= 0.5 / lambda;
    let mut gam = vec![vec![1.0; d - 1]; r];
    let mut trace = vec![norm(&grad)];
    let mut iterations = 0;

    while *trace.last().unwrap() > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NotConverged {
                iterations,
                last: *trace.last().unwrap(),
                trace,
            });
        }
        let v = kb.pinv_apply(&grad);
        // z − p_(k+1) vanishes outside the first factor of each term, where it
        // is a multiple of the original a_i^(1).
        let mut x = vec![0.0; shape.n_params()];
        for (i, gi) in gam.iter_mut().enumerate() {
            let vi = &v[i * (d - 1)..(i + 1) * (d - 1)];
            let first_old = 1.0 / gi.iter().product::<f64>();
            for (g, dv) in gi.iter_mut().zip(vi) {
                *g -= dv;
            }
            let first_new = 1.0 / gi.iter().product::<f64>();
            let coef = first_old + vi.iter().sum::<f64>() - first_new;
            let off = shape.param_offset(i, 0);
            for (o, a) in x[off..].iter_mut().zip(p.factor(i, 0)) {
                *o = coef * a;
            }
        }
        if gam.iter().flatten().any(|g| *g == 0.0 || !g.is_finite()) {
            return Err(Error::NotConverged {
                iterations,
                last: *trace.last().unwrap(),
                trace,
            });
        }
        grad = kb.project(&x);
        for ((dl, xv), gv) in delta.iter_mut().zip(&x).zip(&grad) {
            *dl += xv - gv;
        }
        trace.push(norm(&grad));
        iterations += 1;
    }

    let mut p_dot = p.clone();
    for (i, gi) in gam.iter().enumerate() {
        let first = 1.0 / gi.iter().product::<f64>();
        for a in p_dot.factor_mut(i, 0) {
            *a *= first;
        }
        for (k, g) in gi.iter().enumerate() {
            for a in p_dot.factor_mut(i, k + 1) {
                *a *= g;
            }
        }
    }
    // The last kernel residual (below `tol`) is dropped rather than folded
    // into `delta`, which keeps `delta` orthogonal to the kernel.

    Ok(IslResult {
        p_dot,
        delta,
        gammas: gam,
        nabla_norms: trace,
        iterations,
        lambda,
        precondition_ok,
    })
}

/// Diagonal of `Ḋ = diag(γ)⁻¹`, so that `T_(p_dot) = T_p Ḋ`.
pub fn isl_rescale_diagonal(p: &Params, gammas: &[Vec<f64>]) -> Result<Vec<f64>> {
    let shape = p.shape();
    let d = shape.order();
    if gammas.len() != shape.rank() || gammas.iter().any(|g| g.len() + 1 != d) {
        return Err(Error::Shape("scaling array does not match parameters".into()));
    }
    if gammas.iter().flatten().any(|g| *g == 0.0 || !g.is_finite()) {
        return Err(Error::InvalidArgument("scalings must be nonzero".into()));
    }
    let mut diag = Vec::with_capacity(shape.n_params());
    for gi in gammas {
        let first_inv: f64 = gi.iter().product();
        diag.extend(std::iter::repeat_n(first_inv, shape.dims()[0]));
        for (k, g) in gi.iter().enumerate() {
            diag.extend(std::iter::repeat_n(1.0 / g, shape.dims()[k + 1]));
        }
    }
    Ok(diag)
}
