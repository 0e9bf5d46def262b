use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assignment::solve_assignment;
use super::group::GroupElement;
use crate::error::{Error, Result};
use crate::tensor::params::{dot, norm};
use crate::tensor::{Params, Representative};

const RESTART_SEED: u64 = 0x7e5c_a1e5;
const RESTARTS: usize = 8;

#[derive(Clone, Copy, Debug)]
pub struct DistanceOptions {
    /// Relative step size at which coordinate descent stops.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            tol: 1e-12,
            max_sweeps: 2000,
        }
    }
}

/// Best scaling of `c` towards `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub value: f64,
    /// `(θ_2, …, θ_d)`.
    pub thetas: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceResult {
    pub value: f64,
    /// Group element `T` with `‖p − T·q‖ = value`.
    pub minimizer: GroupElement,
    /// `per_pair_costs[i][j]` is the pair distance from term `i` of `p` to
    /// the orbit of term `j` of `q`.
    pub per_pair_costs: Vec<Vec<f64>>,
}

/// Inner products for the objective
/// `g(θ) = Σ_k ‖b_k − s_k c_k‖²` with `s_1 = (θ_2⋯θ_d)⁻¹` and `s_k = θ_k`.
/// Derivatives come from the inner products; function values are evaluated
/// on the vectors, since the expanded form cancels badly near a close fit.
struct Gram<'a> {
    bv: &'a Representative,
    cv: &'a Representative,
    b: Vec<f64>,
    c: Vec<f64>,
    x: Vec<f64>,
}

fn sq_residual(b: &[f64], c: &[f64], s: f64) -> f64 {
    b.iter().zip(c).map(|(x, y)| (x - s * y).powi(2)).sum()
}

impl Gram<'_> {
    /// One safeguarded Newton step for coordinate `k` (0-based in `th`).
    /// Returns the relative change.
    fn coordinate_step(&self, th: &mut [f64], k: usize) -> f64 {
        let (c1, x1) = (self.c[0], self.x[0]);
        let (ck, xk) = (self.c[k + 1], self.x[k + 1]);
        let rest: f64 = th
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, t)| t)
            .product();
        let (b1v, c1v) = (&self.bv.vectors[0], &self.cv.vectors[0]);
        let (bkv, ckv) = (&self.bv.vectors[k + 1], &self.cv.vectors[k + 1]);
        let h = |t: f64| sq_residual(b1v, c1v, 1.0 / (rest * t)) + sq_residual(bkv, ckv, t);
        let t = th[k];
        let u = 1.0 / (rest * t);
        let d1 = (2.0 * u * x1 - 2.0 * u * u * c1) / t - 2.0 * xk + 2.0 * t * ck;
        let d2 = (6.0 * u * u * c1 - 4.0 * u * x1) / (t * t) + 2.0 * ck;
        let mut step = if d2 > 0.0 {
            -d1 / d2
        } else {
            // Nonconvex region: gradient step scaled to the coordinate.
            -d1.signum() * 0.5 * t.abs()
        };
        // Stay on the same side of zero and within a factor 4.
        let lo = 0.25 * t.abs();
        let hi = 4.0 * t.abs();
        let mut cand = (t + step).abs().clamp(lo, hi).copysign(t);
        step = cand - t;
        let h0 = h(t);
        let mut tries = 0;
        while h(cand) > h0 && tries < 40 {
            step *= 0.5;
            cand = t + step;
            tries += 1;
        }
        if h(cand) > h0 {
            return 0.0;
        }
        th[k] = cand;
        (cand - t).abs() / t.abs()
    }

    fn descend(&self, th: &mut [f64], opts: &DistanceOptions) {
        for _ in 0..opts.max_sweeps {
            let mut change: f64 = 0.0;
            for k in 0..th.len() {
                change = change.max(self.coordinate_step(th, k));
            }
            if change < opts.tol {
                break;
            }
        }
    }
}

fn residual(b: &Representative, c: &Representative, th: &[f64]) -> f64 {
    let s1 = 1.0 / th.iter().product::<f64>();
    let mut acc = 0.0;
    for (k, (bk, ck)) in b.vectors.iter().zip(&c.vectors).enumerate() {
        let s = if k == 0 { s1 } else { th[k - 1] };
        acc += bk.iter().zip(ck).map(|(x, y)| (x - s * y).powi(2)).sum::<f64>();
    }
    acc.sqrt()
}

/// `min_θ ‖b − θ·c‖` over scalings with `θ_1 ⋯ θ_d = 1`.
pub fn pair_distance(
    b: &Representative,
    c: &Representative,
    opts: &DistanceOptions,
) -> Result<PairDistance> {
    if b.dims() != c.dims() || b.order() < 2 {
        return Err(Error::Shape(format!(
            "representatives of shapes {:?} and {:?}",
            b.dims(),
            c.dims()
        )));
    }
    let gram = Gram {
        bv: b,
        cv: c,
        b: b.vectors.iter().map(|v| dot(v, v)).collect(),
        c: c.vectors.iter().map(|v| dot(v, v)).collect(),
        x: b.vectors.iter().zip(&c.vectors).map(|(u, v)| dot(u, v)).collect(),
    };
    if let Some(k) = gram.c.iter().position(|&n| n == 0.0) {
        return Err(Error::Degenerate(format!("factor vector {k} is zero")));
    }
    let d = b.order();
    let projection: Vec<f64> = (1..d)
        .map(|k| {
            let (bk, ck, xk) = (gram.b[k], gram.c[k], gram.x[k]);
            if xk.abs() > 1e-12 * (bk * ck).sqrt() {
                xk / ck
            } else if bk > 0.0 {
                (bk / ck).sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let signs: Vec<f64> = projection.iter().map(|t| t.signum()).collect();
    let starts = [projection.clone(), signs, vec![1.0; d - 1]];

    let mut best: Option<(f64, Vec<f64>)> = None;
    let run = |start: Vec<f64>, best: &mut Option<(f64, Vec<f64>)>| {
        let mut th = start;
        gram.descend(&mut th, opts);
        let val = residual(b, c, &th);
        if best.as_ref().is_none_or(|(v, _)| val < *v) {
            *best = Some((val, th));
        }
    };
    for s in starts {
        run(s, &mut best);
    }
    let bnorm = norm(&b.flatten());
    if best.as_ref().unwrap().0 > 0.5 * bnorm {
        let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
        for _ in 0..RESTARTS {
            let start = projection
                .iter()
                .map(|&t| {
                    let z: f64 = rng.sample(StandardNormal);
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    sign * t.abs() * z.exp()
                })
                .collect();
            run(start, &mut best);
        }
    }
    let (value, thetas) = best.unwrap();
    Ok(PairDistance { value, thetas })
}

/// `d(p, q) = min_T ‖p − T·q‖` with default options.
pub fn distance(p: &Params, q: &Params) -> Result<DistanceResult> {
    distance_with(p, q, &DistanceOptions::default())
}

pub fn distance_with(p: &Params, q: &Params, opts: &DistanceOptions) -> Result<DistanceResult> {
    if p.shape() != q.shape() {
        return Err(Error::Shape(format!(
            "shapes {:?} and {:?} differ",
            p.shape(),
            q.shape()
        )));
    }
    let r = p.rank();
    let pairs: Vec<Vec<PairDistance>> = (0..r)
        .into_par_iter()
        .map(|i| {
            let b = p.representative(i);
            (0..r)
                .map(|j| pair_distance(&b, &q.representative(j), opts))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let per_pair_costs: Vec<Vec<f64>> = pairs
        .iter()
        .map(|row| row.iter().map(|pd| pd.value).collect())
        .collect();
    let squared: Vec<Vec<f64>> = per_pair_costs
        .iter()
        .map(|row| row.iter().map(|v| v * v).collect())
        .collect();
    let perm = solve_assignment(&squared);
    let value = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| squared[i][j])
        .sum::<f64>()
        .sqrt();
    let thetas = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| pairs[i][j].thetas.clone())
        .collect();
    Ok(DistanceResult {
        value,
        minimizer: GroupElement { perm, thetas },
        per_pair_costs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Shape;

    fn rand_params(seed: u64, dims: Vec<usize>, r: usize) -> Params {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = Shape::new(dims, r).unwrap();
        let data = (0..shape.n_params()).map(|_| rng.sample(StandardNormal)).collect();
        Params::new(shape, data).unwrap()
    }

    #[test]
    fn zero_on_orbit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..20 {
            let p = rand_params(seed, vec![3, 4, 2], 3);
            let g = GroupElement::random(&mut rng, 3, 3);
            let q = g.apply(&p).unwrap();
            let res = distance(&p, &q).unwrap();
            assert!(res.value <= 1e-10 * p.norm(), "{}", res.value);
            let back = res.minimizer.apply(&q).unwrap();
            let diff: f64 = back
                .data()
                .iter()
                .zip(p.data())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!((diff - res.value).abs() <= 1e-10 * p.norm());
        }
    }

    #[test]
    fn bounded_by_plain_distance() {
        for seed in 0..20 {
            let p = rand_params(seed, vec![2, 3, 3, 2], 2);
            let q = rand_params(seed + 100, vec![2, 3, 3, 2], 2);
            let res = distance(&p, &q).unwrap();
            let plain: f64 = p
                .data()
                .iter()
                .zip(q.data())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res.value <= plain * (1.0 + 1e-12));
        }
    }

    #[test]
    fn scaled_pair_is_close() {
        // (1, 1, 1) against (ε, 1, 1/ε): distance tends to ε².
        let eps = 1e-3;
        let b = Representative::new(vec![vec![1.0], vec![1.0], vec![1.0]]);
        let c = Representative::new(vec![vec![eps], vec![1.0], vec![1.0 / eps]]);
        let pd = pair_distance(&b, &c, &DistanceOptions::default()).unwrap();
        assert!(pd.value <= eps * eps + 1e-9, "{}", pd.value);
    }

    #[test]
    fn pair_minimizer_beats_grid() {
        let b = Representative::new(vec![vec![1.0, -2.0], vec![0.5, 0.3], vec![2.0, 1.0]]);
        let c = Representative::new(vec![vec![-0.3, 1.0], vec![1.0, 1.0], vec![0.2, -0.7]]);
        let pd = pair_distance(&b, &c, &DistanceOptions::default()).unwrap();
        let mut grid_best = f64::INFINITY;
        for i in 0..400 {
            for j in 0..400 {
                let t2 = (-4.0 + 8.0 * i as f64 / 399.0).exp2() * if i % 2 == 0 { 1.0 } else { -1.0 };
                let t3 = (-4.0 + 8.0 * j as f64 / 399.0).exp2() * if j % 2 == 0 { 1.0 } else { -1.0 };
                grid_best = grid_best.min(residual(&b, &c, &[t2, t3]));
            }
        }
        assert!(pd.value <= grid_best + 1e-9, "{} vs {}", pd.value, grid_best);
    }

    #[test]
    fn rejects_mismatch_and_zero() {
        let b = Representative::new(vec![vec![1.0], vec![1.0]]);
        let c = Representative::new(vec![vec![1.0], vec![0.0]]);
        assert!(pair_distance(&b, &c, &DistanceOptions::default()).is_err());
        let c = Representative::new(vec![vec![1.0, 2.0], vec![1.0]]);
        assert!(pair_distance(&b, &c, &DistanceOptions::default()).is_err());
    }
}
