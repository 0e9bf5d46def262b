//! Norm balancing, the norm-balanced condition number, and closed-form
//! condition numbers for rank-1 and weak 3-orthogonal tensors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::params::{dot, norm};
use crate::tensor::{cpdgen, Params, Shape};
use crate::terracini::build_terracini;

/// Rescales every term so that all of its factor vectors share the norm
/// `γ_i = Π_k ‖a_i^(k)‖^{1/d}`. Directions (and hence signs) are kept.
/// Terms whose norms already agree to a few ulps are copied unchanged, so
/// balancing is idempotent. Returns the balanced parameters and the
/// per-term `γ_i`.
pub fn norm_balance(p: &Params) -> Result<(Params, Vec<f64>)> {
    let d = p.order();
    let inv_d = 1.0 / d as f64;
    let mut out = p.clone();
    let mut gammas = Vec::with_capacity(p.rank());
    for i in 0..p.rank() {
        let mut norms = Vec::with_capacity(d);
        let mut gamma = 1.0;
        for k in 0..d {
            let eta = norm(p.factor(i, k));
            if eta == 0.0 {
                return Err(Error::Degenerate(format!(
                    "factor vector {k} of term {i} is zero"
                )));
            }
            gamma *= eta.powf(inv_d);
            norms.push(eta);
        }
        let max = norms.iter().copied().fold(0.0, f64::max);
        let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
        if max - min <= 4.0 * f64::EPSILON * max {
            gammas.push(gamma);
            continue;
        }
        for (k, eta) in norms.into_iter().enumerate() {
            for v in out.factor_mut(i, k) {
                *v = gamma * (*v / eta);
            }
        }
        gammas.push(gamma);
    }
    Ok((out, gammas))
}

/// Whether every term's factor vectors have equal norms to `rel_tol`.
pub fn is_norm_balanced(p: &Params, rel_tol: f64) -> bool {
    (0..p.rank()).all(|i| {
        let norms: Vec<f64> = (0..p.order()).map(|k| norm(p.factor(i, k))).collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        norms.iter().all(|n| (max - n).abs() <= rel_tol * max)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionState {
    Finite,
    /// `ς_N = 0` (or below the requested tolerance): Terracini's matrix is
    /// rank deficient.
    Singular,
    /// `r(Σ+1) > Π`; no decomposition of this length can be identifiable.
    NotSubgeneric,
}

/// Output of [`cpdcond`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub dims: Vec<usize>,
    pub rank: usize,
    /// `N = r(Σ+1)`.
    pub expected_rank: usize,
    /// All singular values of Terracini's matrix, descending. Empty when the
    /// rank is not subgeneric.
    pub sigma: Vec<f64>,
    pub sigma_n: Option<f64>,
    /// `1/ς_N`; `None` unless `state` is `Finite`.
    pub kappa_abs: Option<f64>,
    /// `κ_A · ‖A‖ / ‖p‖`; `None` unless `state` is `Finite`.
    pub kappa_rel: Option<f64>,
    pub tensor_norm: f64,
    pub param_norm: f64,
    /// Set iff `ς_N ≤ 100·ε·ς_1`.
    pub accuracy_warning: bool,
    pub subgeneric: bool,
    /// Whether the representative was norm balanced before evaluation.
    pub balanced: bool,
    pub state: ConditionState,
}

impl ConditionReport {
    /// Relative condition number, `+∞` when not finite.
    pub fn kappa(&self) -> f64 {
        self.kappa_rel.unwrap_or(f64::INFINITY)
    }

    pub fn kappa_absolute(&self) -> f64 {
        self.kappa_abs.unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CondOptions {
    /// Evaluate at the norm-balanced representative (the canonical value).
    pub balance: bool,
    /// `ς_N ≤ singular_tol · ς_1` is reported as singular.
    pub singular_tol: f64,
}

impl Default for CondOptions {
    fn default() -> Self {
        CondOptions {
            balance: true,
            singular_tol: 0.0,
        }
    }
}

/// Norm-balanced relative condition number of the decomposition `p`.
pub fn cpdcond(p: &Params) -> Result<ConditionReport> {
    cpdcond_with(p, CondOptions::default())
}

pub fn cpdcond_with(p: &Params, opts: CondOptions) -> Result<ConditionReport> {
    let shape = p.shape();
    let d = shape.order() as f64;
    let (q, param_norm) = if opts.balance {
        let (q, gammas) = norm_balance(p)?;
        // ‖p‖ of the balanced representative is √(d Σ γ_i²).
        let pn = (d * gammas.iter().map(|g| g * g).sum::<f64>()).sqrt();
        (q, pn)
    } else {
        for i in 0..p.rank() {
            for k in 0..p.order() {
                if p.factor(i, k).iter().all(|&v| v == 0.0) {
                    return Err(Error::Degenerate(format!(
                        "factor vector {k} of term {i} is zero"
                    )));
                }
            }
        }
        (p.clone(), p.norm())
    };
    let tensor_norm = cpdgen(&q).norm();
    let expected_rank = shape.expected_rank();
    let mut report = ConditionReport {
        dims: shape.dims().to_vec(),
        rank: shape.rank(),
        expected_rank,
        sigma: Vec::new(),
        sigma_n: None,
        kappa_abs: None,
        kappa_rel: None,
        tensor_norm,
        param_norm,
        accuracy_warning: false,
        subgeneric: shape.is_subgeneric(),
        balanced: opts.balance,
        state: ConditionState::NotSubgeneric,
    };
    if !report.subgeneric {
        return Ok(report);
    }
    let sigma = build_terracini(&q).singular_values();
    let sigma_n = sigma[expected_rank - 1];
    report.accuracy_warning = sigma_n <= 100.0 * f64::EPSILON * sigma[0];
    report.sigma_n = Some(sigma_n);
    if sigma_n > opts.singular_tol * sigma[0] {
        let kappa_abs = 1.0 / sigma_n;
        report.kappa_abs = Some(kappa_abs);
        report.kappa_rel = Some(kappa_abs * tensor_norm / param_norm);
        report.state = ConditionState::Finite;
    } else {
        report.state = ConditionState::Singular;
    }
    report.sigma = sigma;
    Ok(report)
}

/// Condition numbers `(κ_A, κ)` of `α·u^(1) ⊗ ⋯ ⊗ u^(d)` with unit `u^(k)`:
/// `(α^{1/d−1}, √(1/d))`.
pub fn rank1_condition(d: usize, alpha: f64) -> Result<(f64, f64)> {
    check_order_and_scale(d, alpha)?;
    let d = d as f64;
    Ok((alpha.powf(1.0 / d - 1.0), d.sqrt().recip()))
}

/// Singular values of Terracini's matrix at a norm-balanced rank-1
/// representative of norm `α`: `√d·α^{1−1/d}`, then `α^{1−1/d}` repeated
/// `Σ` times, then `d−1` zeros.
pub fn rank1_terracini_singvals(shape: &Shape, alpha: f64) -> Result<Vec<f64>> {
    if shape.rank() != 1 {
        return Err(Error::InvalidArgument(format!(
            "rank-1 shape required, got rank {}",
            shape.rank()
        )));
    }
    let d = shape.order();
    check_order_and_scale(d, alpha)?;
    let base = alpha.powf(1.0 - 1.0 / d as f64);
    let mut s = Vec::with_capacity(shape.n_params());
    s.push((d as f64).sqrt() * base);
    s.extend(std::iter::repeat_n(base, shape.sigma()));
    s.extend(std::iter::repeat_n(0.0, d - 1));
    Ok(s)
}

/// Condition numbers of a weak 3-orthogonal tensor `Σ α_i v_i^(1) ⊗ ⋯ ⊗ v_i^(d)`
/// with unit factors and `α_1 ≥ ⋯ ≥ α_r > 0`.
pub fn weak3_condition(alphas: &[f64], d: usize) -> Result<(f64, f64)> {
    let last = *alphas
        .last()
        .ok_or_else(|| Error::InvalidArgument("at least one term required".into()))?;
    if alphas.iter().any(|&a| a <= 0.0 || !a.is_finite()) {
        return Err(Error::InvalidArgument(
            "term norms must be positive and finite".into(),
        ));
    }
    if alphas.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument(
            "term norms must be sorted in descending order".into(),
        ));
    }
    if alphas.len() > 1 && d < 3 {
        return Err(Error::InvalidArgument(
            "weak 3-orthogonality needs order at least 3".into(),
        ));
    }
    check_order_and_scale(d, last)?;
    let df = d as f64;
    let kappa_abs = last.powf(1.0 / df - 1.0);
    let tensor_norm = alphas.iter().map(|a| a * a).sum::<f64>().sqrt();
    let param_norm = alphas
        .iter()
        .map(|a| df * a.powf(2.0 / df))
        .sum::<f64>()
        .sqrt();
    Ok((kappa_abs, kappa_abs * tensor_norm / param_norm))
}

/// Whether every pair of terms is orthogonal in at least three factors,
/// orthogonality meaning `|⟨v_i, v_j⟩| ≤ tol·‖v_i‖·‖v_j‖`.
pub fn is_weak3_orthogonal(p: &Params, tol: f64) -> bool {
    let d = p.order();
    if d < 3 {
        return false;
    }
    let r = p.rank();
    (0..r).all(|i| {
        (i + 1..r).all(|j| {
            let orthogonal = (0..d)
                .filter(|&k| {
                    let (u, v) = (p.factor(i, k), p.factor(j, k));
                    dot(u, v).abs() <= tol * norm(u) * norm(v)
                })
                .count();
            orthogonal >= 3
        })
    })
}

pub const DEFAULT_WEAK3_TOL: f64 = 1e-12;

fn check_order_and_scale(d: usize, alpha: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "order must be at least 2, got {d}"
        )));
    }
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}
