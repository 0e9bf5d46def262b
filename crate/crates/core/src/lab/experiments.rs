use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize, Serializer};

use super::fixtures::integer_example;
use super::random::{random_matrix, seeded_rng, unit_vector, SampleKind};
use crate::conditioning::{cpdcond, is_norm_balanced, norm_balance};
use crate::error::{Error, Result};
use crate::linalg::{orth, svd_full_v};
use crate::scaling::{iterated_scaling, isl_lambda};
use crate::tensor::params::norm;
use crate::tensor::{cpdgen, Params};
use crate::terracini::{build_terracini, kernel_basis};

/// CSV cell with 17 significant digits.
pub(crate) fn sig17<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:.16e}"))
}

/// Writes serializable rows as CSV with a header taken from the field names.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

/// `p + eps·w`, where `w` is the right singular vector of Terracini's matrix
/// for `ς_N`, signed so that its first nonzero entry is positive.
pub fn worst_perturbation(p: &Params, eps: f64) -> Result<Params> {
    if !is_norm_balanced(p, 1e-10) {
        return Err(Error::InvalidArgument(
            "worst perturbation needs norm-balanced parameters".into(),
        ));
    }
    let shape = p.shape();
    if !shape.is_subgeneric() {
        return Err(Error::InvalidArgument("not subgeneric".into()));
    }
    let t = build_terracini(p);
    let dec = svd_full_v(&t.matrix);
    let n = shape.expected_rank();
    let mut w: Vec<f64> = dec.v.column(n - 1).iter().copied().collect();
    let scale = norm(&w);
    if let Some(first) = w.iter().find(|x| x.abs() > 1e-12 * scale) {
        if *first < 0.0 {
            w.iter_mut().for_each(|x| *x = -*x);
        }
    }
    p.axpy(eps, &w)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorstDirection {
    pub kappa: f64,
    /// `(‖p̂ − p‖/‖p‖) / (‖f(p) − f(p̂)‖/‖f(p)‖)` with `p̂` re-balanced.
    pub estimate: f64,
    pub rel_diff: f64,
}

/// Perturbs the balanced form of `p` along the worst direction and compares
/// the observed error amplification with the condition number.
pub fn worst_direction(p: &Params, eps: f64) -> Result<WorstDirection> {
    let (p, _) = norm_balance(p)?;
    let kappa = cpdcond(&p)?.kappa();
    let (pp, _) = norm_balance(&worst_perturbation(&p, eps)?)?;
    let dp: Vec<f64> = pp.data().iter().zip(p.data()).map(|(a, b)| a - b).collect();
    let t = cpdgen(&p);
    let estimate = (norm(&dp) / p.norm()) / (cpdgen(&pp).distance(&t) / t.norm());
    Ok(WorstDirection {
        kappa,
        estimate,
        rel_diff: (estimate - kappa).abs() / kappa,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rank1Row {
    pub d: usize,
    pub n: usize,
    #[serde(serialize_with = "sig17")]
    pub scale: f64,
    #[serde(serialize_with = "sig17")]
    pub kappa: f64,
    /// `κ⁻² − d`.
    #[serde(serialize_with = "sig17")]
    pub deviation: f64,
}

/// Relative condition numbers of `(c·a) ⊗ ⋯ ⊗ (c·a)` for unit vectors `a` of
/// lengths 2, 3, 4 with `c = 1, 2, 3`, and orders `3..=d_max`.
pub fn rank1_sweep(seed: u64, d_max: usize) -> Result<Vec<Rank1Row>> {
    let mut rng = seeded_rng(seed);
    let bases: Vec<(usize, f64, Vec<f64>)> = [(2, 1.0), (3, 2.0), (4, 3.0)]
        .into_iter()
        .map(|(n, c)| (n, c, unit_vector(&mut rng, n)))
        .collect();
    let mut rows = Vec::new();
    for d in 3..=d_max {
        for (n, c, a) in &bases {
            let col = DMatrix::from_fn(*n, 1, |i, _| c * a[i]);
            let p = Params::from_factors(&vec![col; d])?;
            let kappa = cpdcond(&p)?.kappa();
            rows.push(Rank1Row {
                d,
                n: *n,
                scale: *c,
                kappa,
                deviation: kappa.powi(-2) - d as f64,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdecoRow {
    pub s: u32,
    #[serde(serialize_with = "sig17")]
    pub kappa: f64,
    #[serde(serialize_with = "sig17")]
    pub log10_kappa: f64,
    pub warned: bool,
}

/// `10^{−s} u_1⊗u_2⊗u_3 + v_1⊗v_2⊗v_3` with orthonormal pairs `(u_k, v_k)`
/// given as the columns of `pairs[k]`.
pub fn odeco_params(s: u32, pairs: &[DMatrix<f64>]) -> Result<Params> {
    let mut factors: Vec<DMatrix<f64>> = pairs.to_vec();
    let scale = 10f64.powi(-(s as i32));
    factors[0].column_mut(0).scale_mut(scale);
    Params::from_factors(&factors)
}

/// Condition numbers along the orthogonal family for `s = 0..=s_max`.
pub fn odeco_sweep(seed: u64, s_max: u32) -> Result<Vec<OdecoRow>> {
    let mut rng = seeded_rng(seed);
    let pairs: Vec<DMatrix<f64>> = [4, 3, 2]
        .into_iter()
        .map(|n| orth(&random_matrix(&mut rng, n, 2, SampleKind::Normal)))
        .collect();
    (0..=s_max)
        .map(|s| {
            let rep = cpdcond(&odeco_params(s, &pairs)?)?;
            Ok(OdecoRow {
                s,
                kappa: rep.kappa(),
                log10_kappa: rep.kappa().log10(),
                warned: rep.accuracy_warning,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IslTraceRow {
    pub q: u32,
    pub iteration: usize,
    #[serde(serialize_with = "sig17")]
    pub nabla_norm: f64,
    /// `λ^{k} ‖∇‖^{k+1}` at iteration `k`.
    #[serde(serialize_with = "sig17")]
    pub envelope: f64,
    pub converged: bool,
}

/// Iterated scaling on the integer example for `∇ = 10^{−q} v`, `q = 1..=q_max`,
/// with `v` a seeded unit vector in the kernel span.
pub fn isl_convergence(seed: u64, q_max: u32) -> Result<Vec<IslTraceRow>> {
    let p = integer_example();
    let kb = kernel_basis(&p)?;
    let mut rng = seeded_rng(seed);
    let coeffs: Vec<f64> = (0..kb.ncols()).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut v = kb.apply(&coeffs);
    let vn = norm(&v);
    v.iter_mut().for_each(|x| *x /= vn);
    let lambda = isl_lambda(&p);
    let mut rows = Vec::new();
    for q in 1..=q_max {
        let size = 10f64.powi(-(q as i32));
        let nabla: Vec<f64> = v.iter().map(|x| x * size).collect();
        let (trace, converged) = match iterated_scaling(&p, &nabla) {
            Ok(res) => (res.nabla_norms, true),
            Err(Error::NotConverged { trace, .. }) => (trace, false),
            Err(e) => return Err(e),
        };
        for (k, t) in trace.into_iter().enumerate() {
            rows.push(IslTraceRow {
                q,
                iteration: k,
                nabla_norm: t,
                envelope: lambda.powi(k as i32) * size.powi(k as i32 + 1),
                converged,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::fixtures::positive_example;
    use crate::tensor::params::dot;

    #[test]
    fn zero_step_is_identity() {
        let (p, _) = norm_balance(&positive_example()).unwrap();
        assert_eq!(worst_perturbation(&p, 0.0).unwrap(), p);
    }

    #[test]
    fn unbalanced_input_is_rejected() {
        let mut p = integer_example();
        p.factor_mut(0, 0).iter_mut().for_each(|x| *x *= 3.0);
        assert!(worst_perturbation(&p, 1e-8).is_err());
    }

    #[test]
    fn first_order_change_along_worst_direction() {
        let (p, _) = norm_balance(&positive_example()).unwrap();
        let rep = cpdcond(&p).unwrap();
        let eps = 1e-8;
        let pp = worst_perturbation(&p, eps).unwrap();
        let change = cpdgen(&pp).distance(&cpdgen(&p));
        let sigma_n = rep.sigma_n.unwrap();
        assert!((change - eps * sigma_n).abs() <= 1e-4 * eps * sigma_n);
        let dp: Vec<f64> = pp.data().iter().zip(p.data()).map(|(a, b)| a - b).collect();
        assert!((dot(&dp, &dp).sqrt() - eps).abs() <= 1e-12);
    }

    #[test]
    fn odeco_endpoints() {
        let rows = odeco_sweep(1, 15).unwrap();
        assert!((rows[0].log10_kappa + 0.2).abs() <= 0.05);
        assert!((rows[15].log10_kappa - 9.8).abs() <= 0.05);
    }

    #[test]
    fn rank1_law() {
        for r in rank1_sweep(3, 6).unwrap() {
            assert!(r.deviation.abs() <= 1e-10, "{r:?}");
        }
    }

    #[test]
    fn isl_traces_decrease() {
        let rows = isl_convergence(1, 3).unwrap();
        for q in 1..=3 {
            let t: Vec<f64> = rows.iter().filter(|r| r.q == q).map(|r| r.nabla_norm).collect();
            assert!(t.len() >= 2);
            assert!(t.last().unwrap() <= &(10.0 * f64::EPSILON));
        }
    }

    #[test]
    fn csv_header_follows_fields() {
        let mut buf = Vec::new();
        write_csv(&rank1_sweep(1, 3).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("d,n,scale,kappa,deviation\n"));
    }
}
