use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::tensor::Params;

pub const DEFAULT_KRUSKAL_TOL: f64 = 1e-10;
const MAX_COLUMNS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KruskalInfo {
    pub k_ranks: Vec<usize>,
    /// `(k_1 + k_2 + k_3 − 2) / 2`.
    pub bound: f64,
    pub rank: usize,
    pub satisfied: bool,
}

fn full_column_rank(m: &DMatrix<f64>, cols: &[usize], tol: f64) -> bool {
    let sub = m.select_columns(cols);
    let s = singular_values(&sub);
    let max = s[0];
    let min = *s.last().unwrap();
    max > 0.0 && min > tol * max
}

fn subsets_full_rank(m: &DMatrix<f64>, k: usize, tol: f64) -> bool {
    let r = m.ncols();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !full_column_rank(m, &idx, tol) {
            return false;
        }
        // Advance to the next k-combination in lexicographic order.
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == r - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return true;
        }
        idx[pos - 1] += 1;
        for j in pos..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Largest `k` such that every `k` columns of `m` are numerically linearly
/// independent.
pub fn kruskal_rank(m: &DMatrix<f64>, tol: f64) -> Result<usize> {
    let r = m.ncols();
    if r > MAX_COLUMNS {
        return Err(Error::Capability(format!(
            "k-rank enumeration supports at most {MAX_COLUMNS} columns, got {r}"
        )));
    }
    let mut k = 0;
    while k < r.min(m.nrows()) && subsets_full_rank(m, k + 1, tol) {
        k += 1;
    }
    Ok(k)
}

pub fn kruskal_check(p: &Params) -> Result<KruskalInfo> {
    kruskal_check_with(p, DEFAULT_KRUSKAL_TOL)
}

/// Kruskal's sufficient condition `r ≤ (k_1 + k_2 + k_3 − 2)/2` for a
/// third-order decomposition.
pub fn kruskal_check_with(p: &Params, tol: f64) -> Result<KruskalInfo> {
    if p.order() != 3 {
        return Err(Error::Capability(format!(
            "the Kruskal criterion is implemented for order 3, got order {}",
            p.order()
        )));
    }
    let k_ranks = p
        .to_factors()
        .iter()
        .map(|f| kruskal_rank(f, tol))
        .collect::<Result<Vec<_>>>()?;
    let bound = (k_ranks.iter().sum::<usize>() as f64 - 2.0) / 2.0;
    let rank = p.rank();
    Ok(KruskalInfo {
        k_ranks,
        bound,
        rank,
        satisfied: rank as f64 <= bound,
    })
}
