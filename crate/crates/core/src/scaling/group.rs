use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Params;

/// Element of the indeterminacy group: a term permutation `perm` and
/// per-term scalings `thetas[i] = (θ_{2,i}, …, θ_{d,i})`. The first factor is
/// scaled by the implied `θ_{1,i} = (θ_{2,i} ⋯ θ_{d,i})⁻¹`.
///
/// Acting on `p`, term `i` of the result is term `perm[i]` of `p` rescaled
/// by `thetas[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub perm: Vec<usize>,
    pub thetas: Vec<Vec<f64>>,
}

impl GroupElement {
    pub fn identity(rank: usize, order: usize) -> Self {
        GroupElement {
            perm: (0..rank).collect(),
            thetas: vec![vec![1.0; order - 1]; rank],
        }
    }

    pub fn new(perm: Vec<usize>, thetas: Vec<Vec<f64>>) -> Result<Self> {
        let g = GroupElement { perm, thetas };
        g.validate()?;
        Ok(g)
    }

    /// Random element with log-normal scalings and random signs.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, rank: usize, order: usize) -> Self {
        let mut perm: Vec<usize> = (0..rank).collect();
        perm.shuffle(rng);
        let thetas = (0..rank)
            .map(|_| {
                (1..order)
                    .map(|_| {
                        let mag = (rng.random::<f64>() * 2.0 - 1.0).exp();
                        if rng.random::<bool>() {
                            mag
                        } else {
                            -mag
                        }
                    })
                    .collect()
            })
            .collect();
        GroupElement { perm, thetas }
    }

    pub fn rank(&self) -> usize {
        self.perm.len()
    }

    /// `θ_{1,i}`.
    pub fn implied_first(&self, i: usize) -> f64 {
        1.0 / self.thetas[i].iter().product::<f64>()
    }

    /// Full scaling vector `(θ_1, …, θ_d)` of term `i`.
    pub fn full_scalings(&self, i: usize) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.thetas[i].len() + 1);
        s.push(self.implied_first(i));
        s.extend(&self.thetas[i]);
        s
    }

    fn validate(&self) -> Result<()> {
        let r = self.perm.len();
        let mut seen = vec![false; r];
        for &j in &self.perm {
            if j >= r || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidArgument(format!(
                    "{:?} is not a permutation",
                    self.perm
                )));
            }
        }
        if self.thetas.len() != r {
            return Err(Error::Shape(format!(
                "{} scaling rows for {r} terms",
                self.thetas.len()
            )));
        }
        if self.thetas.iter().flatten().any(|&t| t == 0.0 || !t.is_finite()) {
            return Err(Error::InvalidArgument(
                "scalings must be nonzero and finite".into(),
            ));
        }
        Ok(())
    }

    pub fn apply(&self, p: &Params) -> Result<Params> {
        self.validate()?;
        let r = p.rank();
        let d = p.order();
        if self.perm.len() != r || self.thetas.iter().any(|t| t.len() + 1 != d) {
            return Err(Error::Shape(format!(
                "group element for rank {} / order {} applied to rank {r} / order {d}",
                self.perm.len(),
                self.thetas.first().map_or(0, |t| t.len() + 1)
            )));
        }
        let mut out = p.clone();
        for i in 0..r {
            let scal = self.full_scalings(i);
            for (k, s) in scal.into_iter().enumerate() {
                let src = p.factor(self.perm[i], k);
                for (o, x) in out.factor_mut(i, k).iter_mut().zip(src) {
                    *o = s * x;
                }
            }
        }
        Ok(out)
    }

    /// `self ∘ other`, so that `(g ∘ h)·p = g·(h·p)`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let perm = self.perm.iter().map(|&j| other.perm[j]).collect();
        let thetas = self
            .thetas
            .iter()
            .zip(&self.perm)
            .map(|(t, &j)| t.iter().zip(&other.thetas[j]).map(|(a, b)| a * b).collect())
            .collect();
        GroupElement { perm, thetas }
    }

    pub fn inverse(&self) -> GroupElement {
        let r = self.perm.len();
        let mut inv = vec![0; r];
        for (i, &j) in self.perm.iter().enumerate() {
            inv[j] = i;
        }
        let thetas = inv
            .iter()
            .map(|&j| self.thetas[j].iter().map(|t| 1.0 / t).collect())
            .collect();
        GroupElement { perm: inv, thetas }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{cpdgen, Shape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(seed: u64) -> Params {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = Shape::new(vec![3, 2, 4], 3).unwrap();
        let data = (0..shape.n_params()).map(|_| rng.random::<f64>() - 0.5).collect();
        Params::new(shape, data).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let p = params(1);
        assert_eq!(GroupElement::identity(3, 3).apply(&p).unwrap(), p);
    }

    #[test]
    fn product_one_scaling_of_a_single_term() {
        let shape = Shape::new(vec![2, 2, 2], 1).unwrap();
        let p = Params::new(shape, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let g = GroupElement::new(vec![0], vec![vec![2.0, 0.5]]).unwrap();
        let q = g.apply(&p).unwrap();
        assert_eq!(q.data(), &[1.0, 2.0, 6.0, 8.0, 2.5, 3.0]);
        assert_eq!(cpdgen(&q), cpdgen(&p));
    }

    #[test]
    fn rejects_invalid_elements() {
        assert!(GroupElement::new(vec![0, 0], vec![vec![1.0], vec![1.0]]).is_err());
        assert!(GroupElement::new(vec![0], vec![vec![0.0]]).is_err());
    }

    #[test]
    fn composition_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = params(2);
        for _ in 0..50 {
            let g = GroupElement::random(&mut rng, 3, 3);
            let h = GroupElement::random(&mut rng, 3, 3);
            let lhs = g.compose(&h).apply(&p).unwrap();
            let rhs = g.apply(&h.apply(&p).unwrap()).unwrap();
            for (a, b) in lhs.data().iter().zip(rhs.data()) {
                assert!((a - b).abs() <= 1e-13 * (1.0 + a.abs()));
            }
            let back = g.inverse().apply(&g.apply(&p).unwrap()).unwrap();
            for (a, b) in back.data().iter().zip(p.data()) {
                assert!((a - b).abs() <= 1e-13);
            }
        }
    }
}
