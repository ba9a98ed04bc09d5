//! Formal series in s₁,…,sₙ whose exponents are multiples of 1/p.
//!
//! An exponent k/p is stored as the integer k. When p does not divide k it
//! corresponds to the pair (m, j) with k = p·m + j + 1 and 0 ≤ j ≤ p−2.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ExactScalar, Frac, ScalarSum};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalSeries {
    p: u32,
    vars: usize,
    cutoff: Frac,
    terms: BTreeMap<Vec<u64>, ScalarSum>,
}

/// (m, j) for the exponent k/p, or None for integer exponents.
pub fn exponent_to_mj(k: u64, p: u32) -> Option<(u64, u64)> {
    let p = p as u64;
    if k % p == 0 {
        return None;
    }
    Some(((k - 1) / p, (k - 1) % p))
}

pub fn mj_to_exponent(m: u64, j: u64, p: u32) -> u64 {
    p as u64 * m + j + 1
}

impl FractionalSeries {
    pub fn new(p: u32, vars: usize, cutoff: Frac) -> Self {
        FractionalSeries { p, vars, cutoff, terms: BTreeMap::new() }
    }

    /// The constant series 1.
    pub fn one(p: u32, vars: usize, cutoff: Frac) -> Self {
        let mut s = Self::new(p, vars, cutoff);
        s.add_term(vec![0; vars], ExactScalar::one().into());
        s
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn cutoff(&self) -> Frac {
        self.cutoff
    }

    fn within(&self, exps: &[u64]) -> bool {
        let total: u64 = exps.iter().sum();
        Frac::new(total as i64, self.p as i64) <= self.cutoff
    }

    /// Add c · ∏ sᵢ^(kᵢ/p); terms above the cutoff are dropped.
    pub fn add_term(&mut self, exps: Vec<u64>, c: ScalarSum) {
        assert_eq!(exps.len(), self.vars, "exponent arity");
        if c.is_zero() || !self.within(&exps) {
            return;
        }
        let slot = self.terms.entry(exps.clone()).or_default();
        slot.add(&c);
        if slot.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn coefficient(&self, exps: &[u64]) -> ScalarSum {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u64>, &ScalarSum)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.p != o.p || self.vars != o.vars {
            return Err(Error::Usage(format!(
                "series mismatch: p {} vs {}, {} vs {} variables",
                self.p, o.p, self.vars, o.vars
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = self.clone();
        out.cutoff = self.cutoff.min(o.cutoff);
        out.terms.retain(|k, _| Frac::new(k.iter().sum::<u64>() as i64, self.p as i64) <= out.cutoff);
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    /// Truncated product.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = Self::new(self.p, self.vars, self.cutoff.min(o.cutoff));
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                let exps: Vec<u64> = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                if out.within(&exps) {
                    out.add_term(exps, c1.mul(c2));
                }
            }
        }
        Ok(out)
    }

    /// The series with the variables in reverse order.
    pub fn swapped(&self) -> Self {
        let mut out = Self::new(self.p, self.vars, self.cutoff);
        for (k, c) in &self.terms {
            out.add_term(k.iter().rev().copied().collect(), c.clone());
        }
        out
    }
}

pub fn series_mul(f: &FractionalSeries, g: &FractionalSeries) -> Result<FractionalSeries> {
    f.mul(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qi;

    fn mono(exps: Vec<u64>, c: i64) -> FractionalSeries {
        let mut s = FractionalSeries::new(3, 2, Frac::new(10, 1));
        s.add_term(exps, ExactScalar::from_rational(qi(c)).into());
        s
    }

    #[test]
    fn identity() {
        let g = mono(vec![1, 2], 5).add(&mono(vec![4, 0], -2)).unwrap();
        assert_eq!(FractionalSeries::one(3, 2, Frac::new(10, 1)).mul(&g).unwrap(), g);
    }

    #[test]
    fn single_term() {
        let prod = mono(vec![1, 0], 1).mul(&mono(vec![0, 2], 1)).unwrap();
        assert_eq!(prod.len(), 1);
        assert_eq!(prod.coefficient(&[1, 2]), ExactScalar::one().into());
    }

    #[test]
    fn binomial() {
        let f = mono(vec![1, 0], 1).add(&mono(vec![0, 1], 1)).unwrap();
        let sq = f.mul(&f).unwrap();
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.coefficient(&[1, 1]), ExactScalar::from_rational(qi(2)).into());
        assert_eq!(sq.coefficient(&[2, 0]), ExactScalar::one().into());
    }

    #[test]
    fn truncation_and_mismatch() {
        let mut f = FractionalSeries::new(3, 1, Frac::new(1, 1));
        f.add_term(vec![2], ExactScalar::one().into());
        let sq = f.mul(&f).unwrap();
        assert!(sq.is_empty());
        let g = FractionalSeries::new(4, 1, Frac::new(1, 1));
        assert!(matches!(f.mul(&g), Err(Error::Usage(_))));
    }

    #[test]
    fn exponent_codes() {
        assert_eq!(exponent_to_mj(mj_to_exponent(4, 1, 3), 3), Some((4, 1)));
        assert_eq!(exponent_to_mj(6, 3), None);
    }
}
