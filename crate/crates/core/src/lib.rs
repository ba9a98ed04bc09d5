//! Exact intersection numbers of the moduli space of p-spin curves with one and
//! two marked points, computed from Gaussian random-matrix correlators with an
//! external source, together with the numerical oracles used to check them.

pub mod airy;
pub mod asymptotics;
pub mod correlators;
pub mod error;
pub mod laurent;
pub mod moments;
pub mod numeric;
pub mod oracle;
pub mod ratfunc;
pub mod scalar;
pub mod series;
pub mod special;
pub mod tautology;

pub use error::{Error, Result};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Arbitrary precision rational.
pub type Q = BigRational;

/// `n/d` as a big rational.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a big rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub(crate) fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let mut r = BigInt::from(1);
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

pub(crate) fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}

/// x^e for a signed exponent.
pub(crate) fn qpow(x: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// Signed Bernoulli number B_n with B_1 = −1/2.
pub fn bernoulli(n: u32) -> Q {
    let mut b: Vec<Q> = Vec::with_capacity(n as usize + 1);
    for m in 0..=n as u64 {
        if m == 0 {
            b.push(qi(1));
            continue;
        }
        let mut s = Q::from_integer(BigInt::from(0));
        for (k, bk) in b.iter().enumerate() {
            s += Q::from_integer(binom(m + 1, k as u64)) * bk;
        }
        b.push(-s / qi(m as i64 + 1));
    }
    b.pop().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0), qi(1));
        assert_eq!(bernoulli(1), q(-1, 2));
        assert_eq!(bernoulli(2), q(1, 6));
        assert_eq!(bernoulli(4), q(-1, 30));
        assert_eq!(bernoulli(12), q(-691, 2730));
        assert_eq!(bernoulli(7), qi(0));
    }
}
