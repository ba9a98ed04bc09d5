//! Laurent polynomials in p with rational coefficients, and their quotients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{qi, qpow, Q};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LaurentP {
    coeffs: BTreeMap<i32, Q>,
}

impl LaurentP {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(e: i32, c: Q) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(e, c);
        }
        LaurentP { coeffs }
    }

    /// The variable p.
    pub fn p() -> Self {
        Self::monomial(1, Q::one())
    }

    /// c0 + c1 p + c2 p² + …
    pub fn from_coeffs(cs: &[Q]) -> Self {
        let mut out = Self::zero();
        for (i, c) in cs.iter().enumerate() {
            out.add_term(i as i32, c.clone());
        }
        out
    }

    /// Integer coefficients, constant term first.
    pub fn from_ints(cs: &[i64]) -> Self {
        Self::from_coeffs(&cs.iter().map(|&c| qi(c)).collect::<Vec<_>>())
    }

    pub fn coeff(&self, e: i32) -> Q {
        self.coeffs.get(&e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Q)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn add_term(&mut self, e: i32, c: Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(e).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_exp(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn min_exp(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero();
        for (e, v) in self.terms() {
            out.add_term(e, v * c);
        }
        out
    }

    pub fn shift(&self, k: i32) -> Self {
        LaurentP { coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn eval(&self, p: &Q) -> Result<Q> {
        if p.is_zero() && self.min_exp().is_some_and(|e| e < 0) {
            return Err(Error::Pole { order: (-self.min_exp().unwrap()) as u32, at: "p = 0".into() });
        }
        let mut acc = Q::zero();
        for (e, c) in self.terms() {
            acc += c * qpow(p, e as i64);
        }
        Ok(acc)
    }

    /// Dense coefficients of p^(-min) * self, constant term first.
    fn dense(&self) -> (i32, Vec<Q>) {
        let lo = self.min_exp().unwrap_or(0).min(0);
        let hi = self.max_exp().unwrap_or(0);
        let mut v = vec![Q::zero(); (hi - lo + 1) as usize];
        for (e, c) in self.terms() {
            v[(e - lo) as usize] = c.clone();
        }
        (lo, v)
    }

    /// Multiplicity of the nonzero root r.
    fn root_order(&self, r: &Q) -> u32 {
        let (_, mut v) = self.dense();
        let mut order = 0;
        loop {
            if v.iter().all(|c| c.is_zero()) {
                return order;
            }
            // synthetic division by (x - r)
            let n = v.len();
            let mut quot = vec![Q::zero(); n.saturating_sub(1)];
            let mut carry = Q::zero();
            for i in (0..n).rev() {
                let cur = &v[i] + &carry * r;
                if i == 0 {
                    if !cur.is_zero() {
                        return order;
                    }
                } else {
                    quot[i - 1] = cur.clone();
                }
                carry = cur;
            }
            v = quot;
            order += 1;
        }
    }
}

impl std::ops::Add for &LaurentP {
    type Output = LaurentP;
    fn add(self, o: &LaurentP) -> LaurentP {
        let mut out = self.clone();
        for (e, c) in o.terms() {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &LaurentP {
    type Output = LaurentP;
    fn sub(self, o: &LaurentP) -> LaurentP {
        self + &o.scale(&-Q::one())
    }
}

impl std::ops::Mul for &LaurentP {
    type Output = LaurentP;
    fn mul(self, o: &LaurentP) -> LaurentP {
        let mut out = LaurentP::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in o.terms() {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

fn fmt_poly(p: &LaurentP) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (e, c) in p.coeffs.iter().rev() {
        let neg = c.is_negative();
        let a = c.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let mono = match *e {
            0 => String::new(),
            1 => "p".into(),
            e => format!("p^{e}"),
        };
        if mono.is_empty() {
            s.push_str(&a.to_string());
        } else if a.is_one() {
            s.push_str(&mono);
        } else {
            s.push_str(&format!("{a}*{mono}"));
        }
    }
    s
}

impl fmt::Display for LaurentP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_poly(self))
    }
}

/// Quotient of Laurent polynomials.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaurentRatio {
    pub num: LaurentP,
    pub den: LaurentP,
}

impl LaurentRatio {
    pub fn new(num: LaurentP, den: LaurentP) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        LaurentRatio { num, den }
    }

    pub fn from_poly(num: LaurentP) -> Self {
        Self::new(num, LaurentP::one())
    }

    pub fn mul(&self, o: &LaurentRatio) -> LaurentRatio {
        LaurentRatio::new(&self.num * &o.num, &self.den * &o.den)
    }

    pub fn div(&self, o: &LaurentRatio) -> LaurentRatio {
        LaurentRatio::new(&self.num * &o.den, &self.den * &o.num)
    }

    pub fn add(&self, o: &LaurentRatio) -> LaurentRatio {
        LaurentRatio::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }

    /// Exact value at p, or the pole order if p is a pole.
    pub fn eval(&self, p: &Q) -> Result<Q> {
        if p.is_zero() {
            // compare the orders at zero
            let zn = self.num.min_exp().unwrap_or(i32::MAX);
            let zd = self.den.min_exp().unwrap();
            if zn == i32::MAX {
                return Ok(Q::zero());
            }
            return match zn.cmp(&zd) {
                std::cmp::Ordering::Greater => Ok(Q::zero()),
                std::cmp::Ordering::Equal => Ok(self.num.coeff(zn) / self.den.coeff(zd)),
                std::cmp::Ordering::Less => Err(Error::Pole { order: (zd - zn) as u32, at: "p = 0".into() }),
            };
        }
        let d = self.den.eval(p)?;
        if !d.is_zero() {
            return Ok(self.num.eval(p)? / d);
        }
        let od = self.den.root_order(p);
        let on = if self.num.is_zero() { u32::MAX } else { self.num.root_order(p) };
        if on >= od {
            if on > od {
                return Ok(Q::zero());
            }
            // strip the common factor (p - r)^od and evaluate the quotients
            let n = strip_root(&self.num, p, od);
            let dd = strip_root(&self.den, p, od);
            return Ok(n.eval(p)? / dd.eval(p)?);
        }
        Err(Error::Pole { order: od - on, at: format!("p = {p}") })
    }

    /// Exact equality as rational functions.
    pub fn equals(&self, o: &LaurentRatio) -> bool {
        (&self.num * &o.den) == (&o.num * &self.den)
    }

    /// (degree, leading coefficient) of the large-p behaviour.
    pub fn leading(&self) -> Option<(i32, Q)> {
        let en = self.num.max_exp()?;
        let ed = self.den.max_exp()?;
        Some((en - ed, self.num.coeff(en) / self.den.coeff(ed)))
    }
}

fn strip_root(f: &LaurentP, r: &Q, k: u32) -> LaurentP {
    let (lo, mut v) = f.dense();
    for _ in 0..k {
        let n = v.len();
        let mut quot = vec![Q::zero(); n - 1];
        let mut carry = Q::zero();
        for i in (1..n).rev() {
            let cur = &v[i] + &carry * r;
            quot[i - 1] = cur.clone();
            carry = cur;
        }
        v = quot;
    }
    let mut out = LaurentP::zero();
    for (i, c) in v.into_iter().enumerate() {
        out.add_term(i as i32 + lo, c);
    }
    out
}

impl PartialEq for LaurentRatio {
    fn eq(&self, o: &Self) -> bool {
        self.equals(o)
    }
}

impl fmt::Display for LaurentRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == LaurentP::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
