//! Rational functions of the formal ratio a, restricted to the shape
//! num(a) · a^shift / (1 + a^p)^k that the moment rewrite rules generate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Q;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatA {
    p: u32,
    num: Vec<Q>,
    shift: i64,
    qpow: u32,
}

fn trim(v: &mut Vec<Q>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

impl RatA {
    pub fn zero(p: u32) -> Self {
        RatA { p, num: Vec::new(), shift: 0, qpow: 0 }
    }

    pub fn constant(p: u32, c: Q) -> Self {
        Self::monomial(p, c, 0)
    }

    /// c · a^e
    pub fn monomial(p: u32, c: Q, e: i64) -> Self {
        if c.is_zero() {
            return Self::zero(p);
        }
        RatA { p, num: vec![c], shift: e, qpow: 0 }
    }

    /// Polynomial with coefficients indexed by power, times a^shift.
    pub fn from_poly(p: u32, coeffs: Vec<Q>, shift: i64) -> Self {
        let mut r = RatA { p, num: coeffs, shift, qpow: 0 };
        r.normalize();
        r
    }

    /// (1 + a^p)^k
    pub fn one_plus_pow(p: u32, k: u32) -> Self {
        let mut r = Self::constant(p, Q::one());
        r.num = mul_one_plus(&r.num, p as usize, k);
        r
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// Power of (1+a^p) in the denominator.
    pub fn denominator_power(&self) -> u32 {
        self.qpow
    }

    /// Lowest power of a.
    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// Divide by (1 + a^p)^k.
    pub fn div_one_plus(&self, k: u32) -> Self {
        let mut r = self.clone();
        if !r.is_zero() {
            r.qpow += k;
        }
        r
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.p);
        }
        let mut r = self.clone();
        for x in &mut r.num {
            *x *= c;
        }
        r
    }

    pub fn mul_monomial(&self, c: &Q, e: i64) -> Self {
        let mut r = self.scale(c);
        if !r.is_zero() {
            r.shift += e;
        }
        r
    }

    pub fn add_assign(&mut self, o: &RatA) {
        debug_assert_eq!(self.p, o.p);
        if o.is_zero() {
            return;
        }
        if self.is_zero() {
            *self = o.clone();
            return;
        }
        let pp = self.p as usize;
        let lo = self.shift.min(o.shift);
        let k = self.qpow.max(o.qpow);
        let lift = |r: &RatA| -> Vec<Q> {
            let mut v = vec![Q::zero(); (r.shift - lo) as usize];
            v.extend(mul_one_plus(&r.num, pp, k - r.qpow));
            v
        };
        let a = lift(self);
        let b = lift(o);
        let n = a.len().max(b.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let x = a.get(i).cloned().unwrap_or_else(Q::zero);
            let y = b.get(i).map(|y| x.clone() + y).unwrap_or(x);
            out.push(y);
        }
        self.num = out;
        self.shift = lo;
        self.qpow = k;
        self.strip_low();
    }

    pub fn mul(&self, o: &RatA) -> RatA {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.p);
        }
        let mut out = vec![Q::zero(); self.num.len() + o.num.len() - 1];
        for (i, x) in self.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in o.num.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        let mut r = RatA { p: self.p, num: out, shift: self.shift + o.shift, qpow: self.qpow + o.qpow };
        r.strip_low();
        r
    }

    fn strip_low(&mut self) {
        trim(&mut self.num);
        let lead = self.num.iter().take_while(|c| c.is_zero()).count();
        if lead == self.num.len() {
            self.num.clear();
            self.shift = 0;
            self.qpow = 0;
            return;
        }
        if lead > 0 {
            self.num.drain(..lead);
            self.shift += lead as i64;
        }
    }

    /// Lowest terms: cancel every factor (1 + a^p) the numerator contains.
    pub fn normalize(&mut self) {
        self.strip_low();
        let pp = self.p as usize;
        while self.qpow > 0 {
            match div_one_plus(&self.num, pp) {
                Some(q) => {
                    self.num = q;
                    self.qpow -= 1;
                }
                None => break,
            }
        }
    }

    pub fn normalized(&self) -> RatA {
        let mut r = self.clone();
        r.normalize();
        r
    }

    /// Laurent polynomial terms when the denominator is trivial.
    pub fn as_laurent(&self) -> Option<BTreeMap<i64, Q>> {
        let r = self.normalized();
        if r.qpow > 0 {
            return None;
        }
        Some(
            r.num
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i as i64 + r.shift, c.clone()))
                .collect(),
        )
    }

    /// Residues mod p of the powers of a that occur in the small-a expansion.
    pub fn residues_mod_p(&self) -> BTreeSet<i64> {
        let p = self.p as i64;
        self.num
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| (i as i64 + self.shift).rem_euclid(p))
            .collect()
    }

    /// Coefficients of the small-a expansion whose power is ≡ r (mod p), as a
    /// rational function of the same shape.
    pub fn residue_part(&self, r: i64) -> RatA {
        let p = self.p as i64;
        let mut out = self.clone();
        for (i, c) in out.num.iter_mut().enumerate() {
            if (i as i64 + self.shift).rem_euclid(p) != r.rem_euclid(p) {
                *c = Q::zero();
            }
        }
        out.strip_low();
        out
    }

    pub fn eval(&self, a: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.num.iter().rev() {
            acc = acc * a + c.to_f64().unwrap_or(f64::NAN);
        }
        acc * a.powi(self.shift as i32) / (1.0 + a.powi(self.p as i32)).powi(self.qpow as i32)
    }

    /// Exact equality as rational functions.
    pub fn equals(&self, o: &RatA) -> bool {
        let mut d = self.clone();
        d.add_assign(&o.scale(&-Q::one()));
        d.is_zero()
    }
}

fn mul_one_plus(v: &[Q], p: usize, k: u32) -> Vec<Q> {
    let mut cur = v.to_vec();
    for _ in 0..k {
        let mut next = vec![Q::zero(); cur.len() + p];
        for (i, c) in cur.iter().enumerate() {
            next[i] += c;
            next[i + p] += c;
        }
        cur = next;
    }
    trim(&mut cur);
    cur
}

fn div_one_plus(v: &[Q], p: usize) -> Option<Vec<Q>> {
    if v.len() <= p {
        return None;
    }
    let mut r = v.to_vec();
    let mut quot = vec![Q::zero(); r.len() - p];
    for i in (p..r.len()).rev() {
        let c = r[i].clone();
        if c.is_zero() {
            continue;
        }
        quot[i - p] = c.clone();
        r[i - p] -= &c;
        r[i] = Q::zero();
    }
    r.iter().all(|c| c.is_zero()).then_some(quot)
}

impl fmt::Display for RatA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut s = String::new();
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = i as i64 + self.shift;
            let neg = c.is_negative();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            match e {
                0 => s.push_str(&a.to_string()),
                _ => {
                    if !a.is_one() {
                        s.push_str(&format!("{a}*"));
                    }
                    if e == 1 {
                        s.push('a');
                    } else {
                        s.push_str(&format!("a^{e}"));
                    }
                }
            }
        }
        if self.qpow > 0 {
            write!(f, "({s})/(1 + a^{})^{}", self.p, self.qpow)
        } else {
            write!(f, "{s}")
        }
    }
}
