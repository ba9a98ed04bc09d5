//! One- and two-point correlators of the Gaussian model with external source,
//! their expansion in the scaling limit, and extraction of intersection
//! numbers.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::{phi_deriv_zero, AiryFamily, KernelMode};
use crate::error::{Error, Result};
use crate::laurent::{LaurentP, LaurentRatio};
use crate::moments::{assemble_grade, Contribution, GradeAssembly, MomentSymbol, Reducer};
use crate::ratfunc::RatA;
use crate::scalar::{ExactScalar, Frac, ScalarSum};
use crate::series::FractionalSeries;
use crate::{binom, factorial, q, qi, qpow, Q};

// ---- data types --------------------------------------------------------------

/// Descendant index m and spin index j of one insertion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mark {
    pub m: u32,
    pub j: i64,
}

impl Mark {
    pub fn new(m: u32, j: i64) -> Self {
        Mark { m, j }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PValue {
    Fixed(Q),
    Symbolic,
}

impl PValue {
    pub fn int(p: i64) -> Self {
        PValue::Fixed(qi(p))
    }
}

impl fmt::Display for PValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PValue::Fixed(p) => write!(f, "{p}"),
            PValue::Symbolic => write!(f, "symbolic"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CorrelatorValue {
    Rational(Q),
    Symbolic(LaurentRatio),
}

impl fmt::Display for CorrelatorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelatorValue::Rational(v) => write!(f, "{v}"),
            CorrelatorValue::Symbolic(v) => write!(f, "{v}"),
        }
    }
}

/// ⟨∏ τ_{mᵢ,jᵢ}⟩_g with its value.
#[derive(Clone, Debug, PartialEq)]
pub struct TauCorrelator {
    pub p: PValue,
    pub genus: u32,
    /// sorted
    pub marks: Vec<Mark>,
    pub value: CorrelatorValue,
}

impl TauCorrelator {
    pub fn rational(&self) -> Option<&Q> {
        match &self.value {
            CorrelatorValue::Rational(v) => Some(v),
            CorrelatorValue::Symbolic(_) => None,
        }
    }

    pub fn label(&self) -> String {
        let inner: Vec<String> = self.marks.iter().map(|k| format!("tau_{{{},{}}}", k.m, k.j)).collect();
        format!("<{}>_{}", inner.join(" "), self.genus)
    }
}

impl fmt::Display for TauCorrelator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.label(), self.value)
    }
}

/// Value of the entry with these marks (in any order).
pub fn lookup(table: &[TauCorrelator], marks: &[Mark]) -> Option<Q> {
    let mut key = marks.to_vec();
    key.sort();
    table.iter().find(|t| t.marks == key).and_then(|t| t.rational().cloned())
}

/// What to expand.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionPlan {
    pub p: PValue,
    pub points: u32,
    pub g_max: u32,
    pub mode: KernelMode,
}

impl ExpansionPlan {
    pub fn validate(&self) -> Result<()> {
        match self.points {
            1 => {
                if self.g_max > 8 {
                    return Err(Error::Usage(format!("one-point expansion supports genus <= 8, got {}", self.g_max)));
                }
                Ok(())
            }
            2 => match &self.p {
                PValue::Fixed(p) if p.is_integer() && *p >= qi(3) => Ok(()),
                _ => Err(Error::Usage(format!("two-point expansion needs an integer p >= 3, got {}", self.p))),
            },
            n => Err(Error::Usage(format!("only 1 or 2 marked points are implemented, got {n}"))),
        }
    }
}

// ---- tail expansion ----------------------------------------------------------

/// Coefficient of s^(2r+1) u^(p−2r) in [(u + s/2)^(p+1) − (u − s/2)^(p+1)] / (2(p+1)).
pub fn tail_coefficient(p: u32, r: u32) -> Q {
    Q::new(binom(p as u64 + 1, 2 * r as u64 + 1), BigInt::from(p + 1) * BigInt::from(4).pow(r))
}

/// The same coefficient as a polynomial in p: p(p−1)…(p−2r+1) / ((2r+1)! 4^r).
pub fn tail_coefficient_poly(r: u32) -> LaurentP {
    let mut out = LaurentP::one();
    for i in 0..2 * r {
        out = &out * &LaurentP::from_ints(&[-(i as i64), 1]);
    }
    out.scale(&Q::new(BigInt::one(), factorial(2 * r as u64 + 1) * BigInt::from(4).pow(r)))
}

/// Partitions of n into parts of size at most `max_part`, as (part, multiplicity).
pub fn partitions(n: u32, max_part: u32) -> Vec<Vec<(u32, u32)>> {
    fn rec(rem: u32, part: u32, acc: &mut Vec<(u32, u32)>, out: &mut Vec<Vec<(u32, u32)>>) {
        if rem == 0 {
            out.push(acc.clone());
            return;
        }
        if part == 0 {
            return;
        }
        for e in (0..=rem / part).rev() {
            if e > 0 {
                acc.push((part, e));
            }
            rec(rem - part * e, part - 1, acc, out);
            if e > 0 {
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(n, max_part.min(n), &mut Vec::new(), &mut out);
    out
}

// ---- one point ---------------------------------------------------------------

/// Genus-g term of the one-point function: value = coefficient ×
/// Γ(1 − gamma_shift/p) / Γ(1 − (1+j)/p).
#[derive(Clone, Debug, PartialEq)]
pub struct OnePointTerm {
    pub genus: u32,
    pub coefficient: LaurentRatio,
    /// 2g − 1
    pub gamma_shift: u32,
}

fn one_point_raw(g: u32) -> LaurentP {
    let x = LaurentP::monomial(-1, qi(-(2 * g as i64 - 1)));
    let mut total = LaurentP::zero();
    for part in partitions(g, g) {
        let mut term = LaurentP::one();
        let mut count = 0u32;
        for &(r, e) in &part {
            let k = tail_coefficient_poly(r).scale(&qi(-1));
            term = &term * &k.pow(e);
            term = term.scale(&Q::new(BigInt::one(), factorial(e as u64)));
            count += e;
        }
        for i in 1..count {
            term = &term * &(&LaurentP::constant(qi(i as i64)) + &x);
        }
        total = &total + &term;
    }
    let sign = if g % 2 == 0 { qi(1) } else { qi(-1) };
    total.shift(-(g as i32)).scale(&sign)
}

/// Anchor ⟨τ_{1,0}⟩_1 = (p−1)/24 fixes the one-point constant.
pub fn one_point_calibration() -> Result<Q> {
    static C1: OnceLock<Result<Q>> = OnceLock::new();
    C1.get_or_init(|| {
        let raw = LaurentRatio::from_poly(one_point_raw(1));
        let anchor = LaurentRatio::from_poly(LaurentP::from_coeffs(&[q(-1, 24), q(1, 24)]));
        let ratio = anchor.div(&raw);
        // must be p-independent
        let a = ratio.eval(&qi(3))?;
        let b = ratio.eval(&qi(7))?;
        if a != b {
            return Err(Error::Calibration(format!("one-point constant depends on p: {ratio}")));
        }
        Ok(a)
    })
    .clone()
}

/// Exact genus coefficients for g = 1..=g_max.
pub fn one_point_series(g_max: u32) -> Result<Vec<OnePointTerm>> {
    if g_max > 8 {
        return Err(Error::Usage(format!("one-point expansion supports genus <= 8, got {g_max}")));
    }
    let c1 = one_point_calibration()?;
    Ok((1..=g_max)
        .map(|g| OnePointTerm {
            genus: g,
            coefficient: LaurentRatio::from_poly(one_point_raw(g).scale(&c1)),
            gamma_shift: 2 * g - 1,
        })
        .collect())
}

/// Label (n, j) of the nonzero one-point correlator at genus g for integer p.
/// Negative p takes its labels from |p|.
pub fn one_point_label(p: i64, g: u32) -> Result<Mark> {
    let pa = p.abs();
    if pa < 1 {
        return Err(Error::Domain("p = 0".into()));
    }
    let total = (pa + 1) * (2 * g as i64 - 1) - 1;
    let (m, j) = (total.div_euclid(pa), total.rem_euclid(pa));
    if p > 0 && j == p - 1 {
        return Err(Error::Domain(format!("genus {g} at p = {p} sits on an integer grade (j = p-1)")));
    }
    Ok(Mark::new(m as u32, j))
}

/// Γ(x)/Γ(y) for rationals whose difference is an integer.
pub fn gamma_ratio(x: &Q, y: &Q) -> Result<Q> {
    let d = x - y;
    if !d.is_integer() {
        return Err(Error::Domain(format!("Gamma({x})/Gamma({y}) is not rational")));
    }
    let nonpos_int = |z: &Q| z.is_integer() && !z.is_positive();
    if nonpos_int(x) {
        return Err(Error::Pole { order: 1, at: format!("Gamma({x})") });
    }
    if nonpos_int(y) {
        return Ok(Q::zero());
    }
    let d = d.to_integer().to_i64().ok_or_else(|| Error::Domain("shift too large".into()))?;
    let mut r = Q::one();
    if d >= 0 {
        for i in 0..d {
            r *= y + qi(i);
        }
    } else {
        for i in 0..-d {
            r /= x + qi(i);
        }
    }
    Ok(r)
}

/// ⟨τ_{n,j}⟩_g at integer p (positive or negative).
pub fn one_point_value(p: i64, g: u32) -> Result<TauCorrelator> {
    let label = one_point_label(p, g)?;
    let terms = one_point_series(g)?;
    let pq = qi(p);
    let coef = terms[g as usize - 1].coefficient.eval(&pq)?;
    let x = Q::one() - qi(2 * g as i64 - 1) / &pq;
    let y = Q::one() - qi(1 + label.j) / &pq;
    let value = coef * gamma_ratio(&x, &y)?;
    Ok(TauCorrelator { p: PValue::int(p), genus: g, marks: vec![label], value: CorrelatorValue::Rational(value) })
}

/// Symbolic one-point table: the generic label j = 2g−2 (Γ ratio 1).
pub fn one_point_symbolic(g_max: u32) -> Result<Vec<TauCorrelator>> {
    Ok(one_point_series(g_max)?
        .into_iter()
        .map(|t| TauCorrelator {
            p: PValue::Symbolic,
            genus: t.genus,
            marks: vec![Mark::new(2 * t.genus - 1, 2 * t.genus as i64 - 2)],
            value: CorrelatorValue::Symbolic(t.coefficient),
        })
        .collect())
}

// ---- two points --------------------------------------------------------------

fn weight(p: u32, part: &[(u32, u32)]) -> (Q, u32) {
    let mut w = Q::one();
    let mut k = 0u32;
    for &(r, e) in part {
        let base = -tail_coefficient(p, r) / qi(p as i64);
        w *= qpow(&base, e as i64) / Q::from(factorial(e as u64));
        k += e * (p - 2 * r);
    }
    (w, k)
}

/// Every moment contribution to the genus-g part of the two-point function,
/// as a polynomial in a = (s₁/s₂)^(1/p).
pub fn genus_contributions(p: u32, g: u32) -> Vec<Contribution> {
    let mut out = Vec::new();
    for l in 0..=g {
        let sinh = qi(2) / (Q::from(BigInt::from(2).pow(2 * l + 1)) * Q::from(factorial(2 * l as u64 + 1)));
        for g1 in 0..=g - l {
            let g2 = g - l - g1;
            for p1 in partitions(g1, p / 2) {
                let (w1, k1) = weight(p, &p1);
                for p2 in partitions(g2, p / 2) {
                    let (w2, k2) = weight(p, &p2);
                    // plain derivative on the second factor: (−a)^(−k₂) times the y-derivative symbol
                    let sign = if k2 % 2 == 0 { Q::one() } else { -Q::one() };
                    let shift = (2 * l + 1 + 2 * (p + 1) * g1) as i64 - k2 as i64;
                    let factor = RatA::one_plus_pow(p, 2 * l).mul(&RatA::monomial(p, sign, shift));
                    out.push(Contribution {
                        scalar: ExactScalar::from_rational(&sinh * &w1 * &w2),
                        factor,
                        symbol: MomentSymbol::new(p, 2 * l + 1, k1, k2),
                    });
                }
            }
        }
    }
    out
}

/// Reduced genus-g grade.
pub fn assemble_genus(reducer: &Reducer, g: u32) -> Result<GradeAssembly> {
    assemble_grade(reducer, g, &genus_contributions(reducer.family().p, g))
}

/// (m, j) of the s-exponent k/p; None on integer exponents.
fn split_exponent(k: i64, p: u32) -> Option<Mark> {
    let p = p as i64;
    let (m, j) = ((k - 1).div_euclid(p), (k - 1).rem_euclid(p));
    (j != p - 1).then(|| Mark::new(m as u32, j))
}

/// Two-point function through genus g_max as a series in s₁, s₂ with
/// exponents in (1/p)ℤ, in the grading variable σ = p^(1/p) s^(1+1/p).
pub fn two_point_series(p: u32, g_max: u32, mode: KernelMode) -> Result<FractionalSeries> {
    let fam = AiryFamily::new(p, mode)?;
    let reducer = Reducer::new(fam);
    let cutoff = Frac::new(2 * g_max as i64 * (p as i64 + 1), p as i64);
    let grades: Vec<Result<GradeAssembly>> = (1..=g_max).into_par_iter().map(|g| assemble_genus(&reducer, g)).collect();
    let mut series = FractionalSeries::new(p, 2, cutoff);
    for grade in grades {
        let grade = grade?;
        let g = grade.genus;
        let total = 2 * g as i64 * (p as i64 + 1);
        let rescale = ExactScalar::power(&qi(p as i64), Frac::new(2 * g as i64, p as i64))?;
        for (&(k1, k2), poly) in &grade.boundary {
            let terms = poly.as_laurent().ok_or_else(|| {
                Error::Internal(format!("genus {g} boundary coefficient is not a polynomial in a: {poly}"))
            })?;
            let phis = &phi_deriv_zero(p, k1, KernelMode::Real)? * &phi_deriv_zero(p, k2, KernelMode::Real)?;
            for (n, c) in terms {
                let rest = total - n;
                if n <= 0 || rest <= 0 {
                    return Err(Error::Internal(format!("genus {g}: a-power {n} outside the grade")));
                }
                let (Some(x), Some(y)) = (split_exponent(n, p), split_exponent(rest, p)) else {
                    continue;
                };
                let mut want = [p as i64 - 2 - x.j, p as i64 - 2 - y.j];
                want.sort();
                if want != [k1 as i64, k2 as i64] {
                    return Err(Error::Internal(format!(
                        "genus {g}: boundary phi{k1}(0)phi{k2}(0) at a^{n} does not match spins {x:?} {y:?}"
                    )));
                }
                let coef = (&rescale * &phis).scale(&c);
                series.add_term(vec![n as u64, rest as u64], ScalarSum::from(coef));
            }
        }
    }
    Ok(series)
}

/// Spin factor Γ(1 − (1+j)/p).
pub fn spin_factor(p: u32, j: i64) -> Result<ExactScalar> {
    ExactScalar::gamma(Frac::new(p as i64 - 1 - j, p as i64))
}

/// Intersection numbers before the overall constant is applied.
fn raw_two_point(series: &FractionalSeries, g: u32) -> Result<Vec<(Vec<Mark>, Q)>> {
    let p = series.p();
    let total = 2 * g as u64 * (p as u64 + 1);
    let norm = {
        let s = if g % 2 == 0 { Q::one() } else { -Q::one() };
        s * qpow(&qi(p as i64), 1 - g as i64)
    };
    let mut out: BTreeMap<Vec<Mark>, Q> = BTreeMap::new();
    for (exps, coef) in series.terms() {
        if exps.iter().sum::<u64>() != total {
            continue;
        }
        let (Some(x), Some(y)) = (split_exponent(exps[0] as i64, p), split_exponent(exps[1] as i64, p)) else {
            continue;
        };
        let scalar = coef
            .single()
            .ok_or_else(|| Error::Calibration(format!("coefficient {coef} has several transcendental parts")))?;
        let spins = &spin_factor(p, x.j)? * &spin_factor(p, y.j)?;
        let v = &scalar * &spins.recip()?;
        let v = v.as_rational().ok_or_else(|| Error::Calibration(v.to_string()))? * &norm;
        let mut marks = vec![x, y];
        marks.sort();
        if let Some(prev) = out.get(&marks) {
            if *prev != v {
                return Err(Error::Internal(format!("asymmetric series at {marks:?}: {prev} vs {v}")));
            }
        }
        out.insert(marks, v);
    }
    Ok(out.into_iter().collect())
}

/// Anchor ⟨τ_{0,1}τ_{4,1}⟩_2 = 1/864 at p = 3 fixes the two-point constant.
pub fn two_point_calibration() -> Result<Q> {
    static C2: OnceLock<Result<Q>> = OnceLock::new();
    C2.get_or_init(|| {
        let series = two_point_series(3, 2, KernelMode::Real)?;
        let raw = raw_two_point(&series, 2)?;
        let anchor = [Mark::new(0, 1), Mark::new(4, 1)];
        let v = raw
            .iter()
            .find(|(m, _)| m.as_slice() == anchor)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::Calibration("anchor entry missing from the p = 3 genus 2 grade".into()))?;
        if v.is_zero() {
            return Err(Error::Calibration("anchor entry vanishes".into()));
        }
        Ok(q(1, 864) / v)
    })
    .clone()
}

/// Genus-g intersection numbers read off a two-point series.
pub fn extract_intersections(series: &FractionalSeries, g: u32) -> Result<Vec<TauCorrelator>> {
    if series.vars() != 2 {
        return Err(Error::Usage("extract_intersections expects a two-point series; use one_point_value for one point".into()));
    }
    let c2 = two_point_calibration()?;
    let p = series.p();
    Ok(raw_two_point(series, g)?
        .into_iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(marks, v)| TauCorrelator {
            p: PValue::int(p as i64),
            genus: g,
            marks,
            value: CorrelatorValue::Rational(v * &c2),
        })
        .collect())
}

/// Two-point table at integer p and genus g.
pub fn two_point_table(p: u32, g: u32, mode: KernelMode) -> Result<Vec<TauCorrelator>> {
    if g == 0 {
        return Ok(Vec::new());
    }
    extract_intersections(&two_point_series(p, g, mode)?, g)
}

/// Labels of the entry whose first insertion carries s₁^(n/p), n = a-power.
pub fn family_marks(p: u32, g: u32, a_power: u32) -> Option<[Mark; 2]> {
    let total = 2 * g as i64 * (p as i64 + 1);
    let x = split_exponent(a_power as i64, p)?;
    let y = split_exponent(total - a_power as i64, p)?;
    if x.j > p as i64 - 2 || y.j > p as i64 - 2 {
        return None;
    }
    Some([x, y])
}

// ---- interpolation -----------------------------------------------------------

/// Exact rational function r(p) = N(p)/p^den_power with deg N = num_degree
/// through the first num_degree+1 samples; every further sample is held out
/// and must be reproduced exactly.
pub fn general_p_interpolate(samples: &BTreeMap<i64, Q>, num_degree: usize, den_power: i32) -> Result<LaurentRatio> {
    let pts: Vec<(Q, Q)> = samples
        .iter()
        .map(|(&p, v)| {
            let pq = qi(p);
            let y = v * qpow(&pq, den_power as i64);
            (pq, y)
        })
        .collect();
    if pts.len() < num_degree + 1 {
        return Err(Error::Usage(format!("{} samples cannot fix degree {num_degree}", pts.len())));
    }
    let (fit, held) = pts.split_at(num_degree + 1);
    let mut num = LaurentP::zero();
    for (i, (xi, yi)) in fit.iter().enumerate() {
        let mut basis = LaurentP::constant(yi.clone());
        for (j, (xj, _)) in fit.iter().enumerate() {
            if i != j {
                let lin = LaurentP::from_coeffs(&[-xj.clone(), Q::one()]);
                basis = (&basis * &lin).scale(&(xi - xj).recip());
            }
        }
        num = &num + &basis;
    }
    for (x, y) in held {
        let got = num.eval(x)?;
        if &got != y {
            return Err(Error::Degree(format!(
                "held-out p = {x}: fitted {} but sample is {}",
                got / qpow(x, den_power as i64),
                y / qpow(x, den_power as i64)
            )));
        }
    }
    Ok(LaurentRatio::from_poly(num.shift(-den_power)))
}

// ---- finite N ----------------------------------------------------------------

/// N×N source A with eigenvalues a_α.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteNSource {
    pub eigenvalues: Vec<f64>,
}

impl FiniteNSource {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.len() > 16 {
            return Err(Error::Usage(format!("need 1..=16 eigenvalues, got {}", eigenvalues.len())));
        }
        if eigenvalues.iter().any(|a| !a.is_finite()) {
            return Err(Error::Usage("eigenvalues must be finite".into()));
        }
        Ok(FiniteNSource { eigenvalues })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// c = N/(p²−1) Σ a_α^(−p−1).
    pub fn scaling_constant(&self, p: u32) -> Result<f64> {
        if self.eigenvalues.contains(&0.0) {
            return Err(Error::Domain("scaling constant needs nonzero eigenvalues".into()));
        }
        let n = self.n() as f64;
        let pf = p as f64;
        Ok(n / (pf * pf - 1.0) * self.eigenvalues.iter().map(|a| a.powi(-(p as i32) - 1)).sum::<f64>())
    }
}

/// coef · e^(λu) · ∏ (u − z)^e
#[derive(Clone, Debug)]
struct Term1 {
    coef: f64,
    lambda: f64,
    factors: Vec<(f64, i32)>,
}

impl Term1 {
    fn merged(mut self) -> Self {
        let mut m: Vec<(f64, i32)> = Vec::new();
        for (z, e) in self.factors {
            match m.iter_mut().find(|(w, _)| *w == z) {
                Some(slot) => slot.1 += e,
                None => m.push((z, e)),
            }
        }
        m.retain(|&(_, e)| e != 0);
        self.factors = m;
        self
    }

    fn residue(&self, c: f64) -> f64 {
        let order = self.factors.iter().find(|(z, _)| *z == c).map(|&(_, e)| -e).unwrap_or(0);
        if order <= 0 {
            return 0.0;
        }
        let n = order as usize;
        // Taylor series in t = u − c of everything except (u − c)^(−order)
        let mut series = vec![0.0; n];
        let mut t = (self.lambda * c).exp();
        for (k, s) in series.iter_mut().enumerate() {
            *s = t;
            t *= self.lambda / (k + 1) as f64;
        }
        for &(z, e) in &self.factors {
            if z == c {
                continue;
            }
            let d = c - z;
            // (t + d)^e = Σ binom(e, k) d^(e−k) t^k
            let mut f = vec![0.0; n];
            let mut b = 1.0;
            for (k, fk) in f.iter_mut().enumerate() {
                *fk = b * d.powi(e - k as i32);
                b *= (e as f64 - k as f64) / (k + 1) as f64;
            }
            series = trunc_mul(&series, &f);
        }
        self.coef * series[n - 1]
    }
}

fn trunc_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in 0..n - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

fn distinct(v: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// e^(s u) ∏_β (u − a_β + s/N)/(u − a_β)
fn source_term(src: &FiniteNSource, s: f64) -> Term1 {
    let nf = src.n() as f64;
    let mut factors = Vec::new();
    for &a in &src.eigenvalues {
        factors.push((a - s / nf, 1));
        factors.push((a, -1));
    }
    Term1 { coef: 1.0, lambda: s, factors }.merged()
}

fn one_point_exact(src: &FiniteNSource, s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    let nf = src.n() as f64;
    let t = source_term(src, s);
    let sum: f64 = distinct(&src.eigenvalues).iter().map(|&c| t.residue(c)).sum();
    (s * s / (2.0 * nf)).exp() * sum / s
}

/// coef · e^(λ₁u₁ + λ₂u₂) ∏(u₁ − z)^e ∏(u₂ − z)^e ∏(u₂ − u₁ − w)^e
#[derive(Clone, Debug)]
struct Term2 {
    coef: f64,
    l1: f64,
    l2: f64,
    f1: Vec<(f64, i32)>,
    f2: Vec<(f64, i32)>,
    mixed: Vec<(f64, i32)>,
}

impl Term2 {
    /// Residue in u₂ at the fixed point c, as terms in u₁.
    fn residue_fixed(&self, c: f64) -> Vec<Term1> {
        let order = self.f2.iter().filter(|(z, _)| *z == c).map(|&(_, e)| -e).sum::<i32>();
        if order <= 0 {
            return Vec::new();
        }
        let n = order as usize;
        // series in t = u₂ − c whose coefficients are terms in u₁
        let mut base = vec![0.0; n];
        let mut t = (self.l2 * c).exp();
        for (k, s) in base.iter_mut().enumerate() {
            *s = t;
            t *= self.l2 / (k + 1) as f64;
        }
        for &(z, e) in &self.f2 {
            if z == c {
                continue;
            }
            let d = c - z;
            let mut f = vec![0.0; n];
            let mut b = 1.0;
            for (k, fk) in f.iter_mut().enumerate() {
                *fk = b * d.powi(e - k as i32);
                b *= (e as f64 - k as f64) / (k + 1) as f64;
            }
            base = trunc_mul(&base, &f);
        }
        // mixed factors (t + c − w − u₁)^e = Σ binom(e,k) (−1)^(e−k) (u₁ − (c − w))^(e−k) t^k
        // (degree in t, coefficient, factors in u₁)
        let mut terms: Vec<(usize, f64, Vec<(f64, i32)>)> =
            base.iter().enumerate().map(|(k, &v)| (k, v, Vec::new())).collect();
        for &(w, e) in &self.mixed {
            let mut next = Vec::new();
            for (deg, v, f) in &terms {
                let mut b = 1.0;
                for k in 0..n - deg {
                    let ex = e - k as i32;
                    let sign = if ex.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    let mut ff = f.clone();
                    ff.push((c - w, ex));
                    next.push((deg + k, v * b * sign, ff));
                    b *= (e as f64 - k as f64) / (k + 1) as f64;
                }
            }
            terms = next;
        }
        terms
            .into_iter()
            .filter(|(deg, _, _)| *deg == n - 1)
            .map(|(_, v, f)| {
                let mut factors = self.f1.clone();
                factors.extend(f);
                Term1 { coef: self.coef * v, lambda: self.l1, factors }.merged()
            })
            .collect()
    }

    /// Residue in u₂ at the moving simple pole u₂ = u₁ + w.
    fn residue_moving(&self, w: f64) -> Term1 {
        let mut coef = self.coef * (self.l2 * w).exp();
        let mut factors = self.f1.clone();
        for &(z, e) in &self.f2 {
            factors.push((z - w, e));
        }
        for &(w2, e) in &self.mixed {
            if w2 == w {
                continue;
            }
            coef *= (w - w2).powi(e);
        }
        Term1 { coef, lambda: self.l1 + self.l2, factors }.merged()
    }
}

fn two_point_exact(src: &FiniteNSource, s1: f64, s2: f64) -> f64 {
    if s1 == 0.0 {
        return one_point_exact(src, s2);
    }
    if s2 == 0.0 {
        return one_point_exact(src, s1);
    }
    let nf = src.n() as f64;
    let disconnected = one_point_exact(src, s1) * one_point_exact(src, s2);
    let p1 = source_term(src, s1);
    let p2 = source_term(src, s2);
    let kernel = Term2 {
        coef: 1.0,
        l1: s1,
        l2: s2,
        f1: p1.factors.clone(),
        f2: p2.factors.clone(),
        mixed: vec![(s1 / nf, -1), (-s2 / nf, -1)],
    };
    let poles = distinct(&src.eigenvalues);
    let mut inner: Vec<Term1> = Vec::new();
    for &c in &poles {
        inner.extend(kernel.residue_fixed(c));
    }
    inner.push(kernel.residue_moving(s1 / nf));
    let connected: f64 = inner.iter().map(|t| poles.iter().map(|&c| t.residue(c)).sum::<f64>()).sum();
    disconnected + ((s1 * s1 + s2 * s2) / (2.0 * nf)).exp() * connected / (nf * nf)
}

/// ⟨∏ (1/N) tr e^(sᵢ M)⟩ for one or two insertions, by exact residue sums.
pub fn finite_n_evaluate(src: &FiniteNSource, s: &[f64]) -> Result<f64> {
    let v = match s {
        [s1] => one_point_exact(src, *s1),
        [s1, s2] => two_point_exact(src, *s1, *s2),
        _ => return Err(Error::Usage(format!("finite-N evaluation supports 1 or 2 insertions, got {}", s.len()))),
    };
    if !v.is_finite() {
        return Err(Error::Domain(format!("residue sum is not finite for s = {s:?}")));
    }
    Ok(v)
}

// ---- serialization -----------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub m: Vec<u32>,
    pub j: Vec<i64>,
    pub num: String,
    pub den: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableJson {
    pub p: serde_json::Value,
    pub genus: u32,
    pub points: u32,
    pub entries: Vec<TableEntry>,
}

impl TableJson {
    pub fn from_table(p: &PValue, genus: u32, points: u32, table: &[TauCorrelator]) -> Self {
        let p = match p {
            PValue::Fixed(v) if v.is_integer() => serde_json::json!(v.to_integer().to_i64()),
            PValue::Fixed(v) => serde_json::json!(v.to_string()),
            PValue::Symbolic => serde_json::json!("symbolic"),
        };
        let entries = table
            .iter()
            .map(|t| {
                let (num, den) = match &t.value {
                    CorrelatorValue::Rational(v) => (v.numer().to_string(), v.denom().to_string()),
                    CorrelatorValue::Symbolic(r) => (r.num.to_string(), r.den.to_string()),
                };
                TableEntry { m: t.marks.iter().map(|k| k.m).collect(), j: t.marks.iter().map(|k| k.j).collect(), num, den }
            })
            .collect();
        TableJson { p, genus, points, entries }
    }
}
