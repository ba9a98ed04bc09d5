//! Generalized Airy functions φ for each p.
//!
//! Two kernels are carried. The contour kernel (the standard Airy function at
//! p = 3) obeys φ^(p−1)(y) = y φ(y). The real kernel
//! φ(y) = ∫₀^∞ e^(−u^p/p + y u) du picks up a boundary constant:
//! φ^(p−1)(y) = y φ(y) + 1.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate_pieces, DD};
use crate::scalar::{ExactScalar, Frac};
use crate::{qi, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KernelMode {
    Contour,
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AiryFamily {
    pub p: u32,
    pub mode: KernelMode,
}

impl AiryFamily {
    pub fn new(p: u32, mode: KernelMode) -> Result<Self> {
        if p < 3 {
            return Err(Error::Usage(format!("p must be at least 3, got {p}")));
        }
        Ok(AiryFamily { p, mode })
    }

    /// Inhomogeneous constant of the ODE.
    pub fn ode_constant(&self) -> i64 {
        match self.mode {
            KernelMode::Contour => 0,
            KernelMode::Real => 1,
        }
    }
}

/// φ^(k)(0) exactly.
///
/// Real kernel: ∫₀^∞ u^k e^(−u^p/p) du = p^((k+1)/p − 1) Γ((k+1)/p).
/// Contour kernel (p = 3 only): the standard Airy values, with
/// Ai^(2+r)(0) = r Ai^(r−1)(0).
pub fn phi_deriv_zero(p: u32, k: u32, mode: KernelMode) -> Result<ExactScalar> {
    let pq = qi(p as i64);
    match mode {
        KernelMode::Real => {
            let e = Frac::new(k as i64 + 1, p as i64) - 1;
            let g = ExactScalar::gamma(Frac::new(k as i64 + 1, p as i64))?;
            Ok(&ExactScalar::power(&pq, e)? * &g)
        }
        KernelMode::Contour => {
            if p != 3 {
                return Err(Error::Domain("contour kernel values are implemented for p = 3 only".into()));
            }
            match k {
                0 => Ok(&ExactScalar::power(&pq, Frac::new(-2, 3))? * &ExactScalar::gamma_pow(Frac::new(2, 3), -1)?),
                1 => Ok(-(&ExactScalar::power(&pq, Frac::new(-1, 3))? * &ExactScalar::gamma_pow(Frac::new(1, 3), -1)?)),
                2 => Ok(ExactScalar::zero()),
                _ => Ok(phi_deriv_zero(p, k - 3, mode)?.scale(&qi(k as i64 - 2))),
            }
        }
    }
}

/// φ^(b)(y) expressed through φ, …, φ^(p−2) with polynomial coefficients in y.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeRule {
    pub order: u32,
    /// (power of y, derivative order) → coefficient
    pub terms: BTreeMap<(u32, u32), Q>,
    /// power of y → coefficient of the ODE constant
    pub constant: BTreeMap<u32, Q>,
}

/// Rewrite rule for φ^(b), obtained by differentiating φ^(p−1) = yφ + c₀
/// (b − p + 1) times. Returns None when b < p − 1.
pub fn ode_rewrite(fam: &AiryFamily, b: u32) -> Option<OdeRule> {
    let p = fam.p;
    if b < p - 1 {
        return None;
    }
    let c0 = qi(fam.ode_constant());
    let mut pending: BTreeMap<(u32, u32), Q> = BTreeMap::new();
    pending.insert((0, b), Q::one());
    let mut terms = BTreeMap::new();
    let mut constant: BTreeMap<u32, Q> = BTreeMap::new();
    while let Some(((k, i), c)) = pending.pop_last() {
        if i < p - 1 {
            let e: &mut Q = terms.entry((k, i)).or_insert_with(Q::zero);
            *e += c;
            continue;
        }
        let r = i - (p - 1);
        // y^k φ^(p−1+r) = y^(k+1) φ^(r) + r y^k φ^(r−1) + c₀ y^k δ_{r0}
        *pending.entry((k + 1, r)).or_insert_with(Q::zero) += &c;
        if r > 0 {
            *pending.entry((k, r - 1)).or_insert_with(Q::zero) += &c * qi(r as i64);
        } else if !c0.is_zero() {
            *constant.entry(k).or_insert_with(Q::zero) += &c * &c0;
        }
    }
    terms.retain(|_, c: &mut Q| !c.is_zero());
    constant.retain(|_, c| !c.is_zero());
    Some(OdeRule { order: b, terms, constant })
}

// ---- standard Airy function --------------------------------------------------

const AI0: DD = DD { hi: 0.3550280538878172, lo: 2.05233632436212e-17 };
const MAI1: DD = DD { hi: 0.2588194037928068, lo: -2.522243111610832e-17 };
// Maclaurin range. On the positive side the series cancels down to Ai ~ e^(−ζ)
// while its terms grow like e^ζ, so the switch comes earlier there.
const SERIES_NEG: f64 = 12.0;
const SERIES_POS: f64 = 9.0;

fn maclaurin(x: f64) -> (f64, f64) {
    let xd = DD::from_f64(x);
    let x3 = xd.mul(xd).mul(xd);
    // f, g and their derivatives
    let (mut f, mut tf) = (DD::from_f64(1.0), DD::from_f64(1.0));
    let (mut g, mut tg) = (xd, xd);
    let (mut fp, mut tfp) = (DD::ZERO, xd.mul(xd).div_f64(2.0));
    let (mut gp, mut tgp) = (DD::from_f64(1.0), DD::from_f64(1.0));
    fp = fp.add(tfp);
    for k in 0..400u32 {
        let k3 = 3.0 * k as f64;
        tf = tf.mul(x3).div_f64((k3 + 2.0) * (k3 + 3.0));
        tg = tg.mul(x3).div_f64((k3 + 3.0) * (k3 + 4.0));
        tgp = tgp.mul(x3).div_f64((k3 + 1.0) * (k3 + 3.0));
        f = f.add(tf);
        g = g.add(tg);
        gp = gp.add(tgp);
        if k > 0 {
            tfp = tfp.mul(x3).div_f64(k3 * (k3 + 2.0));
            fp = fp.add(tfp);
        }
        let small = 1e-34 * (1.0 + f.abs() + g.abs());
        if k > 2 && tf.abs() < small && tg.abs() < small && tfp.abs() < small && tgp.abs() < small {
            break;
        }
    }
    let ai = AI0.mul(f).sub(MAI1.mul(g));
    let aip = AI0.mul(fp).sub(MAI1.mul(gp));
    (ai.to_f64(), aip.to_f64())
}

fn asym_coeffs(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let next = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(next);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * next);
    }
    (u, v)
}

/// Σ c_k (±1/ζ)^k, stopped at the smallest term.
fn truncated(c: &[f64], step: f64) -> f64 {
    let (mut s, mut t, mut last): (f64, f64, f64) = (0.0, 1.0, f64::INFINITY);
    for &ck in c {
        let term = ck * t;
        if term.abs() > last || term.abs() < 1e-18 * s.abs() {
            break;
        }
        s += term;
        last = term.abs();
        t *= step;
    }
    s
}

fn asymptotic(x: f64) -> (f64, f64) {
    let (u, v) = asym_coeffs(80);
    let z = x.abs();
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    if x > 0.0 {
        let su = truncated(&u, -1.0 / zeta);
        let sv = truncated(&v, -1.0 / zeta);
        let pre = (-zeta).exp() / (2.0 * PI.sqrt());
        (pre * su / z.powf(0.25), -pre * sv * z.powf(0.25))
    } else {
        let split = |c: &[f64], odd: usize| -> Vec<f64> {
            c.iter().skip(odd).step_by(2).enumerate().map(|(k, x)| if k % 2 == 0 { *x } else { -*x }).collect()
        };
        let z2 = 1.0 / (zeta * zeta);
        let ue = truncated(&split(&u, 0), z2);
        let uo = truncated(&split(&u, 1), z2) / zeta;
        let ve = truncated(&split(&v, 0), z2);
        let vo = truncated(&split(&v, 1), z2) / zeta;
        let th = zeta - PI / 4.0;
        let (s, c) = th.sin_cos();
        let ai = (c * ue + s * uo) / (PI.sqrt() * z.powf(0.25));
        let aip = z.powf(0.25) / PI.sqrt() * (s * ve - c * vo);
        (ai, aip)
    }
}

/// (Ai(x), Ai′(x)).
pub fn airy_ai(x: f64) -> (f64, f64) {
    if (-SERIES_NEG..=SERIES_POS).contains(&x) {
        maclaurin(x)
    } else {
        asymptotic(x)
    }
}

/// Ai^(n)(x) through Ai^(n) = P_n(x) Ai + Q_n(x) Ai′.
pub fn airy_ai_deriv(n: u32, x: f64) -> f64 {
    let (ai, aip) = airy_ai(x);
    let (pc, qc) = airy_deriv_polys(n);
    let ev = |c: &[f64]| c.iter().rev().fold(0.0, |acc, &k| acc * x + k);
    ev(&pc) * ai + ev(&qc) * aip
}

fn airy_deriv_polys(n: u32) -> (Vec<f64>, Vec<f64>) {
    let mut pc = vec![1.0];
    let mut qc = vec![0.0];
    for _ in 0..n {
        let deriv = |c: &[f64]| -> Vec<f64> { c.iter().enumerate().skip(1).map(|(i, &k)| i as f64 * k).collect() };
        // P' + x Q, P + Q'
        let mut np = deriv(&pc);
        let mut xq = vec![0.0];
        xq.extend(qc.iter().copied());
        add_into(&mut np, &xq);
        let mut nq = pc.clone();
        add_into(&mut nq, &deriv(&qc));
        pc = np;
        qc = nq;
    }
    (pc, qc)
}

fn add_into(a: &mut Vec<f64>, b: &[f64]) {
    if a.len() < b.len() {
        a.resize(b.len(), 0.0);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Numerical φ^(k)(y).
pub fn phi_eval_deriv(fam: &AiryFamily, k: u32, y: f64, tol: f64) -> Result<f64> {
    match fam.mode {
        KernelMode::Contour => {
            if fam.p != 3 {
                return Err(Error::Domain("contour kernel evaluation is implemented for p = 3 only".into()));
            }
            Ok(airy_ai_deriv(k, y))
        }
        KernelMode::Real => {
            let p = fam.p as f64;
            let expo = |u: f64| -u.powf(p) / p + y * u;
            // peak of the exponent and a cutoff where it has dropped by 60
            let peak = if y > 0.0 { y.powf(1.0 / (p - 1.0)) } else { 0.0 };
            let top = expo(peak);
            if top > 600.0 {
                return Err(Error::Domain(format!("real-kernel phi overflows at y = {y}")));
            }
            let mut hi = peak.max(1.0);
            while expo(hi) + (k as f64) * hi.ln() > top - 60.0 {
                hi *= 1.5;
            }
            let f = |u: f64| u.powi(k as i32) * (expo(u) - top).exp();
            let scale = top.exp();
            let r = integrate_pieces(&f, &[0.0, peak.max(1e-3), hi], tol / scale.max(1.0))?;
            Ok(r.value * scale)
        }
    }
}

pub fn phi_eval(fam: &AiryFamily, y: f64, tol: f64) -> Result<f64> {
    phi_eval_deriv(fam, 0, y, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    #[test]
    fn deriv_zero_examples() {
        for p in 3..8 {
            let v = phi_deriv_zero(p, p - 2, KernelMode::Real).unwrap();
            let want = &ExactScalar::power(&qi(p as i64), Frac::new(-1, p as i64)).unwrap()
                * &ExactScalar::gamma(Frac::new(p as i64 - 1, p as i64)).unwrap();
            assert_eq!(v, want);
        }
        let ai0 = phi_deriv_zero(3, 0, KernelMode::Contour).unwrap();
        assert_eq!(ai0.to_string(), "1/3 * Gamma(2/3)^-1 * 3^(1/3)");
        let v = phi_deriv_zero(4, 0, KernelMode::Real).unwrap();
        assert!((v.to_f64() - 1.2818466760204239).abs() < 1e-12);
        assert!(phi_deriv_zero(4, 0, KernelMode::Contour).is_err());
    }

    #[test]
    fn real_kernel_obeys_inhomogeneous_relation() {
        for p in 3..8u32 {
            for r in 0..4u32 {
                let lhs = phi_deriv_zero(p, p - 1 + r, KernelMode::Real).unwrap();
                let rhs = if r == 0 {
                    ExactScalar::one()
                } else {
                    phi_deriv_zero(p, r - 1, KernelMode::Real).unwrap().scale(&qi(r as i64))
                };
                assert_eq!(lhs, rhs, "p={p} r={r}");
            }
        }
    }

    #[test]
    fn rewrite_rules() {
        let c3 = AiryFamily::new(3, KernelMode::Contour).unwrap();
        let r = ode_rewrite(&c3, 2).unwrap();
        assert_eq!(r.terms, BTreeMap::from([((1, 0), qi(1))]));
        assert!(r.constant.is_empty());
        let r = ode_rewrite(&c3, 3).unwrap();
        assert_eq!(r.terms, BTreeMap::from([((0, 0), qi(1)), ((1, 1), qi(1))]));
        let r4 = ode_rewrite(&AiryFamily::new(4, KernelMode::Real).unwrap(), 3).unwrap();
        assert_eq!(r4.terms, BTreeMap::from([((1, 0), qi(1))]));
        assert_eq!(r4.constant, BTreeMap::from([(0, qi(1))]));
        assert!(ode_rewrite(&c3, 1).is_none());
        // Ai''''(y) = y² Ai + 2 Ai'
        let r = ode_rewrite(&c3, 4).unwrap();
        assert_eq!(r.terms, BTreeMap::from([((2, 0), qi(1)), ((0, 1), qi(2))]));
        let _ = q(1, 1);
    }

    #[test]
    fn airy_reference_values() {
        // mpmath airyai / airyai(x, 1)
        let table = [
            (-10.0, 0.04024123848644319, 0.99626504413279),
            (-7.5, 0.3217757163806479, 0.3188095066985546),
            (-4.5, 0.2921527810559595, -0.5233625323157477),
            (-2.0, 0.22740742820168558, 0.618259020741691),
            (0.5, 0.23169360648083348, -0.2249105326646839),
            (3.0, 0.006591139357460719, -0.011912976705951319),
            (4.5, 0.00033025032351430896, -0.0007178665675575089),
            (8.0, 4.6922076160992316e-08, -1.3414392979067865e-07),
            (12.5, 2.39682782607805e-14, -8.521346564673856e-14),
            (15.0, 2.1649625207379925e-18, -8.420567954017772e-18),
        ];
        for (x, ai, aip) in table {
            let (a, b) = airy_ai(x);
            assert!((a - ai).abs() < 1e-13, "Ai({x}) = {a} vs {ai}");
            assert!((b - aip).abs() < 1e-12, "Ai'({x}) = {b} vs {aip}");
        }
        let (a, b) = airy_ai(0.0);
        assert!((a - 0.3550280539).abs() < 1e-10 && (b + 0.2588194038).abs() < 1e-10);
    }

    #[test]
    fn airy_ode_by_finite_differences() {
        let h = 1e-3;
        for y in [-2.0, -1.0, 0.0, 1.0] {
            let (f0, _) = airy_ai(y);
            let (fp, _) = airy_ai(y + h);
            let (fm, _) = airy_ai(y - h);
            let second = (fp - 2.0 * f0 + fm) / (h * h);
            assert!((second - y * f0).abs() < 1e-6);
            assert!((airy_ai_deriv(2, y) - y * f0).abs() < 1e-14);
        }
    }

    #[test]
    fn airy_switch_is_continuous() {
        for x in [-SERIES_NEG, SERIES_POS] {
            let a = maclaurin(x);
            let b = asymptotic(x);
            let scale = a.0.abs().max(1e-300);
            assert!(((a.0 - b.0) / scale).abs() < 1e-12, "{x}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn real_kernel_quadrature_matches_moments() {
        for p in 3..8u32 {
            let fam = AiryFamily::new(p, KernelMode::Real).unwrap();
            for k in 0..=p {
                let exact = phi_deriv_zero(p, k, KernelMode::Real).unwrap().to_f64();
                let num = phi_eval_deriv(&fam, k, 0.0, 1e-12).unwrap();
                assert!((exact - num).abs() < 1e-8, "p={p} k={k}: {exact} vs {num}");
            }
        }
        let fam = AiryFamily::new(4, KernelMode::Real).unwrap();
        assert!((phi_eval(&fam, 0.0, 1e-10).unwrap() - 1.2818466760204239).abs() < 1e-8);
    }
}
