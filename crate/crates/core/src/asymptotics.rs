//! Large-p behaviour, the log-sinh and Binet expansions, the density of
//! states and its comparison with the coset black-hole density, central charges.

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::laurent::LaurentRatio;
use crate::numeric::integrate_pieces;
use crate::oracle::{zeta_oracle, ZetaValue};
use crate::scalar::ExactScalar;
use crate::special::{digamma, digamma_c, ln_gamma_c};
use crate::tautology::bernoulli_g;
use crate::{factorial, qi, Q};

/// |B_{2g}| / ((2g)! · 2g), the p^g coefficient of every genus-g intersection number.
pub fn bernoulli_leading(g: u32) -> Result<Q> {
    if g == 0 {
        return Err(Error::Domain("genus must be >= 1".into()));
    }
    Ok(bernoulli_g(g) / Q::from(factorial(2 * g as u64)) / qi(2 * g as i64))
}

/// |B_{2g}|/((2g)!·2g) = ζ(2g)/((2π)^(2g) g) with ζ(2g) taken exactly from the oracle.
pub fn zeta_identity_holds(g: u32) -> Result<bool> {
    let ZetaValue::Exact(z) = zeta_oracle(2 * g as i64)? else {
        return Err(Error::Internal("even zeta value should be exact".into()));
    };
    let two_pi = (&ExactScalar::pi_pow(1)).scale(&qi(2));
    let rhs = &z * &two_pi.powi(-(2 * g as i32)).scale(&Q::new(1.into(), g.into()));
    Ok(rhs.as_rational() == Some(bernoulli_leading(g)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LargePVerdict {
    /// leading p^g coefficient equals the Bernoulli value
    Matches,
    /// grows slower than p^g
    Negligible,
    Mismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargePReport {
    pub genus: u32,
    pub leading_degree: i32,
    pub leading_coefficient: String,
    pub expected: String,
    pub verdict: LargePVerdict,
}

/// Compares the p^g coefficient of an exact formula with bernoulli_leading(g).
pub fn large_p_check(formula: &LaurentRatio, g: u32) -> Result<LargePReport> {
    let expected = bernoulli_leading(g)?;
    let (deg, coef) = formula.leading().ok_or_else(|| Error::Domain("formula is identically zero".into()))?;
    let verdict = if deg < g as i32 {
        LargePVerdict::Negligible
    } else if deg == g as i32 && coef == expected {
        LargePVerdict::Matches
    } else {
        LargePVerdict::Mismatch
    };
    Ok(LargePReport {
        genus: g,
        leading_degree: deg,
        leading_coefficient: coef.to_string(),
        expected: expected.to_string(),
        verdict,
    })
}

/// Coefficients c_n of σ^(2n), n = 1..=order, in log(sinh(σ/2)/(σ/2)).
pub fn log_sinh_series(order: u32) -> Result<Vec<Q>> {
    if order > 12 {
        return Err(Error::Usage(format!("log-sinh series supports order <= 12, got {order}")));
    }
    Ok((1..=order)
        .map(|n| {
            let c = bernoulli_g(n) / Q::from(factorial(2 * n as u64)) / qi(2 * n as i64);
            if n % 2 == 1 {
                c
            } else {
                -c
            }
        })
        .collect())
}

pub fn log_sinh_eval(coefs: &[Q], sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let mut acc = 0.0;
    let mut pw = s2;
    for c in coefs {
        acc += ExactScalar::from_rational(c.clone()).to_f64() * pw;
        pw *= s2;
    }
    acc
}

/// 1/2 − 1/σ + 1/(e^σ − 1), on its Taylor series below σ = 1e−3.
pub fn binet_integrand(sigma: f64) -> f64 {
    if sigma < 1e-3 {
        let s2 = sigma * sigma;
        sigma * (1.0 / 12.0 - s2 * (1.0 / 720.0 - s2 / 30240.0))
    } else {
        0.5 - 1.0 / sigma + 1.0 / sigma.exp_m1()
    }
}

/// −(1/σ) log(sinh(σ/2)/(σ/2)), whose σ-weighted derivative is 1/σ − 1/2 − 1/(e^σ − 1).
pub fn log_sinh_kernel(sigma: f64) -> f64 {
    let h = sigma / 2.0;
    -((h.sinh() / h).ln()) / sigma
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinetReport {
    pub z: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub quadrature_error: f64,
    /// max |d/dσ(σU) − (1/σ − 1/2 − 1/(e^σ−1))| on a fixed σ grid
    pub bridge_max_diff: f64,
}

/// ψ(z) against log z − 1/(2z) − ∫₀^∞ (1/2 − 1/σ + 1/(e^σ−1)) e^(−σz) dσ.
pub fn binet_check(z: f64) -> Result<BinetReport> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("Binet check needs z > 0, got {z}")));
    }
    // integrand ≤ e^(−σz)/2, so the tail beyond L is below e^(−Lz)/(2z)
    let len = (40.0 + (1.0 / z).ln().max(0.0)) / z;
    let f = |s: f64| binet_integrand(s) * (-s * z).exp();
    let mut breaks = vec![0.0];
    let mut x = 0.5 / z.max(1.0);
    while x < len {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(len);
    let quad = integrate_pieces(&f, &breaks, 1e-13)?;
    let rhs = z.ln() - 0.5 / z - quad.value;
    let lhs = digamma(z);
    let bridge_max_diff = [0.05f64, 0.3, 1.0, 2.5, 7.0]
        .iter()
        .map(|&s| {
            let h = 1e-4 * s.max(1.0);
            let g = |t: f64| t * log_sinh_kernel(t);
            let fd = (g(s + h) - g(s - h)) / (2.0 * h);
            (fd - (1.0 / s - 0.5 - 1.0 / s.exp_m1())).abs()
        })
        .fold(0.0, f64::max);
    Ok(BinetReport { z, lhs, rhs, abs_diff: (lhs - rhs).abs(), quadrature_error: quad.error, bridge_max_diff })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub e_grid: Vec<f64>,
    /// regularization ε of the black-hole density; enters only as an additive log ε
    pub epsilon: f64,
    pub tol: f64,
}

impl DensityConfig {
    /// `samples` equally spaced energies on [e_min, e_max].
    pub fn linear(e_min: f64, e_max: f64, samples: usize) -> Result<Self> {
        if !(e_min > 0.0) || !(e_max >= e_min) || samples < 2 {
            return Err(Error::Usage(format!(
                "energy grid needs 0 < e_min <= e_max and >= 2 samples (got {e_min}, {e_max}, {samples})"
            )));
        }
        let step = (e_max - e_min) / (samples - 1) as f64;
        Ok(DensityConfig { e_grid: (0..samples).map(|i| e_min + step * i as f64).collect(), epsilon: 1.0, tol: 1e-7 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub e: f64,
    pub rho: f64,
    /// same quantity through a central difference of Im log Γ(iE)
    pub rho_fd: f64,
}

/// d/dE Im log Γ(iE) = Re ψ(iE)
fn d_im_log_gamma(e: f64) -> f64 {
    digamma_c(Complex64::new(0.0, e)).re
}

fn d_im_log_gamma_fd(e: f64) -> f64 {
    let h = 1e-4 * e.max(1.0);
    let f = |x: f64| ln_gamma_c(Complex64::new(0.0, x)).im;
    (8.0 * (f(e + h) - f(e - h)) - (f(e + 2.0 * h) - f(e - 2.0 * h))) / (12.0 * h)
}

/// ρ(E) = d/dE Im log Γ(iE) − π/2 − 1/(2E).
pub fn rho_density(cfg: &DensityConfig) -> Result<Vec<DensityPoint>> {
    if let Some(e) = cfg.e_grid.iter().find(|&&e| !(e > 0.0)) {
        return Err(Error::Domain(format!("density has a pole at E = 0; got E = {e}")));
    }
    Ok(cfg
        .e_grid
        .par_iter()
        .map(|&e| {
            let tail = PI / 2.0 + 0.5 / e;
            DensityPoint { e, rho: d_im_log_gamma(e) - tail, rho_fd: d_im_log_gamma_fd(e) - tail }
        })
        .collect())
}

/// (2/π) d/dE Im log Γ(−iE), plus the log ε offset.
pub fn blackhole_density(e: f64, epsilon: f64) -> f64 {
    -(2.0 / PI) * digamma_c(Complex64::new(0.0, -e)).re + epsilon.ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub e: f64,
    pub rho_matrix: f64,
    pub rho_bh: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineFitReport {
    pub alpha: f64,
    pub beta: f64,
    pub max_residual: f64,
    /// the same fit with the −1/(2E) term left out of ρ_matrix
    pub max_residual_without_pole_term: f64,
    /// max |d/dE Im log Γ(−iE) + d/dE Im log Γ(iE)|
    pub conjugation_defect: f64,
    pub rows: Vec<DensityRow>,
}

fn affine_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let alpha = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let beta = my - alpha * mx;
    let max = x.iter().zip(y).map(|(a, b)| (b - alpha * a - beta).abs()).fold(0.0, f64::max);
    (alpha, beta, max)
}

/// Least-squares fit ρ_matrix(E) ≈ α ρ_bh(E) + β over the grid.
pub fn blackhole_density_compare(cfg: &DensityConfig) -> Result<AffineFitReport> {
    if cfg.e_grid.len() < 2 {
        return Err(Error::Usage("affine fit needs at least two energies".into()));
    }
    let rho = rho_density(cfg)?;
    let bh: Vec<f64> = cfg.e_grid.iter().map(|&e| blackhole_density(e, cfg.epsilon)).collect();
    let ys: Vec<f64> = rho.iter().map(|r| r.rho).collect();
    let (alpha, beta, max_residual) = affine_fit(&bh, &ys);
    let ys_np: Vec<f64> = rho.iter().map(|r| r.rho + 0.5 / r.e).collect();
    let (_, _, max_residual_without_pole_term) = affine_fit(&bh, &ys_np);
    let conjugation_defect = cfg
        .e_grid
        .iter()
        .map(|&e| (d_im_log_gamma(e) - digamma_c(Complex64::new(0.0, -e)).re).abs())
        .fold(0.0, f64::max);
    let rows = rho
        .iter()
        .zip(&bh)
        .map(|(r, &b)| DensityRow { e: r.e, rho_matrix: r.rho, rho_bh: b, residual: r.rho - alpha * b - beta })
        .collect();
    Ok(AffineFitReport { alpha, beta, max_residual, max_residual_without_pole_term, conjugation_defect, rows })
}

/// C = 2 − 6/(k+2)
pub fn central_charge(k: &Q) -> Result<Q> {
    let d = k + qi(2);
    if d.is_zero() {
        return Err(Error::Domain("central charge has a pole at k = -2".into()));
    }
    Ok(qi(2) - qi(6) / d)
}

/// C = 2 + 6/(k′−2)
pub fn central_charge_negative(k: &Q) -> Result<Q> {
    let d = k - qi(2);
    if d.is_zero() {
        return Err(Error::Domain("central charge has a pole at k' = 2".into()));
    }
    Ok(qi(2) + qi(6) / d)
}

/// Level k = p − 2 of the coset attached to p.
pub fn level_for_p(p: i64) -> Q {
    qi(p - 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::LaurentP;
    use num_traits::Signed;
    use crate::q;

    #[test]
    fn leading_values() {
        assert_eq!(bernoulli_leading(1).unwrap(), q(1, 24));
        assert_eq!(bernoulli_leading(2).unwrap(), q(1, 2880));
        assert_eq!(bernoulli_leading(3).unwrap(), q(1, 181440));
        for g in 1..=4 {
            assert!(zeta_identity_holds(g).unwrap());
        }
    }

    #[test]
    fn large_p_verdicts() {
        let g1 = LaurentRatio::new(LaurentP::from_ints(&[-1, 1]), LaurentP::constant(qi(24)));
        assert_eq!(large_p_check(&g1, 1).unwrap().verdict, LargePVerdict::Matches);
        let g2 = LaurentRatio::new(
            &(&LaurentP::from_ints(&[-1, 1]) * &LaurentP::from_ints(&[-3, 1])) * &LaurentP::from_ints(&[1, 2]),
            LaurentP::monomial(1, qi(5760)),
        );
        assert_eq!(large_p_check(&g2, 2).unwrap().verdict, LargePVerdict::Matches);
        let sub = LaurentRatio::new(LaurentP::from_ints(&[215, -158, 13, 2]), LaurentP::monomial(2, qi(5760)));
        let r = large_p_check(&sub, 2).unwrap();
        assert_eq!((r.verdict, r.leading_degree), (LargePVerdict::Negligible, 1));
        assert_eq!(large_p_check(&g2, 1).unwrap().verdict, LargePVerdict::Mismatch);
    }

    #[test]
    fn log_sinh() {
        let c = log_sinh_series(8).unwrap();
        assert_eq!(c[0], q(1, 24));
        assert_eq!(c[1], q(-1, 2880));
        for (i, v) in c.iter().enumerate() {
            assert_eq!(v.is_negative(), i % 2 == 1);
        }
        let direct = (0.25f64.sinh() / 0.25).ln();
        assert!((log_sinh_eval(&c, 0.5) - direct).abs() < 1e-10);
        assert_eq!(log_sinh_eval(&c, 0.0), 0.0);
        assert!(log_sinh_series(13).is_err());
    }

    #[test]
    fn binet() {
        for z in [0.5, 1.0, 2.0, 5.5, 10.0] {
            let r = binet_check(z).unwrap();
            assert!(r.abs_diff < 1e-8, "{r:?}");
            assert!(r.bridge_max_diff < 1e-6, "{r:?}");
        }
        let r = binet_check(2.0).unwrap();
        assert!((r.lhs - 0.4227843351).abs() < 1e-9);
        assert!((binet_check(1.0).unwrap().lhs + 0.5772156649).abs() < 1e-9);
        assert!(binet_check(0.0).is_err());
    }

    #[test]
    fn integrand_switch_is_continuous() {
        let below = binet_integrand(1e-3 - 1e-12);
        let above = binet_integrand(1e-3 + 1e-12);
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn density_paths_agree() {
        let cfg = DensityConfig::linear(1.0, 50.0, 50).unwrap();
        for pt in rho_density(&cfg).unwrap() {
            assert!((pt.rho - pt.rho_fd).abs() < 1e-7, "{pt:?}");
        }
        for e in [10.0, 100.0, 1000.0] {
            let cfg = DensityConfig { e_grid: vec![e], epsilon: 1.0, tol: 1e-7 };
            let r = rho_density(&cfg).unwrap()[0].rho;
            assert!((r - e.ln()).abs() < 2.0);
        }
        let bad = DensityConfig { e_grid: vec![0.0], epsilon: 1.0, tol: 1e-7 };
        assert!(matches!(rho_density(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn central_charges() {
        assert_eq!(central_charge_negative(&q(9, 4)).unwrap(), qi(26));
        assert_eq!(central_charge(&qi(1)).unwrap(), qi(0));
        assert_eq!(central_charge(&qi(1_000_000)).unwrap().round(), qi(2));
        assert!(central_charge(&qi(-2)).is_err());
    }
}
