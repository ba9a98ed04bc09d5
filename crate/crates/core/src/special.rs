//! Gamma-family special functions in double precision.
//!
//! Shift recurrence up to Re z ≥ 8 followed by the Stirling series.

use num_complex::Complex64;
use std::f64::consts::PI;

const SHIFT: f64 = 8.0;

// B_{2k} for k = 1..10
const BERN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Principal-branch log Γ(z), continuous off the non-positive real axis.
pub fn ln_gamma_c(z: Complex64) -> Complex64 {
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < SHIFT {
        acc -= z.ln();
        z += 1.0;
    }
    let mut s = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln();
    let z2 = z * z;
    let mut zp = z;
    for (k, b) in BERN.iter().enumerate() {
        let k = (k + 1) as f64;
        s += b / (2.0 * k * (2.0 * k - 1.0)) / zp;
        zp *= z2;
    }
    acc + s
}

/// ψ(z) = d/dz log Γ(z).
pub fn digamma_c(z: Complex64) -> Complex64 {
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < SHIFT {
        acc -= z.inv();
        z += 1.0;
    }
    let mut s = z.ln() - 0.5 / z;
    let z2 = z * z;
    let mut zp = z2;
    for (k, b) in BERN.iter().enumerate() {
        let k = (k + 1) as f64;
        s -= b / (2.0 * k) / zp;
        zp *= z2;
    }
    acc + s
}

fn stirling(z: f64) -> f64 {
    let mut s = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln();
    let mut zp = z;
    for (k, b) in BERN.iter().enumerate() {
        let k = (k + 1) as f64;
        s += b / (2.0 * k * (2.0 * k - 1.0)) / zp;
        zp *= z * z;
    }
    s
}

/// log Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    let (mut z, mut prod) = (x, 1.0);
    while z < SHIFT {
        prod *= z;
        z += 1.0;
    }
    stirling(z) - prod.ln()
}

pub fn digamma(x: f64) -> f64 {
    digamma_c(Complex64::new(x, 0.0)).re
}

/// Γ(x) for real x away from the poles.
pub fn gamma(x: f64) -> f64 {
    if x > 0.0 {
        let (mut z, mut prod) = (x, 1.0);
        while z < SHIFT {
            prod *= z;
            z += 1.0;
        }
        return stirling(z).exp() / prod;
    }
    PI / ((PI * x).sin() * gamma(1.0 - x))
}
