//! Numerical building blocks: double-double arithmetic and adaptive
//! Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Unevaluated sum hi + lo carrying about 32 significant digits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        DD { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, o: DD) -> DD {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        DD::new(s, e)
    }

    pub fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: DD) -> DD {
        self.add(o.neg())
    }

    pub fn mul(self, o: DD) -> DD {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + self.hi * o.lo + self.lo * o.hi;
        DD::new(p, e)
    }

    pub fn div_f64(self, d: f64) -> DD {
        let q1 = self.hi / d;
        let p = q1 * d;
        let e = q1.mul_add(d, -p);
        let r = (self.hi - p - e + self.lo) / d;
        DD::new(q1, r)
    }

    pub fn abs(self) -> f64 {
        self.to_f64().abs()
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Quadrature result with its error estimate.
#[derive(Clone, Copy, Debug)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive G7/K15 quadrature on [a, b] to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quad> {
    integrate_pieces(&f, &[a, b], tol)
}

/// As [`integrate`], with initial breakpoints.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64) -> Result<Quad> {
    let mut heap = BinaryHeap::new();
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let (v, e) = gk15(f, w[0], w[1]);
        err += e;
        heap.push(Piece { a: w[0], b: w[1], val: v, err: e });
    }
    let mut evals = 0;
    while err > tol {
        evals += 1;
        if evals > 20000 {
            return Err(Error::Numeric(format!("quadrature stalled at error bound {err:.3e} > {tol:.3e}")));
        }
        let worst = heap.pop().expect("nonempty");
        let m = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(f, worst.a, m);
        let (v2, e2) = gk15(f, m, worst.b);
        err += e1 + e2 - worst.err;
        heap.push(Piece { a: worst.a, b: m, val: v1, err: e1 });
        heap.push(Piece { a: m, b: worst.b, val: v2, err: e2 });
        if evals % 64 == 0 {
            // resum to shed rounding drift
            err = heap.iter().map(|p| p.err).sum();
        }
    }
    let total = heap.iter().map(|p| p.val).sum();
    err = heap.iter().map(|p| p.err).sum();
    Ok(Quad { value: total, error: err })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_recovers_cancellation() {
        let a = DD::from_f64(1.0).add(DD::from_f64(1e-20));
        let b = a.sub(DD::from_f64(1.0));
        assert!((b.to_f64() - 1e-20).abs() < 1e-35);
        let third = DD::from_f64(1.0).div_f64(3.0);
        let back = third.mul(DD::from_f64(3.0)).sub(DD::from_f64(1.0));
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn quadrature_basics() {
        let r = integrate(|x: f64| x.exp(), 0.0, 1.0, 1e-13).unwrap();
        assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-13);
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
    }
}
