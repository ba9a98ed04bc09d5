//! Universal equations over computed tables: selection rule, string and
//! dilaton equations, Euler characteristics and the negative-p continuation.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::correlators::{lookup, one_point_value, CorrelatorValue, Mark, TauCorrelator};
use crate::error::{Error, Result};
use crate::{bernoulli, factorial, qi, Q};

/// One identity instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub identity: String,
    pub lhs: String,
    pub rhs: Vec<String>,
    pub pass: bool,
    /// lhs − rhs as an exact rational
    pub difference: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TautologyReport {
    pub checked: Vec<Check>,
}

impl TautologyReport {
    pub fn all_pass(&self) -> bool {
        self.checked.iter().all(|c| c.pass)
    }

    pub fn is_empty(&self) -> bool {
        self.checked.is_empty()
    }

    pub fn merge(&mut self, o: TautologyReport) {
        self.checked.extend(o.checked);
    }

    fn push(&mut self, identity: &str, lhs: String, rhs: Vec<String>, difference: Q) {
        self.checked.push(Check {
            identity: identity.to_string(),
            lhs,
            rhs,
            pass: difference.is_zero(),
            difference: difference.to_string(),
        });
    }
}

impl fmt::Display for TautologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.checked.is_empty() {
            return writeln!(f, "(no applicable entries)");
        }
        for c in &self.checked {
            writeln!(
                f,
                "{} {:<10} {} = {}  (diff {})",
                if c.pass { "PASS" } else { "FAIL" },
                c.identity,
                c.lhs,
                c.rhs.join(" + "),
                c.difference
            )?;
        }
        Ok(())
    }
}

/// (p+1)(2g−2+n) = Σ (p mᵢ + jᵢ + 1)
pub fn selection_rule(p: i64, g: u32, marks: &[Mark]) -> bool {
    let lhs = (p + 1) * (2 * g as i64 - 2 + marks.len() as i64);
    let rhs: i64 = marks.iter().map(|k| p * k.m as i64 + k.j + 1).sum();
    lhs == rhs
}

/// Nonzero one-point entries at integer p for g = 1..=g_max; genera whose
/// label sits on an integer grade are skipped.
pub fn one_point_table(p: i64, g_max: u32) -> Vec<TauCorrelator> {
    (1..=g_max).filter_map(|g| one_point_value(p, g).ok()).collect()
}

fn label(g: u32, marks: &[Mark]) -> String {
    let inner: Vec<String> = marks.iter().map(|k| format!("tau_{{{},{}}}", k.m, k.j)).collect();
    format!("<{}>_{}", inner.join(" "), g)
}

fn rational(t: &TauCorrelator) -> Q {
    match &t.value {
        CorrelatorValue::Rational(v) => v.clone(),
        CorrelatorValue::Symbolic(_) => Q::zero(),
    }
}

fn partner(t: &TauCorrelator, special: Mark) -> Option<Mark> {
    match t.marks.as_slice() {
        [x, y] if *x == special => Some(*y),
        [x, y] if *y == special => Some(*x),
        _ => None,
    }
}

/// ⟨τ_{0,0} τ_{n,j}⟩_g = ⟨τ_{n−1,j}⟩_g for every two-point entry containing τ_{0,0}.
pub fn string_check(two_point: &[TauCorrelator], one_point: &[TauCorrelator], g: u32) -> TautologyReport {
    let mut report = TautologyReport::default();
    let puncture = Mark::new(0, 0);
    for t in two_point.iter().filter(|t| t.genus == g) {
        let Some(other) = partner(t, puncture) else { continue };
        let lhs = rational(t);
        let (rhs_label, rhs) = if other.m == 0 {
            ("0".to_string(), Q::zero())
        } else {
            let m = [Mark::new(other.m - 1, other.j)];
            (label(g, &m), lookup(one_point, &m).unwrap_or_default())
        };
        report.push("string", format!("{} = {}", t.label(), lhs), vec![format!("{rhs_label} = {rhs}")], &lhs - &rhs);
    }
    report
}

/// ⟨τ_{1,0} τ_{n,j}⟩_g = (2g − 1) ⟨τ_{n,j}⟩_g wherever both sides are tabulated.
pub fn dilaton_check(two_point: &[TauCorrelator], one_point: &[TauCorrelator], g: u32) -> TautologyReport {
    let mut report = TautologyReport::default();
    let dilaton = Mark::new(1, 0);
    let factor = qi(2 * g as i64 - 1);
    for t in two_point.iter().filter(|t| t.genus == g) {
        let Some(other) = partner(t, dilaton) else { continue };
        let m = [other];
        let Some(rhs) = lookup(one_point, &m) else { continue };
        let lhs = rational(t);
        report.push(
            "dilaton",
            format!("{} = {}", t.label(), lhs),
            vec![format!("{} x {} = {}", factor, label(g, &m), rhs)],
            &lhs - &factor * &rhs,
        );
    }
    report
}

/// Every nonzero entry obeys the selection rule.
pub fn selection_check(p: i64, table: &[TauCorrelator]) -> TautologyReport {
    let mut report = TautologyReport::default();
    for t in table {
        let lhs = (p + 1) * (2 * t.genus as i64 - 2 + t.marks.len() as i64);
        let rhs: i64 = t.marks.iter().map(|k| p * k.m as i64 + k.j + 1).sum();
        report.push("selection", format!("{} : {lhs}", t.label()), vec![rhs.to_string()], qi(lhs - rhs));
    }
    report
}

/// |B_{2g}|, the convention B₁ = 1/6, B₂ = 1/30, B₃ = 1/42, B₄ = 1/30.
pub fn bernoulli_g(g: u32) -> Q {
    bernoulli(2 * g).abs()
}

/// −(2g−1)/(2g)! · (2g+s−3)! · |B_{2g}|
pub fn euler_characteristic(g: u32, s: u32) -> Result<Q> {
    if g == 0 || s == 0 || 2 * g + s < 3 {
        return Err(Error::Domain(format!("Euler characteristic needs g >= 1, s >= 1 (got g={g}, s={s})")));
    }
    Ok(-qi(2 * g as i64 - 1) / Q::from(factorial(2 * g as u64)) * Q::from(factorial((2 * g + s - 3) as u64)) * bernoulli_g(g))
}

/// ζ(1−2g) in the two conventions: signed −B_{2g}/(2g), and −|B_{2g}|/(2g).
pub fn zeta_conventions(g: u32) -> (Q, Q) {
    let two_g = qi(2 * g as i64);
    (-bernoulli(2 * g) / &two_g, -bernoulli_g(g) / &two_g)
}

/// One-point continuation to negative p, one entry per genus; Γ poles are
/// reported as errors in place.
pub fn negative_p_table(p: i64, g_max: u32) -> Result<Vec<(u32, Result<TauCorrelator>)>> {
    if p >= 0 {
        return Err(Error::Usage(format!("negative_p_table needs p < 0, got {p}")));
    }
    Ok((1..=g_max).map(|g| (g, one_point_value(p, g))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy::KernelMode;
    use crate::correlators::two_point_table;
    use crate::q;

    fn mk(v: &[(u32, i64)]) -> Vec<Mark> {
        v.iter().map(|&(m, j)| Mark::new(m, j)).collect()
    }

    #[test]
    fn selection_examples() {
        assert!(selection_rule(3, 2, &mk(&[(0, 1), (4, 1)])));
        assert!(!selection_rule(3, 2, &mk(&[(0, 0), (4, 1)])));
        assert!(selection_rule(4, 1, &mk(&[(0, 2), (1, 2)])));
    }

    #[test]
    fn euler_values() {
        assert_eq!(euler_characteristic(1, 1).unwrap(), q(-1, 12));
        assert_eq!(euler_characteristic(2, 1).unwrap().abs(), q(1, 120));
        assert_eq!(euler_characteristic(1, 2).unwrap(), q(-1, 12));
        assert!(euler_characteristic(0, 1).is_err());
    }

    #[test]
    fn zeta_sign_conventions_differ_at_even_genus() {
        assert_eq!(zeta_conventions(1), (q(-1, 12), q(-1, 12)));
        assert_eq!(zeta_conventions(2), (q(1, 120), q(-1, 120)));
    }

    #[test]
    fn string_p5_genus_two() {
        let two = two_point_table(5, 2, KernelMode::Real).unwrap();
        let one = one_point_table(5, 2);
        let r = string_check(&two, &one, 2);
        assert!(r.all_pass(), "{r}");
        assert!(r.checked.iter().any(|c| c.lhs.ends_with("= 11/3600")), "{r}");
    }

    #[test]
    fn dilaton_genus_one() {
        for p in [4, 5, 7] {
            let two = two_point_table(p, 1, KernelMode::Real).unwrap();
            let r = dilaton_check(&two, &one_point_table(p as i64, 1), 1);
            assert!(!r.is_empty() && r.all_pass(), "{r}");
        }
    }

    #[test]
    fn no_puncture_gives_empty_report() {
        let two = two_point_table(3, 2, KernelMode::Real).unwrap();
        assert!(string_check(&two, &one_point_table(3, 2), 2).is_empty());
    }

    #[test]
    fn negative_p_needs_negative() {
        assert!(negative_p_table(3, 2).is_err());
        let t = negative_p_table(-3, 3).unwrap();
        assert_eq!(t[2].1.as_ref().unwrap().rational(), Some(&q(-35, 34992)));
    }
}
