use proptest::prelude::*;

use pspin::airy::{AiryFamily, KernelMode};
use pspin::correlators::{finite_n_evaluate, general_p_interpolate, two_point_table, FiniteNSource};
use pspin::laurent::{LaurentP, LaurentRatio};
use pspin::moments::{MomentSymbol, Reducer, RuleOrder};
use pspin::scalar::{gamma_normalize, ExactScalar, Frac, ScalarSum};
use pspin::series::FractionalSeries;
use pspin::tautology::selection_rule;
use pspin::{q, qi};

fn laurent() -> impl Strategy<Value = LaurentP> {
    (prop::collection::vec(-20i64..20, 1..5), -3i32..3).prop_map(|(c, s)| LaurentP::from_ints(&c).shift(s))
}

fn series(p: u32) -> impl Strategy<Value = FractionalSeries> {
    prop::collection::vec(((0u64..8, 0u64..8), -9i64..9, 1i64..5), 0..6).prop_map(move |terms| {
        let mut s = FractionalSeries::new(p, 2, Frac::new(12, p as i64));
        for ((x, y), n, d) in terms {
            s.add_term(vec![x, y], ScalarSum::from(ExactScalar::from_rational(q(n, d))));
        }
        s
    })
}

fn gamma_product() -> impl Strategy<Value = ExactScalar> {
    prop::collection::vec((1i64..18, 2i64..7, prop::bool::ANY), 1..5).prop_map(|toks| {
        toks.into_iter().fold(ExactScalar::one(), |acc, (n, d, inv)| {
            let g = ExactScalar::gamma(Frac::new(n, d)).unwrap();
            let g = if inv { g.recip().unwrap() } else { g };
            &acc * &g
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_is_confluent(p in 3u32..6, n in 0u32..6, b in 0u32..5, c in 0u32..5, seed in any::<u64>()) {
        let fam = AiryFamily::new(p, KernelMode::Real).unwrap();
        let sym = MomentSymbol::new(p, n, b, c);
        let canonical = Reducer::new(fam).reduce(&sym).unwrap();
        let random = Reducer::with_order(fam, RuleOrder::Random(seed)).reduce(&sym).unwrap();
        prop_assert!(canonical.equals(&random));
    }
}

proptest! {
    #[test]
    fn series_ring_laws(f in series(3), g in series(3), h in series(3)) {
        prop_assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
        prop_assert_eq!(f.mul(&g).unwrap().mul(&h).unwrap(), f.mul(&g.mul(&h).unwrap()).unwrap());
        prop_assert_eq!(f.add(&g).unwrap(), g.add(&f).unwrap());
    }

    #[test]
    fn laurent_eval_is_multiplicative(f in laurent(), g in laurent(), x in prop::sample::select(vec![-7i64, -3, -1, 2, 5, 11])) {
        let x = qi(x);
        prop_assert_eq!((&f * &g).eval(&x).unwrap(), f.eval(&x).unwrap() * g.eval(&x).unwrap());
        prop_assert_eq!((&f + &g).eval(&x).unwrap(), f.eval(&x).unwrap() + g.eval(&x).unwrap());
    }

    #[test]
    fn gamma_normalize_keeps_value(x in gamma_product()) {
        let y = gamma_normalize(&x);
        let (a, b) = (x.to_f64(), y.to_f64());
        prop_assert!(((a - b) / a).abs() < 1e-12, "{} -> {}: {} vs {}", x, y, a, b);
        prop_assert_eq!(gamma_normalize(&y), y);
    }

    #[test]
    fn interpolation_recovers_polynomials(c in prop::collection::vec(-30i64..30, 1..5), den in 0i32..3) {
        let num = LaurentP::from_ints(&c);
        let want = LaurentRatio::from_poly(num.shift(-den));
        let samples = (3..3 + c.len() as i64 + 2).map(|p| (p, want.eval(&qi(p)).unwrap())).collect();
        prop_assert_eq!(general_p_interpolate(&samples, c.len() - 1, den).unwrap(), want);
    }

    #[test]
    fn finite_n_symmetries(a in prop::collection::vec(-2.0f64..2.0, 1..5), s1 in -1.0f64..1.0, s2 in -1.0f64..1.0) {
        let src = FiniteNSource::new(a.clone()).unwrap();
        let mut rev = a.clone();
        rev.reverse();
        let rsrc = FiniteNSource::new(rev).unwrap();
        let x = finite_n_evaluate(&src, &[s1, s2]).unwrap();
        let y = finite_n_evaluate(&src, &[s2, s1]).unwrap();
        let z = finite_n_evaluate(&rsrc, &[s1, s2]).unwrap();
        let scale = x.abs().max(1.0);
        prop_assert!((x - y).abs() < 1e-6 * scale, "{} vs {}", x, y);
        prop_assert!((x - z).abs() < 1e-6 * scale, "{} vs {}", x, z);
        prop_assert_eq!(finite_n_evaluate(&src, &[0.0]).unwrap(), 1.0);
    }
}

#[test]
fn every_entry_obeys_selection_rule() {
    for p in 3..=6u32 {
        for g in 1..=2 {
            for t in two_point_table(p, g, KernelMode::Real).unwrap() {
                assert!(selection_rule(p as i64, g, &t.marks), "{t}");
            }
        }
    }
}

#[test]
fn tables_are_rational() {
    let t = two_point_table(4, 2, KernelMode::Real).unwrap();
    assert!(!t.is_empty() && t.iter().all(|c| c.rational().is_some()));
}
