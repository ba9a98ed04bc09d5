use pspin::correlators::{finite_n_evaluate, FiniteNSource};
use pspin::oracle::{mc_trace_moments, quad_moment, McConfig};

fn cfg(samples: usize, seed: u64) -> McConfig {
    McConfig { eigenvalues: vec![1.0, -1.0, 2.0, -2.0], samples, seed, insertions: vec![vec![0.3], vec![0.3, -0.2]] }
}

#[test]
fn monte_carlo_is_reproducible() {
    let a = mc_trace_moments(&cfg(5_000, 11)).unwrap();
    let b = mc_trace_moments(&cfg(5_000, 11)).unwrap();
    assert_eq!(a, b);
    let c = mc_trace_moments(&cfg(5_000, 12)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn monte_carlo_error_shrinks_like_root_n() {
    let small = mc_trace_moments(&cfg(10_000, 3)).unwrap();
    let large = mc_trace_moments(&cfg(40_000, 3)).unwrap();
    for (s, l) in small.iter().zip(&large) {
        let r = s.stderr / l.stderr;
        assert!((1.6..2.4).contains(&r), "stderr ratio {r}");
    }
}

#[test]
fn residue_formula_matches_sampling() {
    let src = FiniteNSource::new(vec![1.0, -1.0, 2.0, -2.0]).unwrap();
    let mc = mc_trace_moments(&cfg(50_000, 5)).unwrap();
    let exact = [finite_n_evaluate(&src, &[0.3]).unwrap(), finite_n_evaluate(&src, &[0.3, -0.2]).unwrap()];
    for (m, e) in mc.iter().zip(exact) {
        assert!((m.estimate - e).abs() < 3.0 * m.stderr, "{m:?} vs {e}");
    }
}

#[test]
fn confluent_source_matches_sampling() {
    let src = FiniteNSource::new(vec![0.5, 0.5, -1.0]).unwrap();
    let mc = mc_trace_moments(&McConfig {
        eigenvalues: src.eigenvalues.clone(),
        samples: 50_000,
        seed: 9,
        insertions: vec![vec![0.7], vec![0.4, 0.4]],
    })
    .unwrap();
    let exact = [finite_n_evaluate(&src, &[0.7]).unwrap(), finite_n_evaluate(&src, &[0.4, 0.4]).unwrap()];
    for (m, e) in mc.iter().zip(exact) {
        assert!((m.estimate - e).abs() < 3.0 * m.stderr, "{m:?} vs {e}");
    }
}

#[test]
fn quadrature_rejects_out_of_range() {
    assert!(quad_moment(9, 0, 0, 0.5, 1e-8).is_err());
    assert!(quad_moment(1, 0, 0, -0.5, 1e-8).is_err());
    assert!(quad_moment(1, 0, 0, 0.5, 1e-30).is_err());
}
