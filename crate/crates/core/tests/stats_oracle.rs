mod oracles;

use mixpreserve::data::ColumnInput;
use mixpreserve::rng::sequential;
use mixpreserve::stats::{describe, ols_fit, relative_bias, Statistic};
use mixpreserve::{Dataset, Error};
use proptest::prelude::*;
use rand::Rng;

fn random_design(rng: &mut impl Rng, n: usize, k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let design: Vec<Vec<f64>> = (0..n).map(|_| (0..k).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
    let y = design
        .iter()
        .map(|r| 1.5 + r.iter().enumerate().map(|(i, v)| (i as f64 - 1.0) * v).sum::<f64>() + rng.random_range(-1.0..1.0))
        .collect();
    (design, y)
}

#[test]
fn ols_matches_normal_equations() {
    let mut rng = sequential(3);
    for trial in 0..30 {
        let k = 1 + trial % 4;
        let (design, y) = random_design(&mut rng, 20 + 3 * trial, k);
        for intercept in [true, false] {
            let fit = ols_fit(&design, &y, intercept).unwrap();
            let oracle = oracles::ols_normal_equations(&design, &y, intercept);
            for (a, b) in fit.coefficients.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9, "trial {trial}");
            }
            for (&(lo, hi), &b) in fit.confidence_intervals.iter().zip(&fit.coefficients) {
                assert!(lo <= b && b <= hi);
            }
        }
    }
}

#[test]
fn ols_standard_errors_match_closed_form_simple_regression() {
    let mut rng = sequential(8);
    let (design, y) = random_design(&mut rng, 60, 1);
    let fit = ols_fit(&design, &y, true).unwrap();
    let x: Vec<f64> = design.iter().map(|r| r[0]).collect();
    let (mx, n) = (oracles::sample_mean(&x), x.len() as f64);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let rss: f64 = x.iter().zip(&y).map(|(xi, yi)| (yi - fit.coefficients[0] - fit.coefficients[1] * xi).powi(2)).sum();
    let s2 = rss / (n - 2.0);
    assert!((fit.residual_variance - s2).abs() < 1e-10);
    assert!((fit.std_errors[1] - (s2 / sxx).sqrt()).abs() < 1e-10);
    assert!((fit.std_errors[0] - (s2 * (1.0 / n + mx * mx / sxx)).sqrt()).abs() < 1e-10);
    assert_eq!(fit.df, 58);
}

#[test]
fn rank_deficiency_reports_condition() {
    let design: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 3.0 * i as f64 + 0.0]).collect();
    let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
    match ols_fit(&design, &y, false) {
        Err(Error::RankDeficient { condition }) => assert!(condition > 1e10 || condition.is_infinite()),
        other => panic!("expected rank deficiency, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn describe_matches_direct_moments(seed in 0u64..10_000, n in 3usize..60) {
        let mut rng = sequential(seed);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let l: Vec<String> = (0..n).map(|i| if i % 3 == 0 { "p".into() } else { "q".into() }).collect();
        let d = Dataset::from_columns(vec![
            ("a", ColumnInput::Continuous(a.clone())),
            ("b", ColumnInput::Continuous(b.clone())),
            ("l", ColumnInput::Labels(l.clone())),
        ]).unwrap();
        let r = describe(&d).unwrap();
        prop_assert!((r.mean("a").unwrap() - oracles::sample_mean(&a)).abs() < 1e-12);
        prop_assert!((r.variance("b").unwrap() - oracles::sample_cov(&b, &b)).abs() < 1e-12);
        prop_assert!((r.covariance.get("a", "b").unwrap() - oracles::sample_cov(&a, &b)).abs() < 1e-11);
        prop_assert_eq!(r.covariance.get("a", "b"), r.covariance.get("b", "a"));
        prop_assert!((r.correlation.get("a", "b").unwrap() - oracles::sample_corr(&a, &b)).abs() < 1e-12);
        let total: f64 = r.categorical[0].categories.iter().map(|f| f.frequency).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let p: Vec<f64> = a.iter().zip(&l).filter(|(_, l)| l.as_str() == "p").map(|(v, _)| *v).collect();
        prop_assert!((r.conditional("l", "a", "p").unwrap().mean - oracles::sample_mean(&p)).abs() < 1e-12);
        let self_bias = relative_bias(&r, &r).unwrap();
        prop_assert!(self_bias.entries.iter().all(|e| e.bias == 0.0));
        prop_assert!(self_bias.find(Statistic::Correlation, &["a", "b"], None).is_some());
    }
}
