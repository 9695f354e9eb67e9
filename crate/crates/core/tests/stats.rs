use brox_core::stats::{
    bootstrap_mean_ci, ecdf, kolmogorov_q, ks_one_sample, ks_two_sample, trend_check, SampleSet, TrendRule, Verdict,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn kolmogorov_critical_values() {
    // tabulated asymptotic critical values
    assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-4);
    assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-4);
    assert!((kolmogorov_q(1.2239) - 0.10).abs() < 1e-4);
    let below = kolmogorov_q(1.18 - 1e-12);
    let above = kolmogorov_q(1.18 + 1e-12);
    assert!((below - above).abs() < 1e-10);
}

#[test]
fn one_sample_against_uniform_midpoints() {
    let n = 40;
    let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let r = ks_one_sample(&xs, |u| u.clamp(0.0, 1.0)).unwrap();
    assert!((r.statistic - 0.5 / n as f64).abs() < 1e-12);
}

#[test]
fn identical_samples_have_zero_distance() {
    let a = [3.0, 1.0, 2.0, 2.0];
    assert_eq!(ks_two_sample(&a, &a).unwrap().statistic, 0.0);
    assert_eq!(ks_two_sample(&[0.0], &[1.0]).unwrap().statistic, 1.0);
}

#[test]
fn bootstrap_interval_brackets_the_mean() {
    let xs: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (lo, hi) = bootstrap_mean_ci(&xs, 0.95, 2000, &mut rng).unwrap();
    let se = SampleSet::new(xs).unwrap().std_error();
    assert!(lo < mean && mean < hi);
    // percentile interval is close to ±1.96 SE for a near-symmetric sample
    assert!(((hi - lo) / (2.0 * 1.96 * se) - 1.0).abs() < 0.15);
}

#[test]
fn trend_rules() {
    let dec = [(1.0, 0.3), (2.0, 0.2), (3.0, 0.1)];
    assert_eq!(trend_check(&dec, &TrendRule::nonincreasing(0.15)).unwrap().verdict, Verdict::Pass);
    assert_eq!(trend_check(&dec, &TrendRule::nonincreasing(0.05)).unwrap().verdict, Verdict::Fail);
    let bump = [(1.0, 0.3), (2.0, 0.2), (3.0, 0.21)];
    assert!(trend_check(&bump, &TrendRule::nonincreasing(1.0)).unwrap().monotone);
    let jump = [(1.0, 0.3), (2.0, 0.2), (3.0, 0.25)];
    assert!(!trend_check(&jump, &TrendRule::nonincreasing(1.0)).unwrap().monotone);
    let up = [(1.0, 0.1), (2.0, 0.5), (3.0, 0.7)];
    assert_eq!(trend_check(&up, &TrendRule::nondecreasing(0.6)).unwrap().verdict, Verdict::Pass);
    assert!(trend_check(&up[..2], &TrendRule::nondecreasing(0.6)).is_err());
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..80)
}

proptest! {
    #[test]
    fn two_sample_is_symmetric(a in sample(), b in sample()) {
        let ab = ks_two_sample(&a, &b).unwrap();
        let ba = ks_two_sample(&b, &a).unwrap();
        prop_assert_eq!(ab.statistic, ba.statistic);
        prop_assert!((0.0..=1.0).contains(&ab.statistic));
        prop_assert!((0.0..=1.0).contains(&ab.p_value_bound));
    }

    #[test]
    fn two_sample_ignores_monotone_maps(a in sample(), b in sample()) {
        let d = ks_two_sample(&a, &b).unwrap().statistic;
        let f = |v: &Vec<f64>| v.iter().map(|x| 2.0 * x - 7.0).collect::<Vec<_>>();
        let g = |v: &Vec<f64>| v.iter().map(|x| x.exp()).collect::<Vec<_>>();
        prop_assert!((ks_two_sample(&f(&a), &f(&b)).unwrap().statistic - d).abs() < 1e-12);
        prop_assert!((ks_two_sample(&g(&a), &g(&b)).unwrap().statistic - d).abs() < 1e-12);
    }

    #[test]
    fn two_sample_matches_brute_ecdf_gap(a in sample(), b in sample()) {
        let d = ks_two_sample(&a, &b).unwrap().statistic;
        let brute = a.iter().chain(b.iter())
            .map(|&x| (ecdf(&a, x).unwrap() - ecdf(&b, x).unwrap()).abs())
            .fold(0.0, f64::max);
        prop_assert!((d - brute).abs() < 1e-12);
    }

    #[test]
    fn q_is_a_survival_function(x in 0.0f64..4.0, dx in 0.0f64..1.0) {
        prop_assert!(kolmogorov_q(x) >= kolmogorov_q(x + dx) - 1e-12);
        prop_assert!((0.0..=1.0).contains(&kolmogorov_q(x)));
    }
}
