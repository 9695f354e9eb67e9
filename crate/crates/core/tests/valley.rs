mod common;

use brox_core::environment::{
    barrier, find_h_extrema, sample_environment, standard_valley, standard_valley_widening, EnvError,
    EnvironmentPath, WideningPolicy,
};
use common::{brute_barrier, brute_extrema, brute_valley, random_grid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn indices(env: &EnvironmentPath, h: f64) -> Vec<(usize, brox_core::environment::ExtremumKind)> {
    find_h_extrema(env, h).unwrap().iter().map(|e| (e.index, e.kind)).collect()
}

#[test]
fn extrema_match_witness_search() {
    for seed in 0..300u64 {
        let env = random_grid(seed, seed % 2 == 0);
        for h in [0.5, 1.0, 2.5] {
            assert_eq!(indices(&env, h), brute_extrema(&env, h), "seed {seed}, h {h}");
        }
    }
}

#[test]
fn valley_matches_brute_force() {
    for seed in 0..300u64 {
        let env = random_grid(seed, seed % 3 == 0);
        for h in [0.5, 1.0, 2.0] {
            let got = standard_valley(&env, h);
            match brute_valley(&env, h) {
                Some((p, m, q)) => {
                    let v = got.unwrap();
                    assert_eq!((v.p_index, v.m_index, v.q_index), (p, m, q), "seed {seed}");
                    let w = env.values();
                    assert!(v.depth >= h && v.depth == (w[p] - w[m]).min(w[q] - w[m]));
                    let a = brute_barrier(w, p, m).max(brute_barrier(w, q, m));
                    assert!((v.ascent - a).abs() < 1e-12);
                }
                None => assert!(matches!(got, Err(EnvError::ValleyNotContained { .. })), "seed {seed}"),
            }
        }
    }
}

#[test]
fn brownian_valleys_have_small_ascent_and_deep_walls() {
    let mut good = 0;
    let n = 100;
    for k in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(7_000 + k);
        let env = sample_environment(1e-3, -4.0, 4.0, &mut rng).unwrap();
        let (_, v) = standard_valley_widening(env, 1.0, WideningPolicy { max_half_width: 1e3 }, &mut rng).unwrap();
        if v.ascent < 1.0 && 1.0 < v.depth {
            good += 1;
        }
    }
    assert!(good >= 97, "{good}/{n}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extrema_alternate(seed in any::<u64>(), h in 0.2f64..3.0) {
        let env = random_grid(seed, false);
        let ext = find_h_extrema(&env, h).unwrap();
        for pair in ext.windows(2) {
            prop_assert!(pair[0].kind != pair[1].kind);
            prop_assert!(pair[0].index < pair[1].index);
        }
        prop_assert!(ext.iter().all(|e| e.index > 0 && e.index + 1 < env.len()));
    }

    #[test]
    fn coarser_threshold_keeps_a_subset(seed in any::<u64>(), h1 in 0.2f64..2.0, extra in 0.0f64..2.0) {
        let env = random_grid(seed, false);
        let fine = indices(&env, h1);
        for e in indices(&env, h1 + extra) {
            prop_assert!(fine.contains(&e), "{:?} missing at h = {}", e, h1);
        }
    }

    #[test]
    fn barrier_bounds(seed in any::<u64>(), a in 0usize..200, b in 0usize..200) {
        let env = random_grid(seed, false);
        let n = env.len();
        let (i, j) = (a % n, b % n);
        let w = env.values();
        let got = barrier(&env, env.knot_x(i), env.knot_x(j)).unwrap();
        prop_assert!(got >= 0.0 && got >= w[j] - w[i] - 1e-12);
        prop_assert!((got - brute_barrier(w, i, j)).abs() < 1e-12);
        prop_assert_eq!(barrier(&env, env.knot_x(i), env.knot_x(i)).unwrap(), 0.0);
    }

    #[test]
    fn valley_invariants(seed in any::<u64>(), h in 0.3f64..2.0) {
        let env = random_grid(seed, false);
        if let Ok(v) = standard_valley(&env, h) {
            prop_assert!(v.p <= 0.0 && 0.0 <= v.q && v.p < v.m && v.m < v.q);
            prop_assert!(v.depth >= h);
            let w = env.values();
            let lo = w[v.p_index..=v.q_index].iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(lo, w[v.m_index]);
        }
    }
}
