use chainrace::mining::*;
use chainrace::rng::trial_seed;
use chainrace::*;
use proptest::prelude::*;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn honest_count_matches_poisson_mean() {
    let s = sample_poisson_schedule(2.0, 0.0, 10_000.0, 17).unwrap();
    let n = s.honest_times().len() as f64;
    let sigma = (2.0f64 * 10_000.0).sqrt();
    assert!((n - 20_000.0).abs() < 3.0 * sigma, "count {n}");
}

#[test]
fn inter_arrival_means() {
    let s = sample_poisson_schedule(2.0, 0.5, 10_000.0, 18).unwrap();
    for (times, rate) in [(s.honest_times(), 2.0), (s.adversary_times(), 0.5)] {
        let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        let (m, se) = mean_se(&gaps);
        assert!((m - 1.0 / rate).abs() < 3.0 * se, "rate {rate}: mean {m} se {se}");
    }
}

#[test]
fn empty_horizon_schedule() {
    let s = sample_poisson_schedule(1e-9, 0.0, 1e-6, 0).unwrap();
    assert!(s.events.is_empty());
}

#[test]
fn first_passage_one_is_exponential() {
    let xs: Vec<f64> = (0..20_000)
        .map(|i| brw_first_passage(2.0, 1, trial_seed(5, i)).unwrap())
        .collect();
    let (m, se) = mean_se(&xs);
    assert!((m - 0.5).abs() < 3.0 * se, "mean {m} se {se}");
}

#[test]
fn brw_population_is_yule() {
    // Every block spawns children at rate λ_a, so the population grows like e^{λ_a t}.
    let xs: Vec<f64> = (0..20_000)
        .map(|i| brw_simulate(1.0, 3.0, trial_seed(6, i)).unwrap().population as f64)
        .collect();
    let (m, se) = mean_se(&xs);
    assert!((m - 3f64.exp()).abs() < 3.0 * se, "mean {m} se {se}");
}

#[test]
fn brw_reaches_depth_one_like_first_child() {
    let n = 20_000;
    let hits = (0..n)
        .filter(|&i| brw_simulate(1.0, 1.0, trial_seed(7, i)).unwrap().depth_at(1.0) >= 1)
        .count() as f64;
    let p = 1.0 - (-1f64).exp();
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    assert!((hits / n as f64 - p).abs() < 3.0 * sigma);
}

#[test]
fn brw_zero_time_is_flat() {
    let s = brw_simulate(1.0, 0.0, 1).unwrap();
    assert_eq!(s.depth_at(0.0), 0);
    assert!(s.first_passage.is_empty());
}

#[test]
fn brw_rejects_bad_input() {
    assert!(matches!(brw_simulate(0.0, 1.0, 0), Err(Error::InvalidRate(_))));
    assert!(brw_first_passage(1.0, 0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schedules_are_well_formed(lh in 0.0f64..3.0, la in 0.0f64..3.0, h in 0.1f64..50.0, seed: u64) {
        let s = sample_poisson_schedule(lh, la, h, seed).unwrap();
        prop_assert!(s.validate().is_ok());
        prop_assert!(s.events.iter().all(|e| e.time > 0.0 && e.time <= h));
        if la == 0.0 {
            prop_assert!(s.adversary_times().is_empty());
        }
        prop_assert_eq!(s.honest_times().len() + s.adversary_times().len(), s.events.len());
    }

    #[test]
    fn brw_paths_are_consistent(t in 0.0f64..6.0, seed: u64) {
        let s = brw_simulate(1.0, t, seed).unwrap();
        for w in s.depth_trajectory.windows(2) {
            prop_assert!(w[1].0 > w[0].0);
            prop_assert_eq!(w[1].1, w[0].1 + 1);
        }
        for w in s.first_passage.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        let d = s.depth_at(t);
        for k in 1..=d + 2 {
            let reached = s.first_passage_time(k).is_some_and(|x| x <= t);
            prop_assert_eq!(d >= k, reached);
        }
    }

    #[test]
    fn tail_bound_is_a_probability(la in 0.0f64..3.0, t in 0.0f64..10.0, m in 1usize..40) {
        let b = chia_tail_bound(la, t, m).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
    }
}
