mod common;

use chainrace::analysis::{check_block_persistence, check_persistence, nakamoto_candidates, partition};
use chainrace::mining::brw_simulate;
use chainrace::montecarlo::{attack_succeeded, estimate_attack_success, parse_pattern, pattern_schedule};
use chainrace::rng::trial_seed;
use chainrace::strategies::*;
use chainrace::*;
use common::*;
use proptest::prelude::*;

fn pow(la: f64) -> SimulationConfig {
    SimulationConfig::new(1.0, la, 0.0, Model::Pow).with_nodes(1)
}

fn adversary_blocks(tr: &Trace) -> Vec<&Block> {
    tr.tree.blocks().iter().filter(|b| !b.miner_class.is_honest()).collect()
}

#[test]
fn null_strategy_never_violates_at_zero_delay() {
    let cfg = SimulationConfig::new(1.0, 0.8, 0.0, Model::Pow).with_horizon(60.0);
    for seed in 0..20 {
        let tr = run_simulation(&cfg.clone().with_seed(seed)).unwrap();
        assert_eq!(tr.tree.len(), tr.honest_index.len());
        for k in 1..=4 {
            assert!(check_persistence(&tr, k).is_empty());
        }
    }
}

#[test]
fn private_attack_needs_adversary_power() {
    let r = estimate_attack_success(&pow(0.0).with_strategy(private_attack(1, 2)).with_horizon(30.0), 200).unwrap();
    assert_eq!(r.estimate("success").unwrap().mean, 0.0);
}

#[test]
fn target_never_mined() {
    let s = parse_replay("1 a\n2 h\n3 a\n", None).unwrap();
    for spec in [private_attack(2, 1), sz_premine(2, 1)] {
        assert_eq!(
            replay_simulation(&s, &pow(1.0).with_strategy(spec)).unwrap_err(),
            Error::TargetNeverMined { target_j: 2 }
        );
    }
}

#[test]
fn figure_scenario_kicks_out_first_block() {
    let schedule = pattern_schedule(&parse_pattern(figure_pattern()).unwrap());
    for spec in [private_attack(1, 3), sz_premine(1, 3)] {
        let tr = replay_simulation(&schedule, &pow(1.0).with_strategy(spec.clone())).unwrap();
        let b1 = tr.honest_index[1];
        let v = check_block_persistence(&tr, b1, 3);
        assert!(!v.is_empty(), "{spec:?}");
        assert_eq!(v[0].violation_time, 7.0);
        assert_eq!(adversary_blocks(&tr).len(), 4);
        assert!(tr.publications.iter().all(|p| p.time == 7.0));
        assert!(attack_succeeded(&tr));
    }
    // With one honest block fewer the target is only two deep and nothing is released.
    let short = pattern_schedule(&parse_pattern("haahaa").unwrap());
    let tr = replay_simulation(&short, &pow(1.0).with_strategy(sz_premine(1, 3))).unwrap();
    assert!(tr.publications.is_empty());
}

#[test]
fn sz_structural_properties() {
    for (la, j, k) in [(0.7, 1, 2), (0.8, 3, 2), (0.6, 4, 3), (0.9, 2, 1)] {
        let cfg = pow(la).with_strategy(sz_premine(j, k)).with_horizon(30.0);
        for seed in 0..200 {
            let tr = match run_simulation(&cfg.clone().with_seed(seed)) {
                Ok(t) => t,
                Err(Error::TargetNeverMined { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let b = tr.honest_index[j];
            let adv = adversary_blocks(&tr);
            for w in adv.windows(2) {
                assert!(w[1].depth > w[0].depth, "seed {seed}: depths not increasing");
            }
            for a in &adv {
                assert!(!tr.tree.is_ancestor(b, a.id), "seed {seed}: block through target");
                let deepest_honest = tr.honest_index[..j]
                    .iter()
                    .map(|&h| tr.tree.get(h))
                    .filter(|h| h.mined_at < a.mined_at)
                    .map(|h| h.depth)
                    .max()
                    .unwrap_or(0);
                assert!(a.depth > deepest_honest, "seed {seed}: block {} too shallow", a.id);
            }
            if let Some(first) = tr.publications.first() {
                assert!(tr.publications.iter().all(|p| p.time == first.time));
                let v = check_block_persistence(&tr, b, k);
                assert!(!v.is_empty(), "seed {seed}: published without success");
                assert_eq!(v[0].violation_time, first.time);
            }
        }
    }
}

// Without pre-mined blocks the two strategies build the same chain; the pre-mining
// attack may release earlier, on a tie.
#[test]
fn sz_without_premine_matches_private_attack() {
    let mut compared = 0;
    for seed in 0..400 {
        let cfg = pow(0.8).with_horizon(30.0).with_seed(seed);
        let (j, k) = (2, 2);
        let s = run_simulation(&cfg.clone().with_strategy(sz_premine(j, k))).unwrap();
        if s.honest_index.len() <= j {
            continue;
        }
        let tj = tr_time(&s, j);
        if s.schedule.adversary_times().iter().any(|&t| t < tj) {
            continue;
        }
        compared += 1;
        let p = run_simulation(&cfg.with_strategy(private_attack(j, k))).unwrap();
        let cut = s.publications.first().map_or(f64::INFINITY, |x| x.time);
        let before = |tr: &Trace| -> Vec<(BlockId, f64)> {
            adversary_blocks(tr)
                .iter()
                .filter(|b| b.mined_at < cut)
                .map(|b| (b.parent, b.mined_at))
                .collect()
        };
        assert_eq!(before(&s), before(&p), "seed {seed}");
        if let Some(q) = p.publications.first() {
            assert!(cut <= q.time, "seed {seed}");
        }
        assert!(!attack_succeeded(&p) || attack_succeeded(&s), "seed {seed}");
    }
    assert!(compared > 50);
}

fn tr_time(tr: &Trace, j: usize) -> f64 {
    tr.tree.get(tr.honest_index[j]).mined_at
}

#[test]
fn private_success_monotone_in_k() {
    for seed in 0..300 {
        let cfg = pow(0.7).with_horizon(40.0).with_seed(seed);
        let wins: Vec<bool> = (1..=6)
            .map(|k| attack_succeeded(&run_simulation(&cfg.clone().with_strategy(private_attack(1, k))).unwrap()))
            .collect();
        for w in wins.windows(2) {
            assert!(w[0] || !w[1], "seed {seed}: {wins:?}");
        }
    }
}

#[test]
fn private_attack_under_delay_and_ps() {
    for (model, delta) in [(Model::Pow, 0.5), (Model::Ps, 0.2), (Model::Ps, 0.0)] {
        let cfg = SimulationConfig::new(1.0, 0.6, delta, model)
            .with_strategy(private_attack(2, 2))
            .with_horizon(40.0);
        let mut wins = 0;
        for seed in 0..100 {
            let tr = run_simulation(&cfg.clone().with_seed(seed)).unwrap();
            let adv = adversary_blocks(&tr);
            let b = tr.honest_index[2];
            let root = tr.tree.parent(b);
            // A single chain hanging off the target's parent.
            for (i, a) in adv.iter().enumerate() {
                let expected_parent = if i == 0 { root } else { adv[i - 1].id };
                assert_eq!(a.parent, expected_parent, "{model:?} seed {seed}");
            }
            wins += attack_succeeded(&tr) as usize;
        }
        assert!(wins > 0, "{model:?} never succeeded");
    }
}

#[test]
fn balance_replay_has_no_nakamoto_candidates() {
    let cfg = SimulationConfig::new(1.0, 0.5, 0.0, Model::Ps).with_strategy(balance_strategy());
    for periods in [1, 5, 10, 20] {
        let tr = replay_simulation(&balance_replay(periods), &cfg).unwrap();
        assert!(nakamoto_candidates(&tr).is_empty(), "{periods} periods");
    }
}

#[test]
fn balance_breaks_under_random_arrivals() {
    let cfg = SimulationConfig::new(1.0, 0.3, 0.0, Model::Ps)
        .with_strategy(balance_strategy())
        .with_horizon(100.0);
    let n = 200;
    let broken = (0..n)
        .filter(|&s| !nakamoto_candidates(&run_simulation(&cfg.clone().with_seed(s)).unwrap()).is_empty())
        .count();
    assert!(broken as f64 >= 0.9 * n as f64, "{broken} of {n}");
}

#[test]
fn chia_super_threshold_succeeds_more_with_horizon() {
    let mut last = 0.0;
    for h in [8.0, 16.0, 24.0] {
        let cfg = SimulationConfig::new(1.0, 0.6, 0.0, Model::Chia)
            .with_strategy(nas_chia_strategy(1, 2))
            .with_horizon(h);
        let r = estimate_attack_success(&cfg, 400).unwrap();
        // Trials that overflow the population cap count as failures of the attack.
        let wins = r.outcomes["success"].iter().flatten().sum::<f64>();
        let p = wins / 400.0;
        assert!(p >= last - 0.02, "horizon {h}: {p} < {last}");
        last = p;
    }
    assert!(last > 0.85, "{last}");
}

#[test]
fn chia_far_below_threshold_rarely_succeeds() {
    let cfg = SimulationConfig::new(1.0, 0.1, 0.0, Model::Chia)
        .with_strategy(nas_chia_strategy(1, 6))
        .with_horizon(40.0);
    let r = estimate_attack_success(&cfg, 1000).unwrap();
    assert!(r.failures.is_empty());
    assert!(r.estimate("success").unwrap().mean < 0.1);
}

// The attack tree never publishes when k is out of reach, so it grows exactly like a
// branching random walk started at the target's mining time.
#[test]
fn chia_tree_depth_matches_brw() {
    let (t, n) = (3.0, 4000u64);
    let cfg = SimulationConfig::new(1.0, 1.0, 0.0, Model::Chia)
        .with_strategy(nas_chia_strategy(1, 1_000))
        .with_horizon(8.0);
    let mut engine = Vec::new();
    for i in 0..n {
        let tr = match run_simulation(&cfg.clone().with_seed(trial_seed(1, i))) {
            Ok(tr) => tr,
            Err(Error::TargetNeverMined { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let b1 = tr.honest_index[1];
        let start = tr.tree.get(b1).mined_at;
        if start + t > tr.horizon() {
            continue;
        }
        let tree = &partition(&tr.tree).trees[0];
        engine.push(tree.depth_at(start + t) as f64);
        assert!(tr.publications.is_empty());
    }
    let brw: Vec<f64> = (0..n)
        .map(|i| brw_simulate(1.0, t, trial_seed(2, i)).unwrap().depth_at(t) as f64)
        .collect();
    let stats = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        (m, v / xs.len() as f64)
    };
    let ((m1, v1), (m2, v2)) = (stats(&engine), stats(&brw));
    assert!(engine.len() > 3000);
    assert!((m1 - m2).abs() < 3.0 * (v1 + v2).sqrt(), "engine {m1} brw {m2}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nas_ps_publications_respect_depth(seed: u64, delta in 0.0f64..0.5) {
        let cfg = SimulationConfig::new(1.0, 0.4, delta, Model::Ps)
            .with_strategy(nas_ps_strategy())
            .with_horizon(30.0)
            .with_seed(seed);
        let tr = run_simulation(&cfg).unwrap();
        for p in &tr.publications {
            prop_assert!(!tr.tree.get(p.block).miner_class.is_honest());
            prop_assert!(tr.tree.get(p.block).mined_at <= p.time);
        }
    }
}
