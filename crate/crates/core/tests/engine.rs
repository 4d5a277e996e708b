mod common;

use chainrace::analysis::fictitious_tree;
use chainrace::strategies::*;
use chainrace::*;
use common::*;
use proptest::prelude::*;

#[test]
fn honest_only_zero_delay_is_one_chain() {
    for seed in 0..20 {
        let cfg = SimulationConfig::new(1.0, 0.0, 0.0, Model::Pow).with_horizon(50.0).with_seed(seed);
        let tr = run_simulation(&cfg).unwrap();
        let n = tr.honest_index.len() - 1;
        assert_eq!(tr.tree.len(), n + 1);
        assert_eq!(tr.tree.max_depth(), n);
        for (p, log) in tr.view_log.iter().enumerate() {
            assert_eq!(log.last().map_or(0, |e| e.length), n, "node {p}");
        }
    }
}

#[test]
fn empty_schedule_gives_genesis_only() {
    let s = parse_replay("", Some(5.0)).unwrap();
    let tr = replay_simulation(&s, &SimulationConfig::new(1.0, 1.0, 0.0, Model::Pow)).unwrap();
    assert_eq!(tr.tree.len(), 1);
    assert_eq!(tr.honest_index, vec![GENESIS]);
    assert!(tr.view_log.iter().all(|l| l.iter().all(|e| e.tip == GENESIS)));
}

#[test]
fn runs_are_deterministic() {
    for cfg in corpus_configs() {
        let cfg = cfg.with_seed(7);
        let a = run_simulation(&cfg).unwrap().to_json();
        let b = run_simulation(&cfg).unwrap().to_json();
        assert_eq!(a, b);
    }
}

#[test]
fn replay_reproduces_sampled_runs() {
    for cfg in corpus_configs().into_iter().filter(|c| c.model != Model::Chia) {
        for seed in 0..5 {
            let cfg = cfg.clone().with_seed(seed);
            let tr = run_simulation(&cfg).unwrap();
            let again = replay_simulation(&tr.schedule, &cfg).unwrap();
            assert_eq!(tr.to_json(), again.to_json(), "{:?}", cfg.strategy);
        }
    }
}

#[test]
fn replay_text_round_trip_reproduces_trace() {
    let cfg = SimulationConfig::new(1.0, 0.4, 0.3, Model::Pow)
        .with_strategy(private_attack(2, 2))
        .with_horizon(30.0)
        .with_seed(3);
    let tr = run_simulation(&cfg).unwrap();
    let parsed = parse_replay(&format_replay(&tr.schedule), Some(30.0)).unwrap();
    let again = replay_simulation(&parsed, &cfg).unwrap();
    assert_eq!(tr.tree, again.tree);
}

#[test]
fn replay_parse_errors() {
    let bad = ["1 x", "2 h\n1 h", "1 a 3", "abc h", "1 h 0 9", "1 h -2", "inf h"];
    for text in bad {
        assert!(
            matches!(parse_replay(text, None), Err(Error::MalformedSchedule(_))),
            "accepted {text:?}"
        );
    }
    assert!(matches!(parse_replay("5 h", Some(4.0)), Err(Error::MalformedSchedule(_))));
    let ok = parse_replay("# comment\n0.5 h 2   # trailing\n\n1 A\n", None).unwrap();
    assert_eq!(ok.events.len(), 2);
    assert_eq!(ok.events[0].node, Some(2));
    assert_eq!(ok.horizon, 1.0);
}

#[test]
fn invalid_configs_rejected() {
    let base = SimulationConfig::new(1.0, 0.2, 0.0, Model::Pow);
    assert!(matches!(run_simulation(&base.clone().with_k(0)), Err(Error::InvalidArgument(_))));
    assert!(matches!(run_simulation(&base.clone().with_nodes(0)), Err(Error::InvalidArgument(_))));
    assert!(matches!(run_simulation(&base.clone().with_horizon(-1.0)), Err(Error::InvalidArgument(_))));
    let mut neg = base.clone();
    neg.lambda_h = -1.0;
    assert!(matches!(run_simulation(&neg), Err(Error::InvalidRate(_))));
    let mismatches = [
        (Model::Ps, sz_premine(1, 2)),
        (Model::Pow, sz_premine(1, 2)),
        (Model::Pow, balance_strategy()),
        (Model::Pow, nas_chia_strategy(1, 2)),
        (Model::Chia, nas_ps_strategy()),
    ];
    for (i, (model, s)) in mismatches.into_iter().enumerate() {
        let delta = if i == 1 { 0.5 } else { 0.0 };
        let cfg = SimulationConfig::new(1.0, 0.2, delta, model).with_strategy(s);
        assert!(matches!(run_simulation(&cfg), Err(Error::ModelMismatch(_))), "case {i}");
    }
    let zero_target = base.with_strategy(private_attack(0, 2));
    assert!(run_simulation(&zero_target).is_err());
}

#[test]
fn population_cap_enforced() {
    let mut cfg = SimulationConfig::new(1.0, 0.5, 0.0, Model::Chia)
        .with_strategy(nas_chia_strategy(1, 1000))
        .with_horizon(40.0);
    cfg.population_cap = 500;
    assert_eq!(run_simulation(&cfg).unwrap_err(), Error::PopulationOverflow { cap: 500 });
}

#[test]
fn balance_replay_keeps_two_equal_chains() {
    let cfg = SimulationConfig::new(1.0, 0.5, 0.0, Model::Ps).with_strategy(balance_strategy());
    let periods = 10;
    let tr = replay_simulation(&balance_replay(periods), &cfg).unwrap();
    let published_at = |b: BlockId| {
        let blk = tr.tree.get(b);
        if blk.miner_class.is_honest() {
            Some(blk.mined_at)
        } else {
            tr.publications.iter().find(|p| p.block == b).map(|p| p.time)
        }
    };
    // Midway through each period, after its first honest block.
    for p in 0..periods {
        let t = 3.0 * p as f64 + 2.5;
        let public: Vec<&Block> = tr
            .tree
            .blocks()
            .iter()
            .filter(|b| published_at(b.id).is_some_and(|s| s <= t))
            .collect();
        let top = public.iter().map(|b| b.depth).max().unwrap();
        let at_top = public.iter().filter(|b| b.depth == top).count();
        assert_eq!(top, 2 * p + 1, "period {p}");
        assert_eq!(at_top, 2, "period {p}");
    }
}

// L(t) - L(τ_i) ≥ A_h(t) - A_h(τ_i) at zero delay, for every node.
#[test]
fn zero_delay_chain_growth() {
    for cfg in corpus_configs().into_iter().filter(|c| c.delta == 0.0) {
        for seed in 0..20 {
            let tr = run_simulation(&cfg.clone().with_seed(seed)).unwrap();
            let honest = tr.honest_times();
            let mut checkpoints: Vec<f64> = honest.clone();
            for log in &tr.view_log {
                checkpoints.extend(log.iter().map(|e| e.time));
            }
            checkpoints.push(tr.horizon());
            for log in &tr.view_log {
                for (i, &ti) in honest.iter().enumerate() {
                    let base = length_at(log, ti);
                    for &t in checkpoints.iter().filter(|&&t| t > ti) {
                        let arrivals = honest.partition_point(|&s| s <= t) - (i + 1);
                        assert!(
                            length_at(log, t) - base >= arrivals,
                            "{:?} seed {seed}: i={} t={t}",
                            cfg.strategy,
                            i + 1
                        );
                    }
                }
            }
        }
    }
}

// L(t) - L(s) ≥ D_h(t - Δ) - D_h(s + Δ) whenever s + Δ < t - Δ.
#[test]
fn delayed_chain_growth() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for cfg in corpus_configs().into_iter().filter(|c| c.delta > 0.0) {
        for seed in 0..20 {
            let tr = run_simulation(&cfg.clone().with_seed(seed)).unwrap();
            let d = tr.delta();
            let levels = fictitious_tree(&tr.honest_times(), d);
            let h = tr.horizon();
            for log in &tr.view_log {
                for _ in 0..2000 {
                    let s = rng.random_range(0.0..h);
                    let t = rng.random_range(s..=h);
                    if s + d >= t - d {
                        continue;
                    }
                    let need = levels.depth_at(t - d) as i64 - levels.depth_at(s + d) as i64;
                    let got = length_at(log, t) as i64 - length_at(log, s) as i64;
                    assert!(got >= need, "{:?} seed {seed}: s={s} t={t}", cfg.strategy);
                }
            }
        }
    }
}

#[test]
fn trace_structure() {
    for cfg in corpus_configs() {
        for seed in 0..10 {
            let tr = run_simulation(&cfg.clone().with_seed(seed)).unwrap();
            let blocks = tr.tree.blocks();
            for (i, b) in blocks.iter().enumerate().skip(1) {
                assert_eq!(b.id, i);
                assert!(b.parent < i);
                assert_eq!(b.depth, blocks[b.parent].depth + 1);
                assert!(b.mined_at >= blocks[i - 1].mined_at);
                assert!(b.mined_at >= blocks[b.parent].mined_at);
            }
            let honest = tr.honest_times();
            assert!(honest.windows(2).all(|w| w[1] > w[0]));
            let n_honest = blocks.iter().skip(1).filter(|b| b.miner_class.is_honest()).count();
            assert_eq!(n_honest + 1, tr.honest_index.len());
            for log in &tr.view_log {
                assert!(log.windows(2).all(|w| w[1].length > w[0].length || w[1].length == w[0].length && w[1].tip != w[0].tip));
                assert!(log.windows(2).all(|w| w[1].time >= w[0].time && w[1].seq > w[0].seq));
                for e in log {
                    assert_eq!(tr.tree.depth(e.tip), e.length);
                }
            }
            for p in &tr.publications {
                assert!(!tr.tree.get(p.block).miner_class.is_honest());
            }
        }
    }
}

#[test]
fn pow_blocks_have_distinct_times() {
    let cfg = SimulationConfig::new(1.0, 0.6, 0.2, Model::Pow)
        .with_strategy(private_attack(1, 2))
        .with_horizon(50.0);
    for seed in 0..10 {
        let tr = run_simulation(&cfg.clone().with_seed(seed)).unwrap();
        let b = tr.tree.blocks();
        assert!(b.windows(2).all(|w| w[1].mined_at > w[0].mined_at));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn replay_format_round_trips(
        gaps in prop::collection::vec((0.001f64..5.0, any::<bool>(), prop::option::of(0usize..4)), 0..40)
    ) {
        let mut t = 0.0;
        let mut text = String::new();
        for (g, honest, node) in &gaps {
            t += g;
            match (honest, node) {
                (true, Some(n)) => text += &format!("{t} h {n}\n"),
                (true, None) => text += &format!("{t} h\n"),
                (false, _) => text += &format!("{t} a\n"),
            }
        }
        let s = parse_replay(&text, Some(t + 1.0)).unwrap();
        let again = parse_replay(&format_replay(&s), Some(t + 1.0)).unwrap();
        prop_assert_eq!(s, again);
    }

    #[test]
    fn null_strategy_tree_is_honest(seed: u64, delta in 0.0f64..1.0) {
        let cfg = SimulationConfig::new(1.0, 0.7, delta, Model::Pow).with_horizon(30.0).with_seed(seed);
        let tr = run_simulation(&cfg).unwrap();
        prop_assert!(tr.tree.blocks().iter().all(|b| b.miner_class.is_honest()));
        if delta == 0.0 {
            prop_assert_eq!(tr.tree.max_depth(), tr.honest_index.len() - 1);
        }
    }
}
