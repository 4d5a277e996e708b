#![allow(dead_code)]

use chainrace::engine::TipEntry;
use chainrace::strategies::*;
use chainrace::*;

/// Periodic balance schedule: per period an adversary event then two honest events, with
/// one closing adversary event so the last honest pair is also answered.
pub fn balance_replay(periods: usize) -> MiningSchedule {
    let mut text = String::new();
    for p in 0..periods {
        let b = 3 * p;
        text += &format!("{} a\n{} h\n{} h\n", b + 1, b + 2, b + 3);
    }
    text += &format!("{} a\n", 3 * periods + 1);
    parse_replay(&text, None).unwrap()
}

/// Four adversary blocks against two honest ones; a third honest block makes `b_1`
/// three deep and the private chain is still longer.
pub fn figure_pattern() -> &'static str {
    "haahaah"
}

pub fn length_at(log: &[TipEntry], t: f64) -> usize {
    let i = log.partition_point(|e| e.time <= t);
    if i == 0 {
        0
    } else {
        log[i - 1].length
    }
}

/// A spread of models and strategies used for invariant checks.
pub fn corpus_configs() -> Vec<SimulationConfig> {
    let base = |delta: f64, model: Model, s: StrategySpec| {
        let h = if model == Model::Chia { 25.0 } else { 40.0 };
        SimulationConfig::new(1.0, 0.3, delta, model).with_strategy(s).with_horizon(h)
    };
    vec![
        base(0.0, Model::Pow, null_strategy()),
        base(0.5, Model::Pow, null_strategy()),
        base(0.0, Model::Pow, private_attack(2, 3)),
        base(0.3, Model::Pow, private_attack(3, 3)),
        base(0.0, Model::Pow, sz_premine(2, 3)),
        base(0.0, Model::Pow, StrategySpec::SzPremine { target_j: 1, k: 2, liveness: true }),
        base(0.0, Model::Ps, null_strategy()),
        base(0.1, Model::Ps, nas_ps_strategy()),
        base(0.0, Model::Ps, balance_strategy()),
        base(0.2, Model::Ps, balance_strategy()),
        base(0.2, Model::Chia, nas_chia_strategy(2, 2)),
        base(0.0, Model::Chia, nas_chia_strategy(1, 3)),
    ]
}
