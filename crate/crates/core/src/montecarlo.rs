//! Repeated-trial experiments and the exhaustive small-instance attack search.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{check_block_persistence, check_persistence, TraceAnalysis};
use crate::engine::{replay_simulation, run_simulation, Model, SimulationConfig, Trace};
use crate::error::{Error, Result};
use crate::mining::{brw_first_passage, brw_simulate, EventClass, MiningEvent, MiningSchedule, Rates};
use crate::rng::{self, trial_seed};
use crate::strategies::StrategySpec;
use crate::thresholds::{chernoff_rate_a0, ChernoffRate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub ci95: (f64, f64),
}

impl Estimate {
    /// Sample mean with its standard error; `None` for an empty sample.
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let std_error = (var / n as f64).sqrt();
        Some(Self {
            mean,
            std_error,
            trials: n,
            ci95: (mean - 1.96 * std_error, mean + 1.96 * std_error),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub seed: u64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub params: serde_json::Value,
    pub estimates: BTreeMap<String, Estimate>,
    pub seeds: Vec<u64>,
    /// Per-trial outcome for each estimate; `None` when the trial failed or had nothing
    /// to measure.
    pub outcomes: BTreeMap<String, Vec<Option<f64>>>,
    pub failures: Vec<TrialFailure>,
    /// Not serialized, so that reruns produce identical output.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl ExperimentResult {
    pub fn estimate(&self, name: &str) -> Option<&Estimate> {
        self.estimates.get(name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

type Outcome = Vec<(String, Option<f64>)>;

/// Runs `trials` independent trials in parallel; trial `i` gets `trial_seed(master, i)`.
fn run_trials(
    experiment: &str,
    params: serde_json::Value,
    master: u64,
    trials: usize,
    trial: impl Fn(u64) -> Result<Outcome> + Sync,
) -> Result<ExperimentResult> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let start = Instant::now();
    let seeds: Vec<u64> = (0..trials as u64).map(|i| trial_seed(master, i)).collect();
    let results: Vec<Result<Outcome>> = seeds.par_iter().map(|&s| trial(s)).collect();
    let mut outcomes: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for r in &results {
        if let Ok(o) = r {
            names = o.iter().map(|(n, _)| n.clone()).collect();
            break;
        }
    }
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => {
                for (name, v) in o {
                    outcomes.entry(name).or_default().push(v);
                }
            }
            Err(error) => {
                for n in &names {
                    outcomes.entry(n.clone()).or_default().push(None);
                }
                failures.push(TrialFailure { trial: i, seed: seeds[i], error });
            }
        }
    }
    if failures.len() == trials {
        return Err(failures.swap_remove(0).error);
    }
    let estimates = outcomes
        .iter()
        .filter_map(|(name, vs)| {
            let xs: Vec<f64> = vs.iter().flatten().copied().collect();
            Estimate::from_samples(&xs).map(|e| (name.clone(), e))
        })
        .collect();
    Ok(ExperimentResult {
        experiment: experiment.into(),
        params,
        estimates,
        seeds,
        outcomes,
        failures,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn config_json(config: &SimulationConfig, trials: usize) -> serde_json::Value {
    serde_json::json!({ "config": config, "trials": trials })
}

/// Whether the trace shows the strategy's attack succeeding: a persistence violation of
/// the targeted honest block, or of any block for untargeted strategies.
pub fn attack_succeeded(trace: &Trace) -> bool {
    let spec = &trace.config.strategy;
    let k = spec.confirm_depth().unwrap_or(trace.config.k);
    match spec.target() {
        Some(j) => match trace.honest_index.get(j) {
            Some(&b) => !check_block_persistence(trace, b, k).is_empty(),
            None => false,
        },
        None => !check_persistence(trace, k).is_empty(),
    }
}

/// Fraction of trials in which the configured attack succeeds. Estimate name: `success`.
pub fn estimate_attack_success(config: &SimulationConfig, trials: usize) -> Result<ExperimentResult> {
    config.validate()?;
    run_trials("attack_success", config_json(config, trials), config.seed, trials, |seed| {
        let trace = run_simulation(&config.clone().with_seed(seed))?;
        let hit = if attack_succeeded(&trace) { 1.0 } else { 0.0 };
        Ok(vec![("success".into(), Some(hit))])
    })
}

/// Honest blocks mined after this fraction of the horizon are excluded from candidacy
/// statistics.
pub const EDGE_BUFFER: f64 = 0.2;

/// Mean per-trial fraction of honest blocks, outside the horizon-edge buffer, that are
/// Nakamoto candidates. Estimate name: `frequency`.
pub fn estimate_nakamoto_frequency(config: &SimulationConfig, trials: usize) -> Result<ExperimentResult> {
    config.validate()?;
    let cutoff = (1.0 - EDGE_BUFFER) * config.horizon;
    run_trials("nakamoto_frequency", config_json(config, trials), config.seed, trials, |seed| {
        let trace = run_simulation(&config.clone().with_seed(seed))?;
        let a = TraceAnalysis::new(&trace);
        let eligible = a.times[1..].partition_point(|&t| t <= cutoff);
        let freq = if eligible == 0 {
            None
        } else {
            let c = a.nakamoto_candidates().iter().filter(|&&j| j <= eligible).count();
            Some(c as f64 / eligible as f64)
        };
        Ok(vec![("frequency".into(), freq)])
    })
}

pub fn window_key(w: f64) -> String {
    format!("gap_w{w}")
}

/// For each window length `w`, the probability that `[s, s + w]` contains no Nakamoto
/// candidate, with `s` uniform in `[0.1 H, 0.5 H]` and shared across window lengths
/// within a trial. Estimate names: [`window_key`].
pub fn estimate_window_gaps(
    config: &SimulationConfig,
    windows: &[f64],
    trials: usize,
) -> Result<ExperimentResult> {
    config.validate()?;
    let h = config.horizon;
    let max_w = (1.0 - EDGE_BUFFER - 0.5) * h;
    if let Some(&w) = windows.iter().find(|&&w| !(0.0..=max_w).contains(&w)) {
        return Err(Error::InvalidArgument(format!("window {w} outside [0, {max_w}]")));
    }
    let params = serde_json::json!({ "config": config, "trials": trials, "windows": windows });
    run_trials("window_gap", params, config.seed, trials, |seed| {
        let trace = run_simulation(&config.clone().with_seed(seed))?;
        let s = rng::stream(seed, 5).random_range(0.1 * h..=0.5 * h);
        let a = TraceAnalysis::new(&trace);
        let times: Vec<f64> = a.nakamoto_candidates().iter().map(|&j| a.times[j]).collect();
        Ok(windows
            .iter()
            .map(|&w| {
                let hit = times.iter().any(|&t| t >= s && t <= s + w);
                (window_key(w), Some(if hit { 0.0 } else { 1.0 }))
            })
            .collect())
    })
}

pub fn estimate_window_gap(config: &SimulationConfig, window: f64, trials: usize) -> Result<Estimate> {
    let r = estimate_window_gaps(config, &[window], trials)?;
    Ok(r.estimates[&window_key(window)])
}

pub fn depth_key(t: f64) -> String {
    format!("depth_t{t}")
}

pub fn tail_key(t: f64, m: usize) -> String {
    format!("tail_t{t}_m{m}")
}

pub fn passage_key(k: usize) -> String {
    format!("passage_k{k}")
}

/// Tail levels checked at time `t`: the six integers above `⌈e λ_a t⌉`.
pub fn brw_tail_levels(lambda_a: f64, t: f64) -> Vec<usize> {
    let c = (std::f64::consts::E * lambda_a * t).ceil() as usize;
    (c + 1..=c + 6).collect()
}

/// Branching-random-walk statistics from a single root: `D_0(t)` at each time, the
/// indicators `D_0(t) ≥ m` over [`brw_tail_levels`], and first-passage times `S*_k`.
/// Estimate names: [`depth_key`], [`tail_key`], [`passage_key`].
pub fn estimate_brw(
    lambda_a: f64,
    times: &[f64],
    passage_levels: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidArgument("times must be finite and non-negative".into()));
    }
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let params = serde_json::json!({
        "lambda_a": lambda_a,
        "times": times,
        "passage_levels": passage_levels,
        "trials": trials,
        "seed": seed,
    });
    run_trials("brw", params, seed, trials, |s| {
        let mut out = Vec::new();
        if !times.is_empty() {
            let sample = brw_simulate(lambda_a, t_max, s)?;
            for &t in times {
                let d = sample.depth_at(t);
                out.push((depth_key(t), Some(d as f64)));
                for m in brw_tail_levels(lambda_a, t) {
                    out.push((tail_key(t, m), Some(if d >= m { 1.0 } else { 0.0 })));
                }
            }
        }
        for &k in passage_levels {
            out.push((passage_key(k), Some(brw_first_passage(lambda_a, k, s)?)));
        }
        Ok(out)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnPoint {
    pub n: usize,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnDecay {
    pub points: Vec<BnPoint>,
    /// Negated least-squares slope of `ln P(B_n)` against `n`, over points with hits.
    pub fitted_rate: f64,
    pub chernoff: ChernoffRate,
}

/// Estimates `P(X_1 + … + X_n ≥ δ_0 + … + δ_n)` with `X_i = Δ + Exp(λ_h)` level times
/// and `δ_i ~ Exp(λ_a)`, and fits its exponential decay in `n`.
pub fn estimate_bn_decay(
    lambda_a: f64,
    lambda_h: f64,
    delta: f64,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<BnDecay> {
    let chernoff = chernoff_rate_a0(lambda_a, lambda_h, delta)?;
    if trials == 0 || n_grid.is_empty() {
        return Err(Error::InvalidArgument("need trials ≥ 1 and a nonempty n grid".into()));
    }
    let max_n = *n_grid.iter().max().unwrap();
    let hits: Vec<u64> = (0..trials as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; n_grid.len()],
            |mut acc, i| {
                let mut r = rng::stream(trial_seed(seed, i), 0);
                let mut honest = vec![0.0; max_n + 1];
                let mut adv = vec![0.0; max_n + 1];
                adv[0] = rng::exp(&mut r, lambda_a);
                for m in 1..=max_n {
                    honest[m] = honest[m - 1] + delta + rng::exp(&mut r, lambda_h);
                    adv[m] = adv[m - 1] + rng::exp(&mut r, lambda_a);
                }
                for (q, &n) in n_grid.iter().enumerate() {
                    if honest[n] >= adv[n] {
                        acc[q] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n_grid.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    let points: Vec<BnPoint> = n_grid
        .iter()
        .zip(&hits)
        .map(|(&n, &c)| {
            let p = c as f64 / trials as f64;
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            BnPoint {
                n,
                estimate: Estimate { mean: p, std_error: se, trials, ci95: (p - 1.96 * se, p + 1.96 * se) },
            }
        })
        .collect();
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.estimate.mean > 0.0)
        .map(|p| (p.n as f64, p.estimate.mean.ln()))
        .collect();
    if fit.len() < 2 {
        return Err(Error::InvalidArgument("fewer than two grid points with hits".into()));
    }
    Ok(BnDecay { points, fitted_rate: -slope(&fit), chernoff })
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominanceMode {
    /// The first honest block leaves the chain after becoming `k` deep.
    Persistence,
    /// The first `k` honest blocks are all displaced together.
    Liveness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceConfig {
    pub n_events: usize,
    pub k: usize,
    pub n_schedules: usize,
    /// `λ_a / λ_h`; each event is adversarial with probability `ratio / (1 + ratio)`.
    pub ratio: f64,
    pub seed: u64,
    pub mode: DominanceMode,
    /// Search states per schedule before giving up.
    pub budget: u64,
}

impl DominanceConfig {
    pub fn new(n_events: usize, k: usize, n_schedules: usize, mode: DominanceMode) -> Self {
        Self { n_events, k, n_schedules, ratio: 0.8, seed: 0, mode, budget: 5_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceCase {
    /// Event classes in order, `h` or `a`.
    pub pattern: String,
    pub search_success: bool,
    pub sz_success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub config: DominanceConfig,
    pub schedules: usize,
    /// Schedules with too few honest blocks for the attacked blocks to exist.
    pub without_target: usize,
    pub search_successes: usize,
    pub sz_successes: usize,
    /// Schedules where some attack succeeds and the pre-mining attack does not.
    pub counterexamples: Vec<DominanceCase>,
    pub max_states: u64,
}

pub fn pattern_string(pattern: &[EventClass]) -> String {
    pattern
        .iter()
        .map(|c| match c {
            EventClass::Honest => 'h',
            EventClass::Adversary => 'a',
        })
        .collect()
}

pub fn parse_pattern(s: &str) -> Result<Vec<EventClass>> {
    s.chars()
        .map(|c| match c {
            'h' | 'H' => Ok(EventClass::Honest),
            'a' | 'A' => Ok(EventClass::Adversary),
            _ => Err(Error::MalformedSchedule(format!("pattern character '{c}'"))),
        })
        .collect()
}

/// Unit-spaced schedule with the given event classes; honest blocks go to node 0.
pub fn pattern_schedule(pattern: &[EventClass]) -> MiningSchedule {
    let events = pattern
        .iter()
        .enumerate()
        .map(|(i, &class)| MiningEvent {
            time: (i + 1) as f64,
            class,
            node: (class == EventClass::Honest).then_some(0),
        })
        .collect();
    MiningSchedule {
        events,
        horizon: pattern.len().max(1) as f64,
        rates: Rates { lambda_h: 0.0, lambda_a: 0.0 },
    }
}

/// Whether the pre-mining attack on the first honest block succeeds on the pattern.
pub fn sz_succeeds(pattern: &[EventClass], k: usize, mode: DominanceMode) -> Result<bool> {
    let liveness = mode == DominanceMode::Liveness;
    let cfg = SimulationConfig::new(1.0, 1.0, 0.0, Model::Pow)
        .with_nodes(1)
        .with_strategy(StrategySpec::SzPremine { target_j: 1, k, liveness });
    let trace = replay_simulation(&pattern_schedule(pattern), &cfg)?;
    Ok(match mode {
        DominanceMode::Persistence => {
            let b = trace.honest_index[1];
            !check_block_persistence(&trace, b, k).is_empty() || premine_pending(&trace, b, k)
        }
        DominanceMode::Liveness => {
            trace.honest_index.len() > k
                && (1..=k).all(|m| !check_block_persistence(&trace, trace.honest_index[m], 1).is_empty())
        }
    })
}

/// At the horizon, some private block off `b` is at least as deep as the public chain
/// and as deep as `b` must be buried to count as confirmed. Any continuation then lets
/// the attacker displace `b` the moment it becomes `k` deep.
fn premine_pending(trace: &Trace, b: usize, k: usize) -> bool {
    let tree = &trace.tree;
    let public = trace.view_log.iter().filter_map(|l| l.last()).map(|e| e.length).max().unwrap_or(0);
    let need = public.max(tree.depth(b) + k - 1);
    tree.blocks().iter().any(|x| {
        trace.first_seen[x.id].is_none() && x.depth >= need && !tree.is_ancestor(b, x.id)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct SBlock {
    parent: u8,
    depth: u8,
    /// Honest index, 0 for adversary blocks (and genesis).
    honest: u8,
    published: bool,
}

struct Search<'a> {
    pattern: &'a [EventClass],
    k: usize,
    mode: DominanceMode,
    budget: u64,
    states: u64,
    failed: HashSet<(usize, bool, Vec<u8>)>,
}

impl Search<'_> {
    fn descends(blocks: &[SBlock], mut x: usize, anc: usize) -> bool {
        loop {
            if x == anc {
                return true;
            }
            if x == 0 {
                return false;
            }
            x = blocks[x].parent as usize;
        }
    }

    fn public_length(blocks: &[SBlock]) -> u8 {
        blocks.iter().filter(|b| b.published).map(|b| b.depth).max().unwrap_or(0)
    }

    fn honest_block(blocks: &[SBlock], m: u8) -> Option<usize> {
        blocks.iter().position(|b| b.honest == m)
    }

    /// Updates the sticky confirmation flag and reports success.
    fn evaluate(&self, blocks: &[SBlock], k_deep: &mut bool) -> bool {
        let l = Self::public_length(blocks);
        match self.mode {
            DominanceMode::Persistence => {
                let Some(b) = Self::honest_block(blocks, 1) else { return false };
                let db = blocks[b].depth as usize;
                if !*k_deep && l as usize + 1 >= db + self.k {
                    *k_deep = (0..blocks.len()).any(|y| {
                        blocks[y].published && blocks[y].depth == l && Self::descends(blocks, y, b)
                    });
                }
                *k_deep
                    && (0..blocks.len())
                        .any(|x| blocks[x].depth >= l && !Self::descends(blocks, x, b))
            }
            DominanceMode::Liveness => {
                let Some(targets) = (1..=self.k as u8)
                    .map(|m| Self::honest_block(blocks, m))
                    .collect::<Option<Vec<usize>>>()
                else {
                    return false;
                };
                (0..blocks.len()).any(|x| {
                    blocks[x].depth >= l && targets.iter().all(|&t| !Self::descends(blocks, x, t))
                })
            }
        }
    }

    fn canonical(&self, blocks: &[SBlock]) -> Vec<u8> {
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); blocks.len()];
        for (i, b) in blocks.iter().enumerate().skip(1) {
            children[b.parent as usize].push(i);
        }
        let keep = match self.mode {
            DominanceMode::Persistence => 1,
            DominanceMode::Liveness => self.k as u8,
        };
        fn code(v: usize, blocks: &[SBlock], children: &[Vec<usize>], keep: u8) -> Vec<u8> {
            let b = blocks[v];
            let label = if b.honest == 0 {
                b.published as u8
            } else if b.honest <= keep {
                2 + b.honest
            } else {
                2
            };
            let mut kids: Vec<Vec<u8>> =
                children[v].iter().map(|&c| code(c, blocks, children, keep)).collect();
            kids.sort();
            let mut out = vec![b'(', label];
            for c in kids {
                out.extend(c);
            }
            out.push(b')');
            out
        }
        code(0, blocks, &children, keep)
    }

    fn dfs(&mut self, idx: usize, blocks: &mut Vec<SBlock>, k_deep: bool, honest_seen: u8) -> Result<bool> {
        if idx == self.pattern.len() {
            return Ok(false);
        }
        let key = (idx, k_deep, self.canonical(blocks));
        if self.failed.contains(&key) {
            return Ok(false);
        }
        self.states += 1;
        if self.states > self.budget {
            return Err(Error::SearchBudgetExceeded { budget: self.budget });
        }
        let n = blocks.len();
        match self.pattern[idx] {
            EventClass::Honest => {
                let l = Self::public_length(blocks);
                let tips: Vec<usize> =
                    (0..n).filter(|&y| blocks[y].published && blocks[y].depth == l).collect();
                for p in tips {
                    blocks.push(SBlock { parent: p as u8, depth: l + 1, honest: honest_seen + 1, published: true });
                    if self.step(idx, blocks, k_deep, honest_seen + 1)? {
                        return Ok(true);
                    }
                    blocks.pop();
                }
            }
            EventClass::Adversary => {
                for p in 0..n {
                    for publish in [false, true] {
                        let saved: Vec<bool> = blocks.iter().map(|b| b.published).collect();
                        let depth = blocks[p].depth + 1;
                        blocks.push(SBlock { parent: p as u8, depth, honest: 0, published: false });
                        if publish {
                            let mut x = n;
                            while !blocks[x].published {
                                blocks[x].published = true;
                                x = blocks[x].parent as usize;
                            }
                        }
                        if self.step(idx, blocks, k_deep, honest_seen)? {
                            return Ok(true);
                        }
                        blocks.pop();
                        for (b, s) in blocks.iter_mut().zip(saved) {
                            b.published = s;
                        }
                    }
                }
            }
        }
        self.failed.insert(key);
        Ok(false)
    }

    fn step(&mut self, idx: usize, blocks: &mut Vec<SBlock>, k_deep: bool, honest_seen: u8) -> Result<bool> {
        let mut flag = k_deep;
        if self.evaluate(blocks, &mut flag) {
            return Ok(true);
        }
        self.dfs(idx + 1, blocks, flag, honest_seen)
    }
}

/// Exhaustive search over adversary placements (any existing block) and publication
/// (immediately or never) for an attack on the first honest block. Honest blocks may be
/// mined on any public tip of maximal depth. Returns whether an attack exists and the
/// number of search states expanded.
pub fn search_attack(pattern: &[EventClass], k: usize, mode: DominanceMode, budget: u64) -> Result<(bool, u64)> {
    if pattern.len() > 12 || k == 0 {
        return Err(Error::InvalidArgument("search needs at most 12 events and k ≥ 1".into()));
    }
    let mut s = Search { pattern, k, mode, budget, states: 0, failed: HashSet::new() };
    let mut blocks = vec![SBlock { parent: 0, depth: 0, honest: 0, published: true }];
    let found = s.dfs(0, &mut blocks, false, 0)?;
    Ok((found, s.states))
}

/// Samples random event patterns and checks that the pre-mining attack succeeds
/// whenever any searched attack does.
pub fn sz_dominance_check(config: &DominanceConfig) -> Result<DominanceReport> {
    if config.n_events > 12 || config.k == 0 || config.k > 3 || config.n_schedules == 0 {
        return Err(Error::InvalidArgument(
            "dominance check needs n_events ≤ 12, 1 ≤ k ≤ 3 and at least one schedule".into(),
        ));
    }
    let p_adv = config.ratio / (1.0 + config.ratio);
    let cases: Vec<Result<Option<(DominanceCase, u64)>>> = (0..config.n_schedules as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(trial_seed(config.seed, i), 0);
            let pattern: Vec<EventClass> = (0..config.n_events)
                .map(|_| {
                    if r.random_bool(p_adv) {
                        EventClass::Adversary
                    } else {
                        EventClass::Honest
                    }
                })
                .collect();
            let needed = match config.mode {
                DominanceMode::Persistence => 1,
                DominanceMode::Liveness => config.k,
            };
            if pattern.iter().filter(|&&c| c == EventClass::Honest).count() < needed {
                return Ok(None);
            }
            let (search_success, states) = search_attack(&pattern, config.k, config.mode, config.budget)?;
            let sz_success = sz_succeeds(&pattern, config.k, config.mode)?;
            Ok(Some((
                DominanceCase { pattern: pattern_string(&pattern), search_success, sz_success },
                states,
            )))
        })
        .collect();
    let mut report = DominanceReport {
        config: *config,
        schedules: config.n_schedules,
        without_target: 0,
        search_successes: 0,
        sz_successes: 0,
        counterexamples: Vec::new(),
        max_states: 0,
    };
    for c in cases {
        match c? {
            None => report.without_target += 1,
            Some((case, states)) => {
                report.max_states = report.max_states.max(states);
                report.search_successes += case.search_success as usize;
                report.sz_successes += case.sz_success as usize;
                if case.search_success && !case.sz_success {
                    report.counterexamples.push(case);
                }
            }
        }
    }
    Ok(report)
}

/// CSV rows `params..., estimate, ci_lo, ci_hi, trials, seed` for a sweep.
pub fn sweep_csv(param_names: &[&str], rows: &[(Vec<f64>, Estimate, u64)]) -> String {
    let mut s = param_names.join(",");
    s.push_str(",estimate,ci_lo,ci_hi,trials,seed\n");
    for (params, e, seed) in rows {
        for p in params {
            s.push_str(&format!("{p},"));
        }
        s.push_str(&format!("{},{},{},{},{}\n", e.mean, e.ci95.0, e.ci95.1, e.trials, seed));
    }
    s
}
