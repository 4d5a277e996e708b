//! Post-hoc analysis of a finished trace: adversary-tree partition, fictitious honest
//! tree, loners and Nakamoto candidates, catch-up events, and ledger checks.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::engine::{TipEntry, Trace};
use crate::error::{Error, Result};
use crate::model::{AncestryIndex, BlockId, Blocktree, GENESIS};

/// Right-continuous nondecreasing step function given by its change points.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepFn {
    /// `(time, value)` in increasing time; the value is 0 before the first point.
    pub points: Vec<(f64, usize)>,
}

impl StepFn {
    pub fn at(&self, t: f64) -> usize {
        let i = self.points.partition_point(|&(s, _)| s <= t);
        if i == 0 {
            0
        } else {
            self.points[i - 1].1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryTree {
    /// Index `i` of the honest root; 0 is genesis.
    pub honest_index: usize,
    pub root: BlockId,
    pub root_time: f64,
    pub members: Vec<BlockId>,
    /// `D_i(t)`: depth of the tree relative to its root. Starts with `(root_time, 0)`.
    pub depth_process: StepFn,
}

impl AdversaryTree {
    pub fn depth_at(&self, t: f64) -> usize {
        self.depth_process.at(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryPartition {
    /// One tree per honest block, in mining order.
    pub trees: Vec<AdversaryTree>,
    /// Honest index of the tree each block belongs to (roots included).
    pub owner: Vec<usize>,
}

/// Splits the tree into the honest blocks and the adversary sub-trees hanging off each.
pub fn partition(tree: &Blocktree) -> AdversaryPartition {
    let mut owner = vec![0usize; tree.len()];
    let mut trees: Vec<AdversaryTree> = Vec::new();
    // Ids follow mining order, so parents precede children and honest blocks come out in
    // honest mining order.
    for b in tree.blocks() {
        if b.id == GENESIS || b.miner_class.is_honest() {
            owner[b.id] = trees.len();
            trees.push(AdversaryTree {
                honest_index: trees.len(),
                root: b.id,
                root_time: b.mined_at,
                members: Vec::new(),
                depth_process: StepFn { points: vec![(b.mined_at, 0)] },
            });
        } else {
            let i = owner[b.parent];
            owner[b.id] = i;
            let t = &mut trees[i];
            t.members.push(b.id);
            let rel = b.depth - tree.depth(t.root);
            let last = t.depth_process.points.last_mut().unwrap();
            if rel > last.1 {
                if last.0 == b.mined_at {
                    last.1 = rel;
                } else {
                    t.depth_process.points.push((b.mined_at, rel));
                }
            }
        }
    }
    AdversaryPartition { trees, owner }
}

/// Number of honest arrivals in `(0, t]`.
pub fn honest_count(trace: &Trace, t: f64) -> usize {
    trace.honest_times().partition_point(|&s| s <= t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FictitiousHonestTree {
    pub delta: f64,
    /// Opening time of level `d + 1` at index `d`.
    pub level_opens: Vec<f64>,
}

impl FictitiousHonestTree {
    /// `D_h(t)`: levels opened by time `t`.
    pub fn depth_at(&self, t: f64) -> usize {
        self.level_opens.partition_point(|&s| s <= t)
    }

    /// `X_d` for `d = 1, 2, ...`: gaps between successive level openings, from time 0.
    pub fn inter_times(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.level_opens
            .iter()
            .map(|&t| {
                let x = t - prev;
                prev = t;
                x
            })
            .collect()
    }
}

/// Greedy level grouping: an honest block opens a new level unless it falls within `Δ`
/// after the current level's opener.
pub fn fictitious_tree(honest_times: &[f64], delta: f64) -> FictitiousHonestTree {
    let mut level_opens: Vec<f64> = Vec::new();
    for &t in honest_times {
        match level_opens.last() {
            Some(&open) if t <= open + delta => {}
            _ => level_opens.push(t),
        }
    }
    FictitiousHonestTree { delta, level_opens }
}

/// True when no other honest block is mined within `[τ_j − Δ, τ_j + Δ]`. `j` is 1-based.
pub fn is_loner(honest_times: &[f64], j: usize, delta: f64) -> Result<bool> {
    if j == 0 || j > honest_times.len() {
        return Err(Error::IndexOutOfRange { index: j, count: honest_times.len() });
    }
    let t = honest_times[j - 1];
    let before = j >= 2 && honest_times[j - 2] >= t - delta;
    let after = j < honest_times.len() && honest_times[j] <= t + delta;
    Ok(!before && !after)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceViolation {
    pub block_id: BlockId,
    /// Set when the block is honest.
    pub honest_index: Option<usize>,
    pub confirm_depth: usize,
    pub depth: usize,
    pub confirmed_at: f64,
    pub violation_time: f64,
    /// Node whose chain dropped the block.
    pub node: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LivenessViolation {
    pub t0: f64,
    pub window: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confirmation {
    /// At least `k` deep in the node's chain.
    Depth(usize),
    /// In the node's chain and mined more than `τ` before its tip.
    Time(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCounterexample {
    pub node: usize,
    pub s: f64,
    pub t: f64,
    pub honest_growth: i64,
    pub chain_growth: i64,
}

/// Precomputed views of one trace shared by the analyses.
pub struct TraceAnalysis<'a> {
    pub trace: &'a Trace,
    pub partition: AdversaryPartition,
    pub fictitious: FictitiousHonestTree,
    /// `τ_0 = 0, τ_1, τ_2, ...`
    pub times: Vec<f64>,
    pub ancestry: AncestryIndex,
    honest_of: Vec<Option<usize>>,
}

impl<'a> TraceAnalysis<'a> {
    pub fn new(trace: &'a Trace) -> Self {
        let honest = trace.honest_times();
        let mut times = Vec::with_capacity(honest.len() + 1);
        times.push(0.0);
        times.extend_from_slice(&honest);
        let mut honest_of = vec![None; trace.tree.len()];
        for (j, &b) in trace.honest_index.iter().enumerate() {
            honest_of[b] = Some(j);
        }
        Self {
            trace,
            partition: partition(&trace.tree),
            fictitious: fictitious_tree(&honest, trace.delta()),
            times,
            ancestry: AncestryIndex::new(&trace.tree),
            honest_of,
        }
    }

    fn horizon(&self) -> f64 {
        self.trace.horizon()
    }

    fn delta(&self) -> f64 {
        self.trace.delta()
    }

    pub fn honest_arrivals(&self) -> usize {
        self.times.len() - 1
    }

    pub fn loners(&self) -> Vec<usize> {
        let honest = &self.times[1..];
        (1..=honest.len())
            .filter(|&j| is_loner(honest, j, self.delta()).unwrap())
            .collect()
    }

    fn d_h(&self, t: f64) -> i64 {
        self.fictitious.depth_at(t) as i64
    }

    fn d_i(&self, i: usize, t: f64) -> i64 {
        self.partition.trees[i].depth_at(t) as i64
    }

    /// `D_h(t − Δ) − D_h(τ_i + Δ) − D_i(t)`; positive means tree `i` is behind.
    fn margin(&self, i: usize, t: f64) -> i64 {
        let delta = self.delta();
        self.d_h(t - delta) - self.d_h(self.times[i] + delta) - self.d_i(i, t)
    }

    /// Honest indices `j` that are loners and for which every earlier adversary tree stays
    /// strictly behind the fictitious chain over `(τ_j + Δ, horizon]`.
    pub fn nakamoto_candidates(&self) -> Vec<usize> {
        let h = self.horizon();
        let delta = self.delta();
        let n = self.honest_arrivals();
        // The margin is piecewise constant; each piece is evaluated at its midpoint so
        // that rounding in `(τ + Δ) − Δ` cannot shift a change point.
        let mid = |lo: f64, hi: f64| if lo < hi { 0.5 * (lo + hi) } else { hi };
        let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut suffix_min: Vec<Vec<i64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut ps: Vec<f64> = self.partition.trees[i]
                .depth_process
                .points
                .iter()
                .map(|&(t, _)| t)
                .chain(self.fictitious.level_opens.iter().map(|&t| t + delta))
                .filter(|&t| t <= h)
                .collect();
            ps.sort_by(f64::total_cmp);
            ps.dedup();
            let mut mins: Vec<i64> = (0..ps.len())
                .map(|q| self.margin(i, mid(ps[q], ps.get(q + 1).copied().unwrap_or(h))))
                .collect();
            for q in (0..mins.len().saturating_sub(1)).rev() {
                mins[q] = mins[q].min(mins[q + 1]);
            }
            points.push(ps);
            suffix_min.push(mins);
        }
        let mut out = Vec::new();
        for j in self.loners() {
            let s = self.times[j] + delta;
            if s >= h {
                out.push(j);
                continue;
            }
            let ok = (0..j).all(|i| {
                let q = points[i].partition_point(|&p| p <= s);
                let next = points[i].get(q).copied().unwrap_or(h);
                let mut m = self.margin(i, mid(s, next));
                if q < suffix_min[i].len() {
                    m = m.min(suffix_min[i][q]);
                }
                m > 0
            });
            if ok {
                out.push(j);
            }
        }
        out
    }

    /// Pairs `(i, k)`, `i + 1 < k`, with `D_i(τ_k + Δ) ≥ D_h(τ_{k−1}) − D_h(τ_i + Δ)` and
    /// `τ_k + Δ ≤ horizon`. Adjacent pairs satisfy the inequality trivially and are left out.
    pub fn catch_up_events(&self) -> Vec<(usize, usize)> {
        let h = self.horizon();
        let delta = self.delta();
        let mut out = Vec::new();
        for k in 1..self.times.len() {
            let tk = self.times[k] + delta;
            if tk > h {
                break;
            }
            let lead = self.d_h(self.times[k - 1]);
            for i in 0..k.saturating_sub(1) {
                if self.d_i(i, tk) >= lead - self.d_h(self.times[i] + delta) {
                    out.push((i, k));
                }
            }
        }
        out
    }

    /// Trees `i` that have caught up with the fictitious chain at the horizon itself:
    /// `D_i(H) ≥ D_h(H − Δ) − D_h(τ_i + Δ)`.
    pub fn terminal_catch_ups(&self) -> Vec<usize> {
        let h = self.horizon();
        (0..self.honest_arrivals())
            .filter(|&i| self.margin(i, h) <= 0)
            .collect()
    }

    /// Nakamoto candidates recomputed from catch-up events.
    pub fn candidates_from_catch_ups(&self) -> Vec<usize> {
        let h = self.horizon();
        let delta = self.delta();
        let pairs = self.catch_up_events();
        let terminal: BTreeSet<usize> = self.terminal_catch_ups().into_iter().collect();
        // For each i, the largest k in a catch-up pair with i.
        let mut max_k = vec![0usize; self.times.len()];
        for &(i, k) in &pairs {
            max_k[i] = max_k[i].max(k);
        }
        self.loners()
            .into_iter()
            .filter(|&j| {
                let open = self.times[j] + delta < h;
                (0..j).all(|i| max_k[i] <= j && !(open && terminal.contains(&i)))
            })
            .collect()
    }

    fn contains(&self, tip: BlockId, b: BlockId) -> bool {
        self.ancestry.is_ancestor(b, tip)
    }

    /// Persistence violations under `rule`, optionally restricted to one block.
    pub fn persistence(&self, rule: Confirmation, only: Option<BlockId>) -> Vec<PersistenceViolation> {
        let tree = &self.trace.tree;
        let log = self.trace.merged_log();
        let n = tree.len();
        let mut confirmed_at: Vec<Option<(u64, f64)>> = vec![None; n];
        let mut violated = vec![false; n];
        // Deepest confirmed blocks no other confirmed block descends from.
        let mut frontier: Vec<BlockId> = Vec::new();
        let mut out = Vec::new();
        for &(node, e) in &log {
            // Violations first: confirmation on the same entry cannot also violate.
            for &f in &frontier {
                if self.contains(e.tip, f) {
                    continue;
                }
                let mut x = f;
                while !self.contains(e.tip, x) {
                    if !violated[x] && only.is_none_or(|b| b == x) {
                        let (_, ct) = confirmed_at[x].unwrap();
                        violated[x] = true;
                        out.push(self.violation(x, rule, ct, e, node));
                    }
                    x = tree.parent(x);
                }
            }
            let top = self.confirm_top(rule, &e);
            let Some(mut x) = top else { continue };
            if confirmed_at[x].is_some() {
                continue;
            }
            let new_top = x;
            loop {
                confirmed_at[x] = Some((e.seq, e.time));
                if x == GENESIS {
                    break;
                }
                x = tree.parent(x);
                if confirmed_at[x].is_some() {
                    break;
                }
            }
            frontier.retain(|&f| !self.ancestry.is_ancestor(f, new_top));
            frontier.push(new_top);
        }
        out
    }

    /// Deepest block of the entry's chain that the rule confirms.
    fn confirm_top(&self, rule: Confirmation, e: &TipEntry) -> Option<BlockId> {
        let tree = &self.trace.tree;
        match rule {
            Confirmation::Depth(k) => {
                let d = (e.length + 1).checked_sub(k)?;
                tree.ancestor_at(e.tip, d)
            }
            Confirmation::Time(tau) => {
                let cutoff = tree.get(e.tip).mined_at - tau;
                let mut x = e.tip;
                while !(tree.get(x).mined_at < cutoff) {
                    if x == GENESIS {
                        return None;
                    }
                    x = tree.parent(x);
                }
                Some(x)
            }
        }
    }

    fn violation(
        &self,
        b: BlockId,
        rule: Confirmation,
        confirmed_at: f64,
        e: TipEntry,
        node: usize,
    ) -> PersistenceViolation {
        PersistenceViolation {
            block_id: b,
            honest_index: self.honest_of[b],
            confirm_depth: match rule {
                Confirmation::Depth(k) => k,
                Confirmation::Time(_) => 0,
            },
            depth: self.trace.tree.depth(b),
            confirmed_at,
            violation_time: e.time,
            node,
        }
    }

    /// Earliest time from which `b` is in every node's chain through the horizon;
    /// `+∞` if never.
    pub fn stable_from(&self, b: BlockId) -> f64 {
        let mut from = f64::NEG_INFINITY;
        for log in &self.trace.view_log {
            match log.iter().rposition(|e| !self.contains(e.tip, b)) {
                None => {}
                Some(q) if q + 1 == log.len() => return f64::INFINITY,
                Some(q) => from = from.max(log[q + 1].time),
            }
        }
        from
    }

    /// Windows `(t0, t0 + u]` with `t0` at time 0 or an honest arrival, in which no honest
    /// block mined in the window is in every node's chain from `t0 + u` on.
    pub fn liveness(&self, u: f64) -> Vec<LivenessViolation> {
        let h = self.horizon();
        let stable: Vec<f64> = self.trace.honest_index[1..]
            .iter()
            .map(|&b| self.stable_from(b))
            .collect();
        let honest = &self.times[1..];
        let mut out = Vec::new();
        for &t0 in &self.times {
            let end = t0 + u;
            if end > h {
                break;
            }
            let lo = honest.partition_point(|&t| t <= t0);
            let hi = honest.partition_point(|&t| t <= end);
            if !(lo..hi).any(|q| stable[q] <= end) {
                out.push(LivenessViolation { t0, window: u });
            }
        }
        out
    }

    /// Checks `D_h(t − Δ) − D_h(s + Δ) ≤ L_p(t) − L_p(s)` for every node and all
    /// `s + Δ < t − Δ` up to the horizon.
    pub fn growth_bound(&self) -> std::result::Result<(), GrowthCounterexample> {
        let h = self.horizon();
        let delta = self.delta();
        for (node, log) in self.trace.view_log.iter().enumerate() {
            let length = {
                let mut pts: Vec<(f64, usize)> = Vec::new();
                for e in log {
                    match pts.last_mut() {
                        Some(last) if last.0 == e.time => last.1 = e.length,
                        _ => pts.push((e.time, e.length)),
                    }
                }
                StepFn { points: pts }
            };
            let lp = |t: f64| length.at(t) as i64;
            let phi = |s: f64| lp(s) - self.d_h(s + delta);
            let psi = |t: f64| lp(t) - self.d_h(t - delta);
            let mut cps: Vec<f64> = std::iter::once(0.0)
                .chain(length.points.iter().map(|&(t, _)| t))
                .chain(self.fictitious.level_opens.iter().flat_map(|&o| [o - delta, o + delta]))
                .filter(|&t| (0.0..=h).contains(&t))
                .collect();
            cps.sort_by(f64::total_cmp);
            cps.dedup();
            // phi and psi are constant on each piece [c_w, c_{w+1}); evaluate at midpoints.
            let ends: Vec<f64> = (0..cps.len()).map(|w| cps.get(w + 1).copied().unwrap_or(h)).collect();
            let mid = |w: usize| if cps[w] < ends[w] { 0.5 * (cps[w] + ends[w]) } else { ends[w] };
            let eps = 1e-9 * (1.0 + h);
            let mut best: Option<(i64, usize)> = None;
            let mut q = 0;
            for w in 0..cps.len() {
                // s may lie anywhere below end_w - 2Δ.
                while q < cps.len() && cps[q] < ends[w] - 2.0 * delta - eps {
                    let v = phi(mid(q));
                    if best.is_none_or(|(b, _)| v > b) {
                        best = Some((v, q));
                    }
                    q += 1;
                }
                if let Some((m, sq)) = best {
                    if psi(mid(w)) < m {
                        let s = cps[sq];
                        let t = mid(w).max(s + 2.0 * delta);
                        return Err(GrowthCounterexample {
                            node,
                            s,
                            t,
                            honest_growth: self.d_h(t - delta) - self.d_h(s + delta),
                            chain_growth: lp(t) - lp(s),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn nakamoto_candidates(trace: &Trace) -> Vec<usize> {
    TraceAnalysis::new(trace).nakamoto_candidates()
}

pub fn catch_up_events(trace: &Trace) -> Vec<(usize, usize)> {
    TraceAnalysis::new(trace).catch_up_events()
}

pub fn check_persistence(trace: &Trace, k: usize) -> Vec<PersistenceViolation> {
    TraceAnalysis::new(trace).persistence(Confirmation::Depth(k), None)
}

pub fn check_persistence_with(trace: &Trace, rule: Confirmation) -> Vec<PersistenceViolation> {
    TraceAnalysis::new(trace).persistence(rule, None)
}

/// Persistence violations of a single block.
pub fn check_block_persistence(trace: &Trace, b: BlockId, k: usize) -> Vec<PersistenceViolation> {
    TraceAnalysis::new(trace).persistence(Confirmation::Depth(k), Some(b))
}

pub fn check_liveness(trace: &Trace, u: f64) -> Vec<LivenessViolation> {
    TraceAnalysis::new(trace).liveness(u)
}

pub fn verify_growth_bound(trace: &Trace) -> std::result::Result<(), GrowthCounterexample> {
    TraceAnalysis::new(trace).growth_bound()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub horizon: f64,
    pub delta: f64,
    pub confirm_depth: usize,
    pub liveness_window: f64,
    /// Candidates at the horizon.
    pub nakamoto_candidates: Vec<usize>,
    pub loners: Vec<usize>,
    pub catch_ups: Vec<(usize, usize)>,
    pub persistence_violations: Vec<PersistenceViolation>,
    pub liveness_violations: Vec<LivenessViolation>,
}

pub fn ledger_report(trace: &Trace, k: usize, u: f64) -> LedgerReport {
    let a = TraceAnalysis::new(trace);
    LedgerReport {
        horizon: trace.horizon(),
        delta: trace.delta(),
        confirm_depth: k,
        liveness_window: u,
        nakamoto_candidates: a.nakamoto_candidates(),
        loners: a.loners(),
        catch_ups: a.catch_up_events(),
        persistence_violations: a.persistence(Confirmation::Depth(k), None),
        liveness_violations: a.liveness(u),
    }
}

impl LedgerReport {
    pub fn violations_csv(&self) -> String {
        let mut s = String::from("block_id,honest_index,confirm_depth,violation_time\n");
        for v in &self.persistence_violations {
            let j = v.honest_index.map(|j| j.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{}\n", v.block_id, j, v.confirm_depth, v.violation_time));
        }
        s
    }
}

/// Structural invariants that must hold on every trace. Returns the first failure.
pub fn check_invariants(trace: &Trace) -> std::result::Result<(), String> {
    let a = TraceAnalysis::new(trace);
    let tree = &trace.tree;

    let mut seen = vec![false; tree.len()];
    for t in &a.partition.trees {
        for &b in std::iter::once(&t.root).chain(&t.members) {
            if std::mem::replace(&mut seen[b], true) {
                return Err(format!("block {b} in two partition trees"));
            }
            if a.partition.owner[b] != t.honest_index {
                return Err(format!("block {b} owner mismatch"));
            }
        }
        let pts = &t.depth_process.points;
        for w in pts.windows(2) {
            if !(w[1].0 > w[0].0) || w[1].1 != w[0].1 + 1 {
                return Err(format!(
                    "tree {} depth jumps from {:?} to {:?}",
                    t.honest_index, w[0], w[1]
                ));
            }
        }
    }
    if let Some(b) = seen.iter().position(|s| !s) {
        return Err(format!("block {b} missing from partition"));
    }

    for j in a.loners() {
        let d = tree.depth(trace.honest_index[j]);
        for (q, &b) in trace.honest_index.iter().enumerate() {
            if q != j && tree.depth(b) == d {
                return Err(format!("loner {j} shares depth {d} with honest block {q}"));
            }
        }
    }

    a.growth_bound().map_err(|c| format!("growth bound fails: {c:?}"))?;

    let cands = a.nakamoto_candidates();
    let loners: BTreeSet<usize> = a.loners().into_iter().collect();
    for &j in &cands {
        if !loners.contains(&j) {
            return Err(format!("candidate {j} is not a loner"));
        }
        let settled = a.times[j] + trace.delta();
        if settled >= trace.horizon() {
            continue;
        }
        let from = a.stable_from(trace.honest_index[j]);
        if from > settled {
            return Err(format!("candidate {j} not stable after τ + Δ (stable from {from})"));
        }
    }
    let via = a.candidates_from_catch_ups();
    if via != cands {
        return Err(format!("candidate sets differ: direct {cands:?}, via catch-ups {via:?}"));
    }
    Ok(())
}
