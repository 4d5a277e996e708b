//! Event-driven simulation of the mother tree, honest views and an adversary.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mining::{sample_poisson_schedule, EventClass, MiningEvent, MiningSchedule, Rates};
use crate::model::{new_blocktree, BlockId, Blocktree, MinerClass, GENESIS};
use crate::rng::{self, SimRng};
use crate::strategies::{build_strategy, StrategySpec};

pub const DEFAULT_POPULATION_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Pow,
    Ps,
    Chia,
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pow" => Ok(Model::Pow),
            "ps" => Ok(Model::Ps),
            "chia" => Ok(Model::Chia),
            _ => Err(Error::InvalidArgument(format!("unknown model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub lambda_h: f64,
    pub lambda_a: f64,
    pub delta: f64,
    pub model: Model,
    pub n_nodes: usize,
    pub horizon: f64,
    pub seed: u64,
    pub strategy: StrategySpec,
    /// Confirmation depth used by persistence checks.
    pub k: usize,
    #[serde(default = "default_cap")]
    pub population_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_POPULATION_CAP
}

impl SimulationConfig {
    pub fn new(lambda_h: f64, lambda_a: f64, delta: f64, model: Model) -> Self {
        Self {
            lambda_h,
            lambda_a,
            delta,
            model,
            n_nodes: 4,
            horizon: 100.0,
            seed: 0,
            strategy: StrategySpec::Null,
            k: 6,
            population_cap: DEFAULT_POPULATION_CAP,
        }
    }

    pub fn with_strategy(mut self, strategy: StrategySpec) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_nodes(mut self, n: usize) -> Self {
        self.n_nodes = n;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("lambda_h", self.lambda_h), ("lambda_a", self.lambda_a)] {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::InvalidRate(format!("{name} = {r}")));
            }
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidArgument(format!("delta = {}", self.delta)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon = {}", self.horizon)));
        }
        if self.n_nodes == 0 {
            return Err(Error::InvalidArgument("n_nodes must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// One honest node's local view.
#[derive(Debug, Clone)]
pub struct NodeView {
    known: Vec<bool>,
    pub tip: BlockId,
    pub length: usize,
}

impl NodeView {
    fn new() -> Self {
        Self { known: vec![true], tip: GENESIS, length: 0 }
    }

    pub fn knows(&self, b: BlockId) -> bool {
        self.known.get(b).copied().unwrap_or(false)
    }

    fn mark(&mut self, b: BlockId) {
        if self.known.len() <= b {
            self.known.resize(b + 1, false);
        }
        self.known[b] = true;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TipEntry {
    /// Global processing order across all nodes.
    pub seq: u64,
    pub time: f64,
    pub tip: BlockId,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Publication {
    pub time: f64,
    pub block: BlockId,
}

#[derive(Debug, Clone, Copy)]
struct Delivery {
    deadline: f64,
    seq: u64,
    block: BlockId,
    node: usize,
}

impl PartialEq for Delivery {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Delivery {}
impl PartialOrd for Delivery {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Delivery {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .deadline
            .total_cmp(&self.deadline)
            .then(other.seq.cmp(&self.seq))
    }
}

/// What the adversary may place for the current arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arrival {
    /// One block on any single parent.
    Pow,
    /// Copies on any set of blocks that existed before the arrival, one per parent.
    Ps { voucher: usize },
    /// One block on the given tree block, on which the arrival fired.
    Chia { on: BlockId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observed {
    HonestMined { block: BlockId, j: usize },
    Delivered,
}

#[derive(Debug)]
struct ArrivalCtx {
    kind: Arrival,
    first_new_id: BlockId,
    parents: HashSet<BlockId>,
}

/// Adversary strategy contract. Callbacks receive the live simulation and act through
/// its capability methods, which enforce the model constraints.
pub trait Adversary {
    fn init(&mut self, _sim: &mut Sim) -> Result<()> {
        Ok(())
    }
    fn on_arrival(&mut self, sim: &mut Sim, arrival: Arrival) -> Result<()>;
    fn on_event(&mut self, _sim: &mut Sim, _event: Observed) -> Result<()> {
        Ok(())
    }
    fn on_horizon(&mut self, _sim: &mut Sim) -> Result<()> {
        Ok(())
    }
}

/// Live simulation state, observable by strategies.
pub struct Sim {
    model: Model,
    delta: f64,
    cap: usize,
    now: f64,
    tree: Blocktree,
    nodes: Vec<NodeView>,
    pending: BinaryHeap<Delivery>,
    first_seen: Vec<Option<f64>>,
    view_log: Vec<Vec<TipEntry>>,
    publications: Vec<Publication>,
    honest_index: Vec<BlockId>,
    seq: u64,
    arrival: Option<ArrivalCtx>,
    vouchers: usize,
    active: Vec<BlockId>,
}

impl Sim {
    fn new(model: Model, delta: f64, n_nodes: usize, cap: usize) -> Self {
        let mut sim = Self {
            model,
            delta,
            cap,
            now: 0.0,
            tree: new_blocktree(),
            nodes: (0..n_nodes).map(|_| NodeView::new()).collect(),
            pending: BinaryHeap::new(),
            first_seen: vec![Some(0.0)],
            view_log: vec![Vec::new(); n_nodes],
            publications: Vec::new(),
            honest_index: vec![GENESIS],
            seq: 0,
            arrival: None,
            vouchers: 0,
            active: Vec::new(),
        };
        for p in 0..n_nodes {
            sim.log(p);
        }
        sim
    }

    pub fn now(&self) -> f64 {
        self.now
    }
    pub fn model(&self) -> Model {
        self.model
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn tree(&self) -> &Blocktree {
        &self.tree
    }
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
    pub fn node(&self, p: usize) -> &NodeView {
        &self.nodes[p]
    }
    /// Honest block `j` (0 is genesis), if mined yet.
    pub fn honest_block(&self, j: usize) -> Option<BlockId> {
        self.honest_index.get(j).copied()
    }
    /// Number of honest arrivals so far.
    pub fn honest_count(&self) -> usize {
        self.honest_index.len() - 1
    }
    pub fn honest_blocks(&self) -> &[BlockId] {
        &self.honest_index
    }
    pub fn is_published(&self, b: BlockId) -> bool {
        self.first_seen.get(b).is_some_and(Option::is_some)
    }
    /// Longest chain length over all honest views.
    pub fn public_length(&self) -> usize {
        self.nodes.iter().map(|n| n.length).max().unwrap_or(0)
    }
    /// Tip of a longest honest chain (lowest node index on ties).
    pub fn public_tip(&self) -> BlockId {
        let l = self.public_length();
        self.nodes.iter().find(|n| n.length == l).map_or(GENESIS, |n| n.tip)
    }
    /// True when `b` is at least `k` deep in some honest node's chain.
    pub fn is_k_deep(&self, b: BlockId, k: usize) -> bool {
        let d = self.tree.depth(b);
        self.nodes
            .iter()
            .any(|n| n.length + 1 >= d + k && self.tree.is_ancestor(b, n.tip))
    }
    pub fn active(&self) -> &[BlockId] {
        &self.active
    }
    /// Declares the blocks on which independent-arrival adversary mining fires.
    pub fn set_active(&mut self, blocks: Vec<BlockId>) {
        self.active = blocks;
    }
    pub fn push_active(&mut self, b: BlockId) {
        self.active.push(b);
    }

    /// Places one adversary block for the current arrival. The block starts private.
    pub fn place(&mut self, parent: BlockId) -> Result<BlockId> {
        self.tree.block(parent).map_err(|_| Error::UnknownParent(parent))?;
        let ctx = self
            .arrival
            .as_ref()
            .ok_or_else(|| Error::StrategyViolation("placement outside an adversary arrival".into()))?;
        match ctx.kind {
            Arrival::Pow => {
                if !ctx.parents.is_empty() {
                    return Err(Error::StrategyViolation(
                        "proof-of-work arrival placed on more than one parent".into(),
                    ));
                }
            }
            Arrival::Chia { on } => {
                if parent != on || !ctx.parents.is_empty() {
                    return Err(Error::StrategyViolation(format!(
                        "independent arrival fired on block {on}, not {parent}"
                    )));
                }
            }
            Arrival::Ps { .. } => {
                if parent >= ctx.first_new_id {
                    return Err(Error::StrategyViolation(
                        "stake copy placed on a block created by the same slot".into(),
                    ));
                }
                if ctx.parents.contains(&parent) {
                    return Err(Error::StrategyViolation(format!(
                        "two copies of one slot on parent {parent}"
                    )));
                }
            }
        }
        if self.tree.len() >= self.cap {
            return Err(Error::PopulationOverflow { cap: self.cap });
        }
        let id = if ctx.parents.is_empty() {
            self.tree.append_block(parent, MinerClass::Adversary, self.now)?
        } else {
            self.tree.append_simultaneous(parent, MinerClass::Adversary, self.now)?
        };
        self.first_seen.push(None);
        self.arrival.as_mut().unwrap().parents.insert(parent);
        Ok(id)
    }

    /// Releases `b` and its unpublished ancestors to every honest node now.
    pub fn publish(&mut self, b: BlockId) -> Result<()> {
        self.tree.block(b)?;
        let mut path = Vec::new();
        let mut cur = b;
        while !self.is_published(cur) {
            path.push(cur);
            cur = self.tree.parent(cur);
        }
        for &x in path.iter().rev() {
            self.first_seen[x] = Some(self.now);
            self.publications.push(Publication { time: self.now, block: x });
        }
        for p in 0..self.nodes.len() {
            self.deliver(b, p);
        }
        Ok(())
    }

    /// Delivers a pending honest block to one node ahead of its deadline.
    pub fn deliver_now(&mut self, b: BlockId, node: usize) -> Result<()> {
        self.tree.block(b)?;
        if !self.is_published(b) {
            return Err(Error::StrategyViolation(format!(
                "block {b} is private; publish it instead"
            )));
        }
        self.deliver(b, node);
        Ok(())
    }

    /// Moves a node to an equal-length chain it already knows.
    pub fn switch_tip(&mut self, node: usize, b: BlockId) -> Result<()> {
        let view = &self.nodes[node];
        if !view.knows(b) || self.tree.depth(b) != view.length {
            return Err(Error::StrategyViolation(format!(
                "node {node} cannot switch to block {b} (length {} vs {})",
                self.tree.depth(b),
                view.length
            )));
        }
        if view.tip != b {
            self.nodes[node].tip = b;
            self.log(node);
        }
        Ok(())
    }

    /// Switches every node that knows `b` and has equal length.
    pub fn switch_all(&mut self, b: BlockId) {
        for p in 0..self.nodes.len() {
            let v = &self.nodes[p];
            if v.knows(b) && v.length == self.tree.depth(b) {
                self.switch_tip(p, b).expect("checked");
            }
        }
    }

    fn log(&mut self, p: usize) {
        let v = &self.nodes[p];
        self.view_log[p].push(TipEntry {
            seq: self.seq,
            time: self.now,
            tip: v.tip,
            length: v.length,
        });
        self.seq += 1;
    }

    fn deliver(&mut self, b: BlockId, p: usize) {
        if self.nodes[p].knows(b) {
            return;
        }
        let mut cur = b;
        loop {
            self.nodes[p].mark(cur);
            let parent = self.tree.parent(cur);
            if cur == GENESIS || self.nodes[p].knows(parent) {
                break;
            }
            cur = parent;
        }
        let d = self.tree.depth(b);
        if d > self.nodes[p].length {
            self.nodes[p].tip = b;
            self.nodes[p].length = d;
            self.log(p);
        }
    }

    fn mine_honest(&mut self, node: usize) -> Result<BlockId> {
        let parent = self.nodes[node].tip;
        let b = self.tree.append_block(parent, MinerClass::Honest(node), self.now)?;
        self.first_seen.push(Some(self.now));
        self.honest_index.push(b);
        self.deliver(b, node);
        for q in 0..self.nodes.len() {
            if q == node {
                continue;
            }
            if self.delta == 0.0 {
                self.deliver(b, q);
            } else {
                self.pending.push(Delivery {
                    deadline: self.now + self.delta,
                    seq: self.seq,
                    block: b,
                    node: q,
                });
                self.seq += 1;
            }
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trace {
    pub config: SimulationConfig,
    pub tree: Blocktree,
    /// Realized arrivals, honest events carrying their miner node.
    pub schedule: MiningSchedule,
    pub view_log: Vec<Vec<TipEntry>>,
    pub publications: Vec<Publication>,
    /// `honest_index[j]` is the `j`-th honest block; index 0 is genesis.
    pub honest_index: Vec<BlockId>,
    /// First time each block entered any honest view; `None` if never.
    pub first_seen: Vec<Option<f64>>,
}

impl Trace {
    pub fn horizon(&self) -> f64 {
        self.schedule.horizon
    }
    pub fn delta(&self) -> f64 {
        self.config.delta
    }
    /// Mining times of honest arrivals `τ_1, τ_2, ...` (genesis excluded).
    pub fn honest_times(&self) -> Vec<f64> {
        self.honest_index[1..]
            .iter()
            .map(|&b| self.tree.get(b).mined_at)
            .collect()
    }
    pub fn adversary_arrival_times(&self) -> Vec<f64> {
        self.schedule.adversary_times()
    }
    /// All tip-log entries across nodes in processing order, as `(node, entry)`.
    pub fn merged_log(&self) -> Vec<(usize, TipEntry)> {
        let mut all: Vec<(usize, TipEntry)> = self
            .view_log
            .iter()
            .enumerate()
            .flat_map(|(p, log)| log.iter().map(move |e| (p, *e)))
            .collect();
        all.sort_by_key(|(_, e)| e.seq);
        all
    }
    pub fn final_tips(&self) -> Vec<BlockId> {
        self.view_log.iter().map(|l| l.last().map_or(GENESIS, |e| e.tip)).collect()
    }

    /// JSON export: config, blocks, publication log and per-node tip log.
    pub fn to_json(&self) -> serde_json::Value {
        let blocks: Vec<serde_json::Value> = self
            .tree
            .blocks()
            .iter()
            .map(|b| {
                serde_json::json!({
                    "id": b.id,
                    "parent": b.parent,
                    "class": match b.miner_class {
                        MinerClass::Honest(_) => "honest",
                        MinerClass::Adversary => "adversary",
                    },
                    "node": match b.miner_class {
                        MinerClass::Honest(p) => Some(p),
                        MinerClass::Adversary => None,
                    },
                    "time": b.mined_at,
                    "depth": b.depth,
                })
            })
            .collect();
        serde_json::json!({
            "config": self.config,
            "horizon": self.horizon(),
            "blocks": blocks,
            "publications": self.publications,
            "tip_log": self.view_log,
        })
    }
}

struct Runner {
    sim: Sim,
    strategy: Box<dyn Adversary>,
    events: Vec<MiningEvent>,
    realized: Vec<MiningEvent>,
    chia_rng: SimRng,
    chia_rate: f64,
}

impl Runner {
    fn run(mut self, config: &SimulationConfig, horizon: f64, rates: Rates) -> Result<Trace> {
        self.strategy.init(&mut self.sim)?;
        let mut next = 0usize;
        let mut honest_seen = 0usize;
        let mut chia_next = self.draw_chia();
        loop {
            let t_sched = self.events.get(next).map_or(f64::INFINITY, |e| e.time);
            let t_deliv = self.sim.pending.peek().map_or(f64::INFINITY, |d| d.deadline);
            let t = t_sched.min(t_deliv).min(chia_next);
            if !(t <= horizon) {
                break;
            }
            if t_deliv <= t {
                self.sim.now = t_deliv;
                while self.sim.pending.peek().is_some_and(|d| d.deadline <= t_deliv) {
                    let d = self.sim.pending.pop().unwrap();
                    self.sim.deliver(d.block, d.node);
                }
                self.strategy.on_event(&mut self.sim, Observed::Delivered)?;
            } else if t_sched <= t {
                let ev = self.events[next];
                next += 1;
                self.sim.now = ev.time;
                match ev.class {
                    EventClass::Honest => {
                        honest_seen += 1;
                        let n = self.sim.n_nodes();
                        let node = ev.node.unwrap_or((honest_seen - 1) % n);
                        if node >= n {
                            return Err(Error::MalformedSchedule(format!(
                                "node {node} out of range for {n} nodes"
                            )));
                        }
                        let block = self.sim.mine_honest(node)?;
                        self.realized.push(MiningEvent { node: Some(node), ..ev });
                        let j = self.sim.honest_count();
                        self.strategy
                            .on_event(&mut self.sim, Observed::HonestMined { block, j })?;
                    }
                    EventClass::Adversary => {
                        self.realized.push(ev);
                        let kind = match self.sim.model {
                            Model::Pow => Some(Arrival::Pow),
                            Model::Ps => {
                                self.sim.vouchers += 1;
                                Some(Arrival::Ps { voucher: self.sim.vouchers - 1 })
                            }
                            Model::Chia => self.pick_chia(),
                        };
                        self.adversary_arrival(kind)?;
                    }
                }
            } else {
                self.sim.now = chia_next;
                self.realized.push(MiningEvent {
                    time: chia_next,
                    class: EventClass::Adversary,
                    node: None,
                });
                let kind = self.pick_chia();
                self.adversary_arrival(kind)?;
            }
            if self.sim.model == Model::Chia && self.chia_rate > 0.0 {
                chia_next = self.draw_chia();
            }
        }
        self.sim.now = horizon.max(self.sim.now);
        self.strategy.on_horizon(&mut self.sim)?;
        let sim = self.sim;
        Ok(Trace {
            config: config.clone(),
            tree: sim.tree,
            schedule: MiningSchedule { events: self.realized, horizon, rates },
            view_log: sim.view_log,
            publications: sim.publications,
            honest_index: sim.honest_index,
            first_seen: sim.first_seen,
        })
    }

    fn pick_chia(&mut self) -> Option<Arrival> {
        if self.sim.active.is_empty() {
            return None;
        }
        use rand::Rng;
        let i = self.chia_rng.random_range(0..self.sim.active.len());
        Some(Arrival::Chia { on: self.sim.active[i] })
    }

    fn draw_chia(&mut self) -> f64 {
        if self.sim.model != Model::Chia {
            return f64::INFINITY;
        }
        let rate = self.chia_rate * self.sim.active.len() as f64;
        self.sim.now + rng::exp(&mut self.chia_rng, rate)
    }

    fn adversary_arrival(&mut self, kind: Option<Arrival>) -> Result<()> {
        let Some(kind) = kind else { return Ok(()) };
        self.sim.arrival = Some(ArrivalCtx {
            kind,
            first_new_id: self.sim.tree.len(),
            parents: HashSet::new(),
        });
        let res = self.strategy.on_arrival(&mut self.sim, kind);
        self.sim.arrival = None;
        res
    }
}

fn run_events(
    config: &SimulationConfig,
    events: Vec<MiningEvent>,
    horizon: f64,
    rates: Rates,
    dynamic_chia: bool,
) -> Result<Trace> {
    config.validate()?;
    let strategy = build_strategy(&config.strategy, config)?;
    let sim = Sim::new(config.model, config.delta, config.n_nodes, config.population_cap);
    // Sampled independent-arrival mining is generated per active block as the run goes.
    let chia_rate = if dynamic_chia { config.lambda_a } else { 0.0 };
    let runner = Runner {
        sim,
        strategy,
        events,
        realized: Vec::new(),
        chia_rng: rng::stream(config.seed, 4),
        chia_rate,
    };
    runner.run(config, horizon, rates)
}

/// Samples arrivals for `config` and runs the strategy against them.
pub fn run_simulation(config: &SimulationConfig) -> Result<Trace> {
    config.validate()?;
    let lambda_a = if config.model == Model::Chia { 0.0 } else { config.lambda_a };
    let mut schedule =
        sample_poisson_schedule(config.lambda_h, lambda_a, config.horizon, config.seed)?;
    let mut rng = rng::stream(config.seed, 3);
    use rand::Rng;
    for e in schedule.events.iter_mut().filter(|e| e.class == EventClass::Honest) {
        e.node = Some(rng.random_range(0..config.n_nodes));
    }
    let rates = Rates { lambda_h: config.lambda_h, lambda_a: config.lambda_a };
    run_events(config, schedule.events, config.horizon, rates, config.model == Model::Chia)
}

/// Runs the strategy against a fixed arrival sequence. Rates and horizon in `config`
/// are ignored in favour of the schedule's. Honest events without a node are assigned
/// round-robin; under the independent-arrival model each adversary event fires on a
/// uniformly chosen active block.
pub fn replay_simulation(schedule: &MiningSchedule, config: &SimulationConfig) -> Result<Trace> {
    schedule.validate()?;
    let mut cfg = config.clone();
    cfg.horizon = schedule.horizon;
    run_events(&cfg, schedule.events.clone(), schedule.horizon, schedule.rates, false)
}

/// Parses the replay text format: one `<time> <h|a> [node]` per line, `#` comments.
pub fn parse_replay(text: &str, horizon: Option<f64>) -> Result<MiningSchedule> {
    let mut events = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::MalformedSchedule(format!("line {}: {msg}", lineno + 1));
        let mut parts = line.split_whitespace();
        let time: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .filter(|t: &f64| t.is_finite())
            .ok_or_else(|| bad("expected a decimal time"))?;
        let class = match parts.next() {
            Some("h") | Some("H") => EventClass::Honest,
            Some("a") | Some("A") => EventClass::Adversary,
            _ => return Err(bad("expected class 'h' or 'a'")),
        };
        let node = match parts.next() {
            None => None,
            Some(s) => Some(s.parse::<usize>().map_err(|_| bad("node must be an integer"))?),
        };
        if node.is_some() && class == EventClass::Adversary {
            return Err(bad("adversary events take no node"));
        }
        if parts.next().is_some() {
            return Err(bad("trailing fields"));
        }
        events.push(MiningEvent { time, class, node });
    }
    let last = events.last().map_or(0.0, |e| e.time);
    let horizon = horizon.unwrap_or(last.max(f64::MIN_POSITIVE));
    let schedule = MiningSchedule { events, horizon, rates: Rates { lambda_h: 0.0, lambda_a: 0.0 } };
    schedule.validate()?;
    Ok(schedule)
}

/// Writes a schedule in the replay text format.
pub fn format_replay(schedule: &MiningSchedule) -> String {
    let mut s = String::new();
    for e in &schedule.events {
        let c = match e.class {
            EventClass::Honest => 'h',
            EventClass::Adversary => 'a',
        };
        match e.node {
            Some(n) => s.push_str(&format!("{} {c} {n}\n", e.time)),
            None => s.push_str(&format!("{} {c}\n", e.time)),
        }
    }
    s
}
