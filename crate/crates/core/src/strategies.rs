//! Adversary strategies.

use serde::{Deserialize, Serialize};

use crate::engine::{Adversary, Arrival, Model, Observed, Sim, SimulationConfig};
use crate::error::{Error, Result};
use crate::model::{BlockId, GENESIS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    /// Discards every adversary arrival.
    Null,
    /// Private chain (or, under independent arrivals, private tree) from the target's parent.
    PrivateAttack { target_j: usize, k: usize },
    /// Private attack with pre-mining. With `liveness`, the private chain is released once
    /// the `k` honest blocks starting at the target are all mined, rather than once the
    /// target is `k` deep.
    SzPremine {
        target_j: usize,
        k: usize,
        #[serde(default)]
        liveness: bool,
    },
    /// Two equal public chains sustained with stake copies.
    Balance,
    /// Full independent-arrival tree from the parent of honest block `root_j`.
    NasChia { root_j: usize, k: usize },
    /// Every stake slot extends every adversary tree by one block.
    NasPs,
}

impl StrategySpec {
    pub fn name(&self) -> &'static str {
        match self {
            StrategySpec::Null => "null",
            StrategySpec::PrivateAttack { .. } => "private",
            StrategySpec::SzPremine { .. } => "sz",
            StrategySpec::Balance => "balance",
            StrategySpec::NasChia { .. } => "nas_chia",
            StrategySpec::NasPs => "nas_ps",
        }
    }

    /// Confirmation depth the strategy attacks, if any.
    pub fn confirm_depth(&self) -> Option<usize> {
        match *self {
            StrategySpec::PrivateAttack { k, .. }
            | StrategySpec::SzPremine { k, .. }
            | StrategySpec::NasChia { k, .. } => Some(k),
            _ => None,
        }
    }

    /// Honest index of the block whose persistence the strategy attacks, if any.
    pub fn target(&self) -> Option<usize> {
        match *self {
            StrategySpec::PrivateAttack { target_j, .. }
            | StrategySpec::SzPremine { target_j, .. } => Some(target_j),
            StrategySpec::NasChia { root_j, .. } => Some(root_j),
            _ => None,
        }
    }
}

pub fn null_strategy() -> StrategySpec {
    StrategySpec::Null
}

pub fn private_attack(target_j: usize, k: usize) -> StrategySpec {
    StrategySpec::PrivateAttack { target_j, k }
}

pub fn sz_premine(target_j: usize, k: usize) -> StrategySpec {
    StrategySpec::SzPremine { target_j, k, liveness: false }
}

pub fn balance_strategy() -> StrategySpec {
    StrategySpec::Balance
}

pub fn nas_chia_strategy(root_j: usize, k: usize) -> StrategySpec {
    StrategySpec::NasChia { root_j, k }
}

pub fn nas_ps_strategy() -> StrategySpec {
    StrategySpec::NasPs
}

fn check_target(target_j: usize, k: usize) -> Result<()> {
    if target_j == 0 || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "target_j = {target_j} and k = {k} must both be at least 1"
        )));
    }
    Ok(())
}

fn require(model: Model, want: Model, who: &str) -> Result<()> {
    if model != want {
        return Err(Error::ModelMismatch(format!("{who} requires {want:?}, got {model:?}")));
    }
    Ok(())
}

pub(crate) fn build_strategy(
    spec: &StrategySpec,
    cfg: &SimulationConfig,
) -> Result<Box<dyn Adversary>> {
    Ok(match *spec {
        StrategySpec::Null => Box::new(Null),
        StrategySpec::PrivateAttack { target_j, k } => {
            check_target(target_j, k)?;
            Box::new(PrivateAttack::new(target_j, k))
        }
        StrategySpec::SzPremine { target_j, k, liveness } => {
            check_target(target_j, k)?;
            require(cfg.model, Model::Pow, "pre-mining attack")?;
            if cfg.delta != 0.0 {
                return Err(Error::ModelMismatch("pre-mining attack requires zero delay".into()));
            }
            Box::new(SzPremine::new(target_j, k, liveness))
        }
        StrategySpec::Balance => {
            require(cfg.model, Model::Ps, "balance attack")?;
            Box::new(Balance::default())
        }
        StrategySpec::NasChia { root_j, k } => {
            check_target(root_j, k)?;
            require(cfg.model, Model::Chia, "independent-arrival tree attack")?;
            Box::new(PrivateAttack::new(root_j, k))
        }
        StrategySpec::NasPs => {
            require(cfg.model, Model::Ps, "stake-copy tree attack")?;
            Box::new(NasPs { deepest: vec![GENESIS] })
        }
    })
}

struct Null;

impl Adversary for Null {
    fn on_arrival(&mut self, _sim: &mut Sim, _arrival: Arrival) -> Result<()> {
        Ok(())
    }
}

struct PrivateAttack {
    target_j: usize,
    k: usize,
    target: Option<BlockId>,
    root: BlockId,
    /// Deepest private block, or the root before any.
    tip: BlockId,
    k_deep: bool,
    done: bool,
}

impl PrivateAttack {
    fn new(target_j: usize, k: usize) -> Self {
        Self { target_j, k, target: None, root: GENESIS, tip: GENESIS, k_deep: false, done: false }
    }

    fn check(&mut self, sim: &mut Sim) -> Result<()> {
        let Some(target) = self.target else { return Ok(()) };
        if self.done {
            return Ok(());
        }
        self.k_deep |= sim.is_k_deep(target, self.k);
        let d = sim.tree().depth(self.tip);
        if self.k_deep && self.tip != self.root && d > sim.public_length() {
            sim.publish(self.tip)?;
            self.done = true;
            sim.set_active(Vec::new());
        }
        Ok(())
    }
}

impl Adversary for PrivateAttack {
    fn on_arrival(&mut self, sim: &mut Sim, arrival: Arrival) -> Result<()> {
        if self.target.is_none() || self.done {
            return Ok(());
        }
        match arrival {
            Arrival::Pow | Arrival::Ps { .. } => {
                self.tip = sim.place(self.tip)?;
            }
            Arrival::Chia { on } => {
                let b = sim.place(on)?;
                sim.push_active(b);
                if sim.tree().depth(b) > sim.tree().depth(self.tip) {
                    self.tip = b;
                }
            }
        }
        self.check(sim)
    }

    fn on_event(&mut self, sim: &mut Sim, event: Observed) -> Result<()> {
        if let Observed::HonestMined { block, j } = event {
            if j == self.target_j {
                self.target = Some(block);
                self.root = sim.tree().parent(block);
                self.tip = self.root;
                if sim.model() == Model::Chia {
                    sim.set_active(vec![self.root]);
                }
            }
        }
        self.check(sim)
    }

    fn on_horizon(&mut self, _sim: &mut Sim) -> Result<()> {
        match self.target {
            Some(_) => Ok(()),
            None => Err(Error::TargetNeverMined { target_j: self.target_j }),
        }
    }
}

struct SzPremine {
    target_j: usize,
    k: usize,
    liveness: bool,
    target: Option<BlockId>,
    /// Private tip, or the honest block the private chain restarts from.
    tip: BlockId,
    k_deep: bool,
    done: bool,
}

impl SzPremine {
    fn new(target_j: usize, k: usize, liveness: bool) -> Self {
        Self { target_j, k, liveness, target: None, tip: GENESIS, k_deep: false, done: false }
    }

    fn has_private(&self, sim: &Sim) -> bool {
        !sim.tree().get(self.tip).miner_class.is_honest()
    }

    fn release_if_long(&mut self, sim: &mut Sim) -> Result<()> {
        if self.has_private(sim) && sim.tree().depth(self.tip) >= sim.public_length() {
            sim.publish(self.tip)?;
            sim.switch_all(self.tip);
            self.done = true;
        }
        Ok(())
    }

    fn check(&mut self, sim: &mut Sim) -> Result<()> {
        let Some(target) = self.target else { return Ok(()) };
        if self.done {
            return Ok(());
        }
        let ready = if self.liveness {
            // All of the k consecutive honest blocks from the target have been mined.
            sim.honest_count() + 1 >= self.target_j + self.k
        } else {
            self.k_deep |= sim.is_k_deep(target, self.k);
            self.k_deep
        };
        if ready {
            self.release_if_long(sim)?;
        }
        Ok(())
    }
}

impl Adversary for SzPremine {
    fn on_arrival(&mut self, sim: &mut Sim, _arrival: Arrival) -> Result<()> {
        if self.done {
            return Ok(());
        }
        self.tip = sim.place(self.tip)?;
        self.check(sim)
    }

    fn on_event(&mut self, sim: &mut Sim, event: Observed) -> Result<()> {
        if let Observed::HonestMined { block, j } = event {
            if j < self.target_j {
                // Keep the private chain only while it leads the public chain.
                if sim.tree().depth(self.tip) <= sim.public_length() {
                    self.tip = block;
                }
            } else if j == self.target_j {
                self.target = Some(block);
            }
        }
        self.check(sim)
    }

    fn on_horizon(&mut self, _sim: &mut Sim) -> Result<()> {
        match self.target {
            Some(_) => Ok(()),
            None => Err(Error::TargetNeverMined { target_j: self.target_j }),
        }
    }
}

/// Keeps two public chains level. Each stake slot extends the shorter public tip
/// (published) and the reserve chain on the longer side (private); reserve blocks are
/// released one at a time to answer honest blocks on the other side, and honest nodes
/// are steered by tie-breaking onto the side without a reserve.
#[derive(Default)]
struct Balance {
    tips: [BlockId; 2],
    reserve: Vec<BlockId>,
    reserve_side: usize,
    last_honest_side: usize,
}

impl Balance {
    fn steer(&self, sim: &mut Sim) {
        let t = sim.tree();
        if t.depth(self.tips[0]) != t.depth(self.tips[1]) {
            return;
        }
        let side = if self.reserve.is_empty() {
            1 - self.last_honest_side
        } else {
            1 - self.reserve_side
        };
        sim.switch_all(self.tips[side]);
    }
}

impl Adversary for Balance {
    fn on_arrival(&mut self, sim: &mut Sim, _arrival: Arrival) -> Result<()> {
        let depth = |sim: &Sim, b: BlockId| sim.tree().depth(b);
        let (d0, d1) = (depth(sim, self.tips[0]), depth(sim, self.tips[1]));
        let (s, g) = if d0 < d1 || d0 == d1 && self.reserve_side == 1 && !self.reserve.is_empty() {
            (0, 1)
        } else if d1 < d0 || !self.reserve.is_empty() {
            (1, 0)
        } else {
            (0, 1)
        };
        let gap = depth(sim, self.tips[g]) - depth(sim, self.tips[s]);
        if gap > 0 {
            if !self.reserve.is_empty() && self.reserve_side == s {
                let r = self.reserve.remove(0);
                sim.publish(r)?;
                self.tips[s] = r;
            } else {
                let c = sim.place(self.tips[s])?;
                sim.publish(c)?;
                self.tips[s] = c;
            }
        }
        let parent = match self.reserve.last() {
            Some(&r) => r,
            None => {
                self.reserve_side = g;
                self.tips[g]
            }
        };
        let c = sim.place(parent)?;
        self.reserve.push(c);
        self.steer(sim);
        Ok(())
    }

    fn on_event(&mut self, sim: &mut Sim, event: Observed) -> Result<()> {
        let Observed::HonestMined { block, .. } = event else { return Ok(()) };
        let parent = sim.tree().parent(block);
        let z = if parent == self.tips[0] {
            0
        } else if parent == self.tips[1] {
            1
        } else {
            return Ok(());
        };
        self.tips[z] = block;
        self.last_honest_side = z;
        if !self.reserve.is_empty() {
            if self.reserve_side == z {
                // The reserve forked off a superseded tip.
                self.reserve.clear();
            } else {
                let dz = sim.tree().depth(block);
                while !self.reserve.is_empty() && sim.tree().depth(self.tips[1 - z]) < dz {
                    let r = self.reserve.remove(0);
                    sim.publish(r)?;
                    self.tips[1 - z] = r;
                }
            }
        }
        self.steer(sim);
        Ok(())
    }
}

struct NasPs {
    /// Deepest block of the adversary tree rooted at each honest block.
    deepest: Vec<BlockId>,
}

impl Adversary for NasPs {
    fn on_arrival(&mut self, sim: &mut Sim, _arrival: Arrival) -> Result<()> {
        let mut best = GENESIS;
        for i in 0..self.deepest.len() {
            let c = sim.place(self.deepest[i])?;
            self.deepest[i] = c;
            if sim.tree().depth(c) > sim.tree().depth(best) {
                best = c;
            }
        }
        if sim.tree().depth(best) > sim.public_length() {
            sim.publish(best)?;
        }
        Ok(())
    }

    fn on_event(&mut self, _sim: &mut Sim, event: Observed) -> Result<()> {
        if let Observed::HonestMined { block, .. } = event {
            self.deepest.push(block);
        }
        Ok(())
    }
}
