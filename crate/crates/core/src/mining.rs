//! Poisson arrival schedules and the branching random walk of the independent-arrival
//! adversary tree.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, SimRng};

/// Default ceiling on materialized blocks for tree-growth simulations.
pub const DEFAULT_POPULATION_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventClass {
    Honest,
    Adversary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningEvent {
    pub time: f64,
    pub class: EventClass,
    /// Honest node that mines this block; assigned by the engine when absent.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub node: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub lambda_h: f64,
    pub lambda_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningSchedule {
    pub events: Vec<MiningEvent>,
    pub horizon: f64,
    pub rates: Rates,
}

impl MiningSchedule {
    /// Checks strictly increasing times inside `[0, horizon]`.
    pub fn validate(&self) -> Result<()> {
        let mut last = 0.0;
        for (i, e) in self.events.iter().enumerate() {
            if !(e.time > last) {
                return Err(Error::MalformedSchedule(format!(
                    "event {i} at time {} does not follow time {last}",
                    e.time
                )));
            }
            last = e.time;
        }
        if last > self.horizon {
            return Err(Error::MalformedSchedule(format!(
                "event time {last} beyond horizon {}",
                self.horizon
            )));
        }
        Ok(())
    }

    pub fn honest_times(&self) -> Vec<f64> {
        self.times_of(EventClass::Honest)
    }

    pub fn adversary_times(&self) -> Vec<f64> {
        self.times_of(EventClass::Adversary)
    }

    fn times_of(&self, class: EventClass) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.class == class)
            .map(|e| e.time)
            .collect()
    }
}

fn poisson_times(rng: &mut SimRng, rate: f64, horizon: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        t += rng::exp(rng, rate);
        if t > horizon {
            return out;
        }
        out.push(t);
    }
}

/// Two independent Poisson processes merged into one time-ordered schedule.
pub fn sample_poisson_schedule(
    lambda_h: f64,
    lambda_a: f64,
    horizon: f64,
    seed: u64,
) -> Result<MiningSchedule> {
    for (name, r) in [("lambda_h", lambda_h), ("lambda_a", lambda_a)] {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidRate(format!("{name} = {r}")));
        }
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon = {horizon}")));
    }
    let honest = poisson_times(&mut rng::stream(seed, 0), lambda_h, horizon);
    let adversary = poisson_times(&mut rng::stream(seed, 1), lambda_a, horizon);
    let mut events: Vec<MiningEvent> = honest
        .into_iter()
        .map(|time| MiningEvent { time, class: EventClass::Honest, node: None })
        .chain(adversary.into_iter().map(|time| MiningEvent {
            time,
            class: EventClass::Adversary,
            node: None,
        }))
        .collect();
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    // Coincident draws have probability zero but would break strict ordering.
    events.dedup_by(|b, a| a.time == b.time);
    Ok(MiningSchedule {
        events,
        horizon,
        rates: Rates { lambda_h, lambda_a },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrwSample {
    /// Change points `(time, depth)` of `D_0`, starting with `(0, 0)`.
    pub depth_trajectory: Vec<(f64, usize)>,
    /// Materialized blocks, root included.
    pub population: usize,
    /// `first_passage[k - 1]` is the time the first level-`k` block appears.
    pub first_passage: Vec<f64>,
    pub t_max: f64,
}

impl BrwSample {
    pub fn depth_at(&self, t: f64) -> usize {
        let i = self.depth_trajectory.partition_point(|&(s, _)| s <= t);
        if i == 0 {
            0
        } else {
            self.depth_trajectory[i - 1].1
        }
    }

    pub fn first_passage_time(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.first_passage.get(i).copied())
    }
}

#[derive(Debug, Clone, Copy)]
struct Birth {
    time: f64,
    parent_depth: usize,
}

impl PartialEq for Birth {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Birth {}
impl PartialOrd for Birth {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Birth {
    // Reversed so the max-heap pops the earliest birth.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.parent_depth.cmp(&self.parent_depth))
    }
}

/// Expands the tree in birth-time order, calling `on_birth(time, depth)` for each new
/// block until it returns false or the next birth is after `t_max`.
fn grow(
    lambda_a: f64,
    t_max: f64,
    seed: u64,
    cap: usize,
    mut on_birth: impl FnMut(f64, usize) -> bool,
) -> Result<usize> {
    if !(lambda_a > 0.0) || !lambda_a.is_finite() {
        return Err(Error::InvalidRate(format!("lambda_a = {lambda_a}")));
    }
    let mut rng = rng::stream(seed, 2);
    let mut heap = BinaryHeap::new();
    heap.push(Birth { time: rng::exp(&mut rng, lambda_a), parent_depth: 0 });
    let mut population = 1usize;
    while let Some(b) = heap.pop() {
        if b.time > t_max {
            break;
        }
        population += 1;
        if population > cap {
            return Err(Error::PopulationOverflow { cap });
        }
        let depth = b.parent_depth + 1;
        if !on_birth(b.time, depth) {
            break;
        }
        heap.push(Birth { time: b.time + rng::exp(&mut rng, lambda_a), parent_depth: b.parent_depth });
        heap.push(Birth { time: b.time + rng::exp(&mut rng, lambda_a), parent_depth: depth });
    }
    Ok(population)
}

/// Grows the adversary tree from a single root up to `t_max`.
pub fn brw_simulate(lambda_a: f64, t_max: f64, seed: u64) -> Result<BrwSample> {
    brw_simulate_capped(lambda_a, t_max, seed, DEFAULT_POPULATION_CAP)
}

pub fn brw_simulate_capped(lambda_a: f64, t_max: f64, seed: u64, cap: usize) -> Result<BrwSample> {
    if !(t_max >= 0.0) {
        return Err(Error::InvalidArgument(format!("t_max = {t_max}")));
    }
    let mut depth_trajectory = vec![(0.0, 0usize)];
    let mut first_passage = Vec::new();
    let population = grow(lambda_a, t_max, seed, cap, |t, d| {
        if d > depth_trajectory.last().unwrap().1 {
            depth_trajectory.push((t, d));
            first_passage.push(t);
        }
        true
    })?;
    Ok(BrwSample { depth_trajectory, population, first_passage, t_max })
}

/// Time `S*_k` at which the first level-`k` block is born.
pub fn brw_first_passage(lambda_a: f64, k: usize, seed: u64) -> Result<f64> {
    brw_first_passage_capped(lambda_a, k, seed, DEFAULT_POPULATION_CAP)
}

pub fn brw_first_passage_capped(lambda_a: f64, k: usize, seed: u64, cap: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    // Births come out in time order, so the first level-k birth is the minimum and
    // nothing born later is ever expanded.
    let mut hit = None;
    grow(lambda_a, f64::INFINITY, seed, cap, |t, d| {
        if d == k {
            hit = Some(t);
            false
        } else {
            true
        }
    })?;
    Ok(hit.expect("an infinite tree reaches every level"))
}

/// `(e λ_a t / m)^m`, clamped to `[0, 1]`.
pub fn chia_tail_bound(lambda_a: f64, t: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if !(lambda_a >= 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("lambda_a = {lambda_a}, t = {t}")));
    }
    let base = std::f64::consts::E * lambda_a * t / m as f64;
    Ok(base.powi(m as i32).clamp(0.0, 1.0))
}
