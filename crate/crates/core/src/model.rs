//! Blocks and the append-only mother tree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense creation-order index. `0` is the genesis block.
pub type BlockId = usize;

pub const GENESIS: BlockId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinerClass {
    Honest(usize),
    Adversary,
}

impl MinerClass {
    pub fn is_honest(self) -> bool {
        matches!(self, MinerClass::Honest(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    pub parent: BlockId,
    pub miner_class: MinerClass,
    pub mined_at: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blocktree {
    blocks: Vec<Block>,
    children: Vec<Vec<BlockId>>,
    max_depth: usize,
}

impl Default for Blocktree {
    fn default() -> Self {
        new_blocktree()
    }
}

/// A tree holding only the genesis block (honest by convention, mined at time 0).
pub fn new_blocktree() -> Blocktree {
    Blocktree {
        blocks: vec![Block {
            id: GENESIS,
            parent: GENESIS,
            miner_class: MinerClass::Honest(0),
            mined_at: 0.0,
            depth: 0,
        }],
        children: vec![Vec::new()],
        max_depth: 0,
    }
}

impl Blocktree {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// Never true: the genesis block is always present.
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, id: BlockId) -> Result<&Block> {
        self.blocks.get(id).ok_or(Error::UnknownBlock(id))
    }

    pub fn get(&self, id: BlockId) -> &Block {
        &self.blocks[id]
    }

    pub fn depth(&self, id: BlockId) -> usize {
        self.blocks[id].depth
    }

    pub fn parent(&self, id: BlockId) -> BlockId {
        self.blocks[id].parent
    }

    pub fn children(&self, id: BlockId) -> Result<&[BlockId]> {
        self.children
            .get(id)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownBlock(id))
    }

    pub fn last_time(&self) -> f64 {
        self.blocks.last().map_or(0.0, |b| b.mined_at)
    }

    /// Appends a block; `time` must be strictly after the last appended block.
    pub fn append_block(
        &mut self,
        parent: BlockId,
        class: MinerClass,
        time: f64,
    ) -> Result<BlockId> {
        let last = self.last_time();
        if !(time > last) {
            return Err(Error::NonMonotoneTime { time, last });
        }
        self.push(parent, class, time)
    }

    /// Like [`append_block`](Self::append_block) but allows `time` equal to the last
    /// block's time. Used for the simultaneous copies of one proof-of-stake slot.
    pub(crate) fn append_simultaneous(
        &mut self,
        parent: BlockId,
        class: MinerClass,
        time: f64,
    ) -> Result<BlockId> {
        let last = self.last_time();
        if time < last || time.is_nan() {
            return Err(Error::NonMonotoneTime { time, last });
        }
        self.push(parent, class, time)
    }

    fn push(&mut self, parent: BlockId, class: MinerClass, time: f64) -> Result<BlockId> {
        let depth = self
            .blocks
            .get(parent)
            .ok_or(Error::UnknownParent(parent))?
            .depth
            + 1;
        let id = self.blocks.len();
        self.blocks.push(Block {
            id,
            parent,
            miner_class: class,
            mined_at: time,
            depth,
        });
        self.children.push(Vec::new());
        self.children[parent].push(id);
        self.max_depth = self.max_depth.max(depth);
        Ok(id)
    }

    /// Genesis-to-tip path, inclusive of both ends.
    pub fn chain_to_root(&self, tip: BlockId) -> Result<Vec<BlockId>> {
        self.block(tip)?;
        let mut chain = Vec::with_capacity(self.blocks[tip].depth + 1);
        let mut cur = tip;
        loop {
            chain.push(cur);
            if cur == GENESIS {
                break;
            }
            cur = self.blocks[cur].parent;
        }
        chain.reverse();
        Ok(chain)
    }

    /// The ancestor of `id` at depth `depth` (`id` itself when equal).
    pub fn ancestor_at(&self, mut id: BlockId, depth: usize) -> Option<BlockId> {
        if self.blocks[id].depth < depth {
            return None;
        }
        while self.blocks[id].depth > depth {
            id = self.blocks[id].parent;
        }
        Some(id)
    }

    /// True when `anc` lies on the chain from genesis to `id` (inclusive).
    pub fn is_ancestor(&self, anc: BlockId, id: BlockId) -> bool {
        self.ancestor_at(id, self.blocks[anc].depth) == Some(anc)
    }
}

/// Constant-time ancestor queries over a finished tree via DFS entry/exit stamps.
#[derive(Debug, Clone)]
pub struct AncestryIndex {
    tin: Vec<u32>,
    tout: Vec<u32>,
}

impl AncestryIndex {
    pub fn new(tree: &Blocktree) -> Self {
        let n = tree.len();
        let mut tin = vec![0u32; n];
        let mut tout = vec![0u32; n];
        let mut clock = 0u32;
        let mut stack: Vec<(BlockId, usize)> = vec![(GENESIS, 0)];
        tin[GENESIS] = clock;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let kids = &tree.children[node];
            if *next < kids.len() {
                let c = kids[*next];
                *next += 1;
                clock += 1;
                tin[c] = clock;
                stack.push((c, 0));
            } else {
                tout[node] = clock;
                stack.pop();
            }
        }
        Self { tin, tout }
    }

    pub fn is_ancestor(&self, anc: BlockId, id: BlockId) -> bool {
        self.tin[anc] <= self.tin[id] && self.tout[id] <= self.tout[anc]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn genesis_only() {
        let t = new_blocktree();
        assert_eq!(t.len(), 1);
        assert_eq!(t.max_depth(), 0);
        assert_eq!(t.depth(GENESIS), 0);
        assert!(t.children(GENESIS).unwrap().is_empty());
    }

    #[test]
    fn append_and_fork() {
        let mut t = new_blocktree();
        let a = t.append_block(GENESIS, MinerClass::Honest(0), 1.0).unwrap();
        assert_eq!((a, t.depth(a)), (1, 1));
        let b = t.append_block(GENESIS, MinerClass::Adversary, 2.0).unwrap();
        assert_eq!(t.depth(b), 1);
        assert_eq!(t.children(GENESIS).unwrap().len(), 2);
        let c = t.append_block(a, MinerClass::Honest(1), 3.0).unwrap();
        let d = t.append_block(c, MinerClass::Honest(1), 4.0).unwrap();
        assert_eq!(t.max_depth(), 3);
        let chain = t.chain_to_root(d).unwrap();
        assert_eq!(chain, vec![0, a, c, d]);
        assert!(!t.chain_to_root(b).unwrap().contains(&a));
    }

    #[test]
    fn errors() {
        let mut t = new_blocktree();
        assert_eq!(
            t.append_block(5, MinerClass::Adversary, 1.0),
            Err(Error::UnknownParent(5))
        );
        t.append_block(GENESIS, MinerClass::Adversary, 1.0).unwrap();
        assert!(matches!(
            t.append_block(GENESIS, MinerClass::Adversary, 1.0),
            Err(Error::NonMonotoneTime { .. })
        ));
        assert_eq!(t.chain_to_root(9), Err(Error::UnknownBlock(9)));
    }

    #[test]
    fn ancestry_index_matches_walk() {
        let mut t = new_blocktree();
        let parents = [0, 0, 1, 1, 2, 4, 3, 0, 7];
        for (i, &p) in parents.iter().enumerate() {
            t.append_block(p, MinerClass::Adversary, i as f64 + 1.0).unwrap();
        }
        let idx = AncestryIndex::new(&t);
        for a in 0..t.len() {
            for b in 0..t.len() {
                assert_eq!(idx.is_ancestor(a, b), t.is_ancestor(a, b), "{a} {b}");
            }
        }
    }
}
