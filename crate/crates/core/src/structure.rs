//! Explicit series-parallel component graphs.
//!
//! The closed forms in [`crate::reliability`] each describe one family of
//! shapes. A [`RedundancyStructure`] spells the shape out component by
//! component so that the simulation oracles can evaluate it without trusting
//! any formula.

use serde::{Deserialize, Serialize};

use crate::design::{BackupPlan, DesignOutcome};
use crate::error::{domain, Result};
use crate::reliability::check_probability;

/// A node of a series-parallel reliability diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Block {
    /// A single independently failing component.
    Component(f64),
    /// Up iff every child is up.
    Series(Vec<Block>),
    /// Up iff at least one child is up.
    Parallel(Vec<Block>),
}

impl Block {
    fn replicas(p: f64, copies: u32) -> Block {
        if copies == 1 {
            Block::Component(p)
        } else {
            Block::Parallel(vec![Block::Component(p); copies as usize])
        }
    }

    /// Series of per-VNF parallel groups with `copies[i]` instances of VNF `i`.
    fn staged(p_v: &[f64], copies: impl Iterator<Item = u32>) -> Block {
        Block::Series(p_v.iter().zip(copies).map(|(&p, c)| Block::replicas(p, c)).collect())
    }

    pub fn component_count(&self) -> usize {
        match self {
            Block::Component(_) => 1,
            Block::Series(xs) | Block::Parallel(xs) => xs.iter().map(Block::component_count).sum(),
        }
    }

    /// Leaf probabilities in depth-first order.
    pub fn leaves(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.component_count());
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<f64>) {
        match self {
            Block::Component(p) => out.push(*p),
            Block::Series(xs) | Block::Parallel(xs) => xs.iter().for_each(|x| x.collect_leaves(out)),
        }
    }

    /// Whether the block delivers service given leaf states in depth-first order.
    pub fn is_up(&self, states: &[bool]) -> bool {
        let mut cursor = 0;
        self.eval(states, &mut cursor)
    }

    fn eval(&self, states: &[bool], cursor: &mut usize) -> bool {
        match self {
            Block::Component(_) => {
                let up = states[*cursor];
                *cursor += 1;
                up
            }
            // every child must be visited so the cursor stays aligned
            Block::Series(xs) => xs.iter().fold(true, |acc, x| x.eval(states, cursor) & acc),
            Block::Parallel(xs) => xs.iter().fold(false, |acc, x| x.eval(states, cursor) | acc),
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            Block::Component(p) => check_probability("component reliability", *p),
            Block::Series(xs) | Block::Parallel(xs) => {
                if xs.is_empty() {
                    return Err(domain("series and parallel blocks need at least one child"));
                }
                xs.iter().try_for_each(Block::check)
            }
        }
    }
}

/// A chain's redundancy diagram plus the series factor of its hosting nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundancyStructure {
    pub body: Block,
    pub node_reliabilities: Vec<f64>,
}

impl RedundancyStructure {
    pub fn new(body: Block, node_reliabilities: Vec<f64>) -> Result<Self> {
        body.check()?;
        node_reliabilities
            .iter()
            .try_for_each(|&p| check_probability("node reliability", p))?;
        Ok(Self {
            body,
            node_reliabilities,
        })
    }

    pub fn component_count(&self) -> usize {
        self.body.component_count()
    }

    pub fn node_factor(&self) -> f64 {
        self.node_reliabilities.iter().product()
    }

    pub fn bare_chain(p_v: &[f64], p_n: &[f64]) -> Result<Self> {
        Self::new(Block::staged(p_v, std::iter::repeat(1)), p_n.to_vec())
    }

    /// Each VNF paired with `b_v` full standbys.
    pub fn dedicated_backups(p_v: &[f64], backups: &[u32], p_n: &[f64]) -> Result<Self> {
        if p_v.len() != backups.len() {
            return Err(domain("one backup count per VNF is required"));
        }
        Self::new(Block::staged(p_v, backups.iter().map(|b| b + 1)), p_n.to_vec())
    }

    /// `chains` complete copies of the chain in parallel.
    pub fn parallel_chains(p_v: &[f64], chains: u32, p_n: &[f64]) -> Result<Self> {
        if chains < 1 {
            return Err(domain("at least one chain is required"));
        }
        let chain = Block::staged(p_v, std::iter::repeat(1));
        Self::new(Block::Parallel(vec![chain; chains as usize]), p_n.to_vec())
    }

    /// Per-stage pools; `depths[i]` servers at stage `i`.
    pub fn pools(p_v: &[f64], depths: &[u32], p_n: &[f64]) -> Result<Self> {
        if p_v.len() != depths.len() {
            return Err(domain("one pool depth per VNF is required"));
        }
        if depths.contains(&0) {
            return Err(domain("pool depth must be at least 1"));
        }
        Self::new(Block::staged(p_v, depths.iter().copied()), p_n.to_vec())
    }

    /// Parallel subchains; `copies[k][i]` instances of VNF `i` in subchain `k`.
    pub fn subchains(p_v: &[f64], copies: &[Vec<u32>], p_n: &[f64]) -> Result<Self> {
        if copies.is_empty() {
            return Err(domain("at least one subchain is required"));
        }
        let mut chains = Vec::with_capacity(copies.len());
        for row in copies {
            if row.len() != p_v.len() || row.contains(&0) {
                return Err(domain("each subchain needs a positive copy count per VNF"));
            }
            chains.push(Block::staged(p_v, row.iter().copied()));
        }
        Self::new(Block::Parallel(chains), p_n.to_vec())
    }

    /// The partially backed-up subchain shape: `w` subchains with `u` copies
    /// per VNF, one with `u` copies on `backed` and `u - 1` elsewhere, the rest
    /// with `u - 1`.
    pub fn mixed_mm1(p_v: &[f64], l: u32, u: u32, w: u32, backed: &[usize], p_n: &[f64]) -> Result<Self> {
        if u < 2 || w >= l {
            return Err(domain("mixed subchain shape needs u >= 2 and w < l"));
        }
        let copies: Vec<Vec<u32>> = (0..l)
            .map(|k| {
                (0..p_v.len())
                    .map(|i| match k.cmp(&w) {
                        std::cmp::Ordering::Less => u,
                        std::cmp::Ordering::Equal if backed.contains(&i) => u,
                        _ => u - 1,
                    })
                    .collect()
            })
            .collect();
        Self::subchains(p_v, &copies, p_n)
    }

    /// Pools of depth `l2`, one deeper on `backed`.
    pub fn mixed_mmm(p_v: &[f64], l2: u32, backed: &[usize], p_n: &[f64]) -> Result<Self> {
        let depths: Vec<u32> = (0..p_v.len())
            .map(|i| l2 + u32::from(backed.contains(&i)))
            .collect();
        Self::pools(p_v, &depths, p_n)
    }

    /// The diagram a design outcome commits to.
    pub fn from_outcome(p_v: &[f64], outcome: &DesignOutcome, p_n: &[f64]) -> Result<Self> {
        match &outcome.backups {
            BackupPlan::Subchains(extra) => {
                let copies: Vec<Vec<u32>> = extra
                    .iter()
                    .map(|row| row.iter().map(|e| e + 1).collect())
                    .collect();
                Self::subchains(p_v, &copies, p_n)
            }
            BackupPlan::Pools(extra) => {
                let depths: Vec<u32> = extra.iter().map(|e| outcome.subchains + e).collect();
                Self::pools(p_v, &depths, p_n)
            }
            BackupPlan::Chains(standby) => Self::parallel_chains(p_v, standby + 1, p_n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_evaluation() {
        let s = RedundancyStructure::mixed_mm1(&[0.9; 5], 2, 2, 0, &[0], &[0.999]).unwrap();
        assert_eq!(s.component_count(), 11);
        let mut states = vec![true; 11];
        assert!(s.body.is_up(&states));
        // first VNF of subchain 0 has two copies; losing one is harmless
        states[0] = false;
        assert!(s.body.is_up(&states));
        states[1] = false;
        assert!(s.body.is_up(&states), "subchain 1 still carries traffic");
        states[6] = false;
        assert!(!s.body.is_up(&states));
    }

    #[test]
    fn builders_reject_bad_shapes() {
        assert!(RedundancyStructure::pools(&[0.9], &[0], &[1.0]).is_err());
        assert!(RedundancyStructure::subchains(&[0.9], &[], &[1.0]).is_err());
        assert!(RedundancyStructure::bare_chain(&[1.5], &[1.0]).is_err());
        assert!(RedundancyStructure::mixed_mm1(&[0.9], 2, 1, 0, &[], &[1.0]).is_err());
        assert!(RedundancyStructure::new(Block::Series(vec![]), vec![]).is_err());
    }

    #[test]
    fn single_copy_groups_are_plain_components() {
        let s = RedundancyStructure::bare_chain(&[0.9, 0.8], &[]).unwrap();
        assert_eq!(s.body, Block::Series(vec![Block::Component(0.9), Block::Component(0.8)]));
        assert_eq!(s.node_factor(), 1.0);
    }
}
