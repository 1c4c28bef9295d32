//! Many-to-one deferred acceptance between chains and capacitated nodes.
//!
//! Both matchers run in rounds. At the start of a round every unmatched chain
//! is listed in input order and, if still unmatched when its turn comes,
//! proposes to the best node it is allowed to try. They differ in what a full
//! node does with a preferred proposer:
//!
//! * MMA evicts its least preferred chains one at a time, and only when the
//!   freed capacity will actually admit the proposer. A rejection marks the
//!   node for that chain only until the node's accepted set next changes, and
//!   an evicted chain may come back.
//! * MDM is the classical rule: every less preferred chain is evicted up
//!   front, whether or not that frees enough room, and every rejection or
//!   eviction marks the node for good.

use super::{check_instance, PlacementMethod, PlacementOutcome, PlacementRequest, PreferenceTables, SubstrateNode};
use crate::error::{domain, Error, Result};

/// Shared bookkeeping of a running match.
struct Market<'a> {
    requests: &'a [PlacementRequest],
    nodes: &'a [SubstrateNode],
    prefs: &'a PreferenceTables,
    residual: Vec<u32>,
    accepted: Vec<Vec<usize>>,
    host: Vec<Option<usize>>,
    proposals: u64,
}

impl<'a> Market<'a> {
    fn new(requests: &'a [PlacementRequest], nodes: &'a [SubstrateNode], prefs: &'a PreferenceTables) -> Result<Self> {
        check_instance(requests, nodes)?;
        if prefs.sfc_prefs.len() != requests.len() || prefs.node_prefs.len() != nodes.len() {
            return Err(domain("preference tables do not match the instance"));
        }
        Ok(Self {
            requests,
            nodes,
            prefs,
            residual: nodes.iter().map(|n| n.capacity).collect(),
            accepted: vec![Vec::new(); nodes.len()],
            host: vec![None; requests.len()],
            proposals: 0,
        })
    }

    fn demand(&self, s: usize) -> u32 {
        self.requests[s].demand
    }

    /// Accepted chains at `n` that `n` ranks below `s`, least preferred first.
    fn lesser(&self, n: usize, s: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.accepted[n]
            .iter()
            .copied()
            .filter(|&x| self.prefs.node_rank(n, x) > self.prefs.node_rank(n, s))
            .collect();
        out.sort_by_key(|&x| std::cmp::Reverse(self.prefs.node_rank(n, x)));
        out
    }

    fn accept(&mut self, n: usize, s: usize) {
        self.residual[n] -= self.demand(s);
        self.accepted[n].push(s);
        self.host[s] = Some(n);
    }

    fn evict(&mut self, n: usize, x: usize) {
        self.residual[n] += self.demand(x);
        self.accepted[n].retain(|&y| y != x);
        self.host[x] = None;
    }

    /// Runs rounds until everyone is matched. `propose` returns false when
    /// chain `s` has no node left to try.
    fn run(mut self, method: PlacementMethod, mut propose: impl FnMut(&mut Self, usize) -> Result<bool>) -> Result<PlacementOutcome> {
        let (s_count, n_count) = (self.requests.len() as u64, self.nodes.len() as u64);
        // Generous ceiling; both rules converge far below it in practice.
        let budget = 8 * (s_count + 1) * (s_count + 1) * (n_count + 1);
        loop {
            let waiting: Vec<usize> = (0..self.requests.len()).filter(|&s| self.host[s].is_none()).collect();
            if waiting.is_empty() {
                break;
            }
            for s in waiting {
                if self.host[s].is_some() {
                    continue;
                }
                if !propose(&mut self, s)? {
                    return Err(Error::CapacityExhausted(format!(
                        "request {} was rejected by every node",
                        self.requests[s].id
                    )));
                }
                if self.proposals > budget {
                    return Err(domain(format!("{method} did not converge within {budget} proposals")));
                }
            }
        }
        let assignment = self.host.iter().map(|h| h.expect("loop exits when all are hosted")).collect();
        let mut out = PlacementOutcome::from_assignment(method, self.requests, self.nodes, assignment);
        out.proposal_count = self.proposals;
        Ok(out)
    }
}

/// Modified matching: selective eviction and re-proposal.
pub fn mma_place(requests: &[PlacementRequest], nodes: &[SubstrateNode], prefs: &PreferenceTables) -> Result<PlacementOutcome> {
    let market = Market::new(requests, nodes, prefs)?;
    // version[n] bumps whenever n accepts someone; a mark holds the version
    // it was made at and lapses once the node has changed
    let mut version = vec![0u64; nodes.len()];
    let mut marks: Vec<Vec<Option<u64>>> = vec![vec![None; nodes.len()]; requests.len()];

    market.run(PlacementMethod::Mma, |m, s| {
        let d = m.demand(s);
        let Some(n) = m.prefs.sfc_prefs[s]
            .iter()
            .copied()
            .find(|&n| m.nodes[n].capacity >= d && marks[s][n] != Some(version[n]))
        else {
            return Ok(false);
        };
        m.proposals += 1;

        if m.residual[n] < d {
            let lesser = m.lesser(n, s);
            let reclaimable: u32 = lesser.iter().map(|&x| m.demand(x)).sum();
            if lesser.is_empty() || m.residual[n] + reclaimable < d {
                marks[s][n] = Some(version[n]);
                return Ok(true);
            }
            for x in lesser {
                if m.residual[n] >= d {
                    break;
                }
                m.evict(n, x);
                marks[x][n] = None;
            }
        }
        m.accept(n, s);
        version[n] += 1;
        Ok(true)
    })
}

/// Classical matching: evict every less preferred chain, marks are final.
pub fn mdm_place(requests: &[PlacementRequest], nodes: &[SubstrateNode], prefs: &PreferenceTables) -> Result<PlacementOutcome> {
    let market = Market::new(requests, nodes, prefs)?;
    let mut marked = vec![vec![false; nodes.len()]; requests.len()];

    market.run(PlacementMethod::Mdm, |m, s| {
        let d = m.demand(s);
        let Some(n) = m.prefs.sfc_prefs[s]
            .iter()
            .copied()
            .find(|&n| m.nodes[n].capacity >= d && !marked[s][n])
        else {
            return Ok(false);
        };
        m.proposals += 1;
        marked[s][n] = true;

        if m.residual[n] < d {
            for x in m.lesser(n, s) {
                m.evict(n, x);
                marked[x][n] = true;
            }
        }
        if m.residual[n] >= d {
            m.accept(n, s);
        }
        Ok(true)
    })
}
