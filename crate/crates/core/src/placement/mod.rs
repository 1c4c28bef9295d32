//! Whole-chain placement onto substrate nodes, minimising active nodes.
//!
//! Every chain (with all its replicas) lands on exactly one node. Four
//! strategies are offered: an exact branch-and-bound, first-fit decreasing,
//! and two deferred-acceptance matchers that differ in how a node treats the
//! chains it has already accepted when a preferred chain arrives.

mod exact;
mod matching;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use exact::{exhaustive_min_active, ilp_exact_place, EXHAUSTIVE_ASSIGNMENT_LIMIT};
pub use matching::{mdm_place, mma_place};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstrateNode {
    pub id: String,
    /// vCPUs.
    pub capacity: u32,
    pub reliability: f64,
}

impl SubstrateNode {
    pub fn new(id: impl Into<String>, capacity: u32, reliability: f64) -> Self {
        Self {
            id: id.into(),
            capacity,
            reliability,
        }
    }

    /// `count` identical nodes named `n1`, `n2`, ...
    pub fn uniform(count: usize, capacity: u32, reliability: f64) -> Vec<Self> {
        (1..=count).map(|i| Self::new(format!("n{i}"), capacity, reliability)).collect()
    }
}

/// One designed chain waiting for a host.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementRequest {
    pub id: String,
    /// Total vCPUs of the designed chain.
    pub demand: u32,
    /// Service type the design came from, if any.
    pub service: Option<String>,
}

impl PlacementRequest {
    pub fn new(id: impl Into<String>, demand: u32) -> Self {
        Self {
            id: id.into(),
            demand,
            service: None,
        }
    }

    /// Requests `s1`, `s2`, ... with the given demands.
    pub fn from_demands(demands: &[u32]) -> Vec<Self> {
        demands
            .iter()
            .enumerate()
            .map(|(i, &d)| Self::new(format!("s{}", i + 1), d))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementMethod {
    ExactIlp,
    Mma,
    Mdm,
    Ffd,
}

impl PlacementMethod {
    pub const ALL: [PlacementMethod; 4] = [
        PlacementMethod::ExactIlp,
        PlacementMethod::Mma,
        PlacementMethod::Mdm,
        PlacementMethod::Ffd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlacementMethod::ExactIlp => "exact",
            PlacementMethod::Mma => "mma",
            PlacementMethod::Mdm => "mdm",
            PlacementMethod::Ffd => "ffd",
        }
    }
}

impl fmt::Display for PlacementMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlacementMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "ilp" | "exact_ilp" => Ok(PlacementMethod::ExactIlp),
            "mma" => Ok(PlacementMethod::Mma),
            "mdm" => Ok(PlacementMethod::Mdm),
            "ffd" => Ok(PlacementMethod::Ffd),
            other => Err(domain(format!("unknown placement method '{other}' (expected exact, mma, mdm or ffd)"))),
        }
    }
}

/// Strict, complete preference orders on both sides of the matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceTables {
    /// For each request, node indices from most to least preferred.
    pub sfc_prefs: Vec<Vec<usize>>,
    /// For each node, request indices from most to least preferred.
    pub node_prefs: Vec<Vec<usize>>,
    sfc_rank: Vec<Vec<usize>>,
    node_rank: Vec<Vec<usize>>,
}

fn inverse(order: &[usize], len: usize) -> Result<Vec<usize>> {
    let mut rank = vec![usize::MAX; len];
    if order.len() != len {
        return Err(domain("preference list is incomplete"));
    }
    for (pos, &x) in order.iter().enumerate() {
        if x >= len || rank[x] != usize::MAX {
            return Err(domain("preference list is not a strict order"));
        }
        rank[x] = pos;
    }
    Ok(rank)
}

impl PreferenceTables {
    /// Validates and indexes explicit preference lists.
    pub fn new(sfc_prefs: Vec<Vec<usize>>, node_prefs: Vec<Vec<usize>>) -> Result<Self> {
        let (s, n) = (sfc_prefs.len(), node_prefs.len());
        let sfc_rank = sfc_prefs.iter().map(|o| inverse(o, n)).collect::<Result<_>>()?;
        let node_rank = node_prefs.iter().map(|o| inverse(o, s)).collect::<Result<_>>()?;
        Ok(Self {
            sfc_prefs,
            node_prefs,
            sfc_rank,
            node_rank,
        })
    }

    /// Position of `node` in the list of `sfc`; lower is better.
    pub fn sfc_rank(&self, sfc: usize, node: usize) -> usize {
        self.sfc_rank[sfc][node]
    }

    /// Position of `sfc` in the list of `node`; lower is better.
    pub fn node_rank(&self, node: usize, sfc: usize) -> usize {
        self.node_rank[node][sfc]
    }
}

/// Nodes favour larger chains (less capacity left idle); chains favour more
/// reliable, then larger nodes. Remaining ties go to input order.
pub fn build_preferences(requests: &[PlacementRequest], nodes: &[SubstrateNode]) -> PreferenceTables {
    let mut by_demand: Vec<usize> = (0..requests.len()).collect();
    by_demand.sort_by(|&a, &b| requests[b].demand.cmp(&requests[a].demand).then(a.cmp(&b)));
    let mut by_quality: Vec<usize> = (0..nodes.len()).collect();
    by_quality.sort_by(|&a, &b| {
        nodes[b]
            .reliability
            .total_cmp(&nodes[a].reliability)
            .then(nodes[b].capacity.cmp(&nodes[a].capacity))
            .then(a.cmp(&b))
    });
    PreferenceTables::new(vec![by_quality; requests.len()], vec![by_demand; nodes.len()])
        .expect("sorted index lists are permutations")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementOutcome {
    pub method: PlacementMethod,
    /// Node index hosting each request, in request order.
    pub assignment: Vec<usize>,
    /// Free vCPUs left on each node.
    pub residuals: Vec<u32>,
    pub active_nodes: usize,
    /// Proposals issued by the matchers; zero for the packers.
    pub proposal_count: u64,
    /// Branch-and-bound nodes visited; zero for the other methods.
    pub search_nodes: u64,
}

impl PlacementOutcome {
    /// Builds an outcome from an explicit assignment, rejecting unknown nodes
    /// and overloaded ones.
    pub fn new(
        method: PlacementMethod,
        requests: &[PlacementRequest],
        nodes: &[SubstrateNode],
        assignment: Vec<usize>,
    ) -> Result<Self> {
        if assignment.len() != requests.len() {
            return Err(domain("assignment does not cover every request"));
        }
        let mut load = vec![0u64; nodes.len()];
        for (r, &n) in requests.iter().zip(&assignment) {
            *load.get_mut(n).ok_or_else(|| domain(format!("request {} assigned to unknown node {n}", r.id)))? +=
                u64::from(r.demand);
        }
        if let Some(i) = (0..nodes.len()).find(|&i| load[i] > u64::from(nodes[i].capacity)) {
            return Err(domain(format!("node {} over capacity", nodes[i].id)));
        }
        Ok(Self::from_assignment(method, requests, nodes, assignment))
    }

    pub(crate) fn from_assignment(
        method: PlacementMethod,
        requests: &[PlacementRequest],
        nodes: &[SubstrateNode],
        assignment: Vec<usize>,
    ) -> Self {
        let mut residuals: Vec<u32> = nodes.iter().map(|n| n.capacity).collect();
        for (r, &n) in requests.iter().zip(&assignment) {
            residuals[n] -= r.demand;
        }
        let mut used = vec![false; nodes.len()];
        assignment.iter().for_each(|&n| used[n] = true);
        Self {
            method,
            assignment,
            residuals,
            active_nodes: used.iter().filter(|&&u| u).count(),
            proposal_count: 0,
            search_nodes: 0,
        }
    }

    /// Checks the placement constraints: one node per request, no node over
    /// capacity, and consistent residuals and active count.
    pub fn validate(&self, requests: &[PlacementRequest], nodes: &[SubstrateNode]) -> Result<()> {
        if self.assignment.len() != requests.len() {
            return Err(domain("assignment does not cover every request"));
        }
        if self.residuals.len() != nodes.len() {
            return Err(domain("residual list does not cover every node"));
        }
        let mut load = vec![0u64; nodes.len()];
        for (r, &n) in requests.iter().zip(&self.assignment) {
            if n >= nodes.len() {
                return Err(domain(format!("request {} assigned to unknown node {n}", r.id)));
            }
            load[n] += u64::from(r.demand);
        }
        for (i, node) in nodes.iter().enumerate() {
            if load[i] > u64::from(node.capacity) {
                return Err(domain(format!("node {} over capacity: {} > {}", node.id, load[i], node.capacity)));
            }
            if u64::from(self.residuals[i]) + load[i] != u64::from(node.capacity) {
                return Err(domain(format!("residual of node {} is inconsistent", node.id)));
            }
        }
        let active = load.iter().filter(|&&l| l > 0).count();
        // zero-demand requests cannot exist, so loaded and hosting nodes coincide
        if active != self.active_nodes {
            return Err(domain("active node count is inconsistent"));
        }
        Ok(())
    }

    /// Requests grouped by hosting node.
    pub fn hosted(&self, node_count: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); node_count];
        for (s, &n) in self.assignment.iter().enumerate() {
            out[n].push(s);
        }
        out
    }
}

/// Rejects empty or oversized demands and instances that cannot fit at all.
pub(crate) fn check_instance(requests: &[PlacementRequest], nodes: &[SubstrateNode]) -> Result<()> {
    let max_capacity = nodes.iter().map(|n| n.capacity).max().unwrap_or(0);
    for r in requests {
        if r.demand == 0 {
            return Err(domain(format!("request {} has zero demand", r.id)));
        }
        if r.demand > max_capacity {
            return Err(Error::Unplaceable {
                request: r.id.clone(),
                demand: r.demand,
                max_capacity,
            });
        }
    }
    let demand: u64 = requests.iter().map(|r| u64::from(r.demand)).sum();
    let capacity: u64 = nodes.iter().map(|n| u64::from(n.capacity)).sum();
    if demand > capacity {
        return Err(Error::CapacityExhausted(format!(
            "total demand {demand} exceeds total capacity {capacity}"
        )));
    }
    Ok(())
}

/// Request indices by demand, largest first, ties in input order.
pub(crate) fn decreasing(requests: &[PlacementRequest]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.sort_by(|&a, &b| requests[b].demand.cmp(&requests[a].demand).then(a.cmp(&b)));
    order
}

/// First-fit decreasing over nodes in index order.
pub fn ffd_place(requests: &[PlacementRequest], nodes: &[SubstrateNode]) -> Result<PlacementOutcome> {
    check_instance(requests, nodes)?;
    let capacities: Vec<u32> = nodes.iter().map(|n| n.capacity).collect();
    let assignment = ffd_assignment(requests, &capacities).ok_or_else(|| {
        Error::CapacityExhausted("first-fit decreasing could not place every request".into())
    })?;
    Ok(PlacementOutcome::from_assignment(PlacementMethod::Ffd, requests, nodes, assignment))
}

/// First-fit decreasing over bins of the given capacities, in order.
pub(crate) fn ffd_assignment(requests: &[PlacementRequest], capacities: &[u32]) -> Option<Vec<usize>> {
    let mut residual = capacities.to_vec();
    let mut assignment = vec![usize::MAX; requests.len()];
    for s in decreasing(requests) {
        let d = requests[s].demand;
        let n = residual.iter().position(|&r| r >= d)?;
        residual[n] -= d;
        assignment[s] = n;
    }
    Some(assignment)
}

/// True iff no request and node would both rather be matched to each other.
///
/// A pair `(s, n)` blocks when `s` ranks `n` above its current host and `n`
/// could take `s` either from free capacity or by dropping chains it ranks
/// below `s`.
pub fn verify_stability(outcome: &PlacementOutcome, requests: &[PlacementRequest], prefs: &PreferenceTables) -> bool {
    let hosted = outcome.hosted(outcome.residuals.len());
    for (s, req) in requests.iter().enumerate() {
        let current = outcome.assignment[s];
        for &n in &prefs.sfc_prefs[s] {
            if n == current {
                break;
            }
            let reclaimable: u64 = hosted[n]
                .iter()
                .filter(|&&x| prefs.node_rank(n, x) > prefs.node_rank(n, s))
                .map(|&x| u64::from(requests[x].demand))
                .sum();
            if u64::from(outcome.residuals[n]) + reclaimable >= u64::from(req.demand) {
                return false;
            }
        }
    }
    true
}

/// Runs one method with default preferences.
pub fn place(method: PlacementMethod, requests: &[PlacementRequest], nodes: &[SubstrateNode]) -> Result<PlacementOutcome> {
    match method {
        PlacementMethod::ExactIlp => ilp_exact_place(requests, nodes),
        PlacementMethod::Ffd => ffd_place(requests, nodes),
        PlacementMethod::Mma => mma_place(requests, nodes, &build_preferences(requests, nodes)),
        PlacementMethod::Mdm => mdm_place(requests, nodes, &build_preferences(requests, nodes)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> (Vec<PlacementRequest>, Vec<SubstrateNode>) {
        (
            PlacementRequest::from_demands(&[15, 10, 5, 20, 30]),
            SubstrateNode::uniform(3, 48, 0.999),
        )
    }

    #[test]
    fn preference_orders() {
        let (r, n) = example();
        let p = build_preferences(&r, &n);
        for list in &p.node_prefs {
            assert_eq!(list, &[4, 3, 0, 1, 2]);
        }
        for list in &p.sfc_prefs {
            assert_eq!(list, &[0, 1, 2]);
        }
        let twins = PlacementRequest::from_demands(&[7, 7]);
        assert_eq!(build_preferences(&twins, &n).node_prefs[0], vec![0, 1]);

        let mixed = vec![
            SubstrateNode::new("a", 10, 0.99),
            SubstrateNode::new("b", 20, 0.99),
            SubstrateNode::new("c", 5, 0.999),
        ];
        assert_eq!(build_preferences(&twins, &mixed).sfc_prefs[0], vec![2, 1, 0]);
    }

    #[test]
    fn explicit_tables_must_be_strict_and_complete() {
        assert!(PreferenceTables::new(vec![vec![0, 0]], vec![vec![0], vec![0]]).is_err());
        assert!(PreferenceTables::new(vec![vec![0]], vec![vec![0], vec![0]]).is_err());
        assert!(PreferenceTables::new(vec![vec![1, 0]], vec![vec![0], vec![0]]).is_ok());
    }

    #[test]
    fn ffd_example() {
        let (r, n) = example();
        let o = ffd_place(&r, &n).unwrap();
        assert_eq!(o.active_nodes, 2);
        assert_eq!(o.assignment, vec![0, 1, 1, 1, 0]);
        o.validate(&r, &n).unwrap();
        let one = ffd_place(&PlacementRequest::from_demands(&[9]), &n).unwrap();
        assert_eq!(one.active_nodes, 1);
    }

    #[test]
    fn instance_errors() {
        let n = SubstrateNode::uniform(2, 48, 0.999);
        assert!(matches!(
            ffd_place(&PlacementRequest::from_demands(&[49]), &n),
            Err(Error::Unplaceable { demand: 49, max_capacity: 48, .. })
        ));
        assert!(matches!(
            ffd_place(&PlacementRequest::from_demands(&[40, 40, 40]), &n),
            Err(Error::CapacityExhausted(_))
        ));
        assert!(ffd_place(&PlacementRequest::from_demands(&[0]), &n).is_err());
    }

    #[test]
    fn validation_catches_broken_outcomes() {
        let (r, n) = example();
        let mut o = ffd_place(&r, &n).unwrap();
        o.active_nodes = 3;
        assert!(o.validate(&r, &n).is_err());
        let packed = PlacementOutcome::from_assignment(PlacementMethod::Ffd, &r[..3], &n, vec![0, 0, 0]);
        assert!(packed.validate(&r[..3], &n).is_ok());
        let mut over = packed.clone();
        over.assignment = vec![0; 5];
        assert!(over.validate(&r, &n).is_err());
    }

    #[test]
    fn stability_detects_a_swapped_pair() {
        let r = PlacementRequest::from_demands(&[30, 30]);
        let n = SubstrateNode::uniform(2, 30, 0.999);
        let p = build_preferences(&r, &n);
        let good = PlacementOutcome::from_assignment(PlacementMethod::Mma, &r, &n, vec![0, 1]);
        assert!(verify_stability(&good, &r, &p));
        // s1 outranks s2 at n1 and wants n1 but was put on n2
        let swapped = PlacementOutcome::from_assignment(PlacementMethod::Mma, &r, &n, vec![1, 0]);
        assert!(!verify_stability(&swapped, &r, &p));
        let empty = PlacementOutcome::from_assignment(PlacementMethod::Mma, &[], &n, vec![]);
        assert!(verify_stability(&empty, &[], &build_preferences(&[], &n)));
    }

    #[test]
    fn method_names_round_trip() {
        for m in PlacementMethod::ALL {
            assert_eq!(m.as_str().parse::<PlacementMethod>().unwrap(), m);
        }
        assert!("simplex".parse::<PlacementMethod>().is_err());
    }
}
