//! Exact minimum-active-node placement by branch and bound.
//!
//! Placement of whole chains with a single resource is bin packing, so the
//! search is a bin-packing branch and bound:
//!
//! * items are assigned largest first;
//! * an item that exactly fills an open bin is put there without branching;
//! * when a bin can take at most one more item after the current one, the
//!   largest item that fits is added with it;
//! * open bins with equal residual are interchangeable, as are unopened nodes
//!   of equal capacity, so only one representative of each is tried;
//! * a partial assignment is pruned when a lower bound on its completion
//!   cannot beat the incumbent, which starts as the first-fit-decreasing
//!   packing.
//!
//! With mixed node sizes only the k largest nodes ever need to be used, so
//! the search instead asks, for growing k, whether they can hold everything.

use super::{check_instance, decreasing, ffd_assignment, PlacementMethod, PlacementOutcome, PlacementRequest, SubstrateNode};
use crate::error::{domain, Error, Result};

/// Largest `nodes^requests` the brute-force oracle will enumerate.
pub const EXHAUSTIVE_ASSIGNMENT_LIMIT: u64 = 1 << 24;

/// Martello-Toth L2 bound for items in bins of capacity `cap`.
fn l2_bound(items: &[u32], cap: u32) -> usize {
    let cap64 = u64::from(cap);
    let half = cap / 2;
    let mut ks: Vec<u32> = items.iter().copied().filter(|&w| w <= half).collect();
    ks.push(0);
    ks.sort_unstable();
    ks.dedup();
    let mut best = 0usize;
    for k in ks {
        let (mut n1, mut n2, mut s2, mut s3) = (0usize, 0usize, 0u64, 0u64);
        for &w in items {
            if w > cap - k {
                n1 += 1;
            } else if 2 * w > cap {
                n2 += 1;
                s2 += u64::from(w);
            } else if w >= k {
                s3 += u64::from(w);
            }
        }
        let room = n2 as u64 * cap64 - s2;
        let extra = s3.saturating_sub(room).div_ceil(cap64) as usize;
        best = best.max(n1 + n2 + extra);
    }
    best
}

struct Search {
    /// Demands in decreasing order and the request each came from.
    demand: Vec<u32>,
    origin: Vec<usize>,
    placed: Vec<bool>,
    /// Total demand of the unplaced items.
    unplaced: u64,
    capacity: Vec<u32>,
    /// Common capacity when every node is the same size.
    uniform: Option<u32>,
    max_capacity: u32,
    residual: Vec<u32>,
    opened: Vec<bool>,
    open: Vec<usize>,
    slot: Vec<usize>,
    best: usize,
    best_slot: Option<Vec<usize>>,
    root_bound: usize,
    visited: u64,
}

impl Search {
    fn new(requests: &[PlacementRequest], capacity: Vec<u32>) -> Self {
        let origin = decreasing(requests);
        let demand: Vec<u32> = origin.iter().map(|&s| requests[s].demand).collect();
        let uniform = capacity.first().copied().filter(|&c| capacity.iter().all(|&x| x == c));
        let max_capacity = capacity.iter().copied().max().unwrap_or(0);
        let count = capacity.len();
        Self {
            slot: vec![usize::MAX; demand.len()],
            placed: vec![false; demand.len()],
            unplaced: demand.iter().map(|&d| u64::from(d)).sum(),
            demand,
            origin,
            residual: capacity.clone(),
            opened: vec![false; count],
            open: Vec::new(),
            capacity,
            uniform,
            max_capacity,
            best: count + 1,
            best_slot: None,
            root_bound: 0,
            visited: 0,
        }
    }

    /// Unplaced demands, largest first.
    fn rest(&self) -> impl Iterator<Item = u32> + '_ {
        self.demand.iter().zip(&self.placed).filter(|(_, &p)| !p).map(|(&d, _)| d)
    }

    /// Lower bound on the active nodes of any completion.
    fn bound(&self) -> usize {
        let open = self.open.len();

        // continuous bound: fill open space, then the largest unopened nodes
        let free: u64 = self.open.iter().map(|&n| u64::from(self.residual[n])).sum();
        let mut need = self.unplaced.saturating_sub(free);
        let mut cont = open;
        if need > 0 {
            let mut caps: Vec<u32> = (0..self.capacity.len())
                .filter(|&n| !self.opened[n])
                .map(|n| self.capacity[n])
                .collect();
            caps.sort_unstable_by(|a, b| b.cmp(a));
            for c in caps {
                cont += 1;
                need = need.saturating_sub(u64::from(c));
                if need == 0 {
                    break;
                }
            }
            if need > 0 {
                return usize::MAX;
            }
        }

        // items over half the largest node pairwise exclude each other, so each
        // one that fits no open bin needs a fresh node
        let largest_gap = self.open.iter().map(|&n| self.residual[n]).max().unwrap_or(0);
        let big = self
            .rest()
            .take_while(|&w| 2 * w > self.max_capacity)
            .filter(|&w| w > largest_gap)
            .count();

        let mut lb = cont.max(open + big);
        if let Some(cap) = self.uniform {
            // open bins become items of their current load
            let mut merged: Vec<u32> = self.open.iter().map(|&n| cap - self.residual[n]).collect();
            merged.extend(self.rest());
            lb = lb.max(l2_bound(&merged, cap));
        }
        lb
    }

    fn record(&mut self) {
        if self.open.len() < self.best {
            self.best = self.open.len();
            self.best_slot = Some(self.slot.clone());
        }
    }

    fn put(&mut self, i: usize, n: usize) {
        self.residual[n] -= self.demand[i];
        self.placed[i] = true;
        self.unplaced -= u64::from(self.demand[i]);
        self.slot[i] = n;
    }

    fn take(&mut self, i: usize, n: usize) {
        self.residual[n] += self.demand[i];
        self.placed[i] = false;
        self.unplaced += u64::from(self.demand[i]);
    }

    /// Partner forced next to item `i` in node `n`, if the node can now take
    /// at most one more item.
    ///
    /// Any completion puts at most one item `k` beside `i`; swapping `k` with
    /// the largest unplaced item that fits never breaks feasibility, so that
    /// item may be placed right away.
    fn forced_partner(&self, n: usize) -> Option<usize> {
        let room = self.residual[n];
        let mut smallest = (0..self.demand.len()).rev().filter(|&j| !self.placed[j]).map(|j| self.demand[j]);
        let at_most_one = match (smallest.next(), smallest.next()) {
            (Some(a), Some(b)) => a + b > room,
            _ => true,
        };
        if !at_most_one {
            return None;
        }
        (0..self.demand.len()).find(|&j| !self.placed[j] && self.demand[j] <= room)
    }

    /// Places item `i` on node `n` (opening it if `fresh`), adds any forced
    /// partner, and recurses.
    fn branch(&mut self, i: usize, n: usize, fresh: bool) {
        if fresh {
            self.opened[n] = true;
            self.open.push(n);
        }
        self.put(i, n);
        let partner = self.forced_partner(n);
        if let Some(j) = partner {
            self.put(j, n);
        }
        self.dfs(i + 1);
        if let Some(j) = partner {
            self.take(j, n);
        }
        self.take(i, n);
        if fresh {
            self.opened[n] = false;
            self.open.pop();
        }
    }

    fn done(&self) -> bool {
        self.best <= self.root_bound
    }

    fn dfs(&mut self, from: usize) {
        self.visited += 1;
        let Some(i) = (from..self.demand.len()).find(|&i| !self.placed[i]) else {
            self.record();
            return;
        };
        if self.bound() >= self.best {
            return;
        }
        let d = self.demand[i];

        if let Some(n) = self.open.iter().copied().find(|&n| self.residual[n] == d) {
            self.branch(i, n, false);
            return;
        }

        let mut fits: Vec<usize> = self.open.iter().copied().filter(|&n| self.residual[n] >= d).collect();
        fits.sort_by_key(|&n| (self.residual[n], n));
        fits.dedup_by_key(|n| self.residual[*n]);
        for n in fits {
            self.branch(i, n, false);
            if self.done() {
                return;
            }
        }

        if self.open.len() + 1 >= self.best {
            return;
        }
        let mut fresh: Vec<usize> = Vec::new();
        for n in 0..self.capacity.len() {
            if !self.opened[n] && self.capacity[n] >= d && fresh.iter().all(|&f| self.capacity[f] != self.capacity[n]) {
                fresh.push(n);
            }
        }
        // tightest node first: it is the best fit for this item
        fresh.sort_by_key(|&n| (self.capacity[n], n));
        for n in fresh {
            self.branch(i, n, true);
            if self.done() {
                return;
            }
        }
    }
}

/// Provably minimum number of active nodes.
///
/// Deterministic for a given input order. `search_nodes` on the outcome
/// counts the branch-and-bound nodes visited.
pub fn ilp_exact_place(requests: &[PlacementRequest], nodes: &[SubstrateNode]) -> Result<PlacementOutcome> {
    check_instance(requests, nodes)?;
    // No packing opens more nodes than there are requests, and unopened nodes
    // of equal capacity are interchangeable, so the first `requests.len()` of
    // each capacity class are all the search can ever need.
    let mut kept: Vec<usize> = Vec::new();
    // (capacity, nodes kept); real substrates have few distinct sizes
    let mut per_class: Vec<(u32, usize)> = Vec::new();
    for (n, node) in nodes.iter().enumerate() {
        let k = match per_class.iter().position(|&(c, _)| c == node.capacity) {
            Some(k) => k,
            None => {
                per_class.push((node.capacity, 0));
                per_class.len() - 1
            }
        };
        if per_class[k].1 < requests.len() {
            per_class[k].1 += 1;
            kept.push(n);
        }
    }
    // Largest first. Trading a used node for an unused larger one never
    // hurts, so some optimum uses only a prefix of this order.
    kept.sort_by(|&a, &b| nodes[b].capacity.cmp(&nodes[a].capacity).then(a.cmp(&b)));
    let mut candidates: Vec<u32> = kept.iter().map(|&n| nodes[n].capacity).collect();

    let incumbent = ffd_assignment(requests, &candidates).map(|ffd| {
        let used = ffd.iter().max().map_or(0, |&n| n + 1);
        (used, ffd)
    });
    let mixed = candidates.iter().any(|&c| c != candidates[0]);
    if let (true, Some((used, _))) = (mixed, &incumbent) {
        // FFD fills a prefix too; anything better fits in a shorter one
        candidates.truncate(used - 1);
    }

    let mut search = Search::new(requests, candidates);
    search.root_bound = search.bound();
    if let Some((used, ffd)) = &incumbent {
        search.best = *used;
        if !mixed {
            search.best_slot = Some(search.origin.iter().map(|&s| ffd[s]).collect());
        }
    }
    if !search.done() && !search.capacity.is_empty() {
        search.dfs(0);
    }
    let visited = search.visited;
    let slot = match (search.best_slot.take(), incumbent) {
        (Some(slot), _) => Some(slot),
        (None, Some((_, ffd))) => Some(search.origin.iter().map(|&s| ffd[s]).collect()),
        (None, None) => None,
    };

    let slot = slot.ok_or_else(|| Error::CapacityExhausted("no packing of the requests exists".into()))?;
    let mut assignment = vec![0; requests.len()];
    for (i, &n) in slot.iter().enumerate() {
        assignment[search.origin[i]] = kept[n];
    }
    let mut out = PlacementOutcome::from_assignment(PlacementMethod::ExactIlp, requests, nodes, assignment);
    out.search_nodes = visited;
    Ok(out)
}

/// Minimum active nodes by trying every assignment. Test oracle for small
/// instances; `None` when nothing fits.
pub fn exhaustive_min_active(requests: &[PlacementRequest], nodes: &[SubstrateNode]) -> Result<Option<usize>> {
    let total = (nodes.len() as u64).checked_pow(requests.len() as u32);
    if !matches!(total, Some(t) if t <= EXHAUSTIVE_ASSIGNMENT_LIMIT) {
        return Err(domain("instance too large for exhaustive enumeration"));
    }
    let mut assignment = vec![0usize; requests.len()];
    let mut best = None;
    'outer: loop {
        let mut load = vec![0u32; nodes.len()];
        let mut ok = true;
        for (r, &n) in requests.iter().zip(&assignment) {
            load[n] += r.demand;
            ok &= load[n] <= nodes[n].capacity;
        }
        if ok {
            let used = load.iter().filter(|&&l| l > 0).count();
            best = Some(best.map_or(used, |b: usize| b.min(used)));
        }
        // odometer increment
        for digit in assignment.iter_mut() {
            *digit += 1;
            if *digit < nodes.len() {
                continue 'outer;
            }
            *digit = 0;
        }
        break;
    }
    Ok(best)
}
