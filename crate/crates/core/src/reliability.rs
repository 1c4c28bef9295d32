//! Closed-form reliability of every redundancy shape used by the design pipeline.
//!
//! All functions take VNF reliabilities `p_v` in chain order and the
//! reliabilities `p_n` of the nodes hosting the chain. Node reliability is a
//! series factor applied once per distinct host.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// One network function of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VnfDescriptor {
    pub kind: String,
    /// Probability that a single instance is up.
    pub reliability: f64,
    /// Processing rate of a full-capacity instance, requests/s.
    pub service_rate: f64,
    /// vCPU demand of a full-capacity instance.
    pub vcpus: u32,
}

impl VnfDescriptor {
    pub fn new(kind: impl Into<String>, reliability: f64, service_rate: f64, vcpus: u32) -> Self {
        Self {
            kind: kind.into(),
            reliability,
            service_rate,
            vcpus,
        }
    }

    pub fn check(&self) -> Result<()> {
        check_probability("VNF reliability", self.reliability)?;
        if self.vcpus < 1 {
            return Err(domain(format!("VNF {} must demand at least one vCPU", self.kind)));
        }
        if !(self.service_rate.is_finite() && self.service_rate > 0.0) {
            return Err(domain(format!("VNF {} needs a positive service rate", self.kind)));
        }
        Ok(())
    }
}

/// Reliabilities of the substrate nodes a chain is placed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeReliabilitySet(Vec<f64>);

impl NodeReliabilitySet {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(domain("a placed chain needs at least one hosting node"));
        }
        check_all("node reliability", &probabilities)?;
        Ok(Self(probabilities))
    }

    pub fn single(p: f64) -> Result<Self> {
        Self::new(vec![p])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn ceiling(&self) -> f64 {
        reliability_ceiling(&self.0)
    }
}

impl AsRef<[f64]> for NodeReliabilitySet {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn check_probability(what: &str, p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(domain(format!("{what} must lie in (0, 1], got {p}")));
    }
    Ok(())
}

fn check_all(what: &str, ps: &[f64]) -> Result<()> {
    ps.iter().try_for_each(|&p| check_probability(what, p))
}

fn check_inputs(p_v: &[f64], p_n: &[f64]) -> Result<()> {
    if p_v.is_empty() {
        return Err(domain("chain has no VNFs"));
    }
    check_all("VNF reliability", p_v)?;
    check_all("node reliability", p_n)
}

/// `1 - (1 - p)^copies`: a parallel group of identical instances.
pub(crate) fn parallel(p: f64, copies: u32) -> f64 {
    1.0 - (1.0 - p).powi(copies as i32)
}

fn product(ps: &[f64]) -> f64 {
    ps.iter().product()
}

/// Supremum of any chain reliability on these hosts: `prod p_n`.
pub fn reliability_ceiling(p_n: &[f64]) -> f64 {
    product(p_n)
}

/// Bare chain: `prod p_v * prod p_n`.
pub fn chain_reliability(p_v: &[f64], p_n: &[f64]) -> Result<f64> {
    check_inputs(p_v, p_n)?;
    Ok(product(p_v) * product(p_n))
}

/// Every VNF backed by `b_v` dedicated full-capacity standbys.
pub fn dedicated_backup_reliability(p_v: &[f64], backups: &[u32], p_n: &[f64]) -> Result<f64> {
    check_inputs(p_v, p_n)?;
    if p_v.len() != backups.len() {
        return Err(domain(format!(
            "{} VNFs but {} backup counts",
            p_v.len(),
            backups.len()
        )));
    }
    let body: f64 = p_v
        .iter()
        .zip(backups)
        .map(|(&p, &b)| parallel(p, b + 1))
        .product();
    Ok(body * product(p_n))
}

fn parallel_chains(p_v: &[f64], chains: u32, p_n: &[f64]) -> f64 {
    (1.0 - (1.0 - product(p_v)).powi(chains as i32)) * product(p_n)
}

/// Primary chain plus `b_c` complete standby chains.
pub fn chain_backup_reliability(p_v: &[f64], chain_backups: u32, p_n: &[f64]) -> Result<f64> {
    check_inputs(p_v, p_n)?;
    Ok(parallel_chains(p_v, chain_backups + 1, p_n))
}

/// `l` parallel reduced-capacity subchains (M/M/1 setting).
///
/// Structurally identical to a primary with `l - 1` standby chains and computed
/// by the same expression.
pub fn subchain_mm1_reliability(p_v: &[f64], subchains: u32, p_n: &[f64]) -> Result<f64> {
    check_inputs(p_v, p_n)?;
    if subchains < 1 {
        return Err(domain("subchain count must be at least 1"));
    }
    Ok(parallel_chains(p_v, subchains, p_n))
}

/// Every stage a pool of `l` replicas (M/M/m setting).
pub fn subchain_mmm_reliability(p_v: &[f64], subchains: u32, p_n: &[f64]) -> Result<f64> {
    check_inputs(p_v, p_n)?;
    if subchains < 1 {
        return Err(domain("subchain count must be at least 1"));
    }
    let body: f64 = p_v.iter().map(|&p| parallel(p, subchains)).product();
    Ok(body * product(p_n))
}

fn backed_mask(len: usize, backed: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; len];
    for &q in backed {
        if q >= len {
            return Err(domain(format!("VNF index {q} outside a chain of {len}")));
        }
        if mask[q] {
            return Err(domain(format!("VNF index {q} listed twice")));
        }
        mask[q] = true;
    }
    Ok(mask)
}

/// State of the incremental backup loop for parallel M/M/1 subchains.
///
/// `full` subchains carry `copies` instances of every VNF, the next subchain
/// carries `copies` instances of the VNFs in `backed` and `copies - 1` of the
/// rest, and the remaining subchains carry `copies - 1` of every VNF.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedSubchains<'a> {
    pub subchains: u32,
    pub copies: u32,
    pub full: u32,
    pub backed: &'a [usize],
}

/// Reliability of a partially backed-up set of parallel subchains.
///
/// `r = (1 - (1 - h1)^w (1 - h2) (1 - h3)^(l - 1 - w)) * prod p_n` where `h1`,
/// `h2` and `h3` are the reliabilities of a fully backed, the in-progress and
/// an unbacked subchain.
pub fn mixed_mm1_reliability(p_v: &[f64], state: &MixedSubchains<'_>, p_n: &[f64]) -> Result<f64> {
    check_inputs(p_v, p_n)?;
    let MixedSubchains {
        subchains,
        copies: u,
        full: w,
        backed,
    } = *state;
    if subchains < 1 {
        return Err(domain("subchain count must be at least 1"));
    }
    if u < 2 {
        return Err(domain(format!("copies per slot must be at least 2, got {u}")));
    }
    if w >= subchains {
        return Err(domain(format!(
            "{w} fully backed subchains out of {subchains} leaves no subchain in progress"
        )));
    }
    let mask = backed_mask(p_v.len(), backed)?;

    let h1: f64 = p_v.iter().map(|&p| parallel(p, u)).product();
    let h2: f64 = p_v
        .iter()
        .zip(&mask)
        .map(|(&p, &b)| parallel(p, if b { u } else { u - 1 }))
        .product();
    let h3: f64 = p_v.iter().map(|&p| parallel(p, u - 1)).product();

    let down = (1.0 - h1).powi(w as i32) * (1.0 - h2) * (1.0 - h3).powi((subchains - 1 - w) as i32);
    Ok((1.0 - down) * product(p_n))
}

/// Reliability of M/M/m pools of depth `depth`, deepened by one on `backed`.
pub fn mixed_mmm_reliability(p_v: &[f64], depth: u32, backed: &[usize], p_n: &[f64]) -> Result<f64> {
    check_inputs(p_v, p_n)?;
    if depth < 1 {
        return Err(domain("pool depth must be at least 1"));
    }
    let mask = backed_mask(p_v.len(), backed)?;
    let body: f64 = p_v
        .iter()
        .zip(&mask)
        .map(|(&p, &b)| parallel(p, if b { depth + 1 } else { depth }))
        .product();
    Ok(body * product(p_n))
}
