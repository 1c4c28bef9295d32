//! Chain design: subchaining within the delay budget, then the fewest
//! incremental backups that reach the reliability target.
//!
//! Also provides the three comparison schemes: dedicated per-VNF standbys
//! (SCB1), whole-chain standbys (SCB2) and a greedy full-backup baseline.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::queueing::{chain_response, check_stable, within_budget, QueueSetting};
use crate::reliability::{
    chain_backup_reliability, dedicated_backup_reliability, mixed_mm1_reliability, mixed_mmm_reliability,
    parallel, reliability_ceiling, subchain_mm1_reliability, subchain_mmm_reliability, MixedSubchains,
    NodeReliabilitySet, VnfDescriptor,
};

/// Targets within this distance of the node ceiling are treated as unreachable.
pub const CEILING_EPSILON: f64 = 1e-9;
/// A sweep of backups that improves reliability by less than this counts as saturated.
pub const SATURATION_EPSILON: f64 = 1e-12;
/// Hard stop on backup additions, far beyond any sensible design.
pub const MAX_BACKUPS: u64 = 1_000_000;

/// One service request: the chain and its service-level agreement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub service_name: String,
    pub vnfs: Vec<VnfDescriptor>,
    /// Requests per second.
    pub arrival_rate: f64,
    /// Mean response-time budget in seconds.
    pub delay_budget: f64,
    /// Required probability that the chain is up, in (0, 1).
    pub reliability_target: f64,
    /// Reliabilities of the nodes that will host the chain.
    pub hosts: NodeReliabilitySet,
}

impl ChainSpec {
    pub fn check(&self) -> Result<()> {
        if self.vnfs.is_empty() {
            return Err(domain(format!("service {} has no VNFs", self.service_name)));
        }
        self.vnfs.iter().try_for_each(VnfDescriptor::check)?;
        if !(self.delay_budget.is_finite() && self.delay_budget > 0.0) {
            return Err(domain(format!("delay budget must be positive, got {}", self.delay_budget)));
        }
        if !(self.reliability_target > 0.0 && self.reliability_target < 1.0) {
            return Err(domain(format!(
                "reliability target must lie in (0, 1), got {}",
                self.reliability_target
            )));
        }
        check_stable(&self.service_rates(), self.arrival_rate)
    }

    pub fn reliabilities(&self) -> Vec<f64> {
        self.vnfs.iter().map(|v| v.reliability).collect()
    }

    pub fn service_rates(&self) -> Vec<f64> {
        self.vnfs.iter().map(|v| v.service_rate).collect()
    }

    pub fn vcpu_demands(&self) -> Vec<u32> {
        self.vnfs.iter().map(|v| v.vcpus).collect()
    }

    /// Demand of the unreplicated chain.
    pub fn base_vcpus(&self) -> u32 {
        self.vnfs.iter().map(|v| v.vcpus).sum()
    }

    fn p_n(&self) -> &[f64] {
        self.hosts.as_slice()
    }
}

/// Which scheme produced an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMethod {
    Subchained,
    Scb1,
    Scb2,
    FullBackup,
}

impl DesignMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DesignMethod::Subchained => "subchained",
            DesignMethod::Scb1 => "scb1",
            DesignMethod::Scb2 => "scb2",
            DesignMethod::FullBackup => "full_backup",
        }
    }
}

impl fmt::Display for DesignMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the extra replicas sit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackupPlan {
    /// Extra copies per (subchain, VNF) slot on top of the one primary.
    Subchains(Vec<Vec<u32>>),
    /// Extra pool depth per VNF on top of the subchain count.
    Pools(Vec<u32>),
    /// Number of complete standby chains.
    Chains(u32),
}

impl BackupPlan {
    pub fn total(&self) -> u64 {
        match self {
            BackupPlan::Subchains(rows) => rows.iter().flatten().map(|&e| u64::from(e)).sum(),
            BackupPlan::Pools(extra) => extra.iter().map(|&e| u64::from(e)).sum(),
            BackupPlan::Chains(b) => u64::from(*b),
        }
    }
}

/// Result of the subchaining step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubchainResult {
    pub subchains: u32,
    pub reliability: f64,
    pub delay: f64,
    /// False when even a single chain exceeds the budget.
    pub delay_feasible: bool,
}

/// The structure chosen for one chain and what it achieves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignOutcome {
    pub service_name: String,
    pub setting: QueueSetting,
    pub method: DesignMethod,
    pub subchains: u32,
    pub backups: BackupPlan,
    pub achieved_reliability: f64,
    pub achieved_delay: f64,
    pub total_backup_count: u64,
    pub vcpus: u64,
    /// vCPUs above the bare chain's demand.
    pub redundant_vcpus: u64,
    pub feasible: bool,
    /// Why the outcome is infeasible; empty otherwise.
    pub note: String,
}

fn ceil_div(a: u32, b: u32) -> u64 {
    u64::from(a.div_ceil(b))
}

/// vCPUs of `l` reduced-capacity primaries per VNF plus the replicas in `plan`.
///
/// Each replica, primary or backup, costs `ceil(c_v / l)`.
pub fn vcpu_bill(base_demand: &[u32], subchains: u32, plan: &BackupPlan) -> Result<u64> {
    if subchains < 1 {
        return Err(domain("subchain count must be at least 1"));
    }
    let slot = |c: u32| ceil_div(c, subchains);
    let primaries: u64 = base_demand.iter().map(|&c| slot(c) * u64::from(subchains)).sum();
    let extra: u64 = match plan {
        BackupPlan::Subchains(rows) => {
            let mut sum = 0;
            for row in rows {
                if row.len() != base_demand.len() {
                    return Err(domain("backup row length differs from chain length"));
                }
                sum += row.iter().zip(base_demand).map(|(&e, &c)| u64::from(e) * slot(c)).sum::<u64>();
            }
            sum
        }
        BackupPlan::Pools(extra) => {
            if extra.len() != base_demand.len() {
                return Err(domain("backup count length differs from chain length"));
            }
            extra.iter().zip(base_demand).map(|(&e, &c)| u64::from(e) * slot(c)).sum()
        }
        BackupPlan::Chains(b) => u64::from(*b) * base_demand.iter().map(|&c| slot(c) * u64::from(subchains)).sum::<u64>(),
    };
    Ok(primaries + extra)
}

fn structural_reliability(spec: &ChainSpec, setting: QueueSetting, l: u32) -> Result<f64> {
    let p_v = spec.reliabilities();
    match setting {
        QueueSetting::MM1 => subchain_mm1_reliability(&p_v, l, spec.p_n()),
        QueueSetting::MMM => subchain_mmm_reliability(&p_v, l, spec.p_n()),
    }
}

/// Subchaining step: add subchains while the target is unmet and the delay fits.
pub fn subchain_design(spec: &ChainSpec, setting: QueueSetting) -> Result<SubchainResult> {
    spec.check()?;
    let rates = spec.service_rates();
    let delay = |l| chain_response(setting, &rates, spec.arrival_rate, l);

    let mut out = SubchainResult {
        subchains: 1,
        reliability: structural_reliability(spec, setting, 1)?,
        delay: delay(1)?,
        delay_feasible: true,
    };
    if !within_budget(out.delay, spec.delay_budget) {
        out.delay_feasible = false;
        return Ok(out);
    }
    while out.reliability < spec.reliability_target {
        let next = out.subchains + 1;
        let d = delay(next)?;
        if !within_budget(d, spec.delay_budget) {
            break;
        }
        let r = structural_reliability(spec, setting, next)?;
        if r <= out.reliability {
            break; // saturated in floating point
        }
        out = SubchainResult {
            subchains: next,
            reliability: r,
            delay: d,
            delay_feasible: true,
        };
    }
    Ok(out)
}

/// VNF indices ordered least reliable first, ties by chain position.
fn backup_order(p_v: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p_v.len()).collect();
    order.sort_by(|&a, &b| p_v[a].total_cmp(&p_v[b]).then(a.cmp(&b)));
    order
}

/// Loop state of the incremental backup step, in either setting.
struct BackupLoop<'a> {
    p_v: &'a [f64],
    p_n: &'a [f64],
    setting: QueueSetting,
    l: u32,
    order: Vec<usize>,
    /// Position in `order` of the next VNF to back up.
    j: usize,
    /// MM1: copies per slot in fully backed subchains. MMM: pool depth.
    u: u32,
    /// MM1: number of fully backed subchains.
    w: u32,
    added: u64,
}

impl<'a> BackupLoop<'a> {
    fn new(p_v: &'a [f64], p_n: &'a [f64], setting: QueueSetting, l: u32) -> Self {
        Self {
            p_v,
            p_n,
            setting,
            l,
            order: backup_order(p_v),
            j: 0,
            u: match setting {
                QueueSetting::MM1 => 2,
                QueueSetting::MMM => l,
            },
            w: 0,
            added: 0,
        }
    }

    /// Adds one backup and returns the new reliability.
    fn step(&mut self) -> Result<f64> {
        let backed = &self.order[..=self.j];
        let r = match self.setting {
            QueueSetting::MM1 => {
                let state = MixedSubchains {
                    subchains: self.l,
                    copies: self.u,
                    full: self.w,
                    backed,
                };
                mixed_mm1_reliability(self.p_v, &state, self.p_n)?
            }
            QueueSetting::MMM => mixed_mmm_reliability(self.p_v, self.u, backed, self.p_n)?,
        };
        self.added += 1;
        self.j += 1;
        if self.j == self.p_v.len() {
            self.j = 0;
            match self.setting {
                QueueSetting::MM1 => {
                    self.w += 1;
                    if self.w == self.l {
                        self.w = 0;
                        self.u += 1;
                    }
                }
                QueueSetting::MMM => self.u += 1,
            }
        }
        Ok(r)
    }

    fn plan(&self) -> BackupPlan {
        let in_q = |i: usize| self.order[..self.j].contains(&i);
        let n = self.p_v.len();
        match self.setting {
            QueueSetting::MM1 => BackupPlan::Subchains(
                (0..self.l)
                    .map(|k| {
                        (0..n)
                            .map(|i| {
                                if k < self.w || (k == self.w && in_q(i)) {
                                    self.u - 1
                                } else {
                                    self.u - 2
                                }
                            })
                            .collect()
                    })
                    .collect(),
            ),
            QueueSetting::MMM => {
                BackupPlan::Pools((0..n).map(|i| self.u - self.l + u32::from(in_q(i))).collect())
            }
        }
    }
}

/// Runs `step` until `target` is met, the improvement over one sweep of `sweep`
/// additions saturates, or [`MAX_BACKUPS`] is hit. Returns the final reliability.
fn run_to_target(mut r: f64, target: f64, sweep: usize, mut step: impl FnMut() -> Result<f64>) -> Result<f64> {
    let mut sweep_start = r;
    let mut since = 0usize;
    let mut total = 0u64;
    while r < target && total < MAX_BACKUPS {
        r = step()?;
        total += 1;
        since += 1;
        if since == sweep {
            if r - sweep_start < SATURATION_EPSILON {
                break;
            }
            sweep_start = r;
            since = 0;
        }
    }
    Ok(r)
}

fn ceiling_note(spec: &ChainSpec) -> Option<String> {
    let ceiling = reliability_ceiling(spec.p_n());
    (spec.reliability_target >= ceiling - CEILING_EPSILON).then(|| {
        format!(
            "target {} is not below the node reliability ceiling {}",
            spec.reliability_target, ceiling
        )
    })
}

fn finish(mut outcome: DesignOutcome, spec: &ChainSpec, notes: Vec<String>) -> Result<DesignOutcome> {
    let mut notes = notes;
    if !within_budget(outcome.achieved_delay, spec.delay_budget) {
        notes.push(format!(
            "delay {:.6} s exceeds budget {} s",
            outcome.achieved_delay, spec.delay_budget
        ));
    }
    if outcome.achieved_reliability < spec.reliability_target && notes.is_empty() {
        notes.push(format!(
            "reliability saturated at {} below target {}",
            outcome.achieved_reliability, spec.reliability_target
        ));
    }
    if notes.is_empty() {
        return Ok(outcome);
    }
    outcome.feasible = false;
    outcome.note = notes.join("; ");
    Err(Error::Infeasible {
        reason: outcome.note.clone(),
        best: Box::new(outcome),
    })
}

/// Incremental backup step: backups least-reliable-first on top of `l` subchains.
///
/// Returns [`Error::Infeasible`] carrying the strongest structure reached when
/// the target sits at or above the ceiling or the delay budget is broken.
pub fn guarantee_reliability(spec: &ChainSpec, setting: QueueSetting, l: u32) -> Result<DesignOutcome> {
    spec.check()?;
    if l < 1 {
        return Err(domain("subchain count must be at least 1"));
    }
    let p_v = spec.reliabilities();
    let mut state = BackupLoop::new(&p_v, spec.p_n(), setting, l);
    let start = structural_reliability(spec, setting, l)?;
    let r = run_to_target(start, spec.reliability_target, p_v.len(), || state.step())?;

    let backups = state.plan();
    debug_assert_eq!(backups.total(), state.added);
    let vcpus = vcpu_bill(&spec.vcpu_demands(), l, &backups)?;
    let outcome = DesignOutcome {
        service_name: spec.service_name.clone(),
        setting,
        method: DesignMethod::Subchained,
        subchains: l,
        total_backup_count: backups.total(),
        backups,
        achieved_reliability: r,
        achieved_delay: chain_response(setting, &spec.service_rates(), spec.arrival_rate, l)?,
        vcpus,
        redundant_vcpus: vcpus - u64::from(spec.base_vcpus()),
        feasible: true,
        note: String::new(),
    };
    finish(outcome, spec, ceiling_note(spec).into_iter().collect())
}

/// Subchaining followed by incremental backups.
pub fn design_chain(spec: &ChainSpec, setting: QueueSetting) -> Result<DesignOutcome> {
    let sub = subchain_design(spec, setting)?;
    guarantee_reliability(spec, setting, sub.subchains)
}

fn bare_delay(spec: &ChainSpec) -> Result<f64> {
    chain_response(QueueSetting::MM1, &spec.service_rates(), spec.arrival_rate, 1)
}

fn baseline(
    spec: &ChainSpec,
    method: DesignMethod,
    backups: BackupPlan,
    reliability: f64,
) -> Result<DesignOutcome> {
    let vcpus = vcpu_bill(&spec.vcpu_demands(), 1, &backups)?;
    let met = reliability >= spec.reliability_target;
    let delay = bare_delay(spec)?;
    Ok(DesignOutcome {
        service_name: spec.service_name.clone(),
        setting: QueueSetting::MM1,
        method,
        subchains: 1,
        total_backup_count: backups.total(),
        backups,
        achieved_reliability: reliability,
        achieved_delay: delay,
        vcpus,
        redundant_vcpus: vcpus - u64::from(spec.base_vcpus()),
        feasible: met && within_budget(delay, spec.delay_budget),
        note: if met { String::new() } else { "reliability target not met".into() },
    })
}

/// SCB1: `b_v` full-capacity dedicated standbys per VNF.
///
/// Unlike the designed schemes this reports a fixed configuration, so a
/// missed target is recorded on the outcome rather than returned as an error.
pub fn scb1_baseline(spec: &ChainSpec, backups: &[u32]) -> Result<DesignOutcome> {
    spec.check()?;
    let r = dedicated_backup_reliability(&spec.reliabilities(), backups, spec.p_n())?;
    baseline(spec, DesignMethod::Scb1, BackupPlan::Pools(backups.to_vec()), r)
}

/// SCB2: `b_c` complete full-capacity standby chains.
pub fn scb2_baseline(spec: &ChainSpec, chain_backups: u32) -> Result<DesignOutcome> {
    spec.check()?;
    let r = chain_backup_reliability(&spec.reliabilities(), chain_backups, spec.p_n())?;
    baseline(spec, DesignMethod::Scb2, BackupPlan::Chains(chain_backups), r)
}

/// Greedy full-capacity backups on a single chain: each step backs up the VNF
/// whose replica group is currently least reliable, earlier stage on ties.
pub fn full_backup_baseline(spec: &ChainSpec) -> Result<DesignOutcome> {
    spec.check()?;
    let p_v = spec.reliabilities();
    let mut counts = vec![0u32; p_v.len()];
    let start = dedicated_backup_reliability(&p_v, &counts, spec.p_n())?;
    let r = run_to_target(start, spec.reliability_target, p_v.len(), || {
        let weakest = (0..p_v.len())
            .min_by(|&a, &b| {
                parallel(p_v[a], counts[a] + 1)
                    .total_cmp(&parallel(p_v[b], counts[b] + 1))
                    .then(a.cmp(&b))
            })
            .expect("chain is non-empty");
        counts[weakest] += 1;
        dedicated_backup_reliability(&p_v, &counts, spec.p_n())
    })?;
    let outcome = baseline(spec, DesignMethod::FullBackup, BackupPlan::Pools(counts), r)?;
    finish(outcome, spec, ceiling_note(spec).into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reference_chain(name: &str, budget: f64, target: f64) -> ChainSpec {
        ChainSpec {
            service_name: name.into(),
            vnfs: ["NAT", "FW", "TM", "WOC", "IDPS"]
                .iter()
                .map(|k| VnfDescriptor::new(*k, 0.9, 200.0, 4))
                .collect(),
            arrival_rate: 100.0,
            delay_budget: budget,
            reliability_target: target,
            hosts: NodeReliabilitySet::single(0.999).unwrap(),
        }
    }

    fn web() -> ChainSpec {
        reference_chain("web", 0.5, 0.90)
    }
    fn voip() -> ChainSpec {
        reference_chain("voip", 0.1, 0.999)
    }
    fn video() -> ChainSpec {
        reference_chain("video", 0.1, 0.99)
    }
    fn gaming() -> ChainSpec {
        reference_chain("gaming", 0.07, 0.99)
    }

    #[test]
    fn vcpu_rule() {
        assert_eq!(vcpu_bill(&[4; 5], 3, &BackupPlan::Pools(vec![0; 5])).unwrap(), 30);
        assert_eq!(vcpu_bill(&[4; 5], 1, &BackupPlan::Pools(vec![2; 5])).unwrap(), 60);
        assert_eq!(vcpu_bill(&[4; 5], 1, &BackupPlan::Pools(vec![0; 5])).unwrap(), 20);
        assert_eq!(vcpu_bill(&[4; 5], 3, &BackupPlan::Pools(vec![1; 5])).unwrap(), 40);
        assert_eq!(vcpu_bill(&[4; 5], 2, &BackupPlan::Subchains(vec![vec![0; 5]; 2])).unwrap(), 20);
        assert_eq!(vcpu_bill(&[4; 5], 1, &BackupPlan::Chains(1)).unwrap(), 40);
        assert_eq!(vcpu_bill(&[3, 5, 1], 1, &BackupPlan::Chains(0)).unwrap(), 9);
    }

    #[test]
    fn algorithm1_examples() {
        let r = subchain_design(&web(), QueueSetting::MMM).unwrap();
        assert_eq!(r.subchains, 2);
        assert_abs_diff_eq!(r.reliability, 0.95004, epsilon = 5e-6);

        let r = subchain_design(&web(), QueueSetting::MM1).unwrap();
        assert_eq!(r.subchains, 3);

        // exactly at the 100 ms budget
        let r = subchain_design(&voip(), QueueSetting::MM1).unwrap();
        assert_eq!(r.subchains, 2);
        assert_abs_diff_eq!(r.reliability, 0.83147, epsilon = 5e-6);

        let r = subchain_design(&voip(), QueueSetting::MMM).unwrap();
        assert_eq!(r.subchains, 3);

        let r = subchain_design(&gaming(), QueueSetting::MM1).unwrap();
        assert_eq!(r.subchains, 1);
        assert_abs_diff_eq!(r.reliability, 0.58990, epsilon = 5e-6);
    }

    #[test]
    fn delay_infeasible_at_one_chain() {
        let spec = reference_chain("tight", 0.01, 0.5);
        let r = subchain_design(&spec, QueueSetting::MM1).unwrap();
        assert!(!r.delay_feasible);
        match design_chain(&spec, QueueSetting::MM1) {
            Err(Error::Infeasible { best, reason }) => {
                assert!(reason.contains("delay"));
                assert_eq!(best.subchains, 1);
                assert!(!best.feasible);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn algorithm2_published_rows() {
        let d = design_chain(&video(), QueueSetting::MMM).unwrap();
        assert_eq!((d.subchains, d.total_backup_count, d.vcpus), (3, 0, 30));
        assert_abs_diff_eq!(d.achieved_reliability, 0.994015, epsilon = 5e-6);

        let d = design_chain(&gaming(), QueueSetting::MMM).unwrap();
        assert_eq!((d.subchains, d.total_backup_count, d.vcpus), (2, 5, 30));
        assert_abs_diff_eq!(d.achieved_reliability, 0.994015, epsilon = 5e-6);
        assert_eq!(d.backups, BackupPlan::Pools(vec![1; 5]));

        let d = design_chain(&gaming(), QueueSetting::MM1).unwrap();
        assert_eq!((d.subchains, d.total_backup_count, d.vcpus), (1, 10, 60));
        assert_eq!(d.backups, BackupPlan::Subchains(vec![vec![2; 5]]));

        let d = design_chain(&web(), QueueSetting::MM1).unwrap();
        assert_eq!((d.subchains, d.total_backup_count, d.vcpus), (3, 0, 30));
        let d = design_chain(&web(), QueueSetting::MMM).unwrap();
        assert_eq!((d.subchains, d.total_backup_count, d.vcpus), (2, 0, 20));
    }

    #[test]
    fn voip_is_flagged_at_the_ceiling() {
        for setting in QueueSetting::ALL {
            match design_chain(&voip(), setting) {
                Err(Error::Infeasible { best, reason }) => {
                    assert!(reason.contains("ceiling"), "{reason}");
                    assert!(!best.feasible);
                    assert!(best.achieved_reliability < 0.999);
                    assert!(best.achieved_reliability > 0.998);
                    assert_eq!(best.total_backup_count, best.backups.total());
                }
                other => panic!("expected infeasible, got {other:?}"),
            }
        }
    }

    #[test]
    fn targets_already_met_need_no_backups() {
        let spec = reference_chain("easy", 0.5, 0.5);
        for setting in QueueSetting::ALL {
            let d = design_chain(&spec, setting).unwrap();
            assert_eq!((d.subchains, d.total_backup_count), (1, 0));
        }
        assert_eq!(full_backup_baseline(&spec).unwrap().total_backup_count, 0);
    }

    #[test]
    fn mm1_fills_subchain_zero_first() {
        let spec = reference_chain("probe", 0.5, 0.85);
        let d = guarantee_reliability(&spec, QueueSetting::MM1, 2).unwrap();
        assert_eq!(d.total_backup_count, 1);
        assert_eq!(d.backups, BackupPlan::Subchains(vec![vec![1, 0, 0, 0, 0], vec![0; 5]]));
        assert_abs_diff_eq!(d.achieved_reliability, 0.85563, epsilon = 5e-6);
    }

    #[test]
    fn least_reliable_vnf_is_backed_up_first() {
        let mut spec = reference_chain("skewed", 0.5, 0.6);
        spec.vnfs[3].reliability = 0.8;
        spec.vnfs[1].reliability = 0.8;
        let d = guarantee_reliability(&spec, QueueSetting::MMM, 1).unwrap();
        assert_eq!(d.backups, BackupPlan::Pools(vec![0, 1, 0, 1, 0]));
    }

    #[test]
    fn baselines() {
        let s = scb1_baseline(&web(), &[1; 5]).unwrap();
        assert_abs_diff_eq!(s.achieved_reliability, 0.95004, epsilon = 5e-6);
        assert_eq!(s.vcpus, 40);
        let s = scb2_baseline(&web(), 1).unwrap();
        assert_abs_diff_eq!(s.achieved_reliability, 0.83147, epsilon = 5e-6);
        assert_eq!(s.vcpus, 40);
        assert!(!s.feasible);
        let s = scb2_baseline(&web(), 0).unwrap();
        assert_eq!(s.vcpus, 20);
        assert_abs_diff_eq!(s.achieved_delay, 0.05, epsilon = 1e-12);

        let f = full_backup_baseline(&web()).unwrap();
        assert_eq!((f.total_backup_count, f.vcpus), (5, 40));
        assert_abs_diff_eq!(f.achieved_reliability, 0.95004, epsilon = 5e-6);
        for spec in [video(), gaming()] {
            let f = full_backup_baseline(&spec).unwrap();
            assert_eq!((f.total_backup_count, f.vcpus), (10, 60));
            assert_abs_diff_eq!(f.achieved_reliability, 0.994015, epsilon = 5e-6);
        }
        assert!(matches!(full_backup_baseline(&voip()), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = web();
        spec.arrival_rate = 250.0;
        assert!(matches!(design_chain(&spec, QueueSetting::MM1), Err(Error::Instability { .. })));
        let mut spec = web();
        spec.reliability_target = 1.0;
        assert!(matches!(design_chain(&spec, QueueSetting::MM1), Err(Error::Domain(_))));
        let mut spec = web();
        spec.vnfs.clear();
        assert!(design_chain(&spec, QueueSetting::MM1).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spec_strategy() -> impl Strategy<Value = ChainSpec> {
            (
                prop::collection::vec((0.6f64..0.999, 150.0f64..400.0, 1u32..9), 1..6),
                1.0f64..140.0,
                0.02f64..1.0,
                0.3f64..0.998,
            )
                .prop_map(|(vnfs, lambda, budget, target)| ChainSpec {
                    service_name: "prop".into(),
                    vnfs: vnfs
                        .into_iter()
                        .map(|(p, mu, c)| VnfDescriptor::new("X", p, mu, c))
                        .collect(),
                    arrival_rate: lambda,
                    delay_budget: budget,
                    reliability_target: target,
                    hosts: NodeReliabilitySet::single(0.999).unwrap(),
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn feasible_outcomes_meet_both_slas(spec in spec_strategy(), mm1 in any::<bool>()) {
                let setting = if mm1 { QueueSetting::MM1 } else { QueueSetting::MMM };
                let d = match design_chain(&spec, setting) {
                    Ok(d) => d,
                    Err(Error::Infeasible { best, .. }) => *best,
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                };
                prop_assert_eq!(d.total_backup_count, d.backups.total());
                prop_assert_eq!(d.vcpus, vcpu_bill(&spec.vcpu_demands(), d.subchains, &d.backups).unwrap());
                if d.feasible {
                    prop_assert!(d.achieved_reliability >= spec.reliability_target);
                    prop_assert!(within_budget(d.achieved_delay, spec.delay_budget));
                }
                let p_v = spec.reliabilities();
                let s = crate::structure::RedundancyStructure::from_outcome(&p_v, &d, spec.hosts.as_slice()).unwrap();
                prop_assert_eq!(s.component_count() as u64, u64::from(d.subchains) * p_v.len() as u64 + d.total_backup_count);
            }

            #[test]
            fn reliability_never_drops_across_backups(spec in spec_strategy(), l in 1u32..4, mm1 in any::<bool>()) {
                let setting = if mm1 { QueueSetting::MM1 } else { QueueSetting::MMM };
                let p_v = spec.reliabilities();
                let mut state = BackupLoop::new(&p_v, spec.hosts.as_slice(), setting, l);
                let mut prev = structural_reliability(&spec, setting, l).unwrap();
                for k in 1..=(3 * p_v.len() as u64 * u64::from(l)) {
                    let r = state.step().unwrap();
                    prop_assert!(r >= prev - 1e-15);
                    prop_assert_eq!(state.plan().total(), k);
                    prev = r;
                }
            }

            #[test]
            fn subchained_never_costs_more_than_full_backup(target in 0.5f64..0.995, budget in 0.05f64..1.0) {
                let spec = reference_chain("sweep", budget, target);
                let full = full_backup_baseline(&spec).unwrap();
                for setting in QueueSetting::ALL {
                    if let Ok(d) = design_chain(&spec, setting) {
                        prop_assert!(d.total_backup_count <= full.total_backup_count);
                        prop_assert!(d.vcpus <= full.vcpus);
                    }
                }
            }
        }
    }
}
