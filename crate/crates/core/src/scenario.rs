//! Scenario files: the service catalogue, the substrate and how placement
//! requests are drawn.
//!
//! Scenarios are JSON documents at [`SCHEMA_VERSION`]. Unknown fields are
//! rejected, and [`Scenario::validate`] reports every violated rule at once.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::{design_chain, ChainSpec};
use crate::error::{Error, Result};
use crate::placement::{PlacementRequest, SubstrateNode};
use crate::queueing::QueueSetting;
use crate::reliability::{NodeReliabilitySet, VnfDescriptor};

pub const SCHEMA_VERSION: u32 = 1;
/// Allowed deviation of the traffic shares' sum from 1.
pub const SHARE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceTemplate {
    pub service_name: String,
    /// Fraction of requests of this type.
    pub traffic_share: f64,
    pub arrival_rate: f64,
    /// Seconds.
    pub delay_budget: f64,
    pub reliability_target: f64,
    pub vnfs: Vec<VnfDescriptor>,
}

/// A flat pool of identical nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstrateSpec {
    pub node_count: usize,
    /// vCPUs per node.
    pub capacity: u32,
    pub reliability: f64,
}

/// Where each placement request's vCPU demand comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DemandModel {
    /// Uniform integer in `[min, max]`, independent of the service type.
    Uniform { min: u32, max: u32 },
    /// The designed chain's vCPU bill for the request's service type.
    FromDesign,
    /// Fixed demands, one per request.
    Explicit { values: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub setting: QueueSetting,
    pub seed: u64,
    pub request_count: usize,
    pub substrate: SubstrateSpec,
    pub demands: DemandModel,
    pub service_catalog: Vec<ServiceTemplate>,
}

fn prob_ok(p: f64) -> bool {
    p > 0.0 && p <= 1.0
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl Scenario {
    /// Every broken rule, in document order. Empty means valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            v.push(format!(
                "schema_version is {}, this build reads {SCHEMA_VERSION}",
                self.schema_version
            ));
        }
        if self.name.trim().is_empty() {
            v.push("name must not be empty".into());
        }
        if self.request_count < 1 {
            v.push("request_count must be at least 1".into());
        }

        let s = &self.substrate;
        if s.node_count < 1 {
            v.push("substrate.node_count must be at least 1".into());
        }
        if s.capacity < 1 {
            v.push("substrate.capacity must be at least 1".into());
        }
        if !prob_ok(s.reliability) {
            v.push(format!("substrate.reliability must lie in (0, 1], got {}", s.reliability));
        }

        match &self.demands {
            DemandModel::Uniform { min, max } => {
                if *min < 1 || min > max {
                    v.push(format!("demands: need 1 <= min <= max, got min {min}, max {max}"));
                }
            }
            DemandModel::FromDesign => {}
            DemandModel::Explicit { values } => {
                if values.len() != self.request_count {
                    v.push(format!(
                        "demands.values has {} entries but request_count is {}",
                        values.len(),
                        self.request_count
                    ));
                }
                if values.contains(&0) {
                    v.push("demands.values must all be at least 1".into());
                }
            }
        }

        if self.service_catalog.is_empty() {
            v.push("service_catalog must not be empty".into());
        }
        let mut names = HashSet::new();
        let mut share_sum = 0.0;
        for (i, t) in self.service_catalog.iter().enumerate() {
            let at = format!("service_catalog[{i}] ({})", t.service_name);
            if t.service_name.trim().is_empty() {
                v.push(format!("service_catalog[{i}]: service_name must not be empty"));
            } else if !names.insert(t.service_name.as_str()) {
                v.push(format!("{at}: duplicate service_name"));
            }
            if !(t.traffic_share.is_finite() && (0.0..=1.0).contains(&t.traffic_share)) {
                v.push(format!("{at}: traffic_share must lie in [0, 1], got {}", t.traffic_share));
            }
            share_sum += t.traffic_share;
            if !positive(t.arrival_rate) {
                v.push(format!("{at}: arrival_rate must be positive"));
            }
            if !positive(t.delay_budget) {
                v.push(format!("{at}: delay_budget must be positive"));
            }
            if !(t.reliability_target > 0.0 && t.reliability_target < 1.0) {
                v.push(format!("{at}: reliability_target must lie in (0, 1), got {}", t.reliability_target));
            }
            if t.vnfs.is_empty() {
                v.push(format!("{at}: vnfs must not be empty"));
            }
            for (j, f) in t.vnfs.iter().enumerate() {
                if !prob_ok(f.reliability) {
                    v.push(format!("{at}.vnfs[{j}]: reliability must lie in (0, 1], got {}", f.reliability));
                }
                if !positive(f.service_rate) {
                    v.push(format!("{at}.vnfs[{j}]: service_rate must be positive"));
                }
                if f.vcpus < 1 {
                    v.push(format!("{at}.vnfs[{j}]: vcpus must be at least 1"));
                }
            }
        }
        if !self.service_catalog.is_empty() && (share_sum - 1.0).abs() > SHARE_TOLERANCE {
            v.push(format!("traffic shares sum to {share_sum}, expected 1"));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Parses and validates a scenario document.
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises") + "\n"
    }

    /// Design inputs for every service, hosted on one substrate node.
    pub fn chain_specs(&self) -> Vec<ChainSpec> {
        self.service_catalog
            .iter()
            .map(|t| ChainSpec {
                service_name: t.service_name.clone(),
                vnfs: t.vnfs.clone(),
                arrival_rate: t.arrival_rate,
                delay_budget: t.delay_budget,
                reliability_target: t.reliability_target,
                hosts: NodeReliabilitySet::single(self.substrate.reliability)
                    .expect("validated substrate reliability"),
            })
            .collect()
    }

    pub fn nodes(&self) -> Vec<SubstrateNode> {
        SubstrateNode::uniform(self.substrate.node_count, self.substrate.capacity, self.substrate.reliability)
    }

    /// Draws `request_count` requests. Service types follow the traffic
    /// shares; demands follow the demand model. Deterministic in `seed`
    /// (ChaCha8).
    ///
    /// With [`DemandModel::FromDesign`] an infeasible design still contributes
    /// the vCPUs of the strongest structure it reached.
    pub fn requests(&self, setting: QueueSetting, seed: u64) -> Result<Vec<PlacementRequest>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shares = WeightedIndex::new(self.service_catalog.iter().map(|t| t.traffic_share))
            .map_err(|e| Error::Validation(vec![format!("traffic shares: {e}")]))?;

        let designed: Vec<u32> = if self.demands == DemandModel::FromDesign {
            self.chain_specs()
                .iter()
                .map(|spec| {
                    let outcome = match design_chain(spec, setting) {
                        Ok(o) => o,
                        Err(Error::Infeasible { best, .. }) => *best,
                        Err(e) => return Err(e),
                    };
                    u32::try_from(outcome.vcpus).map_err(|_| Error::Domain("designed demand overflows u32".into()))
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };

        (0..self.request_count)
            .map(|i| {
                let service = shares.sample(&mut rng);
                let demand = match &self.demands {
                    DemandModel::Uniform { min, max } => rng.random_range(*min..=*max),
                    DemandModel::FromDesign => designed[service],
                    DemandModel::Explicit { values } => values[i],
                };
                Ok(PlacementRequest {
                    id: format!("s{}", i + 1),
                    demand,
                    service: Some(self.service_catalog[service].service_name.clone()),
                })
            })
            .collect()
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Scenario::from_json(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, scenario.to_json())?;
    Ok(())
}

/// The reference setup: five 4-vCPU VNFs at p = 0.9 and mu = 200/s, traffic
/// of 100/s, and four service types on a pool of 56-vCPU nodes at p = 0.999.
pub fn reference_scenario() -> Scenario {
    let chain = |kinds: &[&str]| -> Vec<VnfDescriptor> {
        kinds.iter().map(|k| VnfDescriptor::new(*k, 0.9, 200.0, 4)).collect()
    };
    let service = |name: &str, share: f64, budget: f64, target: f64, kinds: &[&str]| ServiceTemplate {
        service_name: name.into(),
        traffic_share: share,
        arrival_rate: 100.0,
        delay_budget: budget,
        reliability_target: target,
        vnfs: chain(kinds),
    };
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: "reference".into(),
        setting: QueueSetting::MMM,
        seed: 42,
        request_count: 50,
        substrate: SubstrateSpec {
            node_count: 400,
            capacity: 56,
            reliability: 0.999,
        },
        demands: DemandModel::Uniform { min: 20, max: 40 },
        service_catalog: vec![
            service("web", 0.182, 0.5, 0.90, &["NAT", "FW", "TM", "WOC", "IDPS"]),
            service("voip", 0.118, 0.1, 0.999, &["NAT", "FW", "TM", "FW", "NAT"]),
            service("video", 0.699, 0.1, 0.99, &["NAT", "FW", "TM", "VOC", "IDPS"]),
            service("gaming", 0.001, 0.07, 0.99, &["NAT", "FW", "VOC", "WOC", "IDPS"]),
        ],
    }
}
