//! Python bindings: chain design, placement and the reliability closed forms.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use sfcrel_core::design::{design_chain as core_design, BackupPlan, ChainSpec, DesignOutcome};
use sfcrel_core::placement::{place as core_place, PlacementMethod, PlacementRequest, SubstrateNode};
use sfcrel_core::queueing::QueueSetting;
use sfcrel_core::reliability::{self, NodeReliabilitySet, VnfDescriptor};
use sfcrel_core::{report, scenario, Error};

create_exception!(sfcrel, SfcrelError, PyException, "Base class for sfcrel errors.");
create_exception!(sfcrel, InfeasibleError, SfcrelError, "No structure meets the target; `.best` holds the strongest one reached.");
create_exception!(sfcrel, InstabilityError, SfcrelError, "A queue's arrival rate reaches its service rate.");
create_exception!(sfcrel, CapacityError, SfcrelError, "The requests cannot be packed onto the nodes.");
create_exception!(sfcrel, ScenarioError, SfcrelError, "A scenario document failed to parse or validate.");

fn outcome_dict<'py>(py: Python<'py>, o: &DesignOutcome) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("service", &o.service_name)?;
    d.set_item("setting", o.setting.as_str())?;
    d.set_item("method", o.method.as_str())?;
    d.set_item("subchains", o.subchains)?;
    match &o.backups {
        BackupPlan::Subchains(rows) => d.set_item("backups", rows.clone())?,
        BackupPlan::Pools(extra) => d.set_item("backups", extra.clone())?,
        BackupPlan::Chains(b) => d.set_item("backups", *b)?,
    }
    d.set_item("total_backups", o.total_backup_count)?;
    d.set_item("reliability", o.achieved_reliability)?;
    d.set_item("delay", o.achieved_delay)?;
    d.set_item("vcpus", o.vcpus)?;
    d.set_item("redundant_vcpus", o.redundant_vcpus)?;
    d.set_item("feasible", o.feasible)?;
    d.set_item("note", &o.note)?;
    Ok(d)
}

fn to_py(py: Python<'_>, e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Infeasible { best, .. } => {
            let err = InfeasibleError::new_err(msg);
            match outcome_dict(py, &best) {
                Ok(d) => match err.value(py).setattr("best", d) {
                    Ok(()) => err,
                    Err(e) => e,
                },
                Err(e) => e,
            }
        }
        Error::Instability { .. } => InstabilityError::new_err(msg),
        Error::CapacityExhausted(_) | Error::Unplaceable { .. } => CapacityError::new_err(msg),
        Error::Parse(_) | Error::Validation(_) => ScenarioError::new_err(msg),
        Error::Domain(_) | Error::Size { .. } => PyValueError::new_err(msg),
        Error::Io(_) | Error::Csv(_) => SfcrelError::new_err(msg),
    }
}

fn setting(s: &str) -> PyResult<QueueSetting> {
    s.parse().map_err(|e: Error| PyValueError::new_err(e.to_string()))
}

/// Subchains and backs up one chain.
///
/// `vnfs` is a list of `(kind, reliability, service_rate, vcpus)` tuples.
/// Raises `InfeasibleError` when the target is out of reach.
#[pyfunction]
#[pyo3(signature = (vnfs, arrival_rate, delay_budget, reliability_target, setting="mm1", host_reliability=0.999, name="chain"))]
#[allow(clippy::too_many_arguments)]
fn design_chain<'py>(
    py: Python<'py>,
    vnfs: Vec<(String, f64, f64, u32)>,
    arrival_rate: f64,
    delay_budget: f64,
    reliability_target: f64,
    setting: &str,
    host_reliability: f64,
    name: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = ChainSpec {
        service_name: name.to_string(),
        vnfs: vnfs.into_iter().map(|(k, p, mu, c)| VnfDescriptor::new(k, p, mu, c)).collect(),
        arrival_rate,
        delay_budget,
        reliability_target,
        hosts: NodeReliabilitySet::single(host_reliability).map_err(|e| to_py(py, e))?,
    };
    let outcome = core_design(&spec, self::setting(setting)?).map_err(|e| to_py(py, e))?;
    outcome_dict(py, &outcome)
}

/// Places requests with the given vCPU demands onto nodes of the given
/// capacities. `method` is one of exact, mma, mdm, ffd.
#[pyfunction]
#[pyo3(signature = (demands, capacities, method="mma", node_reliability=0.999))]
fn place<'py>(
    py: Python<'py>,
    demands: Vec<u32>,
    capacities: Vec<u32>,
    method: &str,
    node_reliability: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let method: PlacementMethod = method.parse().map_err(|e: Error| PyValueError::new_err(e.to_string()))?;
    let requests = PlacementRequest::from_demands(&demands);
    let nodes: Vec<SubstrateNode> = capacities
        .iter()
        .enumerate()
        .map(|(i, &c)| SubstrateNode::new(format!("n{}", i + 1), c, node_reliability))
        .collect();
    let o = core_place(method, &requests, &nodes).map_err(|e| to_py(py, e))?;
    let d = PyDict::new(py);
    d.set_item("method", method.as_str())?;
    d.set_item("assignment", o.assignment.clone())?;
    d.set_item("residuals", o.residuals.clone())?;
    d.set_item("active_nodes", o.active_nodes)?;
    d.set_item("proposals", o.proposal_count)?;
    d.set_item("search_nodes", o.search_nodes)?;
    Ok(d)
}

/// Reliability of a bare chain of VNFs on the given hosts.
#[pyfunction]
#[pyo3(signature = (vnf_reliabilities, host_reliabilities=vec![0.999]))]
fn chain_reliability(py: Python<'_>, vnf_reliabilities: Vec<f64>, host_reliabilities: Vec<f64>) -> PyResult<f64> {
    reliability::chain_reliability(&vnf_reliabilities, &host_reliabilities).map_err(|e| to_py(py, e))
}

/// Reliability of a chain split into `subchains` replicas.
#[pyfunction]
#[pyo3(signature = (vnf_reliabilities, subchains, setting="mm1", host_reliabilities=vec![0.999]))]
fn subchain_reliability(
    py: Python<'_>,
    vnf_reliabilities: Vec<f64>,
    subchains: u32,
    setting: &str,
    host_reliabilities: Vec<f64>,
) -> PyResult<f64> {
    let f = match self::setting(setting)? {
        QueueSetting::MM1 => reliability::subchain_mm1_reliability,
        QueueSetting::MMM => reliability::subchain_mmm_reliability,
    };
    f(&vnf_reliabilities, subchains, &host_reliabilities).map_err(|e| to_py(py, e))
}

/// The built-in reference scenario as a JSON document.
#[pyfunction]
fn reference_scenario() -> String {
    scenario::reference_scenario().to_json()
}

/// Designs every service of a scenario (the reference one when `scenario_json`
/// is omitted) and returns one dict per row, baselines included.
#[pyfunction]
#[pyo3(signature = (scenario_json=None, setting=None))]
fn design_scenario<'py>(
    py: Python<'py>,
    scenario_json: Option<&str>,
    setting: Option<&str>,
) -> PyResult<Bound<'py, PyList>> {
    let s = match scenario_json {
        Some(text) => scenario::Scenario::from_json(text).map_err(|e| to_py(py, e))?,
        None => scenario::reference_scenario(),
    };
    let settings = match setting {
        Some(x) => vec![self::setting(x)?],
        None => QueueSetting::ALL.to_vec(),
    };
    let out = PyList::empty(py);
    for row in report::run_design(&s, &settings) {
        let d = match &row.outcome {
            Some(o) => outcome_dict(py, o)?,
            None => PyDict::new(py),
        };
        d.set_item("service", &row.service)?;
        d.set_item("method", row.method.as_str())?;
        d.set_item("target", row.target)?;
        d.set_item("feasible", row.feasible)?;
        d.set_item("note", &row.note)?;
        out.append(d)?;
    }
    Ok(out)
}

#[pymodule]
fn sfcrel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("SfcrelError", py.get_type::<SfcrelError>())?;
    m.add("InfeasibleError", py.get_type::<InfeasibleError>())?;
    m.add("InstabilityError", py.get_type::<InstabilityError>())?;
    m.add("CapacityError", py.get_type::<CapacityError>())?;
    m.add("ScenarioError", py.get_type::<ScenarioError>())?;
    m.add_function(wrap_pyfunction!(design_chain, m)?)?;
    m.add_function(wrap_pyfunction!(place, m)?)?;
    m.add_function(wrap_pyfunction!(chain_reliability, m)?)?;
    m.add_function(wrap_pyfunction!(subchain_reliability, m)?)?;
    m.add_function(wrap_pyfunction!(reference_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(design_scenario, m)?)?;
    Ok(())
}
