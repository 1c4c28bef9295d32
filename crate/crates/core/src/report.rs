//! Orchestration behind the `sfcrel` subcommands and the CSV tables they emit.
//!
//! Every runner returns plain row structs holding full-precision values;
//! rounding happens only in the `write_*` functions. Tables that depend on
//! the scenario and seed alone are kept apart from wall-clock timings, so the
//! former are byte-identical across runs.

use std::env;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::design::{
    design_chain, full_backup_baseline, scb1_baseline, scb2_baseline, ChainSpec, DesignMethod, DesignOutcome,
    BackupPlan, SATURATION_EPSILON,
};
use crate::error::{Error, Result};
use crate::placement::{build_preferences, place, verify_stability, PlacementMethod, PlacementOutcome, PlacementRequest};
use crate::queueing::{chain_response, QueueSetting};
use crate::reliability::{
    chain_backup_reliability, dedicated_backup_reliability, reliability_ceiling, subchain_mm1_reliability,
    subchain_mmm_reliability,
};
use crate::scenario::{DemandModel, Scenario};
use crate::simulate::{des_tandem, exact_structure_reliability, mc_structure_reliability, DesConfig};
use crate::structure::RedundancyStructure;

/// Overrides [`DEFAULT_EXACT_MAX_REQUESTS`].
pub const EXACT_THRESHOLD_ENV: &str = "SFCREL_EXACT_MAX_REQUESTS";
/// Above this many requests the exact solver is skipped.
pub const DEFAULT_EXACT_MAX_REQUESTS: usize = 60;
/// Largest structure the validator enumerates exhaustively.
pub const VALIDATE_EXHAUSTIVE_COMPONENTS: usize = 20;
/// Relative error allowed between simulated and analytical delay.
pub const DES_TOLERANCE: f64 = 0.03;
/// Closed forms vs. exhaustive enumeration.
pub const EXACT_TOLERANCE: f64 = 1e-12;
/// Monte-Carlo agreement band, in standard errors.
pub const MC_SIGMAS: f64 = 4.0;
/// Subchain counts covered by the sweep table.
pub const SWEEP_MAX_SUBCHAINS: u32 = 6;
/// Upper bound on uniform backups tried for the SCB baselines.
const SCB_MAX_BACKUPS: u32 = 64;

/// Reads the exact-solver threshold from [`EXACT_THRESHOLD_ENV`].
pub fn exact_threshold_from_env() -> Result<usize> {
    match env::var(EXACT_THRESHOLD_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("{EXACT_THRESHOLD_ENV}={v:?} is not a non-negative integer"))),
        Err(env::VarError::NotPresent) => Ok(DEFAULT_EXACT_MAX_REQUESTS),
        Err(e) => Err(Error::Domain(format!("{EXACT_THRESHOLD_ENV}: {e}"))),
    }
}

// ---------------------------------------------------------------- design

#[derive(Debug, Clone, PartialEq)]
pub struct DesignRow {
    pub service: String,
    /// `None` for the single-chain baselines, which do not depend on it.
    pub setting: Option<QueueSetting>,
    pub method: DesignMethod,
    pub target: f64,
    pub ceiling: f64,
    /// The committed structure; for infeasible designs the strongest one
    /// reached. `None` only when the design could not start at all.
    pub outcome: Option<DesignOutcome>,
    pub feasible: bool,
    pub note: String,
}

impl DesignRow {
    fn from_result(spec: &ChainSpec, setting: Option<QueueSetting>, method: DesignMethod, r: Result<DesignOutcome>) -> Self {
        let (outcome, feasible, note) = match r {
            Ok(o) => {
                let (f, n) = (o.feasible, o.note.clone());
                (Some(o), f, n)
            }
            Err(Error::Infeasible { reason, best }) => (Some(*best), false, reason),
            Err(e) => (None, false, e.to_string()),
        };
        Self {
            service: spec.service_name.clone(),
            setting,
            method,
            target: spec.reliability_target,
            ceiling: reliability_ceiling(spec.hosts.as_slice()),
            outcome,
            feasible,
            note,
        }
    }
}

/// Smallest uniform backup count reaching the target, or the count at which
/// reliability stops improving.
fn uniform_baseline(spec: &ChainSpec, build: impl Fn(u32) -> Result<DesignOutcome>) -> Result<DesignOutcome> {
    let mut best = build(0)?;
    for b in 1..=SCB_MAX_BACKUPS {
        if best.achieved_reliability >= spec.reliability_target {
            break;
        }
        let next = build(b)?;
        let gain = next.achieved_reliability - best.achieved_reliability;
        best = next;
        if gain < SATURATION_EPSILON {
            break;
        }
    }
    Ok(best)
}

/// Designed rows per setting, then the full-backup, SCB1 and SCB2 baselines
/// once per service. Per-service failures are recorded on the row.
pub fn run_design(scenario: &Scenario, settings: &[QueueSetting]) -> Vec<DesignRow> {
    let specs = scenario.chain_specs();
    let mut rows = Vec::new();
    for &setting in settings {
        for spec in &specs {
            rows.push(DesignRow::from_result(spec, Some(setting), DesignMethod::Subchained, design_chain(spec, setting)));
        }
    }
    for spec in &specs {
        rows.push(DesignRow::from_result(spec, None, DesignMethod::FullBackup, full_backup_baseline(spec)));
        let n = spec.vnfs.len();
        let scb1 = uniform_baseline(spec, |b| scb1_baseline(spec, &vec![b; n]));
        rows.push(DesignRow::from_result(spec, None, DesignMethod::Scb1, scb1));
        let scb2 = uniform_baseline(spec, |b| scb2_baseline(spec, b));
        rows.push(DesignRow::from_result(spec, None, DesignMethod::Scb2, scb2));
    }
    rows
}

/// `1;0;2` for per-VNF counts, `0.1;1.1` for per-subchain rows, `2` for
/// standby chains.
pub fn format_plan(plan: &BackupPlan) -> String {
    let join = |v: &[u32], sep: &str| v.iter().map(u32::to_string).collect::<Vec<_>>().join(sep);
    match plan {
        BackupPlan::Subchains(rows) => rows.iter().map(|r| join(r, ".")).collect::<Vec<_>>().join(";"),
        BackupPlan::Pools(v) => join(v, ";"),
        BackupPlan::Chains(b) => b.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub service: String,
    /// `mm1`, `mmm`, `scb1` or `scb2`.
    pub scheme: &'static str,
    pub subchains: u32,
    pub delay: Option<f64>,
    pub reliability: f64,
    pub vcpus: u64,
    pub redundant_vcpus: u64,
}

/// Delay, reliability and vCPUs for l = 1..=`max_l` under both subchaining
/// settings and the two full-capacity backup schemes of equal replica count
/// (l-1 dedicated standbys per VNF, or l-1 standby chains).
pub fn subchain_sweep(scenario: &Scenario, max_l: u32) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for spec in scenario.chain_specs() {
        spec.check()?;
        let (p_v, p_n, mu, c) = (spec.reliabilities(), spec.hosts.as_slice().to_vec(), spec.service_rates(), spec.vcpu_demands());
        let base = u64::from(spec.base_vcpus());
        let bare_delay = chain_response(QueueSetting::MM1, &mu, spec.arrival_rate, 1).ok();
        for l in 1..=max_l {
            let split = crate::design::vcpu_bill(&c, l, &BackupPlan::Pools(vec![0; c.len()]))?;
            let full = base * u64::from(l);
            let schemes: [(&'static str, Option<f64>, f64, u64); 4] = [
                ("mm1", chain_response(QueueSetting::MM1, &mu, spec.arrival_rate, l).ok(), subchain_mm1_reliability(&p_v, l, &p_n)?, split),
                ("mmm", chain_response(QueueSetting::MMM, &mu, spec.arrival_rate, l).ok(), subchain_mmm_reliability(&p_v, l, &p_n)?, split),
                ("scb1", bare_delay, dedicated_backup_reliability(&p_v, &vec![l - 1; p_v.len()], &p_n)?, full),
                ("scb2", bare_delay, chain_backup_reliability(&p_v, l - 1, &p_n)?, full),
            ];
            for (scheme, delay, reliability, vcpus) in schemes {
                rows.push(SweepRow {
                    service: spec.service_name.clone(),
                    scheme,
                    subchains: l,
                    delay,
                    reliability,
                    vcpus,
                    redundant_vcpus: vcpus.saturating_sub(base),
                });
            }
        }
    }
    Ok(rows)
}

// ------------------------------------------------------------- placement

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Skipped,
    Error,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Skipped => "skipped",
            RunStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaceRow {
    pub method: PlacementMethod,
    pub status: RunStatus,
    pub requests: usize,
    pub total_demand: u64,
    pub outcome: Option<PlacementOutcome>,
    /// Matching methods only.
    pub stable: Option<bool>,
    pub wall: Duration,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct PlaceOptions {
    pub methods: Vec<PlacementMethod>,
    pub exact_max_requests: usize,
}

impl Default for PlaceOptions {
    fn default() -> Self {
        Self {
            methods: PlacementMethod::ALL.to_vec(),
            exact_max_requests: DEFAULT_EXACT_MAX_REQUESTS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlaceReport {
    pub requests: Vec<PlacementRequest>,
    pub node_ids: Vec<String>,
    pub rows: Vec<PlaceRow>,
}

/// Places one request set with every chosen method. Method failures are
/// recorded per row; only request generation can fail the whole run.
pub fn run_place(scenario: &Scenario, setting: QueueSetting, seed: u64, opts: &PlaceOptions) -> Result<PlaceReport> {
    let requests = scenario.requests(setting, seed)?;
    let nodes = scenario.nodes();
    let total_demand: u64 = requests.iter().map(|r| u64::from(r.demand)).sum();
    let prefs = build_preferences(&requests, &nodes);
    let mut rows = Vec::new();
    for &method in &opts.methods {
        let mut row = PlaceRow {
            method,
            status: RunStatus::Ok,
            requests: requests.len(),
            total_demand,
            outcome: None,
            stable: None,
            wall: Duration::ZERO,
            note: String::new(),
        };
        if method == PlacementMethod::ExactIlp && requests.len() > opts.exact_max_requests {
            row.status = RunStatus::Skipped;
            row.note = format!(
                "{} requests exceed the exact-solver threshold of {} ({EXACT_THRESHOLD_ENV})",
                requests.len(),
                opts.exact_max_requests
            );
            rows.push(row);
            continue;
        }
        let start = Instant::now();
        let result = place(method, &requests, &nodes);
        row.wall = start.elapsed();
        match result.and_then(|o| o.validate(&requests, &nodes).map(|_| o)) {
            Ok(o) => {
                if matches!(method, PlacementMethod::Mma | PlacementMethod::Mdm) {
                    row.stable = Some(verify_stability(&o, &requests, &prefs));
                }
                row.outcome = Some(o);
            }
            Err(e) => {
                row.status = RunStatus::Error;
                row.note = e.to_string();
            }
        }
        rows.push(row);
    }
    Ok(PlaceReport {
        requests,
        node_ids: nodes.into_iter().map(|n| n.id).collect(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub requests: usize,
    pub rep: u32,
    pub seed: u64,
    pub row: PlaceRow,
}

/// Placement over growing request counts, `reps` seeds each (`seed`,
/// `seed + 1`, ...). Needs a generated demand model.
pub fn run_bench(
    scenario: &Scenario,
    setting: QueueSetting,
    seed: u64,
    sizes: &[usize],
    reps: u32,
    opts: &PlaceOptions,
) -> Result<Vec<BenchRow>> {
    if matches!(scenario.demands, DemandModel::Explicit { .. }) {
        return Err(Error::Domain("bench needs a uniform or from_design demand model, not explicit demands".into()));
    }
    if sizes.is_empty() || sizes.contains(&0) || reps == 0 {
        return Err(Error::Domain("bench needs non-empty sizes >= 1 and reps >= 1".into()));
    }
    let mut out = Vec::new();
    for &size in sizes {
        let mut sc = scenario.clone();
        sc.request_count = size;
        for rep in 0..reps {
            let s = seed.wrapping_add(u64::from(rep));
            for row in run_place(&sc, setting, s, opts)?.rows {
                out.push(BenchRow { requests: size, rep, seed: s, row });
            }
        }
    }
    Ok(out)
}

// ------------------------------------------------------ oracle checks

#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub service: String,
    pub setting: Option<QueueSetting>,
    pub method: DesignMethod,
    /// `delay_des`, `reliability_exact` or `reliability_mc`.
    pub quantity: &'static str,
    pub analytic: f64,
    pub estimate: f64,
    pub half_width_95: f64,
    pub std_error: f64,
    pub samples: u64,
    /// Agreement band the validator applies, in the quantity's units.
    pub tolerance: f64,
}

impl SimRow {
    pub fn abs_error(&self) -> f64 {
        (self.estimate - self.analytic).abs()
    }

    pub fn passes(&self) -> bool {
        self.abs_error() <= self.tolerance
    }
}

/// Result of one cross-check that could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SimFailure {
    pub service: String,
    pub setting: Option<QueueSetting>,
    pub method: DesignMethod,
    pub message: String,
}

/// Simulates every designed chain and evaluates its redundancy diagram
/// independently. Delay checks use `arrivals` jobs; Monte-Carlo uses the same
/// number of trials. Infeasible designs are checked on their strongest
/// structure.
pub fn run_cross_checks(scenario: &Scenario, settings: &[QueueSetting], seed: u64, arrivals: u64) -> (Vec<SimRow>, Vec<SimFailure>) {
    let specs = scenario.chain_specs();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut stream = 0u64;
    let mut next_seed = || {
        stream += 1;
        seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    };

    let mut jobs: Vec<(&ChainSpec, Option<QueueSetting>, DesignMethod, Result<DesignOutcome>)> = Vec::new();
    for &setting in settings {
        for spec in &specs {
            jobs.push((spec, Some(setting), DesignMethod::Subchained, design_chain(spec, setting)));
        }
    }
    for spec in &specs {
        jobs.push((spec, None, DesignMethod::FullBackup, full_backup_baseline(spec)));
    }

    for (spec, setting, method, result) in jobs {
        let fail = |msg: String| SimFailure {
            service: spec.service_name.clone(),
            setting,
            method,
            message: msg,
        };
        let outcome = match result {
            Ok(o) => o,
            Err(Error::Infeasible { best, .. }) => *best,
            Err(e) => {
                failures.push(fail(e.to_string()));
                continue;
            }
        };
        let row = |quantity, analytic, estimate, half_width_95, std_error, samples, tolerance| SimRow {
            service: spec.service_name.clone(),
            setting,
            method,
            quantity,
            analytic,
            estimate,
            half_width_95,
            std_error,
            samples,
            tolerance,
        };

        if let Some(s) = setting {
            let cfg = DesConfig::new(s, spec.service_rates(), spec.arrival_rate, outcome.subchains, arrivals, next_seed());
            match des_tandem(&cfg) {
                Ok(est) => rows.push(row(
                    "delay_des",
                    outcome.achieved_delay,
                    est.mean,
                    est.half_width_95,
                    est.std_error,
                    est.samples,
                    DES_TOLERANCE * outcome.achieved_delay,
                )),
                Err(e) => failures.push(fail(format!("delay simulation: {e}"))),
            }
        }

        let structure = match RedundancyStructure::from_outcome(&spec.reliabilities(), &outcome, spec.hosts.as_slice()) {
            Ok(s) => s,
            Err(e) => {
                failures.push(fail(format!("structure: {e}")));
                continue;
            }
        };
        let closed = outcome.achieved_reliability;
        if structure.component_count() <= VALIDATE_EXHAUSTIVE_COMPONENTS {
            match exact_structure_reliability(&structure) {
                Ok(v) => rows.push(row("reliability_exact", closed, v, 0.0, 0.0, 0, EXACT_TOLERANCE)),
                Err(e) => failures.push(fail(format!("exhaustive evaluation: {e}"))),
            }
        }
        match mc_structure_reliability(&structure, arrivals, next_seed()) {
            Ok(est) => {
                // the null-hypothesis standard error keeps the band honest
                // when every trial agrees and the sample error is zero
                let null_se = (closed * (1.0 - closed) / arrivals as f64).sqrt();
                rows.push(row(
                    "reliability_mc",
                    closed,
                    est.mean,
                    est.half_width_95,
                    est.std_error,
                    est.samples,
                    MC_SIGMAS * est.std_error.max(null_se),
                ))
            }
            Err(e) => failures.push(fail(format!("monte carlo: {e}"))),
        }
    }
    (rows, failures)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub subject: String,
    pub expected: Option<f64>,
    pub observed: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub detail: String,
}

fn subject(service: &str, setting: Option<QueueSetting>, method: DesignMethod) -> String {
    match setting {
        Some(s) => format!("{service}/{s}/{method}"),
        None => format!("{service}/{method}"),
    }
}

/// Oracle cross-checks for every designed structure, plus validity, ordering
/// and stability checks on one seeded placement.
pub fn run_validate(
    scenario: &Scenario,
    settings: &[QueueSetting],
    seed: u64,
    arrivals: u64,
    opts: &PlaceOptions,
) -> Vec<CheckRow> {
    let (sims, failures) = run_cross_checks(scenario, settings, seed, arrivals);
    let mut checks: Vec<CheckRow> = sims
        .iter()
        .map(|r| CheckRow {
            check: r.quantity.to_string(),
            subject: subject(&r.service, r.setting, r.method),
            expected: Some(r.analytic),
            observed: Some(r.estimate),
            tolerance: Some(r.tolerance),
            pass: r.passes(),
            detail: String::new(),
        })
        .collect();
    checks.extend(failures.into_iter().map(|f| CheckRow {
        check: "evaluation".into(),
        subject: subject(&f.service, f.setting, f.method),
        expected: None,
        observed: None,
        tolerance: None,
        pass: false,
        detail: f.message,
    }));

    let place_subject = format!("{}/seed {seed}", scenario.name);
    match run_place(scenario, scenario.setting, seed, opts) {
        Err(e) => checks.push(CheckRow {
            check: "placement".into(),
            subject: place_subject,
            expected: None,
            observed: None,
            tolerance: None,
            pass: false,
            detail: e.to_string(),
        }),
        Ok(report) => {
            let mut exact = None;
            for row in &report.rows {
                if row.status == RunStatus::Skipped {
                    continue;
                }
                let active = row.outcome.as_ref().map(|o| o.active_nodes as f64);
                checks.push(CheckRow {
                    check: "placement_valid".into(),
                    subject: format!("{place_subject}/{}", row.method),
                    expected: None,
                    observed: active,
                    tolerance: None,
                    pass: row.status == RunStatus::Ok,
                    detail: row.note.clone(),
                });
                // only the modified rule promises stability
                if let Some(stable) = row.stable.filter(|_| row.method == PlacementMethod::Mma) {
                    checks.push(CheckRow {
                        check: "placement_stable".into(),
                        subject: format!("{place_subject}/{}", row.method),
                        expected: None,
                        observed: None,
                        tolerance: None,
                        pass: stable,
                        detail: if stable { String::new() } else { "blocking pair found".into() },
                    });
                }
                if row.method == PlacementMethod::ExactIlp {
                    exact = active;
                }
            }
            if let Some(opt) = exact {
                for row in report.rows.iter().filter(|r| r.method != PlacementMethod::ExactIlp) {
                    if let Some(o) = &row.outcome {
                        checks.push(CheckRow {
                            check: "placement_exact_lower_bound".into(),
                            subject: format!("{place_subject}/{}", row.method),
                            expected: Some(opt),
                            observed: Some(o.active_nodes as f64),
                            tolerance: None,
                            pass: opt <= o.active_nodes as f64,
                            detail: String::new(),
                        });
                    }
                }
            }
        }
    }
    checks
}

// --------------------------------------------------------------- writers

pub const DESIGN_CSV: &str = "design.csv";
pub const SWEEP_CSV: &str = "subchain_sweep.csv";
pub const PLACEMENT_CSV: &str = "placement.csv";
pub const ASSIGNMENT_CSV: &str = "assignment.csv";
pub const PLACE_TIMING_CSV: &str = "place_timing.csv";
pub const SIMULATE_CSV: &str = "simulate.csv";
pub const VALIDATE_CSV: &str = "validate.csv";
pub const BENCH_CSV: &str = "bench_nodes.csv";
pub const BENCH_SUMMARY_CSV: &str = "bench_summary.csv";
pub const BENCH_TIMING_CSV: &str = "bench_timing.csv";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fixed(v: f64, dp: usize) -> String {
    format!("{v:.dp$}")
}

fn ms(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        debug_assert_eq!(r.len(), header.len());
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub const DESIGN_HEADER: [&str; 14] = [
    "service",
    "setting",
    "method",
    "subchains",
    "backups",
    "backup_plan",
    "reliability",
    "delay_ms",
    "vcpus",
    "redundant_vcpus",
    "target",
    "ceiling",
    "feasible",
    "note",
];

pub fn write_design_csv(rows: &[DesignRow], path: &Path) -> Result<()> {
    write_table(
        path,
        &DESIGN_HEADER,
        rows.iter().map(|r| {
            let o = r.outcome.as_ref();
            vec![
                r.service.clone(),
                opt(r.setting),
                r.method.to_string(),
                opt(o.map(|o| o.subchains)),
                opt(o.map(|o| o.total_backup_count)),
                o.map(|o| format_plan(&o.backups)).unwrap_or_default(),
                o.map(|o| fixed(o.achieved_reliability, 6)).unwrap_or_default(),
                o.map(|o| fixed(o.achieved_delay * 1e3, 4)).unwrap_or_default(),
                opt(o.map(|o| o.vcpus)),
                opt(o.map(|o| o.redundant_vcpus)),
                r.target.to_string(),
                fixed(r.ceiling, 6),
                r.feasible.to_string(),
                r.note.clone(),
            ]
        }),
    )
}

pub const SWEEP_HEADER: [&str; 7] = ["service", "scheme", "subchains", "delay_ms", "reliability", "vcpus", "redundant_vcpus"];

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    write_table(
        path,
        &SWEEP_HEADER,
        rows.iter().map(|r| {
            vec![
                r.service.clone(),
                r.scheme.to_string(),
                r.subchains.to_string(),
                r.delay.map(|d| fixed(d * 1e3, 4)).unwrap_or_default(),
                fixed(r.reliability, 6),
                r.vcpus.to_string(),
                r.redundant_vcpus.to_string(),
            ]
        }),
    )
}

pub const PLACEMENT_HEADER: [&str; 9] = [
    "method",
    "status",
    "requests",
    "total_demand",
    "active_nodes",
    "proposals",
    "search_nodes",
    "stable",
    "note",
];

fn placement_cells(r: &PlaceRow) -> Vec<String> {
    let o = r.outcome.as_ref();
    let matcher = matches!(r.method, PlacementMethod::Mma | PlacementMethod::Mdm);
    vec![
        r.method.to_string(),
        r.status.as_str().into(),
        r.requests.to_string(),
        r.total_demand.to_string(),
        opt(o.map(|o| o.active_nodes)),
        opt(o.filter(|_| matcher).map(|o| o.proposal_count)),
        opt(o.filter(|_| r.method == PlacementMethod::ExactIlp).map(|o| o.search_nodes)),
        opt(r.stable),
        r.note.clone(),
    ]
}

pub fn write_placement_csv(report: &PlaceReport, path: &Path) -> Result<()> {
    write_table(path, &PLACEMENT_HEADER, report.rows.iter().map(placement_cells))
}

pub const ASSIGNMENT_HEADER: [&str; 5] = ["method", "request", "service", "demand", "node"];

pub fn write_assignment_csv(report: &PlaceReport, path: &Path) -> Result<()> {
    let rows = report.rows.iter().filter_map(|r| r.outcome.as_ref().map(|o| (r.method, o))).flat_map(|(m, o)| {
        report.requests.iter().zip(&o.assignment).map(move |(q, &n)| {
            vec![
                m.to_string(),
                q.id.clone(),
                q.service.clone().unwrap_or_default(),
                q.demand.to_string(),
                report.node_ids[n].clone(),
            ]
        })
    });
    write_table(path, &ASSIGNMENT_HEADER, rows)
}

pub const PLACE_TIMING_HEADER: [&str; 4] = ["method", "status", "requests", "wall_ms"];

pub fn write_place_timing_csv(report: &PlaceReport, path: &Path) -> Result<()> {
    write_table(
        path,
        &PLACE_TIMING_HEADER,
        report
            .rows
            .iter()
            .map(|r| vec![r.method.to_string(), r.status.as_str().into(), r.requests.to_string(), ms(r.wall)]),
    )
}

pub const SIMULATE_HEADER: [&str; 12] = [
    "service",
    "setting",
    "method",
    "quantity",
    "analytic",
    "estimate",
    "half_width_95",
    "std_error",
    "samples",
    "abs_error",
    "tolerance",
    "agrees",
];

pub fn write_simulate_csv(rows: &[SimRow], failures: &[SimFailure], path: &Path) -> Result<()> {
    let ok = rows.iter().map(|r| {
        vec![
            r.service.clone(),
            opt(r.setting),
            r.method.to_string(),
            r.quantity.into(),
            format!("{:.9}", r.analytic),
            format!("{:.9}", r.estimate),
            format!("{:.3e}", r.half_width_95),
            format!("{:.3e}", r.std_error),
            r.samples.to_string(),
            format!("{:.3e}", r.abs_error()),
            format!("{:.3e}", r.tolerance),
            r.passes().to_string(),
        ]
    });
    let bad = failures.iter().map(|f| {
        let mut v = vec![f.service.clone(), opt(f.setting), f.method.to_string(), format!("error: {}", f.message)];
        v.resize(SIMULATE_HEADER.len(), String::new());
        v[SIMULATE_HEADER.len() - 1] = "false".into();
        v
    });
    write_table(path, &SIMULATE_HEADER, ok.chain(bad))
}

pub const VALIDATE_HEADER: [&str; 7] = ["check", "subject", "expected", "observed", "tolerance", "pass", "detail"];

pub fn write_validate_csv(rows: &[CheckRow], path: &Path) -> Result<()> {
    let num = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
    write_table(
        path,
        &VALIDATE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.check.clone(),
                r.subject.clone(),
                num(r.expected),
                num(r.observed),
                r.tolerance.map(|x| format!("{x:.3e}")).unwrap_or_default(),
                r.pass.to_string(),
                r.detail.clone(),
            ]
        }),
    )
}

pub const BENCH_HEADER: [&str; 11] = [
    "requests",
    "rep",
    "seed",
    "method",
    "status",
    "total_demand",
    "active_nodes",
    "proposals",
    "search_nodes",
    "stable",
    "note",
];

pub fn write_bench_csv(rows: &[BenchRow], path: &Path) -> Result<()> {
    write_table(
        path,
        &BENCH_HEADER,
        rows.iter().map(|b| {
            let cells = placement_cells(&b.row);
            let mut v = vec![b.requests.to_string(), b.rep.to_string(), b.seed.to_string(), cells[0].clone(), cells[1].clone()];
            v.extend_from_slice(&cells[3..]);
            v
        }),
    )
}

pub const BENCH_SUMMARY_HEADER: [&str; 5] = ["requests", "method", "runs", "mean_active_nodes", "mean_proposals"];

/// Per (size, method) means over the successful runs, in input order.
pub fn write_bench_summary_csv(rows: &[BenchRow], path: &Path) -> Result<()> {
    let mut keys: Vec<(usize, PlacementMethod)> = Vec::new();
    for b in rows {
        if !keys.contains(&(b.requests, b.row.method)) {
            keys.push((b.requests, b.row.method));
        }
    }
    write_table(
        path,
        &BENCH_SUMMARY_HEADER,
        keys.into_iter().map(|(size, method)| {
            let done: Vec<&PlacementOutcome> = rows
                .iter()
                .filter(|b| b.requests == size && b.row.method == method)
                .filter_map(|b| b.row.outcome.as_ref())
                .collect();
            let mean = |f: &dyn Fn(&PlacementOutcome) -> f64| {
                if done.is_empty() {
                    String::new()
                } else {
                    fixed(done.iter().map(|o| f(o)).sum::<f64>() / done.len() as f64, 3)
                }
            };
            let matcher = matches!(method, PlacementMethod::Mma | PlacementMethod::Mdm);
            vec![
                size.to_string(),
                method.to_string(),
                done.len().to_string(),
                mean(&|o| o.active_nodes as f64),
                if matcher { mean(&|o| o.proposal_count as f64) } else { String::new() },
            ]
        }),
    )
}

pub const BENCH_TIMING_HEADER: [&str; 5] = ["requests", "rep", "method", "status", "wall_ms"];

pub fn write_bench_timing_csv(rows: &[BenchRow], path: &Path) -> Result<()> {
    write_table(
        path,
        &BENCH_TIMING_HEADER,
        rows.iter().map(|b| {
            vec![
                b.requests.to_string(),
                b.rep.to_string(),
                b.row.method.to_string(),
                b.row.status.as_str().into(),
                ms(b.row.wall),
            ]
        }),
    )
}
