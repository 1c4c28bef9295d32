//! `sfcrel`: design, place, simulate, validate and benchmark chains from a
//! JSON scenario. Exit status: 0 success, 1 validation failure, 2 input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sfcrel_core::placement::PlacementMethod;
use sfcrel_core::queueing::QueueSetting;
use sfcrel_core::report::{self, PlaceOptions, RunStatus};
use sfcrel_core::scenario::{load_scenario, reference_scenario, Scenario};
use sfcrel_core::Result;

/// `println!` that tolerates a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "sfcrel", version, about = "Reliability-guaranteed service chain design and placement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON; the built-in reference scenario when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Queueing setting; design, simulate and validate run both when omitted,
    /// place and bench use the scenario's.
    #[arg(long)]
    setting: Option<QueueSetting>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_methods(s: &str) -> std::result::Result<PlacementMethod, String> {
    s.parse().map_err(|e: sfcrel_core::Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Subchain and back up every service; writes design.csv and subchain_sweep.csv.
    Design {
        #[command(flatten)]
        common: Common,
    },
    /// Place one seeded request set; writes placement.csv, assignment.csv, place_timing.csv.
    Place {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset of exact, mma, mdm, ffd.
        #[arg(long, value_delimiter = ',', value_parser = parse_methods, default_value = "exact,mma,mdm,ffd")]
        methods: Vec<PlacementMethod>,
    },
    /// Simulate delays and evaluate reliabilities independently; writes simulate.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Jobs per delay simulation and trials per Monte-Carlo estimate.
        #[arg(long, default_value_t = 1_000_000)]
        arrivals: u64,
    },
    /// Cross-check every analytical value; writes validate.csv, exits 1 on any failure.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        arrivals: u64,
        #[arg(long, value_delimiter = ',', value_parser = parse_methods, default_value = "exact,mma,mdm,ffd")]
        methods: Vec<PlacementMethod>,
    },
    /// Placement over growing request counts; writes bench_nodes.csv, bench_summary.csv, bench_timing.csv.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60")]
        sizes: Vec<usize>,
        /// Seeds per size.
        #[arg(long, default_value_t = 5)]
        reps: u32,
        #[arg(long, value_delimiter = ',', value_parser = parse_methods, default_value = "exact,mma,mdm,ffd")]
        methods: Vec<PlacementMethod>,
    },
}

struct Ctx {
    scenario: Scenario,
    setting: Option<QueueSetting>,
    seed: u64,
    out: PathBuf,
}

impl Ctx {
    fn new(c: Common) -> Result<Self> {
        let scenario = match &c.scenario {
            Some(p) => load_scenario(p)?,
            None => reference_scenario(),
        };
        fs::create_dir_all(&c.out)?;
        Ok(Self {
            seed: c.seed.unwrap_or(scenario.seed),
            setting: c.setting,
            out: c.out,
            scenario,
        })
    }

    fn settings(&self) -> Vec<QueueSetting> {
        self.setting.map_or_else(|| QueueSetting::ALL.to_vec(), |s| vec![s])
    }

    fn place_setting(&self) -> QueueSetting {
        self.setting.unwrap_or(self.scenario.setting)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn place_options(methods: Vec<PlacementMethod>) -> Result<PlaceOptions> {
    let mut unique = Vec::new();
    for m in methods {
        if !unique.contains(&m) {
            unique.push(m);
        }
    }
    Ok(PlaceOptions {
        methods: unique,
        exact_max_requests: report::exact_threshold_from_env()?,
    })
}

fn wrote(paths: &[&Path]) {
    for p in paths {
        say!("wrote {}", p.display());
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Design { common } => {
            let ctx = Ctx::new(common)?;
            let rows = report::run_design(&ctx.scenario, &ctx.settings());
            let sweep = report::subchain_sweep(&ctx.scenario, report::SWEEP_MAX_SUBCHAINS)?;
            let (d, s) = (ctx.path(report::DESIGN_CSV), ctx.path(report::SWEEP_CSV));
            report::write_design_csv(&rows, &d)?;
            report::write_sweep_csv(&sweep, &s)?;
            for r in &rows {
                let o = r.outcome.as_ref();
                say!(
                    "{:<10} {:<4} {:<12} l={:<2} backups={:<3} r={:<8} vcpus={:<4} {}",
                    r.service,
                    r.setting.map_or("-", QueueSetting::as_str),
                    r.method.as_str(),
                    o.map_or(0, |o| o.subchains),
                    o.map_or(0, |o| o.total_backup_count),
                    o.map_or_else(String::new, |o| format!("{:.4}", o.achieved_reliability)),
                    o.map_or(0, |o| o.vcpus),
                    if r.feasible { "ok".to_string() } else { format!("INFEASIBLE: {}", r.note) },
                );
            }
            wrote(&[&d, &s]);
        }
        Command::Place { common, methods } => {
            let ctx = Ctx::new(common)?;
            let rep = report::run_place(&ctx.scenario, ctx.place_setting(), ctx.seed, &place_options(methods)?)?;
            let paths = [
                ctx.path(report::PLACEMENT_CSV),
                ctx.path(report::ASSIGNMENT_CSV),
                ctx.path(report::PLACE_TIMING_CSV),
            ];
            report::write_placement_csv(&rep, &paths[0])?;
            report::write_assignment_csv(&rep, &paths[1])?;
            report::write_place_timing_csv(&rep, &paths[2])?;
            for r in &rep.rows {
                match (&r.outcome, r.status) {
                    (Some(o), _) => say!(
                        "{:<6} active_nodes={:<4} proposals={:<6} {:.3} ms",
                        r.method.as_str(),
                        o.active_nodes,
                        o.proposal_count,
                        r.wall.as_secs_f64() * 1e3
                    ),
                    (None, status) => say!("{:<6} {}: {}", r.method.as_str(), status.as_str(), r.note),
                }
            }
            wrote(&[&paths[0], &paths[1], &paths[2]]);
        }
        Command::Simulate { common, arrivals } => {
            let ctx = Ctx::new(common)?;
            let (rows, failures) = report::run_cross_checks(&ctx.scenario, &ctx.settings(), ctx.seed, arrivals);
            let p = ctx.path(report::SIMULATE_CSV);
            report::write_simulate_csv(&rows, &failures, &p)?;
            for f in &failures {
                eprintln!("{}: {}", f.service, f.message);
            }
            wrote(&[&p]);
        }
        Command::Validate { common, arrivals, methods } => {
            let ctx = Ctx::new(common)?;
            let checks = report::run_validate(&ctx.scenario, &ctx.settings(), ctx.seed, arrivals, &place_options(methods)?);
            let p = ctx.path(report::VALIDATE_CSV);
            report::write_validate_csv(&checks, &p)?;
            let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
            for c in &failed {
                eprintln!("FAIL {} {} {}", c.check, c.subject, c.detail);
            }
            say!("{} checks, {} failed", checks.len(), failed.len());
            wrote(&[&p]);
            if !failed.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Bench { common, sizes, reps, methods } => {
            let ctx = Ctx::new(common)?;
            let rows = report::run_bench(&ctx.scenario, ctx.place_setting(), ctx.seed, &sizes, reps, &place_options(methods)?)?;
            let paths = [
                ctx.path(report::BENCH_CSV),
                ctx.path(report::BENCH_SUMMARY_CSV),
                ctx.path(report::BENCH_TIMING_CSV),
            ];
            report::write_bench_csv(&rows, &paths[0])?;
            report::write_bench_summary_csv(&rows, &paths[1])?;
            report::write_bench_timing_csv(&rows, &paths[2])?;
            let errors = rows.iter().filter(|b| b.row.status == RunStatus::Error).count();
            say!("{} runs, {} errors", rows.len(), errors);
            wrote(&[&paths[0], &paths[1], &paths[2]]);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
