//! Command-line front end.
//!
//! Subcommands: `validate`, `partition`, `analyze`, `fluctuate`,
//! `simulate`. Exit codes: 0 success, 1 for mathematically negative answers
//! (no partition, no deterministic limit), 2 for input or processing
//! errors. JSON output (`--json`) is compact, schema-versioned, and numbers
//! round-trip at full precision; human output rounds to six decimals.
//!
//! `URNLAB_THREADS` caps the ensemble thread pool (0 or unset = automatic).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::fluctuation;
use crate::limits;
use crate::netmodel::{self, DerivedMatrices, NetworkSpec, NodeId};
use crate::partition::{self, PartitionResult};
use crate::simulator::{self, EnsembleStats};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "urnlab", version, about = "Interacting two-colour urns on directed networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a spec file against the model rules.
    Validate {
        spec: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the graph exploration process on the flexible subgraph.
    Partition {
        spec: PathBuf,
        /// Start node (user id); defaults to the smallest flexible id.
        #[arg(long)]
        start: Option<NodeId>,
        /// Re-run from every start and check agreement up to role swap.
        #[arg(long)]
        check_all_starts: bool,
        #[arg(long)]
        json: bool,
    },
    /// Conditions, deterministic limit, and synchronisation constants.
    Analyze {
        spec: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Fluctuation regime, CLT covariance, and variance-decay bound.
    Fluctuate {
        spec: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo ensemble: means, variances, decay data.
    Simulate {
        spec: PathBuf,
        #[arg(long)]
        steps: u64,
        #[arg(long)]
        reps: u64,
        #[arg(long)]
        seed: u64,
        /// Comma-separated checkpoint times (default: 20 log-spaced).
        #[arg(long, value_delimiter = ',')]
        checkpoints: Option<Vec<u64>>,
        /// Write the ensemble statistics CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also dump one trajectory (replication 0) as CSV.
        #[arg(long)]
        traj: Option<PathBuf>,
        /// Emit the statistics as JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { spec, json } => cmd_validate(&spec, json),
        Command::Partition {
            spec,
            start,
            check_all_starts,
            json,
        } => cmd_partition(&spec, start, check_all_starts, json),
        Command::Analyze { spec, json } => cmd_analyze(&spec, json),
        Command::Fluctuate { spec, json } => cmd_fluctuate(&spec, json),
        Command::Simulate {
            spec,
            steps,
            reps,
            seed,
            checkpoints,
            out,
            traj,
            json,
        } => cmd_simulate(&spec, steps, reps, seed, checkpoints, out, traj, json),
    }
}

fn fail(msg: impl std::fmt::Display) -> i32 {
    eprintln!("urnlab: {msg}");
    2
}

fn emit_json<T: Serialize>(kind: &str, payload: &T) {
    let doc = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "report": payload,
    });
    println!("{}", serde_json::to_string(&doc).expect("report serializes"));
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn load_spec(path: &Path) -> Result<NetworkSpec, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    netmodel::parse_spec(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Parse, validate, and derive; any failure is an input error.
fn load_derived(path: &Path) -> Result<DerivedMatrices, String> {
    let spec = load_spec(path)?;
    let report = netmodel::validate(&spec);
    if !report.is_valid() {
        let lines: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(format!("invalid spec: {}", lines.join("; ")));
    }
    for warning in &report.warnings {
        eprintln!("urnlab: warning: {warning}");
    }
    netmodel::derive(&spec).map_err(|e| e.to_string())
}

fn cmd_validate(path: &Path, json: bool) -> i32 {
    let spec = match load_spec(path) {
        Ok(spec) => spec,
        Err(msg) => return fail(msg),
    };
    let report = netmodel::validate(&spec);
    if json {
        emit_json("validation", &report);
    } else if report.is_valid() && report.warnings.is_empty() {
        println!("spec is valid");
    } else {
        for v in &report.violations {
            println!("violation: {v}");
        }
        for w in &report.warnings {
            println!("warning: {w}");
        }
    }
    if report.is_valid() {
        0
    } else {
        2
    }
}

#[derive(Serialize)]
struct PartitionOutput<'a> {
    start: NodeId,
    admits: bool,
    sets: Option<&'a partition::PartitionSets>,
    failure: Option<String>,
    all_starts_consistent: Option<bool>,
}

fn cmd_partition(path: &Path, start: Option<NodeId>, check_all: bool, json: bool) -> i32 {
    let dm = match load_derived(path) {
        Ok(dm) => dm,
        Err(msg) => return fail(msg),
    };
    let start = match start {
        Some(id) => id,
        None => match dm.flexible_ids().first() {
            Some(&id) => id,
            None => return fail("spec has no flexible nodes"),
        },
    };
    let result = match partition::explore_partition(&dm, start) {
        Ok(result) => result,
        Err(err) => return fail(err),
    };
    let all_starts = if check_all {
        match partition::partition_invariant_check(&dm) {
            Ok(flag) => Some(flag),
            Err(err) => return fail(err),
        }
    } else {
        None
    };

    let (admits, sets, failure) = match &result {
        PartitionResult::Admits(sets) => (true, Some(sets), None),
        PartitionResult::NoPartition(reason) => (false, None, Some(format!("{reason:?}"))),
    };
    if json {
        emit_json(
            "partition",
            &PartitionOutput {
                start,
                admits,
                sets,
                failure: failure.clone(),
                all_starts_consistent: all_starts,
            },
        );
    } else {
        match &result {
            PartitionResult::Admits(sets) => {
                let show = |name: &str, ids: &[NodeId]| {
                    let body: Vec<String> = ids.iter().map(|id| id.to_string()).collect();
                    println!("{name} = {{{}}}", body.join(", "));
                };
                show("P1", &sets.p1);
                show("P2", &sets.p2);
                show("D1", &sets.d1);
                show("D2", &sets.d2);
            }
            PartitionResult::NoPartition(reason) => {
                let text = match reason {
                    partition::FailureReason::DisjointnessViolated => "sets intersected",
                    partition::FailureReason::ReassignmentDetected => "reassignment detected",
                };
                println!("no partition: {text}");
            }
        }
        if let Some(flag) = all_starts {
            println!(
                "all starts consistent: {}",
                if flag { "yes" } else { "no" }
            );
        }
    }
    if admits {
        0
    } else {
        1
    }
}

fn cmd_analyze(path: &Path, json: bool) -> i32 {
    let dm = match load_derived(path) {
        Ok(dm) => dm,
        Err(msg) => return fail(msg),
    };
    let analysis = limits::analyze(&dm);
    if json {
        emit_json("analysis", &analysis);
    } else {
        render_analysis(&analysis);
    }
    if analysis.limit.is_some() {
        0
    } else {
        1
    }
}

fn render_analysis(analysis: &limits::Analysis) {
    let c = &analysis.conditions;
    println!("strongly connected flexible set: {}", c.strongly_connected_f);
    println!(
        "conditions: (i) non-Polya node = {}, (ii) stubborn nodes = {}, (iii) no partition = {}",
        c.cond_i, c.cond_ii, c.cond_iii
    );
    if c.anti_polya_in_f {
        println!("anti-Polya node in flexible set: convergence theory not covered");
    }
    if let Some(verdicts) = &c.per_scc {
        for (idx, v) in verdicts.iter().enumerate() {
            let ids: Vec<String> = v.nodes.iter().map(|id| id.to_string()).collect();
            println!(
                "component {idx}: {{{}}} source={} covered={}",
                ids.join(", "),
                v.is_source,
                v.covered
            );
        }
    }
    println!("deterministic limit guaranteed: {}", c.guaranteed);
    match &analysis.limit {
        Some(limit) => {
            for (id, z) in limit.node_ids.iter().zip(limit.z_star.iter()) {
                println!("z*[{id}] = {}", f6(*z));
            }
            println!("residual = {:.3e}", limit.residual);
            if !c.guaranteed {
                println!("note: fixed point reported, limit not proven deterministic");
            }
        }
        None => {
            if let Some(err) = &analysis.limit_error {
                println!("{err}");
            }
        }
    }
    let s = &analysis.sync;
    match (s.sc1, s.sc2, s.sc3) {
        (Some(mu_f), mu_s, Some(delta)) => {
            println!(
                "sync sums: mu_F = {}, mu_S = {}, delta = {}",
                f6(mu_f),
                mu_s.map(f6).unwrap_or_else(|| "-".into()),
                f6(delta)
            );
            if s.degenerate {
                println!("degenerate synchronisation constant (mu_F = 1)");
            } else if let Some(z) = s.z_sync {
                println!("z_sync = {}", f6(z));
            }
        }
        _ => println!("synchronisation conditions do not all hold"),
    }
    if let Some(psc) = &s.psc {
        println!(
            "preferential aggregates: m^F={}, alpha^F={}, beta^F={}, m^S={}, beta^S={} => z* = {}",
            psc.m_f,
            psc.alpha_f,
            psc.beta_f,
            psc.m_s,
            psc.beta_s,
            f6(psc.z_star)
        );
    }
}

fn cmd_fluctuate(path: &Path, json: bool) -> i32 {
    let dm = match load_derived(path) {
        Ok(dm) => dm,
        Err(msg) => return fail(msg),
    };
    let analysis = limits::analyze(&dm);
    let report = match fluctuation::fluctuation_report(&dm, &analysis) {
        Ok(report) => report,
        Err(err) => return fail(err),
    };
    if json {
        emit_json("fluctuation", &report);
    } else {
        println!("rho = {}", f6(report.rho));
        println!("regime = {:?} (scaling {})", report.regime, report.scaling);
        match report.decay.bound {
            fluctuation::DecayBound::PowerLaw(e) => {
                println!("variance decay: t^{}", f6(e));
            }
            fluctuation::DecayBound::LogCorrected => println!("variance decay: t^-1 log t"),
        }
        match &report.sigma {
            Some(rows) => {
                let header: Vec<String> =
                    report.flexible_ids.iter().map(|id| id.to_string()).collect();
                println!("sigma over nodes [{}]:", header.join(", "));
                for row in rows {
                    let cells: Vec<String> = row.iter().map(|x| f6(*x)).collect();
                    println!("  [{}]", cells.join(", "));
                }
                if let Some(note) = &report.sigma_note {
                    println!("note: {note}");
                }
            }
            None => {
                let note = report
                    .sigma_note
                    .clone()
                    .unwrap_or_else(|| "not defined in this regime".into());
                println!("sigma: {note}");
            }
        }
    }
    0
}

fn stats_csv(stats: &EnsembleStats) -> String {
    let mut out = String::from("checkpoint_t,node_id,mean_z,var_z,replications\n");
    for (c, &t) in stats.checkpoints.iter().enumerate() {
        for (pos, id) in stats.node_ids.iter().enumerate() {
            out.push_str(&format!(
                "{t},{id},{},{},{}\n",
                stats.mean[c][pos], stats.variance[c][pos], stats.replications
            ));
        }
    }
    out
}

fn traj_csv(node_ids: &[NodeId], traj: &[(u64, Vec<f64>)]) -> String {
    let mut out = String::from("t,node_id,z\n");
    for (t, z) in traj {
        for (pos, id) in node_ids.iter().enumerate() {
            out.push_str(&format!("{t},{id},{}\n", z[pos]));
        }
    }
    out
}

fn thread_pool_size() -> Option<usize> {
    match std::env::var("URNLAB_THREADS") {
        Ok(value) => match value.trim().parse::<usize>() {
            Ok(0) | Err(_) => None,
            Ok(k) => Some(k),
        },
        Err(_) => None,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    path: &Path,
    steps: u64,
    reps: u64,
    seed: u64,
    checkpoints: Option<Vec<u64>>,
    out: Option<PathBuf>,
    traj: Option<PathBuf>,
    json: bool,
) -> i32 {
    let dm = match load_derived(path) {
        Ok(dm) => dm,
        Err(msg) => return fail(msg),
    };
    if steps == 0 {
        return fail("--steps must be at least 1");
    }
    let checkpoints =
        checkpoints.unwrap_or_else(|| simulator::log_spaced_checkpoints(steps, 20));

    let run = || simulator::run_ensemble(&dm, steps, reps, seed, &checkpoints, None);
    let stats = match thread_pool_size() {
        Some(k) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                Ok(pool) => pool,
                Err(err) => return fail(err),
            };
            pool.install(run)
        }
        None => run(),
    };
    let stats = match stats {
        Ok(stats) => stats,
        Err(err) => return fail(err),
    };

    if let Some(traj_path) = traj {
        let trajectory = match simulator::run_trajectory(
            &dm,
            steps,
            simulator::replication_seed(seed, 0),
            &checkpoints,
        ) {
            Ok(t) => t,
            Err(err) => return fail(err),
        };
        let csv = traj_csv(&stats.node_ids, &trajectory);
        if let Err(err) = fs::write(&traj_path, csv) {
            return fail(format!("cannot write {}: {err}", traj_path.display()));
        }
    }

    if json {
        emit_json("ensemble", &stats);
        return 0;
    }
    let csv = stats_csv(&stats);
    match out {
        Some(out_path) => {
            if let Err(err) = fs::write(&out_path, csv) {
                return fail(format!("cannot write {}: {err}", out_path.display()));
            }
        }
        None => print!("{csv}"),
    }
    0
}
