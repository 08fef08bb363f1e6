//! Command-line front end: `simulate`, `experiment`, `dcp`, `diagnose`, `report`.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 invariant violation.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytics::{
    dcp_grid_oracle, fork_dcp_oracle, fork_dcp_solve, network_solution, threetype_dcp_objective,
    threetype_dcp_solve, threetype_grid_oracle, tracking_deviation, DcpInstance, ForkDcpInstance,
    ThreeTypeDcpInstance,
};
use crate::config::{load_config, parse_policy};
use crate::engine::{run, RunOptions, Stop, TraceOptions};
use crate::error::{Error, Result};
use crate::experiment::{render_report, report_from_file, run_experiment, write_outputs, write_report};
use crate::instances::{heavy_traffic_family, preset, EntryRates};
use crate::policies::{classify_intervals, IntervalKind};
use crate::topology::{Topology, TopologySpec};

pub const PARALLELISM_ENV: &str = "FJQ_PARALLELISM";

#[derive(Debug, Parser)]
#[command(name = "fjnet", version, about = "Multiclass fork-join network simulator and control analytics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One run on a preset instance or a custom topology.
    Simulate(SimulateArgs),
    /// Replicated sweep over the instances and policies of a config file.
    Experiment(ExperimentArgs),
    /// Closed-form control-problem solutions next to their grid oracles.
    #[command(subcommand)]
    Dcp(DcpCommand),
    /// Up/down interval classification and the tracking statistic.
    Diagnose(DiagnoseArgs),
    /// Rebuild summary tables from a stored replications.csv.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Preset instance 1-36.
    #[arg(long, default_value_t = 1, conflicts_with = "topology")]
    pub instance: u32,
    /// TOML topology document instead of a preset.
    #[arg(long)]
    pub topology: Option<PathBuf>,
    /// Mean service time of servers 1 and 2 for presets.
    #[arg(long, default_value_t = crate::instances::DEFAULT_ENTRY_MEAN)]
    pub entry_mean: f64,
}

impl NetworkArgs {
    fn build(&self) -> Result<Topology> {
        match &self.topology {
            Some(p) => load_topology(p),
            None => preset(self.instance)?.topology(EntryRates {
                mean1: self.entry_mean,
                mean2: self.entry_mean,
            }),
        }
    }
}

pub fn load_topology(path: &FsPath) -> Result<Topology> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec: TopologySpec = toml::from_str(&text).map_err(|e| Error::Parse {
        location: path.display().to_string(),
        message: e.message().to_string(),
    })?;
    Topology::new(spec)
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, default_value = "proposed")]
    pub policy: String,
    /// Stop once every job type has this many arrivals.
    #[arg(long, default_value_t = 100_000, conflicts_with = "horizon")]
    pub jobs: u64,
    /// Stop at this simulated time instead.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub warmup: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check the accounting identities after every event.
    #[arg(long)]
    pub check: bool,
    /// Write buffer and server paths as a wide CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the event log as CSV.
    #[arg(long)]
    pub events: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides the config's `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = PARALLELISM_ENV)]
    pub parallelism: Option<usize>,
    /// Master seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of the configured jobs and replications to run.
    #[arg(long)]
    pub scale: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum DcpCommand {
    /// Two-type problem at the shared server.
    Two {
        #[arg(long)]
        q3: f64,
        #[arg(long, default_value_t = 0.0)]
        q6: f64,
        #[arg(long)]
        w4: f64,
        #[arg(long, default_value_t = 1.0)]
        mu_a: f64,
        #[arg(long, default_value_t = 1.0)]
        mu_b: f64,
        #[arg(long, default_value_t = 2.0)]
        h_a: f64,
        #[arg(long, default_value_t = 1.0)]
        h_b: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Multi-task fork variant.
    Fork {
        #[arg(long)]
        w4: f64,
        #[arg(long)]
        max_ul: f64,
        #[arg(long, default_value_t = 0.0)]
        max_ur: f64,
        #[arg(long, default_value_t = 1)]
        g1: usize,
        #[arg(long, default_value_t = 1)]
        g2: usize,
        #[arg(long, default_value_t = 1.0)]
        mu_a: f64,
        #[arg(long, default_value_t = 1.0)]
        mu_b: f64,
        #[arg(long, default_value_t = 1.0)]
        h_a: f64,
        #[arg(long, default_value_t = 1.0)]
        h_b: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Three-type network with two shared servers.
    Three {
        #[arg(long)]
        q4: f64,
        #[arg(long)]
        q9: f64,
        #[arg(long)]
        w5: f64,
        #[arg(long)]
        w6: f64,
        #[arg(long, default_value_t = 1.0)]
        mu_a: f64,
        #[arg(long, default_value_t = 1.0)]
        mu_b1: f64,
        #[arg(long, default_value_t = 1.0)]
        mu_b2: f64,
        #[arg(long, default_value_t = 1.0)]
        mu_c: f64,
        #[arg(long, default_value_t = 1.0)]
        h_a: f64,
        #[arg(long, default_value_t = 1.0)]
        h_b: f64,
        #[arg(long, default_value_t = 1.0)]
        h_c: f64,
        #[arg(long, default_value_t = 1e-2)]
        step: f64,
    },
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Use member `r` of the heavy-traffic family instead of a preset; the
    /// horizon is then multiplied by r^2.
    #[arg(long, conflicts_with = "topology")]
    pub r: Option<f64>,
    #[arg(long, default_value = "sdp-preemptive")]
    pub policy: String,
    #[arg(long, default_value_t = 1000.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the interval labels as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A replications.csv, or the directory holding one.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub h_a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub h_b: f64,
    /// Write summary.csv and deviations.csv here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// True when `e` is, or wraps, an accounting-identity violation.
pub fn is_invariant_violation(e: &Error) -> bool {
    match e {
        Error::Invariant { .. } => true,
        Error::Replication { source, .. } => is_invariant_violation(source),
        _ => false,
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if is_invariant_violation(e) {
        2
    } else {
        1
    }
}

/// Parses `args` and runs the command, printing to stdout and stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Experiment(a) => experiment(a, out),
        Command::Dcp(c) => dcp(c, out),
        Command::Diagnose(a) => diagnose(a, out),
        Command::Report(a) => report(a, out),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn create(path: &FsPath) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let topo = a.network.build()?;
    let policy = parse_policy(&a.policy)?;
    let stop = match a.horizon {
        Some(t) => Stop::Horizon(t),
        None => Stop::Jobs(a.jobs),
    };
    let mut opts = RunOptions::new(stop, a.seed).warmup(a.warmup);
    opts.check_invariants = a.check;
    if a.trace.is_some() || a.events.is_some() {
        let mut t = if a.trace.is_some() { TraceOptions::all(&topo) } else { TraceOptions::none() };
        t.events = a.events.is_some();
        opts = opts.trace(t);
    }
    let res = run(&topo, &policy, &opts)?;
    let w = |e| io(e);
    writeln!(out, "policy {}  events {}  clock {:.3}", policy.name(), res.state.events, res.state.clock).map_err(w)?;
    writeln!(out, "window [{:.3}, {:.3}]", res.stats.start, res.stats.end).map_err(w)?;
    writeln!(out, "{:<8} {:>12}", "buffer", "mean queue").map_err(w)?;
    for (i, label) in topo.buffers().iter().enumerate() {
        let m = res.stats.mean_queue(crate::topology::BufferId(i))?;
        writeln!(out, "{label:<8} {m:>12.4}").map_err(w)?;
    }
    writeln!(out, "{:<8} {:>12}", "activity", "utilization").map_err(w)?;
    for (i, act) in topo.activities().iter().enumerate() {
        let u = res.stats.utilization(crate::topology::ActivityId(i))?;
        writeln!(out, "{:<8} {u:>12.4}", act.label).map_err(w)?;
    }
    if let Some(p) = &a.trace {
        res.trace.write_csv(create(p)?)?;
    }
    if let Some(p) = &a.events {
        res.trace.write_events_csv(&topo, create(p)?)?;
    }
    Ok(())
}

fn experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = load_config(&a.config)?;
    if let Some(f) = a.scale {
        cfg = cfg.scaled(f)?;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if a.parallelism.is_some() {
        cfg.parallelism = a.parallelism;
    }
    let dir = a
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .ok_or_else(|| Error::Configuration("no output directory: pass --out or set `out`".into()))?;
    let res = run_experiment(&cfg)?;
    write_outputs(&dir, &res.replications, &res.report)?;
    write!(out, "{}", render_report(&res.report)).map_err(io)?;
    writeln!(out, "wrote {}", dir.display()).map_err(io)
}

fn dcp(c: &DcpCommand, out: &mut dyn Write) -> Result<()> {
    match *c {
        DcpCommand::Two {
            q3,
            q6,
            w4,
            mu_a,
            mu_b,
            h_a,
            h_b,
            step,
        } => {
            let inst = DcpInstance {
                q3,
                q6,
                w4,
                mu_a,
                mu_b,
                h_a,
                h_b,
            };
            let s = network_solution(&inst)?;
            let (o4, o5, obj) = dcp_grid_oracle(&inst, step)?;
            writeln!(out, "closed form: q4 = {:.6}, q5 = {:.6}, objective = {:.6}", s.q4, s.q5, crate::analytics::dcp_objective(&inst, s.q4, s.q5)).map_err(io)?;
            writeln!(out, "downstream:  q7 = {:.6}, q8 = {:.6}, q9 = {:.6}, q10 = {:.6}", s.q7, s.q8, s.q9, s.q10).map_err(io)?;
            writeln!(out, "grid oracle: q4 = {o4:.6}, q5 = {o5:.6}, objective = {obj:.6}").map_err(io)
        }
        DcpCommand::Fork {
            w4,
            max_ul,
            max_ur,
            g1,
            g2,
            mu_a,
            mu_b,
            h_a,
            h_b,
            step,
        } => {
            let inst = ForkDcpInstance {
                w4,
                max_ul,
                max_ur,
                mu_a,
                mu_b,
                h_a,
                h_b,
                g1,
                g2,
            };
            let (q4, q5) = fork_dcp_solve(&inst)?;
            let (o4, o5, obj) = fork_dcp_oracle(&inst, step)?;
            let cf = crate::analytics::fork_dcp_objective(&inst, q4, q5);
            writeln!(out, "closed form: q4 = {q4:.6}, q5 = {q5:.6}, objective = {cf:.6}").map_err(io)?;
            writeln!(out, "grid oracle: q4 = {o4:.6}, q5 = {o5:.6}, objective = {obj:.6}").map_err(io)
        }
        DcpCommand::Three {
            q4,
            q9,
            w5,
            w6,
            mu_a,
            mu_b1,
            mu_b2,
            mu_c,
            h_a,
            h_b,
            h_c,
            step,
        } => {
            let inst = ThreeTypeDcpInstance {
                q4,
                q9,
                w5,
                w6,
                mu_a,
                mu_b1,
                mu_b2,
                mu_c,
                h_a,
                h_b,
                h_c,
            };
            let s = threetype_dcp_solve(&inst)?;
            let (o, obj) = threetype_grid_oracle(&inst, step)?;
            writeln!(out, "regime: {:?}", inst.regime()).map_err(io)?;
            writeln!(
                out,
                "closed form: q5 = {:.6}, q6 = {:.6}, q7 = {:.6}, q8 = {:.6}, objective = {:.6}",
                s.q5,
                s.q6,
                s.q7,
                s.q8,
                threetype_dcp_objective(&inst, &s)
            )
            .map_err(io)?;
            writeln!(
                out,
                "grid oracle: q5 = {:.6}, q6 = {:.6}, q7 = {:.6}, q8 = {:.6}, objective = {obj:.6}",
                o.q5, o.q6, o.q7, o.q8
            )
            .map_err(io)
        }
    }
}

fn diagnose(a: &DiagnoseArgs, out: &mut dyn Write) -> Result<()> {
    let (topo, scale, horizon) = match a.r {
        Some(r) => (heavy_traffic_family(r)?, r, r * r * a.horizon),
        None => (a.network.build()?, 1.0, a.horizon),
    };
    let policy = parse_policy(&a.policy)?;
    let opts = RunOptions::new(Stop::Horizon(horizon), a.seed).trace(TraceOptions::buffers(&topo, &["3", "4", "5"])?);
    let res = run(&topo, &policy, &opts)?;
    let q = |l| res.trace.require_buffer(l);
    let labels = classify_intervals(q("3")?, q("4")?, q("5")?, horizon)?;
    let mut totals = [0.0f64; 3];
    let mut counts = [0usize; 3];
    for l in &labels {
        let k = match l.label {
            IntervalKind::Up => 0,
            IntervalKind::Down1 => 1,
            IntervalKind::Down2 => 2,
        };
        totals[k] += l.end - l.start;
        counts[k] += 1;
    }
    writeln!(out, "policy {}  horizon {horizon:.1}  events {}", policy.name(), res.state.events).map_err(io)?;
    for (k, name) in ["up", "down1", "down2"].iter().enumerate() {
        writeln!(out, "{name:<6} intervals {:>8}  time fraction {:.4}", counts[k], totals[k] / horizon).map_err(io)?;
    }
    let dev = tracking_deviation(&topo, &res.trace, scale, horizon)?;
    writeln!(out, "tracking deviation sup|Q4 - Q3 ∧ W4| / r = {dev:.4}  (r = {scale})").map_err(io)?;
    if let Some(p) = &a.out {
        let mut w = csv::Writer::from_writer(create(p)?);
        for l in &labels {
            w.serialize(l)?;
        }
        w.flush().map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}

fn report(a: &ReportArgs, out: &mut dyn Write) -> Result<()> {
    let input = if a.input.is_dir() {
        a.input.join("replications.csv")
    } else {
        a.input.clone()
    };
    let rep = report_from_file(&input, a.h_a, a.h_b)?;
    if let Some(d) = &a.out {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        write_report(d, &rep)?;
    }
    write!(out, "{}", render_report(&rep)).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> Result<String> {
        let cli = Cli::try_parse_from(std::iter::once("fjnet").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        execute(&cli, &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run_cli(["fjnet", "bogus"]), 1);
        assert_eq!(run_cli(["fjnet", "simulate", "--instance", "99"]), 1);
    }

    #[test]
    fn dcp_two_prints_both_solutions() {
        let s = exec(&["dcp", "two", "--q3", "2", "--w4", "5"]).unwrap();
        assert!(s.contains("closed form: q4 = 2.000000, q5 = 3.000000"), "{s}");
        assert!(s.contains("grid oracle"));
    }

    #[test]
    fn dcp_three_reports_regime() {
        let s = exec(&["dcp", "three", "--q4", "1", "--q9", "0.5", "--w5", "4", "--w6", "2", "--h-b", "3"]).unwrap();
        assert!(s.contains("ThirdStatic"), "{s}");
    }

    #[test]
    fn simulate_writes_trace() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let s = exec(&["simulate", "--jobs", "200", "--policy", "sdp", "--trace", p.to_str().unwrap()]).unwrap();
        assert!(s.contains("policy sdp"));
        let text = std::fs::read_to_string(p).unwrap();
        assert!(text.starts_with("time,Q1,"));
    }

    #[test]
    fn invariant_errors_map_to_2() {
        let e = Error::Replication {
            instance: "1".into(),
            policy: "sdp".into(),
            rep: 0,
            seed: 1,
            source: Box::new(Error::Invariant {
                time: 1.0,
                detail: "x".into(),
            }),
        };
        assert_eq!(exit_code(&e), 2);
        assert_eq!(exit_code(&Error::Input("x".into())), 1);
    }
}
