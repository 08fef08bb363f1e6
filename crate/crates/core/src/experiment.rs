//! Replicated runs over an (instance x policy) grid and their CSV outputs.

use std::fs;
use std::path::Path as FsPath;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, InstanceSpec};
use crate::engine::{run, RunOptions, Stop};
use crate::error::{Error, Result};
use crate::policies::PolicySpec;
use crate::stats::{cost_and_tables, CellResult, ExperimentReport, TimeAverage};
use crate::stochastic::derive_seed;
use crate::topology::{BufferId, Topology};

/// One finished replication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub instance: String,
    pub policy: String,
    pub rep: usize,
    pub seed: u64,
    /// `Q3 + Q7`; NaN on networks without those buffers.
    pub q37: f64,
    /// `Q6 + Q10`; NaN on networks without those buffers.
    pub q610: f64,
    /// Time-average number of tasks in all buffers.
    pub total: f64,
    pub events: u64,
    pub window: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub replications: Vec<Replication>,
    pub report: ExperimentReport,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `rep` on `instance`. The policy is deliberately not an
/// input: every policy sees the same arrival and service streams.
pub fn replication_seed(master: u64, instance: &str, rep: usize) -> u64 {
    mix(derive_seed(master, &format!("rep:{instance}:{rep}")))
}

fn measured_buffers(topo: &Topology, labels: [&str; 2]) -> Option<Vec<BufferId>> {
    labels.iter().map(|l| topo.buffer_by_label(l)).collect()
}

/// Runs one replication and returns its measured time averages.
pub fn run_replication(
    cfg: &ExperimentConfig,
    inst: &InstanceSpec,
    policy: &PolicySpec,
    rep: usize,
) -> Result<Replication> {
    let seed = replication_seed(cfg.seed, &inst.name, rep);
    let wrap = |e: Error| Error::Replication {
        instance: inst.name.clone(),
        policy: policy.name(),
        rep,
        seed,
        source: Box::new(e),
    };
    let mut opts = RunOptions::new(Stop::Jobs(cfg.jobs), seed).warmup(cfg.warmup);
    opts.check_invariants = cfg.check_invariants;
    let out = run(&inst.topology, policy, &opts).map_err(wrap)?;
    let mean = |bs: Option<Vec<BufferId>>| match bs {
        Some(bs) => TimeAverage::of_buffers(&out.stats, &bs).mean(),
        None => Ok(f64::NAN),
    };
    let all: Vec<BufferId> = (0..inst.topology.buffers().len()).map(BufferId).collect();
    let q37 = mean(measured_buffers(&inst.topology, ["3", "7"])).map_err(wrap)?;
    let q610 = mean(measured_buffers(&inst.topology, ["6", "10"])).map_err(wrap)?;
    let total = mean(Some(all)).map_err(wrap)?;
    Ok(Replication {
        instance: inst.name.clone(),
        policy: policy.name(),
        rep,
        seed,
        q37,
        q610,
        total,
        events: out.state.events,
        window: out.stats.span(),
    })
}

/// Collects replications into per-cell vectors, in first-seen order.
pub fn cells(reps: &[Replication]) -> Vec<CellResult> {
    let mut out: Vec<CellResult> = Vec::new();
    for r in reps {
        match out.iter_mut().find(|c| c.instance == r.instance && c.policy == r.policy) {
            Some(c) => {
                c.q37.push(r.q37);
                c.q610.push(r.q610);
            }
            None => out.push(CellResult {
                instance: r.instance.clone(),
                policy: r.policy.clone(),
                q37: vec![r.q37],
                q610: vec![r.q610],
            }),
        }
    }
    out
}

/// Runs every (instance, policy, rep) triple. Output order is independent of
/// the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let policies = cfg.effective_policies();
    let tasks: Vec<(&InstanceSpec, &PolicySpec, usize)> = cfg
        .instances
        .iter()
        .flat_map(|i| policies.iter().flat_map(move |p| (0..cfg.replications).map(move |r| (i, p, r))))
        .collect();
    let work = || -> Vec<Result<Replication>> {
        tasks
            .par_iter()
            .map(|(i, p, r)| run_replication(cfg, i, p, *r))
            .collect()
    };
    let results = match cfg.parallelism {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Configuration(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let replications = results.into_iter().collect::<Result<Vec<_>>>()?;
    let report = cost_and_tables(&cells(&replications), cfg.h_a, cfg.h_b)?;
    Ok(ExperimentResult { replications, report })
}

fn write_rows<T: Serialize>(path: &FsPath, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `replications.csv`, `summary.csv` and `deviations.csv` into `dir`.
pub fn write_outputs(dir: &FsPath, reps: &[Replication], report: &ExperimentReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_rows(&dir.join("replications.csv"), reps)?;
    write_report(dir, report)
}

pub fn write_report(dir: &FsPath, report: &ExperimentReport) -> Result<()> {
    write_rows(&dir.join("summary.csv"), &report.rows)?;
    write_rows(&dir.join("deviations.csv"), &report.deviations)
}

pub fn read_replications(path: &FsPath) -> Result<Vec<Replication>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<_>, _>>()?)
}

/// Rebuilds the tables from a stored `replications.csv`.
pub fn report_from_file(path: &FsPath, h_a: f64, h_b: f64) -> Result<ExperimentReport> {
    cost_and_tables(&cells(&read_replications(path)?), h_a, h_b)
}

/// Plain-text rendering of the summary and deviation tables.
pub fn render_report(report: &ExperimentReport) -> String {
    let mut s = format!("h_a = {}, h_b = {}\n", report.h_a, report.h_b);
    s.push_str(&format!(
        "{:<10} {:<20} {:>16} {:>16} {:>10} {:>8}\n",
        "instance", "policy", "Q3+Q7", "Q6+Q10", "cost", "dev%"
    ));
    for r in &report.rows {
        s.push_str(&format!(
            "{:<10} {:<20} {:>8.3} ±{:>6.3} {:>8.3} ±{:>6.3} {:>10.3} {:>8.2}\n",
            r.instance, r.policy, r.q37_mean, r.q37_hw, r.q610_mean, r.q610_hw, r.cost, r.deviation_pct
        ));
    }
    s.push_str(&format!("\n{:<20} {:>10} {:>10}\n", "policy", "avg dev%", "max dev%"));
    for d in &report.deviations {
        s.push_str(&format!(
            "{:<20} {:>10.2} {:>10.2}\n",
            d.policy, d.avg_deviation_pct, d.max_deviation_pct
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn small() -> ExperimentConfig {
        parse_config(
            "seed = 3\nreplications = 2\njobs = 2000\nwarmup = 200\ninstances = [1, 7]\npolicies = [\"proposed\", \"static\"]\n",
        )
        .unwrap()
    }

    #[test]
    fn seeds_ignore_policy_and_differ_by_rep() {
        assert_ne!(replication_seed(1, "1", 0), replication_seed(1, "1", 1));
        assert_ne!(replication_seed(1, "1", 0), replication_seed(1, "2", 0));
        assert_eq!(replication_seed(1, "1", 0), replication_seed(1, "1", 0));
    }

    #[test]
    fn order_independent_of_threads() {
        let mut a = small();
        a.parallelism = Some(1);
        let mut b = small();
        b.parallelism = Some(3);
        let ra = run_experiment(&a).unwrap();
        let rb = run_experiment(&b).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(ra.replications.len(), 2 * 3 * 2);
        assert_eq!(ra.report.rows.len(), 2 * 3);
    }

    #[test]
    fn report_round_trips_through_csv() {
        let cfg = small();
        let res = run_experiment(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_outputs(dir.path(), &res.replications, &res.report).unwrap();
        let back = report_from_file(&dir.path().join("replications.csv"), cfg.h_a, cfg.h_b).unwrap();
        assert_eq!(back.rows.len(), res.report.rows.len());
        for (x, y) in back.rows.iter().zip(&res.report.rows) {
            assert!((x.cost - y.cost).abs() < 1e-9 * y.cost.max(1.0));
        }
        assert!(dir.path().join("summary.csv").exists());
        assert!(render_report(&back).contains("randomized-2/3"));
    }
}
