//! Custom networks: a single M/M/1 server declared in a config document,
//! checked against L = rho / (1 - rho).

use forkjoin::config::load_config;
use forkjoin::experiment::run_experiment;
use forkjoin::stats::ci95;

fn main() -> forkjoin::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/mm1.toml");
    let cfg = load_config(&path)?;
    let res = run_experiment(&cfg)?;
    let totals: Vec<f64> = res.replications.iter().map(|r| r.total).collect();
    let (m, hw) = ci95(&totals)?;
    println!("{} replications of {} jobs", totals.len(), cfg.jobs);
    println!("L = {m:.4} ± {hw:.4}, theory {:.4}", 0.7 / 0.3);
    Ok(())
}
