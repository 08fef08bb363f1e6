//! A config-driven sweep written to CSV, then re-read as a report.
//!
//! cargo run --release --example experiment_sweep -- [config] [out-dir]

use std::path::PathBuf;

use forkjoin::config::load_config;
use forkjoin::experiment::{render_report, report_from_file, run_experiment, write_outputs};

fn main() -> forkjoin::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg_path = args
        .next()
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/desk.toml"), PathBuf::from);
    let out = args.next().map_or_else(|| std::env::temp_dir().join("fjnet-sweep"), PathBuf::from);
    let cfg = load_config(&cfg_path)?;
    let res = run_experiment(&cfg)?;
    write_outputs(&out, &res.replications, &res.report)?;
    let back = report_from_file(&out.join("replications.csv"), cfg.h_a, cfg.h_b)?;
    print!("{}", render_report(&back));
    println!("CSV files in {}", out.display());
    Ok(())
}
