//! Every two-type policy on one instance with shared seeds, as a cost table.
//!
//! cargo run --release --example policy_comparison -- [instance] [reps] [jobs]

use forkjoin::config::parse_config;
use forkjoin::experiment::{render_report, run_experiment};

fn main() -> forkjoin::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let id = args.first().map_or("1", String::as_str);
    let reps = args.get(1).map_or("5", String::as_str);
    let jobs = args.get(2).map_or("50000", String::as_str);
    let cfg = parse_config(&format!(
        r#"
seed = 1
replications = {reps}
jobs = {jobs}
warmup = 2500
instances = [{id}]
policies = ["proposed", "sdp", "static", "fcfs", "randomized", "sdp-preemptive"]
"#
    ))?;
    let res = run_experiment(&cfg)?;
    print!("{}", render_report(&res.report));
    Ok(())
}
