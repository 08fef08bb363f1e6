//! One long run of the two-type network at instance-1 rates.
//!
//! cargo run --release --example simulate_two_type -- [instance] [policy] [jobs]

use std::time::Instant;

use forkjoin::config::parse_policy;
use forkjoin::instances::{preset, EntryRates};
use forkjoin::{run, RunOptions, Stop};

fn main() -> forkjoin::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let id: u32 = args.first().map_or(1, |s| s.parse().expect("instance id"));
    let policy = parse_policy(args.get(1).map_or("proposed", String::as_str))?;
    let jobs: u64 = args.get(2).map_or(200_000, |s| s.parse().expect("job count"));

    let topo = preset(id)?.topology(EntryRates::default())?;
    let opts = RunOptions::new(Stop::Jobs(jobs), 1).warmup(jobs / 20);
    let t0 = Instant::now();
    let out = run(&topo, &policy, &opts)?;
    let b = |l: &str| topo.buffer_by_label(l).unwrap();
    let q = |l: &str| out.stats.mean_queue(b(l)).unwrap();
    println!("instance {id}, policy {policy}, {jobs} jobs per type");
    println!("  events      {}", out.state.events);
    println!("  Q3 + Q7     {:.3}", q("3") + q("7"));
    println!("  Q6 + Q10    {:.3}", q("6") + q("10"));
    let a = topo.activity_by_label("A").unwrap();
    let bb = topo.activity_by_label("B").unwrap();
    println!(
        "  server 4 utilization {:.3} (A {:.3})",
        out.stats.utilization(a)? + out.stats.utilization(bb)?,
        out.stats.utilization(a)?
    );
    println!("  wall time   {:.2?}", t0.elapsed());
    Ok(())
}
