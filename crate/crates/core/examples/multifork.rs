//! Types that fork into several parallel tasks; the fork-aware SDP rule
//! against static priority.
//!
//! cargo run --release --example multifork -- [g1] [g2]

use forkjoin::config::parse_policy;
use forkjoin::{build_preset, run, PresetKind, PresetParams, RunOptions, Stop};

fn main() -> forkjoin::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().expect("fork count"));
    let g1 = args.next().unwrap_or(2);
    let g2 = args.next().unwrap_or(3);
    let params = PresetParams::uniform_exponential(1.0, 2.1).service("L1", forkjoin::DistributionSpec::exponential(0.9)?);
    let topo = build_preset(&PresetKind::Multifork { g1, g2 }, &params)?;
    println!("g1 = {g1}, g2 = {g2}: {} buffers, {} servers", topo.buffers().len(), topo.servers().len());
    for key in ["fork-sdp", "static", "fcfs"] {
        let out = run(&topo, &parse_policy(key)?, &RunOptions::new(Stop::Jobs(100_000), 2).warmup(5_000))?;
        let total: f64 = (0..topo.buffers().len())
            .map(|b| out.stats.mean_queue(forkjoin::topology::BufferId(b)).unwrap())
            .sum();
        let q = |l: &str| out.stats.mean_queue(topo.buffer_by_label(l).unwrap()).unwrap();
        println!("{key:>10}: Q4 {:.3}  Q5 {:.3}  total in network {total:.3}", q("4"), q("5"));
    }
    Ok(())
}
