//! Up/down interval classification and the tracking statistic along the
//! heavy-traffic family under preemptive SDP.
//!
//! cargo run --release --example interval_diagnostics -- [T]

use forkjoin::analytics::tracking_deviation;
use forkjoin::config::parse_policy;
use forkjoin::instances::heavy_traffic_family;
use forkjoin::policies::{classify_intervals, IntervalKind};
use forkjoin::{run, RunOptions, Stop, TraceOptions};

fn main() -> forkjoin::Result<()> {
    let t: f64 = std::env::args().nth(1).map_or(20.0, |s| s.parse().expect("horizon"));
    let policy = parse_policy("sdp-preemptive")?;
    println!("{:>4} {:>8} {:>8} {:>8} {:>8} {:>10}", "r", "horizon", "up", "down1", "down2", "deviation");
    for r in [5.0, 10.0, 20.0, 40.0] {
        let topo = heavy_traffic_family(r)?;
        let horizon = r * r * t;
        let opts = RunOptions::new(Stop::Horizon(horizon), 7).trace(TraceOptions::buffers(&topo, &["3", "4", "5"])?);
        let out = run(&topo, &policy, &opts)?;
        let q = |l| out.trace.require_buffer(l);
        let labels = classify_intervals(q("3")?, q("4")?, q("5")?, horizon)?;
        let frac = |k: IntervalKind| {
            labels.iter().filter(|l| l.label == k).map(|l| l.end - l.start).sum::<f64>() / horizon
        };
        let dev = tracking_deviation(&topo, &out.trace, r, horizon)?;
        println!(
            "{r:>4} {horizon:>8} {:>8.3} {:>8.3} {:>8.3} {dev:>10.4}",
            frac(IntervalKind::Up),
            frac(IntervalKind::Down1),
            frac(IntervalKind::Down2)
        );
    }
    Ok(())
}
