//! Recorded buffer paths turned into holding-cost objectives.

use forkjoin::instances::{preset, EntryRates};
use forkjoin::stats::{cost_path, discounted_cost, finite_horizon_cost, long_run_average_cost, Z_A, Z_B};
use forkjoin::{run, PolicySpec, RunOptions, Stop, TraceOptions};

fn main() -> forkjoin::Result<()> {
    let topo = preset(1)?.topology(EntryRates::default())?;
    let horizon = 5_000.0;
    for policy in [PolicySpec::proposed(), PolicySpec::static_priority(), PolicySpec::fcfs()] {
        let opts = RunOptions::new(Stop::Horizon(horizon), 3).trace(TraceOptions::all(&topo));
        let out = run(&topo, &policy, &opts)?;
        let cost = cost_path(&out.trace, &Z_A, &Z_B, 2.0, 1.0)?;
        println!(
            "{:>8}: discounted(0.01) {:>9.1}  finite-horizon {:>10.1}  long-run average {:>7.3}",
            policy.name(),
            discounted_cost(&cost, 0.01, horizon)?,
            finite_horizon_cost(&cost, horizon)?,
            long_run_average_cost(&cost, 500.0, horizon)?
        );
    }
    let mut buf = Vec::new();
    let out = run(
        &topo,
        &PolicySpec::sdp(),
        &RunOptions::new(Stop::Horizon(5.0), 3).trace(TraceOptions::all(&topo)),
    )?;
    out.trace.write_csv(&mut buf)?;
    println!("\nfirst lines of a wide trace CSV:");
    for line in String::from_utf8_lossy(&buf).lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
