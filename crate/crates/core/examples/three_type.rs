//! The three-type network with two shared servers under the cost-regime rule.

use forkjoin::policies::{Controller, PolicyKind, ThreeTypeRegime};
use forkjoin::{build_preset, run, PolicySpec, PresetKind, PresetParams, RunOptions, Stop};

fn main() -> forkjoin::Result<()> {
    let topo = build_preset(&PresetKind::ThreeType, &PresetParams::uniform_exponential(1.0, 2.2))?;
    for h in [[2.0, 1.0, 0.5], [2.0, 1.0, 2.0], [1.0, 3.0, 1.0], [1.0, 1.5, 1.0], [0.5, 1.0, 2.0]] {
        let spec = PolicySpec {
            kind: PolicyKind::ThreeTypeRule {
                h_a: h[0],
                h_b: h[1],
                h_c: h[2],
            },
            preemptive: false,
        };
        let regime: ThreeTypeRegime = forkjoin::policies::three_type_regime(h, 2.2, 2.2, 2.2, 2.2);
        let rules = Controller::compile(&topo, &spec)?.describe(&topo);
        let out = run(&topo, &spec, &RunOptions::new(Stop::Jobs(50_000), 1).warmup(2_500))?;
        let q = |l: &str| out.stats.mean_queue(topo.buffer_by_label(l).unwrap()).unwrap();
        let cost = h[0] * (q("5") + q("11")) + h[1] * (q("6") + q("7") + q("12") + q("13")) + h[2] * (q("8") + q("14"));
        println!("h = {h:?}: {regime:?}");
        for (server, rule) in rules {
            println!("    server {server}: {rule}");
        }
        println!("    shared-server cost rate {cost:.3}");
    }
    Ok(())
}
