//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Set `FJQ_FULL_SCALE=1` for the long run of
//! the instance-1 reproduction.

use std::time::Instant;

use forkjoin::analytics::{
    dcp_grid_oracle, dcp_objective, fork_dcp_objective, fork_dcp_oracle, fork_dcp_solve, lemma1_solve,
    rbm_time_average, reflect, threetype_dcp_objective, threetype_dcp_solve, threetype_grid_oracle,
    tracking_deviation, DcpInstance, ForkDcpInstance, ThreeTypeDcpInstance,
};
use forkjoin::config::{parse_config, parse_policy};
use forkjoin::experiment::run_experiment;
use forkjoin::instances::{heavy_traffic_family, preset, EntryRates};
use forkjoin::stats::ci95;
use forkjoin::topology::{Activity, BufferId, JobType, JobTypeId, Server, ServerId, TopologySpec};
use forkjoin::{run, DistributionSpec, Path, PolicySpec, RandomStream, RunOptions, Stop, Topology, TraceOptions};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn instance(id: u32) -> Result<Topology, String> {
    preset(id).and_then(|p| p.topology(EntryRates::default())).map_err(err)
}

fn balance_invariant() -> Outcome {
    let topo = instance(1)?;
    let keys = [
        "sdp",
        "static",
        "fcfs",
        "randomized",
        "randomized-2/3",
        "proposed",
        "fork-sdp",
        "sdp-preemptive",
        "static-preemptive",
        "proposed-preemptive",
    ];
    let mut min_events = u64::MAX;
    for (i, k) in keys.iter().enumerate() {
        let policy = parse_policy(k).map_err(err)?;
        let opts = RunOptions::new(Stop::Jobs(110_000), 100 + i as u64).checked();
        let out = run(&topo, &policy, &opts).map_err(|e| format!("{k}: {e}"))?;
        min_events = min_events.min(out.state.events);
    }
    check(
        min_events >= 1_000_000,
        format!("{} policies, zero violations, >= {min_events} checked events each", keys.len()),
    )
}

fn dcp_oracles() -> Outcome {
    let mut rng = RandomStream::new(2024);
    let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.uniform();
    let mut worst = [0.0f64; 3];
    for _ in 0..1000 {
        let (mu_a, mu_b) = (u(0.5, 2.0), u(0.5, 2.0));
        let h_b = u(0.1, 2.0);
        let h_a = h_b * mu_b / mu_a * u(1.0, 3.0);
        let inst = DcpInstance {
            q3: u(0.0, 5.0),
            q6: u(0.0, 5.0),
            w4: u(0.0, 8.0),
            mu_a,
            mu_b,
            h_a,
            h_b,
        };
        let step = 1e-3;
        let (q4, q5) = lemma1_solve(&inst).map_err(err)?;
        let (_, _, oracle) = dcp_grid_oracle(&inst, step).map_err(err)?;
        let gap = (dcp_objective(&inst, q4, q5) - oracle).abs() / ((h_a + h_b * mu_a / mu_b) * step);
        worst[0] = worst[0].max(gap);

        let (g1, g2) = (1 + (u(0.0, 3.0) as usize), 1 + (u(0.0, 3.0) as usize));
        let hb = u(0.1, 2.0);
        let ha = hb * (g2 + 1) as f64 * mu_b / ((g1 + 1) as f64 * mu_a) * u(1.0, 3.0);
        let f = ForkDcpInstance {
            w4: u(0.0, 8.0),
            max_ul: u(0.0, 5.0),
            max_ur: u(0.0, 5.0),
            mu_a,
            mu_b,
            h_a: ha,
            h_b: hb,
            g1,
            g2,
        };
        let (q4, q5) = fork_dcp_solve(&f).map_err(err)?;
        let (_, _, oracle) = fork_dcp_oracle(&f, step).map_err(err)?;
        let (eha, ehb) = f.effective_costs();
        let gap = (fork_dcp_objective(&f, q4, q5) - oracle).abs() / ((eha + ehb * mu_a / mu_b) * step);
        worst[1] = worst[1].max(gap);

        let t = ThreeTypeDcpInstance {
            q4: u(0.0, 3.0),
            q9: u(0.0, 3.0),
            w5: u(0.0, 3.0),
            w6: u(0.0, 3.0),
            mu_a: u(0.5, 2.0),
            mu_b1: u(0.5, 2.0),
            mu_b2: u(0.5, 2.0),
            mu_c: u(0.5, 2.0),
            h_a: u(0.1, 2.0),
            h_b: u(0.1, 3.0),
            h_c: u(0.1, 2.0),
        };
        let step3 = 1e-2;
        let s = threetype_dcp_solve(&t).map_err(err)?;
        let (_, oracle) = threetype_grid_oracle(&t, step3).map_err(err)?;
        let lip = t.h_a * t.mu_a / t.mu_b1 + 2.0 * t.h_b + t.h_c * t.mu_c / t.mu_b2;
        let cf = threetype_dcp_objective(&t, &s);
        if cf > oracle + 1e-9 + lip * step3 {
            return Err(format!("three-type closed form {cf} worse than oracle {oracle} at {t:?}"));
        }
        worst[2] = worst[2].max((cf - oracle).abs() / (lip * step3));
    }
    check(
        worst.iter().all(|w| *w <= 1.0),
        format!(
            "1000 instances each; worst gap / bound: two-type {:.3}, fork {:.3}, three-type {:.3}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn threetype_static_case() -> Outcome {
    let mut rng = RandomStream::new(77);
    let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.uniform();
    for _ in 0..1000 {
        let (mu_a, mu_b1, mu_b2, mu_c) = (u(0.5, 2.0), u(0.5, 2.0), u(0.5, 2.0), u(0.5, 2.0));
        let (h_a, h_c) = (u(0.1, 2.0), u(0.1, 2.0));
        let h_b = (h_a * mu_a / mu_b1 + h_c * mu_c / mu_b2) * u(1.0, 2.0);
        let t = ThreeTypeDcpInstance {
            q4: u(0.0, 5.0),
            q9: u(0.0, 5.0),
            w5: u(0.0, 5.0),
            w6: u(0.0, 5.0),
            mu_a,
            mu_b1,
            mu_b2,
            mu_c,
            h_a,
            h_b,
            h_c,
        };
        let s = threetype_dcp_solve(&t).map_err(err)?;
        let want = (t.w5, 0.0, 0.0, mu_c / mu_b2 * t.w6);
        if (s.q5, s.q6, s.q7, s.q8) != want {
            return Err(format!("{t:?} gave {s:?}"));
        }
    }
    Ok("1000 instances, exact (w5, 0, 0, (mu_C/mu_B2) w6)".into())
}

fn mm1_sanity() -> Outcome {
    let spec = TopologySpec {
        job_types: vec![JobType {
            label: "a".into(),
            arrival: Some(DistributionSpec::exponential(1.0).map_err(err)?),
            entry_buffer: BufferId(0),
        }],
        buffers: vec!["1".into()],
        servers: vec![Server {
            label: "1".into(),
            activities: vec![forkjoin::topology::ActivityId(0)],
        }],
        activities: vec![Activity {
            label: "1".into(),
            server: ServerId(0),
            inputs: vec![BufferId(0)],
            outputs: vec![],
            service: DistributionSpec::exponential(0.7).map_err(err)?,
            job_type: JobTypeId(0),
        }],
    };
    let topo = Topology::new(spec).map_err(err)?;
    let out = run(&topo, &PolicySpec::fcfs(), &RunOptions::new(Stop::Jobs(1_000_000), 5)).map_err(err)?;
    let l = out.stats.mean_queue(BufferId(0)).map_err(err)?;
    let target = 0.7 / 0.3;
    let rel = (l - target).abs() / target;
    check(rel <= 0.03, format!("L = {l:.4} vs {target:.4} ({:.2}% off)", 100.0 * rel))
}

fn table_config(reps: usize, jobs: u64, warmup: u64, entry: f64) -> String {
    format!(
        "seed = 11\nreplications = {reps}\njobs = {jobs}\nwarmup = {warmup}\ninstances = [1]\npolicies = [\"proposed\"]\nrandomized_baseline = false\n[entry]\nmean1 = {entry}\nmean2 = {entry}\n"
    )
}

fn instance1_means(reps: usize, jobs: u64, warmup: u64, entry: f64) -> Result<((f64, f64), (f64, f64)), String> {
    let cfg = parse_config(&table_config(reps, jobs, warmup, entry)).map_err(err)?;
    let res = run_experiment(&cfg).map_err(err)?;
    let q37: Vec<f64> = res.replications.iter().map(|r| r.q37).collect();
    let q610: Vec<f64> = res.replications.iter().map(|r| r.q610).collect();
    Ok((ci95(&q37).map_err(err)?, ci95(&q610).map_err(err)?))
}

fn table3_instance1() -> Outcome {
    let (t37, t610) = (14.01, 14.43);
    let ((m37, h37), (m610, h610)) = instance1_means(10, 200_000, 10_000, 0.7)?;
    let (e37, e610) = ((m37 - t37) / t37, (m610 - t610) / t610);
    let mut detail = format!(
        "Q3+Q7 = {m37:.2} ± {h37:.2} ({:+.1}%), Q6+Q10 = {m610:.2} ± {h610:.2} ({:+.1}%)",
        100.0 * e37,
        100.0 * e610
    );
    let ok = e37.abs() <= 0.10 && e610.abs() <= 0.10;
    if !ok {
        detail.push_str("; entry-rate sensitivity:");
        for entry in [0.5, 0.6, 0.8] {
            let ((a, _), (b, _)) = instance1_means(4, 100_000, 5_000, entry)?;
            detail.push_str(&format!(" [mean1=mean2={entry}: {a:.2}, {b:.2}]"));
        }
    }
    if std::env::var_os("FJQ_FULL_SCALE").is_some() {
        let ((f37, g37), (f610, g610)) = instance1_means(30, 1_000_000, 50_000, 0.7)?;
        let overlap = |m: f64, h: f64, t: f64, th: f64| (m - t).abs() <= h + th;
        detail.push_str(&format!(
            "; full scale: {f37:.2} ± {g37:.2} (overlap {}), {f610:.2} ± {g610:.2} (overlap {})",
            overlap(f37, g37, t37, 0.16),
            overlap(f610, g610, t610, 0.17)
        ));
    }
    check(ok, detail)
}

fn policy_identity() -> Outcome {
    for id in 13..=18 {
        let topo = instance(id)?;
        for seed in [1, 2, 3] {
            let opts = RunOptions::new(Stop::Jobs(20_000), seed).trace({
                let mut t = TraceOptions::all(&topo);
                t.events = true;
                t
            });
            let p = run(&topo, &PolicySpec::proposed(), &opts).map_err(err)?;
            let s = run(&topo, &PolicySpec::static_priority(), &opts).map_err(err)?;
            if p.trace != s.trace || p.state != s.state {
                return Err(format!("instance {id} seed {seed}: traces differ"));
            }
        }
    }
    Ok("instances 13-18 x 3 seeds: identical traces and event logs".into())
}

fn qualitative_orderings() -> Outcome {
    let cfg = parse_config(
        "seed = 5\nreplications = 10\njobs = 100000\nwarmup = 5000\ninstances = [\"1-12\"]\npolicies = [\"sdp\", \"static\"]\nrandomized_baseline = false\n",
    )
    .map_err(err)?;
    let res = run_experiment(&cfg).map_err(err)?;
    let mut bad = Vec::new();
    let mut worst_gap: f64 = 0.0;
    let mut min_excess = f64::INFINITY;
    for id in 1..=12 {
        let i = id.to_string();
        let sdp = res.report.row(&i, "sdp").ok_or("missing sdp row")?.cost;
        let st = res.report.row(&i, "static").ok_or("missing static row")?.cost;
        let rel = (st - sdp) / sdp;
        if id <= 6 {
            min_excess = min_excess.min(rel);
            if rel <= 0.0 {
                bad.push(format!("instance {id}: static {st:.2} <= sdp {sdp:.2}"));
            }
        } else {
            worst_gap = worst_gap.max(rel.abs());
            if rel.abs() > 0.05 {
                bad.push(format!("instance {id}: static {st:.2} vs sdp {sdp:.2}"));
            }
        }
    }
    let detail = format!(
        "1-6: static exceeds sdp by >= {:.1}%; 7-12: max |gap| {:.1}% (noise band 5%)",
        100.0 * min_excess,
        100.0 * worst_gap
    );
    if bad.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", bad.join("; ")))
    }
}

fn random_path(rng: &mut RandomStream, times: &[f64]) -> Path {
    let mut v = rng.standard_normal();
    let mut vals = Vec::with_capacity(times.len());
    for _ in times {
        vals.push(v);
        v += rng.standard_normal();
    }
    Path::new(times.to_vec(), vals).expect("sorted times")
}

fn skorokhod_properties() -> Outcome {
    let mut rng = RandomStream::new(8);
    for n in 0..10_000 {
        let len = 1 + (rng.uniform() * 40.0) as usize;
        let mut times = vec![0.0];
        for _ in 1..len {
            let last = *times.last().unwrap();
            times.push(last + 0.01 + rng.uniform());
        }
        let horizon = times.last().unwrap() + 1.0;
        let x = random_path(&mut rng, &times);
        let y = random_path(&mut rng, &times);
        let (phi, psi) = reflect(&x);
        if phi.values().iter().any(|v| *v < 0.0) {
            return Err(format!("path {n}: phi negative"));
        }
        if psi.values().windows(2).any(|w| w[1] < w[0]) {
            return Err(format!("path {n}: psi decreases"));
        }
        for (k, t) in psi.times().iter().enumerate() {
            let rose = if k == 0 { psi.values()[0] > 0.0 } else { psi.values()[k] > psi.values()[k - 1] };
            if rose && phi.value_at(*t).unwrap().abs() > 1e-12 {
                return Err(format!("path {n}: psi increases at t={t} where phi > 0"));
            }
        }
        let (phi_y, psi_y) = reflect(&y);
        let d = x.sup_distance(&y, horizon).map_err(err)?;
        let dphi = phi.sup_distance(&phi_y, horizon).map_err(err)?;
        let dpsi = psi.sup_distance(&psi_y, horizon).map_err(err)?;
        if dphi > 2.0 * d + 1e-12 || dpsi > d + 1e-12 {
            return Err(format!("path {n}: Lipschitz bound broken ({dphi}, {dpsi} vs {d})"));
        }
    }
    Ok("10^4 random path pairs: phi >= 0, psi monotone, complementarity, Lipschitz 2 / 1".into())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn tracking_trend() -> Outcome {
    let horizon_t = 20.0;
    let policy = parse_policy("sdp-preemptive").map_err(err)?;
    let mut medians = Vec::new();
    for r in [5.0, 10.0, 20.0] {
        let topo = heavy_traffic_family(r).map_err(err)?;
        let horizon = r * r * horizon_t;
        let mut devs = Vec::new();
        for seed in 0..20 {
            let opts = RunOptions::new(Stop::Horizon(horizon), 1000 + seed)
                .trace(TraceOptions::buffers(&topo, &["3", "4", "5"]).map_err(err)?);
            let out = run(&topo, &policy, &opts).map_err(err)?;
            devs.push(tracking_deviation(&topo, &out.trace, r, horizon).map_err(err)?);
        }
        medians.push(median(devs));
    }
    check(
        medians.windows(2).all(|w| w[1] <= w[0]),
        format!(
            "median sup|Q4 - Q3∧W4|/r over 20 seeds: r=5 {:.3}, r=10 {:.3}, r=20 {:.3}",
            medians[0], medians[1], medians[2]
        ),
    )
}

fn rbm_mean() -> Outcome {
    let m = rbm_time_average(-1.0, 1.0, 1e4, 1e-3, 42).map_err(err)?;
    check((m - 0.5).abs() <= 0.05, format!("time average {m:.4} (target 0.5 ± 0.05)"))
}

fn fluid_utilization() -> Outcome {
    let topo = instance(1)?;
    let a = topo.require_activity("A").map_err(err)?;
    let b = topo.require_activity("B").map_err(err)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for k in ["sdp", "static", "fcfs", "randomized-2/3"] {
        let opts = RunOptions::new(Stop::Jobs(200_000), 9).warmup(10_000);
        let out = run(&topo, &parse_policy(k).map_err(err)?, &opts).map_err(err)?;
        let ua = out.stats.utilization(a).map_err(err)?;
        let u4 = ua + out.stats.utilization(b).map_err(err)?;
        ok &= (ua - 0.475).abs() <= 0.02 && (u4 - 0.95).abs() <= 0.01;
        parts.push(format!("{k}: T_A/t {ua:.4}, server 4 {u4:.4}"));
    }
    check(ok, parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("balance invariant under every policy", balance_invariant),
        ("control-problem solvers match grid oracles", dcp_oracles),
        ("three-type static-regime closed form", threetype_static_case),
        ("M/M/1 time-average number in system", mm1_sanity),
        ("instance-1 proposed-policy means", table3_instance1),
        ("proposed equals static when mu3 > mu_A", policy_identity),
        ("static vs sdp orderings on instances 1-12", qualitative_orderings),
        ("reflection map properties", skorokhod_properties),
        ("tracking statistic nonincreasing in r", tracking_trend),
        ("reflected Brownian motion mean", rbm_mean),
        ("fluid utilization at server 4", fluid_utilization),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(d) => eprintln!("criterion {:>2} PASS  {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                eprintln!("criterion {:>2} FAIL  {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    eprintln!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
