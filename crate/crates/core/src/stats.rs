//! Time averages, replication confidence intervals, holding-cost tables,
//! and trace functionals for the cost objectives.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::engine::{Trace, WindowStats};
use crate::error::{Error, Result};
use crate::path::Path;
use crate::topology::BufferId;

/// `(1 / (t1 - t0)) int_{t0}^{t1} path dt`, exact for piecewise-constant paths.
pub fn time_average(path: &Path, t0: f64, t1: f64) -> Result<f64> {
    if !(t1 > t0) {
        return Err(Error::Input(format!("empty averaging window [{t0}, {t1}]")));
    }
    Ok(path.integral(t0, t1)? / (t1 - t0))
}

/// Accumulated area of one or more buffers over a measurement window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeAverage {
    pub integral: f64,
    pub span: f64,
    pub warmup_end: f64,
}

impl TimeAverage {
    /// Sum of the listed buffers over the window of `w`.
    pub fn of_buffers(w: &WindowStats, buffers: &[BufferId]) -> Self {
        TimeAverage {
            integral: buffers.iter().map(|b| w.area[b.0]).sum(),
            span: w.span(),
            warmup_end: w.start,
        }
    }

    pub fn mean(&self) -> Result<f64> {
        if !(self.span > 0.0) {
            return Err(Error::Input("time average over an empty window".into()));
        }
        Ok(self.integral / self.span)
    }
}

/// Student-t 95% interval of replication means: `(mean, half_width)`.
pub fn ci95(means: &[f64]) -> Result<(f64, f64)> {
    let n = means.len();
    if n < 2 {
        return Err(Error::Input(format!("a confidence interval needs at least 2 replications, got {n}")));
    }
    let nf = n as f64;
    let mean = means.iter().sum::<f64>() / nf;
    let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let t = StudentsT::new(0.0, 1.0, nf - 1.0)
        .map_err(|e| Error::Input(e.to_string()))?
        .inverse_cdf(0.975);
    Ok((mean, t * var.sqrt() / nf.sqrt()))
}

/// Per-replication averages for one (instance, policy) cell.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub instance: String,
    pub policy: String,
    /// `Q3 + Q7` per replication.
    pub q37: Vec<f64>,
    /// `Q6 + Q10` per replication.
    pub q610: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance: String,
    pub policy: String,
    pub q37_mean: f64,
    pub q37_hw: f64,
    pub q610_mean: f64,
    pub q610_hw: f64,
    pub cost: f64,
    pub deviation_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub policy: String,
    pub avg_deviation_pct: f64,
    pub max_deviation_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub h_a: f64,
    pub h_b: f64,
    pub rows: Vec<SummaryRow>,
    /// `L(i)` per instance.
    pub lowest: BTreeMap<String, f64>,
    pub deviations: Vec<DeviationRow>,
}

impl ExperimentReport {
    pub fn row(&self, instance: &str, policy: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.instance == instance && r.policy == policy)
    }

    pub fn deviation(&self, policy: &str) -> Option<&DeviationRow> {
        self.deviations.iter().find(|d| d.policy == policy)
    }
}

fn mean_hw(xs: &[f64]) -> Result<(f64, f64)> {
    match xs.len() {
        0 => Err(Error::Input("cell has no replications".into())),
        1 => Ok((xs[0], f64::NAN)),
        _ => ci95(xs),
    }
}

/// Costs `J_p(i) = h_a (Q3+Q7) + h_b (Q6+Q10)`, lowest costs `L(i)`, and
/// per-policy average and maximum deviations `100 (J - L) / L`.
///
/// Every (instance, policy) pair seen in `cells` must be present.
pub fn cost_and_tables(cells: &[CellResult], h_a: f64, h_b: f64) -> Result<ExperimentReport> {
    let instances: Vec<String> = unique(cells.iter().map(|c| c.instance.clone()));
    let policies: Vec<String> = unique(cells.iter().map(|c| c.policy.clone()));
    let mut missing = Vec::new();
    for i in &instances {
        for p in &policies {
            if !cells.iter().any(|c| &c.instance == i && &c.policy == p) {
                missing.push(format!("({i}, {p})"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Input(format!("missing cells: {}", missing.join(", "))));
    }
    let mut rows = Vec::new();
    for i in &instances {
        for p in &policies {
            let c = cells.iter().find(|c| &c.instance == i && &c.policy == p).expect("checked");
            let (q37_mean, q37_hw) = mean_hw(&c.q37)?;
            let (q610_mean, q610_hw) = mean_hw(&c.q610)?;
            rows.push(SummaryRow {
                instance: i.clone(),
                policy: p.clone(),
                q37_mean,
                q37_hw,
                q610_mean,
                q610_hw,
                cost: h_a * q37_mean + h_b * q610_mean,
                deviation_pct: 0.0,
            });
        }
    }
    let mut lowest = BTreeMap::new();
    for i in &instances {
        let l = rows
            .iter()
            .filter(|r| &r.instance == i)
            .map(|r| r.cost)
            .fold(f64::INFINITY, f64::min);
        lowest.insert(i.clone(), l);
    }
    for r in &mut rows {
        let l = lowest[&r.instance];
        r.deviation_pct = if l > 0.0 { 100.0 * (r.cost - l) / l } else { 0.0 };
    }
    let deviations = policies
        .iter()
        .map(|p| {
            let devs: Vec<f64> = rows.iter().filter(|r| &r.policy == p).map(|r| r.deviation_pct).collect();
            DeviationRow {
                policy: p.clone(),
                avg_deviation_pct: devs.iter().sum::<f64>() / devs.len() as f64,
                max_deviation_pct: devs.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(ExperimentReport {
        h_a,
        h_b,
        rows,
        lowest,
        deviations,
    })
}

/// Average and maximum deviation of each policy over a subset of instances.
pub fn deviations_over(report: &ExperimentReport, instances: &[String]) -> Vec<DeviationRow> {
    let set: BTreeSet<&String> = instances.iter().collect();
    let policies = unique(report.rows.iter().map(|r| r.policy.clone()));
    policies
        .into_iter()
        .filter_map(|p| {
            let devs: Vec<f64> = report
                .rows
                .iter()
                .filter(|r| r.policy == p && set.contains(&r.instance))
                .map(|r| r.deviation_pct)
                .collect();
            (!devs.is_empty()).then(|| DeviationRow {
                avg_deviation_pct: devs.iter().sum::<f64>() / devs.len() as f64,
                max_deviation_pct: devs.iter().copied().fold(0.0, f64::max),
                policy: p,
            })
        })
        .collect()
}

fn unique(it: impl Iterator<Item = String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    it.filter(|x| seen.insert(x.clone())).collect()
}

/// Cost-rate path `h_a Z_a + h_b Z_b` built from recorded buffer paths.
pub fn cost_path(trace: &Trace, a_buffers: &[&str], b_buffers: &[&str], h_a: f64, h_b: f64) -> Result<Path> {
    let mut paths = Vec::new();
    for l in a_buffers.iter().chain(b_buffers) {
        paths.push(trace.require_buffer(l)?);
    }
    let na = a_buffers.len();
    Path::zip_with(&paths, |v| {
        h_a * v[..na].iter().sum::<f64>() + h_b * v[na..].iter().sum::<f64>()
    })
}

/// `Z_a = Q3 + Q4 + Q7 + Q8` and `Z_b = Q5 + Q6 + Q9 + Q10` in the two-type network.
pub const Z_A: [&str; 4] = ["3", "4", "7", "8"];
pub const Z_B: [&str; 4] = ["5", "6", "9", "10"];

/// `int_0^T e^{-delta t} c(t) dt` for a piecewise-constant cost path.
pub fn discounted_cost(cost: &Path, delta: f64, horizon: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("discount rate {delta} must be positive")));
    }
    let times = cost.times();
    let mut acc = 0.0;
    for (i, (t, v)) in times.iter().zip(cost.values()).enumerate() {
        if *t >= horizon {
            break;
        }
        let end = times.get(i + 1).copied().unwrap_or(horizon).min(horizon);
        acc += v * ((-delta * t).exp() - (-delta * end).exp()) / delta;
    }
    Ok(acc)
}

/// `int_0^T c(t) dt`.
pub fn finite_horizon_cost(cost: &Path, horizon: f64) -> Result<f64> {
    cost.integral(cost.start(), horizon)
}

/// `(1 / (t1 - t0)) int c dt`, the long-run average estimate.
pub fn long_run_average_cost(cost: &Path, t0: f64, t1: f64) -> Result<f64> {
    time_average(cost, t0, t1)
}

/// Fraction of replication values strictly above `x`.
pub fn tail_fraction(values: &[f64], x: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Input("tail fraction of no replications".into()));
    }
    Ok(values.iter().filter(|v| **v > x).count() as f64 / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn time_average_examples() {
        let p = Path::new(vec![0.0, 1.0], vec![2.0, 0.0]).unwrap();
        assert_eq!(time_average(&p, 0.0, 2.0).unwrap(), 1.0);
        assert_eq!(time_average(&Path::constant(3.5), 2.0, 9.0).unwrap(), 3.5);
        let q = Path::new(vec![0.0, 0.5, 2.0], vec![1.0, 4.0, 2.0]).unwrap();
        assert_abs_diff_eq!(time_average(&q, 0.0, 3.0).unwrap(), (0.5 + 6.0 + 2.0) / 3.0, epsilon = 1e-12);
        assert!(time_average(&q, 1.0, 1.0).is_err());
    }

    #[test]
    fn ci95_examples() {
        assert_eq!(ci95(&[5.0, 5.0, 5.0]).unwrap(), (5.0, 0.0));
        let (m, hw) = ci95(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m, 2.0);
        assert_abs_diff_eq!(hw, 4.302_652_7 / 3f64.sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(hw, 2.484, epsilon = 5e-4);
        assert!(ci95(&[1.0]).is_err());
    }

    #[test]
    fn ci95_matches_table_magnitudes() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let d = Normal::new(14.0, 0.45).unwrap();
        let xs: Vec<f64> = (0..30).map(|_| d.sample(&mut rng)).collect();
        let (_, hw) = ci95(&xs).unwrap();
        assert!((0.11..0.24).contains(&hw), "{hw}");
    }

    fn cell(i: &str, p: &str, q37: f64, q610: f64) -> CellResult {
        CellResult {
            instance: i.into(),
            policy: p.into(),
            q37: vec![q37, q37],
            q610: vec![q610, q610],
        }
    }

    #[test]
    fn cost_example() {
        let r = cost_and_tables(&[cell("1", "proposed", 14.01, 14.43)], 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(r.rows[0].cost, 42.45, epsilon = 1e-9);
        assert_eq!(r.rows[0].deviation_pct, 0.0);
    }

    #[test]
    fn deviations() {
        let r = cost_and_tables(&[cell("1", "x", 100.0, 0.0), cell("1", "y", 110.0, 0.0)], 1.0, 1.0).unwrap();
        assert_eq!(r.row("1", "x").unwrap().deviation_pct, 0.0);
        assert_abs_diff_eq!(r.row("1", "y").unwrap().deviation_pct, 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.deviation("y").unwrap().max_deviation_pct, 10.0, epsilon = 1e-9);
    }

    #[test]
    fn missing_cells_are_named() {
        let err = cost_and_tables(&[cell("1", "x", 1.0, 1.0), cell("2", "y", 1.0, 1.0)], 1.0, 1.0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(1, y)") && msg.contains("(2, x)"), "{msg}");
    }

    #[test]
    fn objectives() {
        let c = Path::new(vec![0.0, 1.0], vec![2.0, 0.0]).unwrap();
        assert_eq!(finite_horizon_cost(&c, 5.0).unwrap(), 2.0);
        assert_eq!(long_run_average_cost(&c, 0.0, 4.0).unwrap(), 0.5);
        let d = discounted_cost(&Path::constant(1.0), 0.5, 1e3).unwrap();
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-9);
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(tail_fraction(&v, 2.5).unwrap(), 0.5);
        assert!(tail_fraction(&v, 0.0).unwrap() >= tail_fraction(&v, 3.0).unwrap());
    }
}
