//! The 36 two-type test instances and the heavy-traffic scaling family.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::{DistributionSpec, Family};
use crate::topology::{build_preset, PresetKind, PresetParams, Topology};

const INSTANCE_TABLE: &str = include_str!("../data/instances.csv");

/// Mean service time of activities A and B (`mu_A = mu_B = 2 / 0.95`).
pub const MEAN_AB: f64 = 0.95 / 2.0;

/// Default mean service time of the light-traffic entry servers 1 and 2.
pub const DEFAULT_ENTRY_MEAN: f64 = 0.7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variability {
    /// Erlang-3 services.
    Low,
    /// Exponential services.
    Moderate,
    /// Gamma services with scv 3.
    High,
}

impl Variability {
    pub fn service(self, mean: f64) -> Result<DistributionSpec> {
        match self {
            Variability::Low => DistributionSpec::erlang(3, mean),
            Variability::Moderate => DistributionSpec::exponential(mean),
            Variability::High => DistributionSpec::gamma_scv(mean, 3.0),
        }
    }

    pub fn family(self) -> Family {
        match self {
            Variability::Low => Family::Erlang(3),
            Variability::Moderate => Family::Exponential,
            Variability::High => Family::GammaScv,
        }
    }
}

/// One row of the instance table; all fields are mean service times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstancePreset {
    pub instance: u32,
    pub mean3: f64,
    pub mean5: f64,
    pub mean6: f64,
    pub mean7: f64,
    pub variability: Variability,
}

/// Per-run overrides of the rates the table leaves open.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryRates {
    pub mean1: f64,
    pub mean2: f64,
}

impl Default for EntryRates {
    fn default() -> Self {
        EntryRates {
            mean1: DEFAULT_ENTRY_MEAN,
            mean2: DEFAULT_ENTRY_MEAN,
        }
    }
}

impl InstancePreset {
    pub fn mu3(&self) -> f64 {
        1.0 / self.mean3
    }

    pub fn mu_a(&self) -> f64 {
        1.0 / MEAN_AB
    }

    /// Poisson(1) arrivals for both types and the row's services.
    pub fn params(&self, entry: EntryRates) -> Result<PresetParams> {
        let v = self.variability;
        let arrival = DistributionSpec::exponential(1.0)?;
        Ok(PresetParams::new()
            .arrival("a", arrival)
            .arrival("b", arrival)
            .service("1", v.service(entry.mean1)?)
            .service("2", v.service(entry.mean2)?)
            .service("3", v.service(self.mean3)?)
            .service("A", v.service(MEAN_AB)?)
            .service("B", v.service(MEAN_AB)?)
            .service("5", v.service(self.mean5)?)
            .service("6", v.service(self.mean6)?)
            .service("7", v.service(self.mean7)?))
    }

    pub fn topology(&self, entry: EntryRates) -> Result<Topology> {
        build_preset(&PresetKind::Figure1, &self.params(entry)?)
    }
}

/// All 36 rows, parsed once from the embedded table.
pub fn instance_table() -> &'static [InstancePreset] {
    static ROWS: OnceLock<Vec<InstancePreset>> = OnceLock::new();
    ROWS.get_or_init(|| {
        csv::Reader::from_reader(INSTANCE_TABLE.as_bytes())
            .deserialize()
            .collect::<std::result::Result<Vec<InstancePreset>, _>>()
            .expect("embedded instance table is well formed")
    })
}

pub fn preset(id: u32) -> Result<InstancePreset> {
    instance_table()
        .iter()
        .find(|p| p.instance == id)
        .copied()
        .ok_or_else(|| Error::Configuration(format!("unknown preset {id}")))
}

/// Member `r` of the heavy-traffic family used for tracking checks.
///
/// Instance 4's services (Erlang-3, server 3 at 95%, server 5 light) with
/// type-b arrival rate `mu_B (1 - lambda_a / mu_A) - mu_B / (r mu_A)`, so
/// that `r (lambda_a / mu_A + lambda_b / mu_B - 1) = -1 / mu_A`.
pub fn heavy_traffic_family(r: f64) -> Result<Topology> {
    let (lambda_b, params) = heavy_traffic_params(r)?;
    let params = params.arrival("b", DistributionSpec::exponential(1.0 / lambda_b)?);
    build_preset(&PresetKind::Figure1, &params)
}

fn heavy_traffic_params(r: f64) -> Result<(f64, PresetParams)> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("scale r = {r} must be positive")));
    }
    let base = preset(4)?;
    let mu = base.mu_a();
    let lambda_b = mu * (1.0 - 1.0 / mu) - mu / (r * mu);
    if !(lambda_b > 0.0) {
        return Err(Error::Parameter(format!("scale r = {r} leaves no type-b traffic")));
    }
    Ok((lambda_b, base.params(EntryRates::default())?))
}

/// Type-b arrival rate of family member `r`.
pub fn heavy_traffic_lambda_b(r: f64) -> Result<f64> {
    heavy_traffic_params(r).map(|(l, _)| l)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn instance_table_has_36_rows() {
        let t = instance_table();
        assert_eq!(t.len(), 36);
        assert!(t.iter().enumerate().all(|(i, p)| p.instance == i as u32 + 1));
    }

    #[test]
    fn spot_checks() {
        let p7 = preset(7).unwrap();
        assert_eq!((p7.mean3, p7.mean5, p7.mean6, p7.mean7), (0.7125, 0.95, 0.7, 0.7));
        assert_eq!(p7.variability, Variability::Low);
        let p27 = preset(27).unwrap();
        assert_eq!((p27.mean3, p27.mean5, p27.mean6, p27.mean7), (0.35, 0.95, 0.95, 0.95));
        let p34 = preset(34).unwrap();
        assert_eq!((p34.mean5, p34.mean6, p34.mean7), (0.7, 0.7, 0.95));
        assert!(preset(37).unwrap_err().to_string().contains("unknown preset"));
    }

    #[test]
    fn instance_topology_rates() {
        let t = preset(1).unwrap().topology(EntryRates::default()).unwrap();
        assert_eq!(t.buffers().len(), 10);
        let a = t.activity_by_label("A").unwrap();
        assert_abs_diff_eq!(t.service_rate(a), 2.0 / 0.95, epsilon = 1e-12);
        assert_abs_diff_eq!(t.activity(a).service.scv(), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn heavy_traffic_drift() {
        let mu = 2.0 / 0.95;
        for r in [5.0, 10.0, 20.0] {
            let lb = heavy_traffic_lambda_b(r).unwrap();
            assert_abs_diff_eq!(r * (1.0 / mu + lb / mu - 1.0), -1.0 / mu, epsilon = 1e-12);
            heavy_traffic_family(r).unwrap();
        }
        assert!(heavy_traffic_family(0.1).is_err());
    }
}
