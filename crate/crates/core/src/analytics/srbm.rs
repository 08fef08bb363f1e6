use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primitive data of the two-type network for the diffusion limit.
///
/// Servers are indexed `[1, 2, 3, 5]`; `theta[i]` is `Some` exactly when
/// `heavy[i]` is set. All `scv_*` are squared coefficients of variation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrbmInput {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub scv_arrival_a: f64,
    pub scv_arrival_b: f64,
    pub mu: [f64; 4],
    pub scv: [f64; 4],
    pub mu_a: f64,
    pub mu_b: f64,
    pub scv_a: f64,
    pub scv_b: f64,
    pub heavy: [bool; 4],
    pub theta: [Option<f64>; 4],
    /// Drift of the server-4 workload.
    pub theta4: f64,
}

pub const SERVER_LABELS: [&str; 4] = ["1", "2", "3", "5"];

impl SrbmInput {
    /// All four servers light, Poisson arrivals, exponential services.
    pub fn markovian(lambda_a: f64, lambda_b: f64, mu: [f64; 4], mu_a: f64, mu_b: f64, theta4: f64) -> Self {
        SrbmInput {
            lambda_a,
            lambda_b,
            scv_arrival_a: 1.0,
            scv_arrival_b: 1.0,
            mu,
            scv: [1.0; 4],
            mu_a,
            mu_b,
            scv_a: 1.0,
            scv_b: 1.0,
            heavy: [false; 4],
            theta: [None; 4],
            theta4,
        }
    }

    /// Marks server `i` (index into [`SERVER_LABELS`]) heavy with drift `theta`.
    pub fn with_heavy(mut self, i: usize, theta: f64) -> Self {
        self.heavy[i] = true;
        self.theta[i] = Some(theta);
        self
    }

    fn check(&self) -> Result<()> {
        let pos = [self.lambda_a, self.lambda_b, self.mu_a, self.mu_b]
            .into_iter()
            .chain(self.mu);
        if pos.into_iter().any(|v| !(v > 0.0)) {
            return Err(Error::Input("rates must be positive".into()));
        }
        let scvs = [self.scv_arrival_a, self.scv_arrival_b, self.scv_a, self.scv_b]
            .into_iter()
            .chain(self.scv);
        if scvs.into_iter().any(|v| !(v >= 0.0)) {
            return Err(Error::Input("scvs must be nonnegative".into()));
        }
        for i in 0..4 {
            match (self.heavy[i], self.theta[i]) {
                (true, Some(t)) if t.is_finite() => {}
                (false, None) => {}
                _ => {
                    return Err(Error::Input(format!(
                        "server {}: heavy flag {} inconsistent with drift {:?}",
                        SERVER_LABELS[i], self.heavy[i], self.theta[i]
                    )))
                }
            }
        }
        if !self.theta4.is_finite() {
            return Err(Error::Input("workload drift must be finite".into()));
        }
        Ok(())
    }
}

/// Drift, covariance and reflection matrix restricted to the heavy servers,
/// with the workload coordinate always last.
#[derive(Clone, Debug, PartialEq)]
pub struct SrbmData {
    /// Coordinate labels: heavy server labels then `"W4"`.
    pub labels: Vec<String>,
    pub theta: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl SrbmData {
    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.sigma.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn srbm_data(inp: &SrbmInput) -> Result<SrbmData> {
    inp.check()?;
    let chi = inp.heavy.map(|h| if h { 1.0 } else { 0.0 });
    let th = inp.theta.map(|t| t.unwrap_or(0.0));
    let ratio = inp.mu_a / inp.mu_b;
    let [mu1, mu2, mu3, mu5] = inp.mu;
    let [s1, s2, s3, s5] = inp.scv;
    let (la, lb) = (inp.lambda_a, inp.lambda_b);

    let theta = [
        th[0],
        th[1],
        th[2] - chi[0] * th[0],
        th[3] - chi[1] * th[1],
        inp.theta4 - chi[0] * th[0] - chi[1] * ratio * th[1],
    ];
    #[rustfmt::skip]
    let r = [
        [mu1, 0.0, 0.0, 0.0, 0.0],
        [0.0, mu2, 0.0, 0.0, 0.0],
        [-chi[0] * mu1, 0.0, mu3, 0.0, 0.0],
        [0.0, -chi[1] * mu2, 0.0, mu5, 0.0],
        [-chi[0] * mu1, -chi[1] * ratio * mu2, 0.0, 0.0, inp.mu_a],
    ];
    let up_a = chi[0] * s1 + (1.0 - chi[0]) * inp.scv_arrival_a;
    let up_b = chi[1] * s2 + (1.0 - chi[1]) * inp.scv_arrival_b;
    let c33 = la * (up_a + s3);
    let c34 = la * up_a;
    let c46 = ratio * lb * up_b;
    let c66 = lb * (up_b + s5);
    let c44 = la * (up_a + inp.scv_a) + ratio * ratio * lb * (up_b + inp.scv_b);
    #[rustfmt::skip]
    let sigma = [
        [la * (inp.scv_arrival_a + s1), 0.0, -la * s1, 0.0, -la * s1],
        [0.0, lb * (inp.scv_arrival_b + s2), 0.0, -lb * s2, -ratio * lb * s2],
        [-la * s1, 0.0, c33, 0.0, c34],
        [0.0, -lb * s2, 0.0, c66, c46],
        [-la * s1, -ratio * lb * s2, c34, c46, c44],
    ];

    let keep: Vec<usize> = (0..4).filter(|&i| inp.heavy[i]).chain([4]).collect();
    let n = keep.len();
    let labels = keep
        .iter()
        .map(|&i| if i == 4 { "W4".to_string() } else { SERVER_LABELS[i].to_string() })
        .collect();
    let data = SrbmData {
        labels,
        theta: DVector::from_iterator(n, keep.iter().map(|&i| theta[i])),
        sigma: DMatrix::from_fn(n, n, |i, j| sigma[keep[i]][keep[j]]),
        r: DMatrix::from_fn(n, n, |i, j| r[keep[i]][keep[j]]),
    };
    let scale = data.sigma.amax().max(1.0);
    if data.min_eigenvalue() < -1e-9 * scale {
        return Err(Error::Input(format!(
            "covariance is not positive semidefinite (min eigenvalue {})",
            data.min_eigenvalue()
        )));
    }
    Ok(data)
}
