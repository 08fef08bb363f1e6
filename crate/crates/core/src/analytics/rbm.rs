use crate::error::{Error, Result};
use crate::path::Path;
use crate::stochastic::RandomStream;

fn check(theta: f64, sigma2: f64, horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(horizon >= 0.0) || !(sigma2 >= 0.0) || !theta.is_finite() {
        return Err(Error::Input(format!(
            "rbm needs dt > 0, horizon >= 0, sigma2 >= 0 (got dt={dt}, horizon={horizon}, sigma2={sigma2}, theta={theta})"
        )));
    }
    Ok((horizon / dt).round() as usize)
}

/// Euler scheme for a one-dimensional reflected Brownian motion started at 0:
/// `x <- max(x + theta dt + sigma sqrt(dt) Z, 0)`.
pub fn rbm_simulate(theta: f64, sigma2: f64, horizon: f64, dt: f64, seed: u64) -> Result<Path> {
    let steps = check(theta, sigma2, horizon, dt)?;
    let mut rng = RandomStream::new(seed);
    let sd = (sigma2 * dt).sqrt();
    let mut path = Path::starting_at(0.0, 0.0);
    let mut x = 0.0;
    for k in 1..=steps {
        x = (x + theta * dt + sd * rng.standard_normal()).max(0.0);
        path.push(k as f64 * dt, x);
    }
    Ok(path)
}

/// Time average of the same scheme over `[0, horizon]` without storing the path.
pub fn rbm_time_average(theta: f64, sigma2: f64, horizon: f64, dt: f64, seed: u64) -> Result<f64> {
    let steps = check(theta, sigma2, horizon, dt)?;
    if steps == 0 {
        return Ok(0.0);
    }
    let mut rng = RandomStream::new(seed);
    let sd = (sigma2 * dt).sqrt();
    let (mut x, mut area) = (0.0f64, 0.0);
    for _ in 0..steps {
        area += x;
        x = (x + theta * dt + sd * rng.standard_normal()).max(0.0);
    }
    Ok(area / steps as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_drain_stays_at_zero() {
        let p = rbm_simulate(-1.0, 0.0, 5.0, 0.01, 3).unwrap();
        assert!(p.values().iter().all(|v| *v == 0.0));
        assert_eq!(rbm_time_average(-1.0, 0.0, 5.0, 0.01, 3).unwrap(), 0.0);
    }

    #[test]
    fn path_is_nonnegative() {
        let p = rbm_simulate(-0.5, 2.0, 50.0, 0.01, 9).unwrap();
        assert!(p.values().iter().all(|v| *v >= 0.0));
        assert!(p.len() > 100);
    }

    #[test]
    fn stream_matches_stored_path() {
        let p = rbm_simulate(-1.0, 1.0, 10.0, 0.01, 4).unwrap();
        let avg = rbm_time_average(-1.0, 1.0, 10.0, 0.01, 4).unwrap();
        let integral = p.integral(0.0, 10.0).unwrap() / 10.0;
        assert!((avg - integral).abs() < 1e-9, "{avg} {integral}");
    }

    #[test]
    fn rejects_bad_step() {
        assert!(rbm_simulate(-1.0, 1.0, 1.0, 0.0, 1).is_err());
    }
}
