//! Reflected Brownian motion: time averages against the stationary mean
//! sigma^2 / (2 |theta|).

use forkjoin::analytics::{rbm_simulate, rbm_time_average};

fn main() -> forkjoin::Result<()> {
    for (theta, sigma2) in [(-1.0, 1.0), (-0.5, 1.0), (-1.0, 4.0)] {
        let avg = rbm_time_average(theta, sigma2, 1e4, 1e-3, 1)?;
        println!("theta {theta:>5}, sigma2 {sigma2}: average {avg:.4}, stationary mean {:.4}", sigma2 / (2.0 * -theta));
    }
    let p = rbm_simulate(-1.0, 1.0, 10.0, 1e-2, 3)?;
    let max = p.values().iter().copied().fold(0.0, f64::max);
    println!("sample path on [0, 10]: {} breakpoints, max {max:.3}", p.len());
    Ok(())
}
