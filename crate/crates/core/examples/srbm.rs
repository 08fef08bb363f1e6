//! Drift, covariance and reflection matrix of the diffusion limit at
//! instance-4 style rates with server 3 heavy.

use forkjoin::analytics::{srbm_data, SrbmInput};

fn main() -> forkjoin::Result<()> {
    let mu_ab = 2.0 / 0.95;
    let mut inp = SrbmInput::markovian(1.0, 1.0, [1.0 / 0.7, 1.0 / 0.7, 1.0 / 0.95, 1.0 / 0.7], mu_ab, mu_ab, -1.0);
    // Erlang-3 services everywhere
    inp.scv = [1.0 / 3.0; 4];
    inp.scv_a = 1.0 / 3.0;
    inp.scv_b = 1.0 / 3.0;
    let inp = inp.with_heavy(2, -0.5);
    let d = srbm_data(&inp)?;
    println!("coordinates {:?}", d.labels);
    println!("theta {}", d.theta.transpose());
    println!("Sigma {}", d.sigma);
    println!("R {}", d.r);
    println!("smallest eigenvalue of Sigma {:.4}", d.min_eigenvalue());
    Ok(())
}
