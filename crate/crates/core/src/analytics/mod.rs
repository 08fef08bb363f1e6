//! Diffusion-level tools: reflection maps, path-wise control problems and
//! their brute-force oracles, SRBM data, tracking statistics, and a
//! reflected Brownian motion simulator.

mod dcp;
mod rbm;
mod reflection;
mod srbm;
mod tracking;

pub use dcp::{
    dcp_grid_oracle, dcp_objective, fork_dcp_objective, fork_dcp_oracle, fork_dcp_solve, lemma1_solve,
    network_solution, threetype_dcp_objective, threetype_dcp_solve, threetype_grid_oracle, DcpInstance,
    ForkDcpInstance, NetworkSolution, ThreeTypeDcpInstance, ThreeTypeSolution,
};
pub use rbm::{rbm_simulate, rbm_time_average};
pub use reflection::reflect;
pub use srbm::{srbm_data, SrbmData, SrbmInput};
pub use tracking::{tracking_deviation, workload_path};
