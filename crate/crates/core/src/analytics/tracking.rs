use crate::engine::Trace;
use crate::error::Result;
use crate::path::Path;
use crate::topology::Topology;

/// `W4 = Q4 + (mu_A / mu_B) Q5`, in units of type-a work.
pub fn workload_path(q4: &Path, q5: &Path, mu_a: f64, mu_b: f64) -> Result<Path> {
    let ratio = mu_a / mu_b;
    Path::zip_with(&[q4, q5], |v| v[0] + ratio * v[1])
}

/// `sup_{t <= horizon} |Q4 - Q3 ∧ W4| / r` from a trace of buffers 3, 4, 5.
///
/// `horizon` is in unscaled time, i.e. already `r^2 T`.
pub fn tracking_deviation(topo: &Topology, trace: &Trace, r: f64, horizon: f64) -> Result<f64> {
    let mu_a = topo.service_rate(topo.require_activity("A")?);
    let mu_b = topo.service_rate(topo.require_activity("B")?);
    let ratio = mu_a / mu_b;
    let q3 = trace.require_buffer("3")?;
    let q4 = trace.require_buffer("4")?;
    let q5 = trace.require_buffer("5")?;
    let dev = Path::zip_with(&[q3, q4, q5], |v| (v[1] - v[0].min(v[1] + ratio * v[2])).abs())?;
    Ok(dev.sup_abs(horizon) / r)
}
