//! Random-variate generation for interarrival and service times.
//!
//! Every renewal sequence in a network (one per job type, one per activity)
//! draws from its own [`RandomStream`]. Streams are seeded from a replication
//! seed and a stable label, so the `i`-th service time of an activity is the
//! same regardless of which scheduling policy is being simulated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Exponential,
    /// Erlang with `k` phases.
    Erlang(u32),
    /// Gamma with a prescribed squared coefficient of variation.
    GammaScv,
    Deterministic,
}

/// A positive distribution identified by its family and first two moments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct DistributionSpec {
    family: Family,
    mean: f64,
    scv: f64,
}

/// Builds a validated distribution spec.
///
/// `scv` is required for [`Family::GammaScv`]. For the other families it is
/// implied (`1`, `1/k`, `0`); passing a conflicting value is an error.
pub fn make_distribution(family: Family, mean: f64, scv: Option<f64>) -> Result<DistributionSpec> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::Parameter(format!("mean must be positive and finite, got {mean}")));
    }
    let implied = match family {
        Family::Exponential => Some(1.0),
        Family::Erlang(0) => {
            return Err(Error::Parameter("Erlang phase count must be at least 1".into()));
        }
        Family::Erlang(k) => Some(1.0 / f64::from(k)),
        Family::Deterministic => Some(0.0),
        Family::GammaScv => None,
    };
    let scv = match (implied, scv) {
        (Some(i), None) => i,
        (Some(i), Some(s)) if (i - s).abs() <= 1e-12 => i,
        (Some(i), Some(s)) => {
            return Err(Error::Parameter(format!(
                "{family:?} has scv {i}; conflicting scv {s} supplied"
            )));
        }
        (None, Some(s)) if s.is_finite() && s > 0.0 => s,
        (None, Some(s)) => {
            return Err(Error::Parameter(format!("gamma scv must be positive, got {s}")));
        }
        (None, None) => return Err(Error::Parameter("gamma family requires an scv".into())),
    };
    Ok(DistributionSpec { family, mean, scv })
}

impl DistributionSpec {
    pub fn exponential(mean: f64) -> Result<Self> {
        make_distribution(Family::Exponential, mean, None)
    }

    pub fn erlang(k: u32, mean: f64) -> Result<Self> {
        make_distribution(Family::Erlang(k), mean, None)
    }

    pub fn gamma_scv(mean: f64, scv: f64) -> Result<Self> {
        make_distribution(Family::GammaScv, mean, Some(scv))
    }

    pub fn deterministic(mean: f64) -> Result<Self> {
        make_distribution(Family::Deterministic, mean, None)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Reciprocal of the mean.
    pub fn rate(&self) -> f64 {
        1.0 / self.mean
    }

    pub fn scv(&self) -> f64 {
        self.scv
    }

    pub fn variance(&self) -> f64 {
        self.scv * self.mean * self.mean
    }

    /// Same family and variability, different mean.
    pub fn with_mean(&self, mean: f64) -> Result<Self> {
        let scv = matches!(self.family, Family::GammaScv).then_some(self.scv);
        make_distribution(self.family, mean, scv)
    }

    /// `(shape, scale)` of the equivalent gamma law; `None` for deterministic.
    pub fn gamma_shape_scale(&self) -> Option<(f64, f64)> {
        match self.family {
            Family::Deterministic => None,
            _ => Some((1.0 / self.scv, self.mean * self.scv)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    family: String,
    mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scv: Option<f64>,
}

impl TryFrom<RawSpec> for DistributionSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let family = match raw.family.to_ascii_lowercase().as_str() {
            "exponential" | "exp" => Family::Exponential,
            "erlang" => Family::Erlang(raw.k.ok_or_else(|| {
                Error::Parameter("erlang distribution requires `k`".into())
            })?),
            "gamma" => Family::GammaScv,
            "deterministic" | "constant" => Family::Deterministic,
            other => return Err(Error::Parameter(format!("unknown distribution family `{other}`"))),
        };
        let scv = match family {
            Family::GammaScv => raw.scv,
            _ => None,
        };
        make_distribution(family, raw.mean, scv)
    }
}

impl From<DistributionSpec> for RawSpec {
    fn from(spec: DistributionSpec) -> Self {
        let (family, k, scv) = match spec.family {
            Family::Exponential => ("exponential", None, None),
            Family::Erlang(k) => ("erlang", Some(k), None),
            Family::GammaScv => ("gamma", None, Some(spec.scv)),
            Family::Deterministic => ("deterministic", None, None),
        };
        RawSpec {
            family: family.to_string(),
            mean: spec.mean,
            k,
            scv,
        }
    }
}

/// A distribution compiled for repeated sampling.
#[derive(Clone, Debug)]
pub struct Sampler {
    spec: DistributionSpec,
    kernel: Kernel,
}

#[derive(Clone, Debug)]
enum Kernel {
    Exp(Exp<f64>),
    Erlang { k: u32, scale: f64 },
    Gamma(Gamma<f64>),
    Constant(f64),
}

impl Sampler {
    pub fn new(spec: DistributionSpec) -> Self {
        let kernel = match spec.family {
            Family::Exponential => Kernel::Exp(Exp::new(spec.rate()).expect("positive rate")),
            Family::Erlang(k) => Kernel::Erlang {
                k,
                scale: spec.mean / f64::from(k),
            },
            Family::GammaScv => {
                let (shape, scale) = spec.gamma_shape_scale().expect("gamma family");
                Kernel::Gamma(Gamma::new(shape, scale).expect("positive gamma parameters"))
            }
            Family::Deterministic => Kernel::Constant(spec.mean),
        };
        Sampler { spec, kernel }
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kernel {
            Kernel::Exp(d) => d.sample(rng),
            Kernel::Erlang { k, scale } => {
                let mut s = 0.0;
                for _ in 0..*k {
                    let e: f64 = Exp1.sample(rng);
                    s += e;
                }
                s * scale
            }
            Kernel::Gamma(d) => d.sample(rng),
            Kernel::Constant(c) => *c,
        }
    }
}

/// 64-bit FNV-1a; stable across platforms and releases.
pub fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed of the stream named `label` under replication seed `base`.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    base ^ label_hash(label)
}

/// A seeded, replayable source of variates.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            counter: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream `label` belonging to the replication seeded with `base`.
    pub fn derived(base: u64, label: &str) -> Self {
        Self::new(derive_seed(base, label))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of variates drawn so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Draws one strictly positive variate.
    pub fn draw(&mut self, sampler: &Sampler) -> f64 {
        self.counter += 1;
        loop {
            let x = sampler.draw(&mut self.rng);
            if x > 0.0 {
                return x;
            }
        }
    }

    /// Uniform on `[0, 1)`; counts as one draw.
    pub fn uniform(&mut self) -> f64 {
        self.counter += 1;
        self.rng.random::<f64>()
    }

    /// Standard normal; counts as one draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.counter += 1;
        rand_distr::StandardNormal.sample(&mut self.rng)
    }
}

/// One-off draw from `spec`. Prefer [`Sampler`] in loops.
pub fn sample(stream: &mut RandomStream, spec: &DistributionSpec) -> f64 {
    stream.draw(&Sampler::new(*spec))
}
