//! Experiment configuration documents.
//!
//! ```toml
//! seed = 7                  # optional, default 0
//! replications = 10
//! jobs = 200000             # arrivals per job type
//! warmup = 10000            # arrivals per job type discarded
//! h_a = 2.0
//! h_b = 1.0
//! instances = [1, 2, "13-18", "mm1"]
//! policies = ["proposed", "static", { kind = "randomized", p = 0.3 }]
//!
//! [entry]                   # optional mean service times of servers 1 and 2
//! mean1 = 0.7
//! mean2 = 0.7
//!
//! [networks.mm1]            # optional custom networks, referenced by name
//! # a full topology table (job_types, buffers, servers, activities)
//! ```

use std::collections::BTreeMap;
use std::path::{Path as FsPath, PathBuf};

use serde::Deserialize;
use toml::Value;

use crate::error::{Error, Result};
use crate::instances::{preset, EntryRates};
use crate::policies::{PolicyKind, PolicySpec};
use crate::topology::{Topology, TopologySpec};

/// One network an experiment runs on.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub name: String,
    /// Table row when the network is a preset.
    pub preset: Option<u32>,
    pub topology: Topology,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub instances: Vec<InstanceSpec>,
    pub policies: Vec<PolicySpec>,
    pub replications: usize,
    pub jobs: u64,
    pub warmup: u64,
    pub seed: u64,
    pub h_a: f64,
    pub h_b: f64,
    pub entry: EntryRates,
    /// Add randomized-2/3 to the lowest-cost baseline when absent.
    pub randomized_baseline: bool,
    pub check_invariants: bool,
    pub parallelism: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Policies actually simulated, including the baseline extra.
    pub fn effective_policies(&self) -> Vec<PolicySpec> {
        let mut ps = self.policies.clone();
        let extra = PolicySpec::randomized(2.0 / 3.0);
        if self.randomized_baseline && !ps.iter().any(|p| p.name() == extra.name()) {
            ps.push(extra);
        }
        ps
    }

    /// Scales job and replication counts for quick runs; keeps at least two
    /// replications when there were two or more.
    pub fn scaled(&self, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::Configuration(format!("scale {fraction} must lie in (0, 1]")));
        }
        let mut c = self.clone();
        let min_reps = self.replications.min(2);
        c.replications = ((self.replications as f64 * fraction).round() as usize).max(min_reps);
        c.jobs = ((self.jobs as f64 * fraction).round() as u64).max(1);
        c.warmup = (self.warmup as f64 * fraction).round() as u64;
        if c.warmup >= c.jobs {
            c.warmup = c.jobs / 2;
        }
        Ok(c)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    #[serde(default)]
    seed: Option<u64>,
    replications: Option<i64>,
    jobs: Option<i64>,
    #[serde(default)]
    warmup: Option<i64>,
    #[serde(default)]
    h_a: Option<f64>,
    #[serde(default)]
    h_b: Option<f64>,
    instances: Option<Vec<Value>>,
    policies: Option<Vec<Value>>,
    #[serde(default)]
    entry: Option<EntryRates>,
    #[serde(default)]
    randomized_baseline: Option<bool>,
    #[serde(default)]
    check_invariants: Option<bool>,
    #[serde(default)]
    parallelism: Option<usize>,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    networks: BTreeMap<String, Value>,
}

fn perr(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

pub fn load_config(path: &FsPath) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: Raw = toml::from_str(text).map_err(|e| {
        let loc = e
            .span()
            .map(|s| {
                let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
                format!("line {line}")
            })
            .unwrap_or_else(|| "document".into());
        perr(loc, e.message().to_string())
    })?;
    let entry = raw.entry.unwrap_or_default();
    if !(entry.mean1 > 0.0 && entry.mean2 > 0.0) {
        return Err(perr("entry", "mean service times must be positive"));
    }
    let replications = raw.replications.ok_or_else(|| perr("replications", "missing"))?;
    if replications < 1 {
        return Err(perr("replications", format!("must be at least 1, got {replications}")));
    }
    let jobs = raw.jobs.ok_or_else(|| perr("jobs", "missing"))?;
    if jobs < 1 {
        return Err(perr("jobs", format!("must be at least 1, got {jobs}")));
    }
    let warmup = raw.warmup.unwrap_or(0);
    if warmup < 0 || warmup >= jobs {
        return Err(perr("warmup", format!("warm-up {warmup} must lie in [0, jobs = {jobs})")));
    }
    let h_a = raw.h_a.unwrap_or(2.0);
    let h_b = raw.h_b.unwrap_or(1.0);
    if !(h_a >= 0.0 && h_b >= 0.0) {
        return Err(perr("h_a/h_b", "holding costs must be nonnegative"));
    }
    let mut networks = BTreeMap::new();
    for (name, v) in &raw.networks {
        let loc = format!("networks.{name}");
        let spec: TopologySpec = v.clone().try_into().map_err(|e: toml::de::Error| perr(&loc, e.message()))?;
        let topo = Topology::new(spec).map_err(|e| perr(&loc, e.to_string()))?;
        networks.insert(name.clone(), topo);
    }
    let inst_values = raw.instances.ok_or_else(|| perr("instances", "missing"))?;
    if inst_values.is_empty() {
        return Err(perr("instances", "at least one instance is required"));
    }
    let mut instances = Vec::new();
    for (i, v) in inst_values.iter().enumerate() {
        let loc = format!("instances[{i}]");
        for spec in resolve_instance(v, &networks, entry, &loc)? {
            if instances.iter().any(|x: &InstanceSpec| x.name == spec.name) {
                return Err(perr(&loc, format!("instance {} listed twice", spec.name)));
            }
            instances.push(spec);
        }
    }
    let pol_values = raw.policies.ok_or_else(|| perr("policies", "missing"))?;
    if pol_values.is_empty() {
        return Err(perr("policies", "at least one policy is required"));
    }
    let mut policies: Vec<PolicySpec> = Vec::new();
    for (i, v) in pol_values.iter().enumerate() {
        let loc = format!("policies[{i}]");
        let p = policy_value(v).map_err(|e| perr(&loc, e))?;
        if policies.iter().any(|q| q.name() == p.name()) {
            return Err(perr(&loc, format!("policy {} listed twice", p.name())));
        }
        for inst in &instances {
            crate::policies::Controller::compile(&inst.topology, &p)
                .map_err(|e| perr(&loc, format!("instance {}: {e}", inst.name)))?;
        }
        policies.push(p);
    }
    Ok(ExperimentConfig {
        instances,
        policies,
        replications: replications as usize,
        jobs: jobs as u64,
        warmup: warmup as u64,
        seed: raw.seed.unwrap_or(0),
        h_a,
        h_b,
        entry,
        randomized_baseline: raw.randomized_baseline.unwrap_or(true),
        check_invariants: raw.check_invariants.unwrap_or(false),
        parallelism: raw.parallelism,
        out_dir: raw.out,
    })
}

fn resolve_instance(
    v: &Value,
    networks: &BTreeMap<String, Topology>,
    entry: EntryRates,
    loc: &str,
) -> Result<Vec<InstanceSpec>> {
    let from_preset = |id: i64| -> Result<InstanceSpec> {
        let id = u32::try_from(id).map_err(|_| perr(loc, format!("unknown preset {id}")))?;
        let p = preset(id).map_err(|_| perr(loc, format!("unknown preset {id}")))?;
        Ok(InstanceSpec {
            name: id.to_string(),
            preset: Some(id),
            topology: p.topology(entry).map_err(|e| perr(loc, e.to_string()))?,
        })
    };
    match v {
        Value::Integer(id) => Ok(vec![from_preset(*id)?]),
        Value::String(s) => {
            if let Some(t) = networks.get(s) {
                return Ok(vec![InstanceSpec {
                    name: s.clone(),
                    preset: None,
                    topology: t.clone(),
                }]);
            }
            if let Some((lo, hi)) = s.split_once('-') {
                let parse = |x: &str| {
                    x.trim()
                        .parse::<i64>()
                        .map_err(|_| perr(loc, format!("bad instance range `{s}`")))
                };
                let (lo, hi) = (parse(lo)?, parse(hi)?);
                if lo > hi {
                    return Err(perr(loc, format!("empty instance range `{s}`")));
                }
                return (lo..=hi).map(from_preset).collect();
            }
            match s.parse::<i64>() {
                Ok(id) => Ok(vec![from_preset(id)?]),
                Err(_) => Err(perr(loc, format!("unknown network `{s}`"))),
            }
        }
        other => Err(perr(loc, format!("expected a preset number or network name, got {}", other.type_str()))),
    }
}

/// Parses a policy key such as `proposed`, `sdp`, `static`, `fcfs`,
/// `randomized`, `randomized-2/3`, `randomized-0.3`, `fork-sdp`, each
/// optionally suffixed with `-preemptive`.
pub fn parse_policy(key: &str) -> Result<PolicySpec> {
    policy_key(key).map_err(Error::Configuration)
}

fn policy_key(key: &str) -> std::result::Result<PolicySpec, String> {
    let k = key.trim().to_ascii_lowercase().replace('_', "-");
    let (base, preemptive) = match k.strip_suffix("-preemptive") {
        Some(b) => (b.to_string(), true),
        None => (k.clone(), false),
    };
    let kind = match base.as_str() {
        "proposed" => PolicyKind::Proposed,
        "sdp" => PolicyKind::Sdp,
        "static" | "static-priority" | "priority" => PolicyKind::StaticPriority,
        "fcfs" => PolicyKind::Fcfs,
        "fork-sdp" | "forksdp" => PolicyKind::ForkSdp,
        "randomized" => PolicyKind::Randomized { p: 0.5 },
        "threetype" | "three-type" | "three-type-rule" => PolicyKind::ThreeTypeRule {
            h_a: 1.0,
            h_b: 1.0,
            h_c: 1.0,
        },
        other => match other.strip_prefix("randomized-") {
            Some(p) => PolicyKind::Randomized { p: parse_probability(p)? },
            None => return Err(format!("unknown policy `{key}`")),
        },
    };
    let spec = PolicySpec { kind, preemptive };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let bad = || format!("bad probability `{s}`");
    match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.parse().map_err(|_| bad())?;
            let d: f64 = d.parse().map_err(|_| bad())?;
            Ok(n / d)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

fn policy_value(v: &Value) -> std::result::Result<PolicySpec, String> {
    match v {
        Value::String(s) => policy_key(s),
        Value::Table(t) => {
            let kind = t
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| "policy table needs a string `kind`".to_string())?;
            let mut spec = policy_key(kind)?;
            for (key, val) in t {
                let num = || val.as_float().or_else(|| val.as_integer().map(|i| i as f64));
                match (key.as_str(), &mut spec.kind) {
                    ("kind", _) => {}
                    ("preemptive", _) => {
                        spec.preemptive = val.as_bool().ok_or("`preemptive` must be a boolean")?;
                    }
                    ("p", PolicyKind::Randomized { p }) => {
                        *p = match val {
                            Value::String(s) => parse_probability(s)?,
                            _ => num().ok_or("`p` must be a number")?,
                        };
                    }
                    ("h_a", PolicyKind::ThreeTypeRule { h_a, .. }) => *h_a = num().ok_or("`h_a` must be a number")?,
                    ("h_b", PolicyKind::ThreeTypeRule { h_b, .. }) => *h_b = num().ok_or("`h_b` must be a number")?,
                    ("h_c", PolicyKind::ThreeTypeRule { h_c, .. }) => *h_c = num().ok_or("`h_c` must be a number")?,
                    (other, _) => return Err(format!("unexpected key `{other}` for policy `{kind}`")),
                }
            }
            spec.validate().map_err(|e| e.to_string())?;
            Ok(spec)
        }
        other => Err(format!("expected a policy name or table, got {}", other.type_str())),
    }
}
