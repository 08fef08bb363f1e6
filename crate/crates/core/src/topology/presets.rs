//! The three preset networks: the two-type network with one shared server,
//! its generalization with an arbitrary number of parallel fork branches,
//! and the three-type network with two shared servers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Activity, ActivityId, BufferId, JobType, JobTypeId, Server, ServerId, Topology, TopologySpec};
use crate::error::{Error, Result};
use crate::stochastic::DistributionSpec;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PresetKind {
    /// 2 job types, 7 servers, 10 buffers, 8 activities; server 4 shared.
    Figure1,
    /// Type a forks into `g1 + 1` tasks and type b into `g2 + 1`.
    Multifork { g1: usize, g2: usize },
    /// 3 job types; servers 5 and 6 each shared by two types.
    ThreeType,
}

/// Arrival distributions keyed by job-type label and service distributions
/// keyed by activity label.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PresetParams {
    #[serde(default)]
    pub arrivals: BTreeMap<String, DistributionSpec>,
    #[serde(default)]
    pub services: BTreeMap<String, DistributionSpec>,
}

impl PresetParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn arrival(mut self, job_type: &str, spec: DistributionSpec) -> Self {
        self.arrivals.insert(job_type.to_string(), spec);
        self
    }

    pub fn service(mut self, activity: &str, spec: DistributionSpec) -> Self {
        self.services.insert(activity.to_string(), spec);
        self
    }

    /// Poisson arrivals at rate `lambda` for types a, b, c and exponential
    /// services at rate `mu` for every activity label any preset uses.
    /// Intended for structural tests.
    pub fn uniform_exponential(lambda: f64, mu: f64) -> Self {
        let arr = DistributionSpec::exponential(1.0 / lambda).expect("positive rate");
        let svc = DistributionSpec::exponential(1.0 / mu).expect("positive rate");
        let mut p = PresetParams::new();
        for t in ["a", "b", "c"] {
            p = p.arrival(t, arr);
        }
        for a in [
            "1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "A", "B", "B1", "B2", "C",
        ] {
            p = p.service(a, svc);
        }
        p
    }

    fn arrival_for(&self, label: &str) -> Result<DistributionSpec> {
        self.arrivals
            .get(label)
            .copied()
            .ok_or_else(|| Error::Parameter(format!("no arrival distribution for job type `{label}`")))
    }

    /// Looks up `label`, falling back to `fallback` (used for per-branch
    /// rates that default to a common value).
    fn service_for(&self, label: &str, fallback: Option<&str>) -> Result<DistributionSpec> {
        self.services
            .get(label)
            .or_else(|| fallback.and_then(|f| self.services.get(f)))
            .copied()
            .ok_or_else(|| Error::Parameter(format!("no service distribution for activity `{label}`")))
    }
}

/// Builds and validates one of the preset networks.
pub fn build_preset(kind: &PresetKind, params: &PresetParams) -> Result<Topology> {
    let spec = match kind {
        PresetKind::Figure1 => figure1(params)?,
        PresetKind::Multifork { g1, g2 } => multifork(*g1, *g2, params)?,
        PresetKind::ThreeType => three_type(params)?,
    };
    Topology::new(spec)
}

struct Wiring<'a> {
    label: &'a str,
    server: usize,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    job_type: usize,
}

fn assemble(
    params: &PresetParams,
    job_types: &[(&str, usize)],
    buffers: Vec<String>,
    server_labels: Vec<String>,
    wiring: Vec<Wiring<'_>>,
    fallback: impl Fn(&str) -> Option<&'static str>,
) -> Result<TopologySpec> {
    let job_types = job_types
        .iter()
        .map(|(label, entry)| {
            Ok(JobType {
                label: (*label).to_string(),
                arrival: Some(params.arrival_for(label)?),
                entry_buffer: BufferId(*entry),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut servers: Vec<Server> = server_labels
        .into_iter()
        .map(|label| Server {
            label,
            activities: Vec::new(),
        })
        .collect();
    let mut activities = Vec::with_capacity(wiring.len());
    for (i, w) in wiring.into_iter().enumerate() {
        servers[w.server].activities.push(ActivityId(i));
        activities.push(Activity {
            label: w.label.to_string(),
            server: ServerId(w.server),
            inputs: w.inputs.into_iter().map(BufferId).collect(),
            outputs: w.outputs.into_iter().map(BufferId).collect(),
            service: params.service_for(w.label, fallback(w.label))?,
            job_type: JobTypeId(w.job_type),
        });
    }
    Ok(TopologySpec {
        job_types,
        buffers,
        servers,
        activities,
    })
}

fn labels(range: std::ops::RangeInclusive<usize>) -> Vec<String> {
    range.map(|i| i.to_string()).collect()
}

fn figure1(params: &PresetParams) -> Result<TopologySpec> {
    // buffer k has id k-1, server s has id s-1
    let w = |label, server, inputs: &[usize], outputs: &[usize], job_type| Wiring {
        label,
        server,
        inputs: inputs.to_vec(),
        outputs: outputs.to_vec(),
        job_type,
    };
    let wiring = vec![
        w("1", 0, &[0], &[2, 3], 0),
        w("2", 1, &[1], &[4, 5], 1),
        w("3", 2, &[2], &[6], 0),
        w("A", 3, &[3], &[7], 0),
        w("B", 3, &[4], &[8], 1),
        w("5", 4, &[5], &[9], 1),
        w("6", 5, &[6, 7], &[], 0),
        w("7", 6, &[8, 9], &[], 1),
    ];
    assemble(
        params,
        &[("a", 0), ("b", 1)],
        labels(1..=10),
        labels(1..=7),
        wiring,
        |_| None,
    )
}

/// Buffer order: entries, left upstream branches, the two shared-server
/// buffers, right upstream branches, then the join inputs in the same order.
/// With `g1 = g2 = 1` this reproduces the numbering of the two-type network.
fn multifork(g1: usize, g2: usize, params: &PresetParams) -> Result<TopologySpec> {
    if g1 == 0 || g2 == 0 {
        return Err(Error::Parameter("fork counts g1 and g2 must be at least 1".into()));
    }
    let mut buffers = vec!["1".to_string(), "2".to_string()];
    let ul0 = buffers.len();
    buffers.extend((1..=g1).map(|i| format!("UL{i}")));
    let b4 = buffers.len();
    buffers.push("4".into());
    let b5 = buffers.len();
    buffers.push("5".into());
    let ur0 = buffers.len();
    buffers.extend((1..=g2).map(|i| format!("UR{i}")));
    let dl0 = buffers.len();
    buffers.extend((1..=g1).map(|i| format!("DL{i}")));
    let a_out = buffers.len();
    buffers.push("8".into());
    let b_out = buffers.len();
    buffers.push("9".into());
    let dr0 = buffers.len();
    buffers.extend((1..=g2).map(|i| format!("DR{i}")));

    let mut servers = vec!["1".to_string(), "2".to_string()];
    let l0 = servers.len();
    servers.extend((1..=g1).map(|i| format!("L{i}")));
    let s4 = servers.len();
    servers.push("4".into());
    let r0 = servers.len();
    servers.extend((1..=g2).map(|i| format!("R{i}")));
    let s6 = servers.len();
    servers.push("6".into());
    servers.push("7".into());

    let left: Vec<String> = (1..=g1).map(|i| format!("L{i}")).collect();
    let right: Vec<String> = (1..=g2).map(|i| format!("R{i}")).collect();

    let mut wiring = Vec::new();
    let mut fork_a: Vec<usize> = (ul0..ul0 + g1).collect();
    fork_a.push(b4);
    wiring.push(Wiring {
        label: "1",
        server: 0,
        inputs: vec![0],
        outputs: fork_a,
        job_type: 0,
    });
    let mut fork_b = vec![b5];
    fork_b.extend(ur0..ur0 + g2);
    wiring.push(Wiring {
        label: "2",
        server: 1,
        inputs: vec![1],
        outputs: fork_b,
        job_type: 1,
    });
    for (i, label) in left.iter().enumerate() {
        wiring.push(Wiring {
            label,
            server: l0 + i,
            inputs: vec![ul0 + i],
            outputs: vec![dl0 + i],
            job_type: 0,
        });
    }
    wiring.push(Wiring {
        label: "A",
        server: s4,
        inputs: vec![b4],
        outputs: vec![a_out],
        job_type: 0,
    });
    wiring.push(Wiring {
        label: "B",
        server: s4,
        inputs: vec![b5],
        outputs: vec![b_out],
        job_type: 1,
    });
    for (i, label) in right.iter().enumerate() {
        wiring.push(Wiring {
            label,
            server: r0 + i,
            inputs: vec![ur0 + i],
            outputs: vec![dr0 + i],
            job_type: 1,
        });
    }
    let mut join_a: Vec<usize> = (dl0..dl0 + g1).collect();
    join_a.push(a_out);
    wiring.push(Wiring {
        label: "6",
        server: s6,
        inputs: join_a,
        outputs: vec![],
        job_type: 0,
    });
    let mut join_b = vec![b_out];
    join_b.extend(dr0..dr0 + g2);
    wiring.push(Wiring {
        label: "7",
        server: s6 + 1,
        inputs: join_b,
        outputs: vec![],
        job_type: 1,
    });

    // per-branch rates default to the single-branch labels "3" and "5"
    assemble(
        params,
        &[("a", 0), ("b", 1)],
        buffers,
        servers,
        wiring,
        |label| match label.as_bytes().first() {
            Some(b'L') => Some("3"),
            Some(b'R') => Some("5"),
            _ => None,
        },
    )
}

/// Servers 1-3 fork types a, b, c; server 5 shares A/B1, server 6 shares
/// B2/C; servers 8-10 join.
fn three_type(params: &PresetParams) -> Result<TopologySpec> {
    let w = |label, server, inputs: &[usize], outputs: &[usize], job_type| Wiring {
        label,
        server,
        inputs: inputs.to_vec(),
        outputs: outputs.to_vec(),
        job_type,
    };
    let wiring = vec![
        w("1", 0, &[0], &[3, 4], 0),
        w("2", 1, &[1], &[5, 6], 1),
        w("3", 2, &[2], &[7, 8], 2),
        w("4", 3, &[3], &[9], 0),
        w("A", 4, &[4], &[10], 0),
        w("B1", 4, &[5], &[11], 1),
        w("B2", 5, &[6], &[12], 1),
        w("C", 5, &[7], &[13], 2),
        w("7", 6, &[8], &[14], 2),
        w("8", 7, &[9, 10], &[], 0),
        w("9", 8, &[11, 12], &[], 1),
        w("10", 9, &[13, 14], &[], 2),
    ];
    assemble(
        params,
        &[("a", 0), ("b", 1), ("c", 2)],
        labels(1..=15),
        labels(1..=10),
        wiring,
        |_| None,
    )
}
