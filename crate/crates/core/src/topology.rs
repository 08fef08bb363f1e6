//! Network structure: job types, buffers, servers, and activities with their
//! fork and join wiring.
//!
//! A [`TopologySpec`] is the raw, serializable description. [`Topology`] is
//! the validated, immutable form the engine runs on; it can only be obtained
//! through [`Topology::new`], which rejects any spec with [`Violation`]s.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::DistributionSpec;

mod presets;

pub use presets::{build_preset, PresetKind, PresetParams};

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }
    };
}

id_type!(
    /// Index into [`Topology::buffers`].
    BufferId
);
id_type!(ServerId);
id_type!(ActivityId);
id_type!(JobTypeId);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobType {
    pub label: String,
    /// External renewal stream; `None` disables external arrivals.
    pub arrival: Option<DistributionSpec>,
    pub entry_buffer: BufferId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub label: String,
    pub server: ServerId,
    /// More than one input makes this a join.
    pub inputs: Vec<BufferId>,
    /// More than one output makes this a fork; no outputs means the job departs.
    #[serde(default)]
    pub outputs: Vec<BufferId>,
    pub service: DistributionSpec,
    pub job_type: JobTypeId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Server {
    pub label: String,
    pub activities: Vec<ActivityId>,
}

/// Serializable network description; not necessarily valid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub job_types: Vec<JobType>,
    /// Buffer labels, indexed by [`BufferId`].
    pub buffers: Vec<String>,
    pub servers: Vec<Server>,
    pub activities: Vec<Activity>,
}

/// One broken structural invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A buffer, server, activity, or job type index is out of range.
    DanglingReference(String),
    /// Two or more activities deplete the same buffer.
    MultipleDepleters { buffer: BufferId, activities: Vec<ActivityId> },
    /// Two or more activities feed the same buffer.
    MultipleFeeders { buffer: BufferId, activities: Vec<ActivityId> },
    /// A buffer is never depleted.
    OrphanBuffer(BufferId),
    /// A non-entry buffer has no feeding activity.
    UnfedBuffer(BufferId),
    /// An entry buffer is also fed by an activity.
    FedEntryBuffer(BufferId),
    /// The activity precedence graph is not acyclic.
    Cycle(Vec<ActivityId>),
    EmptyInputs(ActivityId),
    /// The activity's `server` field disagrees with the server's activity list.
    ServerMembership(ActivityId),
    /// Two activities on one server read the same buffer.
    SharedInput { server: ServerId, buffer: BufferId },
    DuplicateEntryBuffer(BufferId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingReference(what) => write!(f, "dangling reference: {what}"),
            Violation::MultipleDepleters { buffer, activities } => write!(
                f,
                "d not a function: buffer {} depleted by activities {:?}",
                buffer.0, activities
            ),
            Violation::MultipleFeeders { buffer, activities } => write!(
                f,
                "f not a function: buffer {} fed by activities {:?}",
                buffer.0, activities
            ),
            Violation::OrphanBuffer(b) => write!(f, "orphan buffer {}: no depleting activity", b.0),
            Violation::UnfedBuffer(b) => write!(f, "buffer {} has no feeding activity", b.0),
            Violation::FedEntryBuffer(b) => write!(f, "entry buffer {} is fed by an activity", b.0),
            Violation::Cycle(acts) => write!(f, "cycle through activities {acts:?}"),
            Violation::EmptyInputs(a) => write!(f, "activity {} has no input buffers", a.0),
            Violation::ServerMembership(a) => {
                write!(f, "activity {} is not listed by exactly its own server", a.0)
            }
            Violation::SharedInput { server, buffer } => write!(
                f,
                "server {} has two activities reading buffer {}",
                server.0, buffer.0
            ),
            Violation::DuplicateEntryBuffer(b) => {
                write!(f, "buffer {} is the entry buffer of several job types", b.0)
            }
        }
    }
}

/// Checks every structural invariant and reports all violations found.
pub fn validate(spec: &TopologySpec) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let nb = spec.buffers.len();
    let ns = spec.servers.len();
    let na = spec.activities.len();
    let nj = spec.job_types.len();

    let mut dangling = |what: String| out.push(Violation::DanglingReference(what));
    for (j, jt) in spec.job_types.iter().enumerate() {
        if jt.entry_buffer.0 >= nb {
            dangling(format!("job type {j} entry buffer {}", jt.entry_buffer.0));
        }
    }
    for (a, act) in spec.activities.iter().enumerate() {
        if act.server.0 >= ns {
            dangling(format!("activity {a} server {}", act.server.0));
        }
        if act.job_type.0 >= nj {
            dangling(format!("activity {a} job type {}", act.job_type.0));
        }
        for b in act.inputs.iter().chain(&act.outputs) {
            if b.0 >= nb {
                dangling(format!("activity {a} buffer {}", b.0));
            }
        }
    }
    for (s, srv) in spec.servers.iter().enumerate() {
        for a in &srv.activities {
            if a.0 >= na {
                dangling(format!("server {s} activity {}", a.0));
            }
        }
    }
    if !out.is_empty() {
        return Err(out);
    }

    let mut depleters: Vec<Vec<ActivityId>> = vec![Vec::new(); nb];
    let mut feeders: Vec<Vec<ActivityId>> = vec![Vec::new(); nb];
    for (a, act) in spec.activities.iter().enumerate() {
        if act.inputs.is_empty() {
            out.push(Violation::EmptyInputs(ActivityId(a)));
        }
        for b in &act.inputs {
            depleters[b.0].push(ActivityId(a));
        }
        for b in &act.outputs {
            feeders[b.0].push(ActivityId(a));
        }
        let listed = spec
            .servers
            .iter()
            .enumerate()
            .filter(|(_, s)| s.activities.contains(&ActivityId(a)))
            .map(|(i, _)| i)
            .collect::<Vec<_>>();
        if listed != [act.server.0] {
            out.push(Violation::ServerMembership(ActivityId(a)));
        }
    }

    let mut is_entry = vec![false; nb];
    for jt in &spec.job_types {
        if is_entry[jt.entry_buffer.0] {
            out.push(Violation::DuplicateEntryBuffer(jt.entry_buffer));
        }
        is_entry[jt.entry_buffer.0] = true;
    }

    for b in 0..nb {
        let id = BufferId(b);
        match depleters[b].len() {
            0 => out.push(Violation::OrphanBuffer(id)),
            1 => {}
            _ => out.push(Violation::MultipleDepleters {
                buffer: id,
                activities: depleters[b].clone(),
            }),
        }
        match (is_entry[b], feeders[b].len()) {
            (true, 0) | (false, 1) => {}
            (true, _) => out.push(Violation::FedEntryBuffer(id)),
            (false, 0) => out.push(Violation::UnfedBuffer(id)),
            (false, _) => out.push(Violation::MultipleFeeders {
                buffer: id,
                activities: feeders[b].clone(),
            }),
        }
    }

    for (s, srv) in spec.servers.iter().enumerate() {
        let mut seen = Vec::new();
        for a in &srv.activities {
            for b in &spec.activities[a.0].inputs {
                if seen.contains(b) {
                    out.push(Violation::SharedInput {
                        server: ServerId(s),
                        buffer: *b,
                    });
                }
                seen.push(*b);
            }
        }
    }

    if let Some(cycle) = find_cycle(spec, &depleters) {
        out.push(Violation::Cycle(cycle));
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Depth-first search over activity -> output buffer -> depleting activity.
fn find_cycle(spec: &TopologySpec, depleters: &[Vec<ActivityId>]) -> Option<Vec<ActivityId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = spec.activities.len();
    let mut mark = vec![Mark::New; n];
    let mut stack: Vec<ActivityId> = Vec::new();

    fn visit(
        a: usize,
        spec: &TopologySpec,
        depleters: &[Vec<ActivityId>],
        mark: &mut [Mark],
        stack: &mut Vec<ActivityId>,
    ) -> Option<Vec<ActivityId>> {
        mark[a] = Mark::Active;
        stack.push(ActivityId(a));
        for b in &spec.activities[a].outputs {
            for next in &depleters[b.0] {
                match mark[next.0] {
                    Mark::Active => {
                        let start = stack.iter().position(|x| x == next).unwrap_or(0);
                        return Some(stack[start..].to_vec());
                    }
                    Mark::New => {
                        if let Some(c) = visit(next.0, spec, depleters, mark, stack) {
                            return Some(c);
                        }
                    }
                    Mark::Done => {}
                }
            }
        }
        stack.pop();
        mark[a] = Mark::Done;
        None
    }

    (0..n).find_map(|a| {
        if mark[a] == Mark::New {
            visit(a, spec, depleters, &mut mark, &mut stack)
        } else {
            None
        }
    })
}

/// A validated fork-join network.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    spec: TopologySpec,
    depleter: Vec<ActivityId>,
    feeder: Vec<Option<ActivityId>>,
}

impl Topology {
    pub fn new(spec: TopologySpec) -> Result<Self> {
        validate(&spec).map_err(Error::Topology)?;
        let nb = spec.buffers.len();
        let mut depleter = vec![ActivityId(usize::MAX); nb];
        let mut feeder = vec![None; nb];
        for (a, act) in spec.activities.iter().enumerate() {
            for b in &act.inputs {
                depleter[b.0] = ActivityId(a);
            }
            for b in &act.outputs {
                feeder[b.0] = Some(ActivityId(a));
            }
        }
        Ok(Topology {
            spec,
            depleter,
            feeder,
        })
    }

    pub fn spec(&self) -> &TopologySpec {
        &self.spec
    }

    pub fn job_types(&self) -> &[JobType] {
        &self.spec.job_types
    }

    pub fn buffers(&self) -> &[String] {
        &self.spec.buffers
    }

    pub fn servers(&self) -> &[Server] {
        &self.spec.servers
    }

    pub fn activities(&self) -> &[Activity] {
        &self.spec.activities
    }

    pub fn activity(&self, id: ActivityId) -> &Activity {
        &self.spec.activities[id.0]
    }

    pub fn server(&self, id: ServerId) -> &Server {
        &self.spec.servers[id.0]
    }

    /// The activity that depletes buffer `b` (the function `d`).
    pub fn depleter(&self, b: BufferId) -> ActivityId {
        self.depleter[b.0]
    }

    /// The activity that feeds buffer `b` (the function `f`); `None` for entry buffers.
    pub fn feeder(&self, b: BufferId) -> Option<ActivityId> {
        self.feeder[b.0]
    }

    /// Job type whose external arrivals land in `b`, if `b` is an entry buffer.
    pub fn entry_of(&self, b: BufferId) -> Option<JobTypeId> {
        self.spec
            .job_types
            .iter()
            .position(|j| j.entry_buffer == b)
            .map(JobTypeId)
    }

    pub fn buffer_by_label(&self, label: &str) -> Option<BufferId> {
        self.spec.buffers.iter().position(|l| l == label).map(BufferId)
    }

    pub fn server_by_label(&self, label: &str) -> Option<ServerId> {
        self.spec.servers.iter().position(|s| s.label == label).map(ServerId)
    }

    pub fn activity_by_label(&self, label: &str) -> Option<ActivityId> {
        self.spec
            .activities
            .iter()
            .position(|a| a.label == label)
            .map(ActivityId)
    }

    pub fn job_type_by_label(&self, label: &str) -> Option<JobTypeId> {
        self.spec
            .job_types
            .iter()
            .position(|j| j.label == label)
            .map(JobTypeId)
    }

    /// Looks up a buffer by label, failing with a configuration error.
    pub fn require_buffer(&self, label: &str) -> Result<BufferId> {
        self.buffer_by_label(label)
            .ok_or_else(|| Error::Configuration(format!("topology has no buffer `{label}`")))
    }

    pub fn require_activity(&self, label: &str) -> Result<ActivityId> {
        self.activity_by_label(label)
            .ok_or_else(|| Error::Configuration(format!("topology has no activity `{label}`")))
    }

    pub fn require_server(&self, label: &str) -> Result<ServerId> {
        self.server_by_label(label)
            .ok_or_else(|| Error::Configuration(format!("topology has no server `{label}`")))
    }

    /// Servers carrying more than one activity.
    pub fn shared_servers(&self) -> Vec<ServerId> {
        (0..self.spec.servers.len())
            .filter(|s| self.spec.servers[*s].activities.len() > 1)
            .map(ServerId)
            .collect()
    }

    /// Service rate of an activity (reciprocal mean service time).
    pub fn service_rate(&self, a: ActivityId) -> f64 {
        self.activity(a).service.rate()
    }

    /// For every fork activity, the chains of buffers along each outgoing
    /// branch up to (and including) the buffer read by the closing join.
    ///
    /// Under head-of-line service each branch holds the same set of jobs, so
    /// the per-branch queue sums coincide at all times.
    pub fn fork_branches(&self) -> Vec<(ActivityId, Vec<Vec<BufferId>>)> {
        let mut out = Vec::new();
        for (a, act) in self.spec.activities.iter().enumerate() {
            if act.outputs.len() < 2 {
                continue;
            }
            let branches = act
                .outputs
                .iter()
                .map(|&start| {
                    let mut chain = vec![start];
                    let mut b = start;
                    loop {
                        let d = self.activity(self.depleter(b));
                        if d.inputs.len() > 1 || d.outputs.len() != 1 {
                            break;
                        }
                        b = d.outputs[0];
                        chain.push(b);
                    }
                    chain
                })
                .collect();
            out.push((ActivityId(a), branches));
        }
        out
    }

    /// Structural equality ignoring labels and distributions.
    pub fn same_structure(&self, other: &Topology) -> bool {
        let a = &self.spec;
        let b = &other.spec;
        a.buffers.len() == b.buffers.len()
            && a.job_types.len() == b.job_types.len()
            && a.job_types
                .iter()
                .zip(&b.job_types)
                .all(|(x, y)| x.entry_buffer == y.entry_buffer)
            && a.servers.len() == b.servers.len()
            && a.servers
                .iter()
                .zip(&b.servers)
                .all(|(x, y)| x.activities == y.activities)
            && a.activities.len() == b.activities.len()
            && a.activities.iter().zip(&b.activities).all(|(x, y)| {
                x.server == y.server
                    && x.inputs == y.inputs
                    && x.outputs == y.outputs
                    && x.job_type == y.job_type
            })
    }

    /// Label -> id maps, handy for tests and reports.
    pub fn buffer_labels(&self) -> BTreeMap<String, BufferId> {
        self.spec
            .buffers
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), BufferId(i)))
            .collect()
    }
}

impl TryFrom<TopologySpec> for Topology {
    type Error = Error;

    fn try_from(spec: TopologySpec) -> Result<Self> {
        Topology::new(spec)
    }
}

impl Serialize for Topology {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Topology {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = TopologySpec::deserialize(d)?;
        Topology::new(spec).map_err(serde::de::Error::custom)
    }
}
