//! Discrete-event simulation of a fork-join network under a policy.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use crate::error::{Error, Result};
use crate::path::Path;
use crate::policies::{Controller, PolicySpec, QueueView};
use crate::stochastic::{RandomStream, Sampler};
use crate::topology::{ActivityId, BufferId, JobTypeId, ServerId, Topology};

/// Job ids at or above this value belong to preloaded jobs.
const PRELOAD_BASE: u64 = 1 << 63;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stop {
    /// Run until simulated time `T`.
    Horizon(f64),
    /// Run until every job type has had `N` external arrivals.
    Jobs(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Arrival(JobTypeId),
    Completion { server: ServerId, activity: ActivityId },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub deltas: Vec<(BufferId, i64)>,
}

/// What to record while running.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceOptions {
    pub buffers: Vec<BufferId>,
    /// Per-server path of the activity in service (`-1` when idle).
    pub servers: bool,
    pub events: bool,
}

impl TraceOptions {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn all(topo: &Topology) -> Self {
        TraceOptions {
            buffers: (0..topo.buffers().len()).map(BufferId).collect(),
            servers: true,
            events: true,
        }
    }

    pub fn buffers(topo: &Topology, labels: &[&str]) -> Result<Self> {
        Ok(TraceOptions {
            buffers: labels.iter().map(|l| topo.require_buffer(l)).collect::<Result<_>>()?,
            servers: false,
            events: false,
        })
    }

    fn is_empty(&self) -> bool {
        self.buffers.is_empty() && !self.servers && !self.events
    }
}

/// Recorded sample paths and events.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    buffer_labels: Vec<String>,
    server_labels: Vec<String>,
    pub buffers: Vec<(BufferId, Path)>,
    pub servers: Vec<(ServerId, Path)>,
    pub events: Vec<EventRecord>,
    pub end: f64,
}

impl Trace {
    pub fn buffer(&self, b: BufferId) -> Option<&Path> {
        self.buffers.iter().find(|(id, _)| *id == b).map(|(_, p)| p)
    }

    pub fn buffer_by_label(&self, label: &str) -> Option<&Path> {
        let b = self.buffer_labels.iter().position(|l| l == label)?;
        self.buffer(BufferId(b))
    }

    pub fn require_buffer(&self, label: &str) -> Result<&Path> {
        self.buffer_by_label(label)
            .ok_or_else(|| Error::Input(format!("trace has no path for buffer {label}")))
    }

    pub fn server(&self, s: ServerId) -> Option<&Path> {
        self.servers.iter().find(|(id, _)| *id == s).map(|(_, p)| p)
    }

    pub fn server_by_label(&self, label: &str) -> Option<&Path> {
        let s = self.server_labels.iter().position(|l| l == label)?;
        self.server(ServerId(s))
    }

    /// Wide breakpoint CSV: one row per time any recorded path changes.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["time".to_string()];
        header.extend(self.buffers.iter().map(|(b, _)| format!("Q{}", self.buffer_labels[b.0])));
        header.extend(self.servers.iter().map(|(s, _)| format!("server{}", self.server_labels[s.0])));
        out.write_record(&header)?;
        let paths: Vec<&Path> = self
            .buffers
            .iter()
            .map(|(_, p)| p)
            .chain(self.servers.iter().map(|(_, p)| p))
            .collect();
        let mut times: Vec<f64> = paths.iter().flat_map(|p| p.times().iter().copied()).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut idx = vec![0usize; paths.len()];
        for t in times {
            let mut row = vec![t.to_string()];
            for (k, p) in paths.iter().enumerate() {
                while idx[k] + 1 < p.len() && p.times()[idx[k] + 1] <= t {
                    idx[k] += 1;
                }
                row.push(p.values()[idx[k]].to_string());
            }
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| Error::io("<trace>", e))?;
        Ok(())
    }

    /// Event log CSV: `time,kind,label,deltas` with deltas as `buffer:+n` pairs.
    pub fn write_events_csv<W: Write>(&self, topo: &Topology, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["time", "kind", "label", "deltas"])?;
        for e in &self.events {
            let (kind, label) = match e.kind {
                EventKind::Arrival(j) => ("arrival", topo.job_types()[j.0].label.clone()),
                EventKind::Completion { activity, .. } => ("completion", topo.activity(activity).label.clone()),
            };
            let deltas = e
                .deltas
                .iter()
                .map(|(b, d)| format!("{}:{:+}", topo.buffers()[b.0], d))
                .collect::<Vec<_>>()
                .join(";");
            out.write_record([e.time.to_string(), kind.to_string(), label, deltas])?;
        }
        out.flush().map_err(|e| Error::io("<events>", e))?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Token {
    job: u64,
    at: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Busy {
    activity: ActivityId,
    job: u64,
    started: f64,
    done_at: f64,
}

/// What a server is doing right now.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Occupancy {
    pub activity: ActivityId,
    pub job: u64,
    pub remaining: f64,
}

struct Buffers {
    q: Vec<u64>,
    tokens: Vec<VecDeque<Token>>,
}

impl QueueView for Buffers {
    fn len(&self, b: BufferId) -> u64 {
        self.q[b.0]
    }

    fn head_time(&self, b: BufferId) -> Option<f64> {
        self.tokens[b.0].front().map(|t| t.at)
    }
}

/// A point-in-time copy of the simulation counters.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub clock: f64,
    pub queue_lengths: Vec<u64>,
    pub occupancy: Vec<Option<Occupancy>>,
    /// Cumulative busy time per activity.
    pub busy_time: Vec<f64>,
    /// Cumulative idle time per server.
    pub idle_time: Vec<f64>,
    pub completions: Vec<u64>,
    pub arrivals: Vec<u64>,
    pub departures: Vec<u64>,
    pub events: u64,
}

/// One run of a network under a policy.
pub struct Simulation<'t> {
    topo: &'t Topology,
    ctl: Controller,
    clock: f64,
    buf: Buffers,
    busy: Vec<Option<Busy>>,
    residual: Vec<Option<f64>>,
    busy_time: Vec<f64>,
    completions: Vec<u64>,
    arrivals: Vec<u64>,
    departures: Vec<u64>,
    arrival_limit: Vec<u64>,
    next_arrival: Vec<f64>,
    arrival_samplers: Vec<Option<Sampler>>,
    service_samplers: Vec<Sampler>,
    arrival_streams: Vec<RandomStream>,
    service_streams: Vec<RandomStream>,
    policy_stream: RandomStream,
    area: Vec<f64>,
    since: Vec<f64>,
    next_job: u64,
    preloaded: Vec<u64>,
    branch_offsets: Vec<Vec<i64>>,
    branches: Vec<Vec<Vec<BufferId>>>,
    check: bool,
    started: bool,
    events: u64,
    rec: Option<Recorder>,
}

struct Recorder {
    opts: TraceOptions,
    buffer_slot: Vec<Option<usize>>,
    buffers: Vec<(BufferId, Path)>,
    servers: Vec<(ServerId, Path)>,
    events: Vec<EventRecord>,
    deltas: Vec<(BufferId, i64)>,
}

impl<'t> Simulation<'t> {
    pub fn new(topo: &'t Topology, policy: &PolicySpec, seed: u64) -> Result<Self> {
        let ctl = Controller::compile(topo, policy)?;
        let nb = topo.buffers().len();
        let ns = topo.servers().len();
        let na = topo.activities().len();
        let nj = topo.job_types().len();
        let arrival_samplers: Vec<Option<Sampler>> =
            topo.job_types().iter().map(|j| j.arrival.map(Sampler::new)).collect();
        let arrival_streams = topo
            .job_types()
            .iter()
            .map(|j| RandomStream::derived(seed, &format!("arrival:{}", j.label)))
            .collect();
        let service_samplers = topo.activities().iter().map(|a| Sampler::new(a.service)).collect();
        let service_streams = topo
            .activities()
            .iter()
            .map(|a| RandomStream::derived(seed, &format!("activity:{}", a.label)))
            .collect();
        let branches: Vec<Vec<Vec<BufferId>>> = topo.fork_branches().into_iter().map(|(_, b)| b).collect();
        let mut sim = Simulation {
            topo,
            ctl,
            clock: 0.0,
            buf: Buffers {
                q: vec![0; nb],
                tokens: vec![VecDeque::new(); nb],
            },
            busy: vec![None; ns],
            residual: vec![None; na],
            busy_time: vec![0.0; na],
            completions: vec![0; na],
            arrivals: vec![0; nj],
            departures: vec![0; nj],
            arrival_limit: vec![u64::MAX; nj],
            next_arrival: vec![f64::INFINITY; nj],
            arrival_samplers,
            service_samplers,
            arrival_streams,
            service_streams,
            policy_stream: RandomStream::derived(seed, "policy"),
            area: vec![0.0; nb],
            since: vec![0.0; nb],
            next_job: 0,
            preloaded: vec![0; nb],
            branch_offsets: branches.iter().map(|b| vec![0; b.len()]).collect(),
            branches,
            check: false,
            started: false,
            events: 0,
            rec: None,
        };
        for j in 0..nj {
            sim.schedule_arrival(j);
        }
        Ok(sim)
    }

    /// Places `n` jobs in buffer `b` before the first event.
    pub fn preload(&mut self, b: BufferId, n: u64) -> Result<()> {
        if self.started {
            return Err(Error::Configuration("preload must precede the first event".into()));
        }
        if b.0 >= self.buf.q.len() {
            return Err(Error::Configuration(format!("no buffer with id {}", b.0)));
        }
        for _ in 0..n {
            let job = PRELOAD_BASE + self.preloaded[b.0];
            self.buf.tokens[b.0].push_back(Token { job, at: 0.0 });
            self.preloaded[b.0] += 1;
        }
        self.buf.q[b.0] += n;
        for (k, branches) in self.branches.iter().enumerate() {
            for (i, chain) in branches.iter().enumerate() {
                if chain.contains(&b) {
                    self.branch_offsets[k][i] += n as i64;
                }
            }
        }
        if let Some(rec) = self.rec.as_mut() {
            if let Some(slot) = rec.buffer_slot[b.0] {
                rec.buffers[slot].1 = Path::starting_at(0.0, self.buf.q[b.0] as f64);
            }
        }
        Ok(())
    }

    /// Starts idle servers on preloaded work without waiting for an event.
    pub fn dispatch_now(&mut self) {
        self.started = true;
        self.dispatch();
    }

    /// Caps the number of external arrivals of `j`.
    pub fn limit_arrivals(&mut self, j: JobTypeId, n: u64) {
        self.arrival_limit[j.0] = n;
        if self.arrivals[j.0] >= n {
            self.next_arrival[j.0] = f64::INFINITY;
        }
    }

    pub fn check_invariants(&mut self, on: bool) {
        self.check = on;
    }

    pub fn record(&mut self, opts: TraceOptions) {
        if opts.is_empty() {
            self.rec = None;
            return;
        }
        let mut buffer_slot = vec![None; self.buf.q.len()];
        let buffers = opts
            .buffers
            .iter()
            .enumerate()
            .map(|(i, b)| {
                buffer_slot[b.0] = Some(i);
                (*b, Path::starting_at(self.clock, self.buf.q[b.0] as f64))
            })
            .collect();
        let servers = if opts.servers {
            (0..self.busy.len())
                .map(|s| {
                    let v = self.busy[s].map_or(-1.0, |b| b.activity.0 as f64);
                    (ServerId(s), Path::starting_at(self.clock, v))
                })
                .collect()
        } else {
            Vec::new()
        };
        self.rec = Some(Recorder {
            opts,
            buffer_slot,
            buffers,
            servers,
            events: Vec::new(),
            deltas: Vec::new(),
        });
    }

    pub fn topology(&self) -> &Topology {
        self.topo
    }

    pub fn controller(&self) -> &Controller {
        &self.ctl
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn queue(&self, b: BufferId) -> u64 {
        self.buf.q[b.0]
    }

    pub fn queue_lengths(&self) -> &[u64] {
        &self.buf.q
    }

    pub fn arrivals(&self, j: JobTypeId) -> u64 {
        self.arrivals[j.0]
    }

    pub fn departures(&self, j: JobTypeId) -> u64 {
        self.departures[j.0]
    }

    pub fn completions(&self, a: ActivityId) -> u64 {
        self.completions[a.0]
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn occupancy(&self, s: ServerId) -> Option<Occupancy> {
        self.busy[s.0].map(|b| Occupancy {
            activity: b.activity,
            job: b.job,
            remaining: b.done_at - self.clock,
        })
    }

    /// `T_j(t)`: cumulative busy time of activity `a` up to the clock.
    pub fn busy_time(&self, a: ActivityId) -> f64 {
        let s = self.topo.activity(a).server;
        let running = match self.busy[s.0] {
            Some(b) if b.activity == a => self.clock - b.started,
            _ => 0.0,
        };
        self.busy_time[a.0] + running
    }

    /// `I_j(t) = t - sum of T over the server's activities`.
    pub fn idle_time(&self, s: ServerId) -> f64 {
        let busy: f64 = self.topo.server(s).activities.iter().map(|a| self.busy_time(*a)).sum();
        self.clock - busy
    }

    /// `int_0^t Q_b(s) ds`.
    pub fn area(&self, b: BufferId) -> f64 {
        self.area[b.0] + self.buf.q[b.0] as f64 * (self.clock - self.since[b.0])
    }

    pub fn snapshot(&self) -> SimState {
        SimState {
            clock: self.clock,
            queue_lengths: self.buf.q.clone(),
            occupancy: (0..self.busy.len()).map(|s| self.occupancy(ServerId(s))).collect(),
            busy_time: (0..self.busy_time.len()).map(|a| self.busy_time(ActivityId(a))).collect(),
            idle_time: (0..self.busy.len()).map(|s| self.idle_time(ServerId(s))).collect(),
            completions: self.completions.clone(),
            arrivals: self.arrivals.clone(),
            departures: self.departures.clone(),
            events: self.events,
        }
    }

    /// Time of the next event, if any.
    pub fn peek_time(&self) -> Option<f64> {
        self.next_event().map(|e| e.time)
    }

    fn next_event(&self) -> Option<Event> {
        let mut best: Option<Event> = None;
        for (s, b) in self.busy.iter().enumerate() {
            if let Some(b) = b {
                if best.is_none_or(|e| b.done_at < e.time) {
                    best = Some(Event {
                        time: b.done_at,
                        kind: EventKind::Completion {
                            server: ServerId(s),
                            activity: b.activity,
                        },
                    });
                }
            }
        }
        for (j, t) in self.next_arrival.iter().enumerate() {
            if t.is_finite() && best.is_none_or(|e| *t < e.time) {
                best = Some(Event {
                    time: *t,
                    kind: EventKind::Arrival(JobTypeId(j)),
                });
            }
        }
        best
    }

    /// Processes the earliest pending event; `None` when nothing is pending.
    pub fn step(&mut self) -> Result<Option<Event>> {
        if !self.started {
            self.started = true;
            self.dispatch();
        }
        let Some(ev) = self.next_event() else {
            return Ok(None);
        };
        self.clock = ev.time;
        match ev.kind {
            EventKind::Arrival(j) => self.arrive(j.0),
            EventKind::Completion { server, activity } => self.complete(server, activity)?,
        }
        self.events += 1;
        if let Some(rec) = self.rec.as_mut() {
            if rec.opts.events {
                let deltas = std::mem::take(&mut rec.deltas);
                rec.events.push(EventRecord {
                    time: ev.time,
                    kind: ev.kind,
                    deltas,
                });
            }
        }
        self.dispatch();
        if self.check {
            self.verify()?;
        }
        Ok(Some(ev))
    }

    /// Moves the clock forward to `t` without processing events.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if let Some(next) = self.peek_time() {
            if next < t {
                return Err(Error::Configuration(format!(
                    "cannot advance to {t}: an event is pending at {next}"
                )));
            }
        }
        if t > self.clock {
            self.clock = t;
        }
        Ok(())
    }

    fn schedule_arrival(&mut self, j: usize) {
        self.next_arrival[j] = match &self.arrival_samplers[j] {
            Some(s) if self.arrivals[j] < self.arrival_limit[j] => {
                let base = if self.next_arrival[j].is_finite() {
                    self.next_arrival[j]
                } else {
                    0.0
                };
                base + self.arrival_streams[j].draw(s)
            }
            _ => f64::INFINITY,
        };
    }

    fn set_queue(&mut self, b: BufferId, delta: i64) {
        let k = b.0;
        let t = self.clock;
        self.area[k] += self.buf.q[k] as f64 * (t - self.since[k]);
        self.since[k] = t;
        self.buf.q[k] = (self.buf.q[k] as i64 + delta) as u64;
        if let Some(rec) = self.rec.as_mut() {
            if let Some(slot) = rec.buffer_slot[k] {
                rec.buffers[slot].1.push(t, self.buf.q[k] as f64);
            }
            if rec.opts.events {
                rec.deltas.push((b, delta));
            }
        }
    }

    fn arrive(&mut self, j: usize) {
        let b = self.topo.job_types()[j].entry_buffer;
        let job = self.next_job;
        self.next_job += 1;
        self.buf.tokens[b.0].push_back(Token { job, at: self.clock });
        self.set_queue(b, 1);
        self.arrivals[j] += 1;
        self.schedule_arrival(j);
    }

    fn complete(&mut self, s: ServerId, a: ActivityId) -> Result<()> {
        let b = self.busy[s.0].take().expect("completion on a busy server");
        self.busy_time[a.0] += self.clock - b.started;
        self.completions[a.0] += 1;
        let act = self.topo.activity(a);
        let mut job = None;
        for input in &act.inputs {
            let tok = self.buf.tokens[input.0].pop_front().ok_or_else(|| Error::Invariant {
                time: self.clock,
                detail: format!("activity {} completed with buffer {} empty", act.label, self.topo.buffers()[input.0]),
            })?;
            if self.check {
                if let Some(prev) = job {
                    if prev != tok.job && prev < PRELOAD_BASE && tok.job < PRELOAD_BASE {
                        return Err(Error::Invariant {
                            time: self.clock,
                            detail: format!("join {} matched jobs {prev} and {}", act.label, tok.job),
                        });
                    }
                }
            }
            job = Some(job.unwrap_or(tok.job).min(tok.job));
            self.set_queue(*input, -1);
        }
        let job = job.expect("activities have inputs");
        for out in &act.outputs {
            self.buf.tokens[out.0].push_back(Token { job, at: self.clock });
            self.set_queue(*out, 1);
        }
        if act.outputs.is_empty() {
            self.departures[act.job_type.0] += 1;
        }
        self.mark_server(s);
        Ok(())
    }

    fn mark_server(&mut self, s: ServerId) {
        if let Some(rec) = self.rec.as_mut() {
            if rec.opts.servers {
                let v = self.busy[s.0].map_or(-1.0, |b| b.activity.0 as f64);
                rec.servers[s.0].1.push(self.clock, v);
            }
        }
    }

    fn start(&mut self, s: ServerId, a: ActivityId) {
        let input = self.topo.activity(a).inputs[0];
        let job = self.buf.tokens[input.0].front().expect("started on an empty buffer").job;
        let dur = match self.residual[a.0].take() {
            Some(r) => r,
            None => self.service_streams[a.0].draw(&self.service_samplers[a.0]),
        };
        self.busy[s.0] = Some(Busy {
            activity: a,
            job,
            started: self.clock,
            done_at: self.clock + dur,
        });
        self.mark_server(s);
    }

    fn preempt(&mut self, s: ServerId) {
        let b = self.busy[s.0].take().expect("preempting a busy server");
        self.busy_time[b.activity.0] += self.clock - b.started;
        self.residual[b.activity.0] = Some(b.done_at - self.clock);
    }

    fn dispatch(&mut self) {
        let preemptive = self.ctl.is_preemptive();
        for s in 0..self.busy.len() {
            let sid = ServerId(s);
            match self.busy[s] {
                None => {
                    if let Some(a) = self.ctl.choose(sid, &self.buf, &mut self.policy_stream) {
                        self.start(sid, a);
                    }
                }
                Some(b) if preemptive && self.ctl.is_controlled(sid) => {
                    if let Some(a) = self.ctl.choose(sid, &self.buf, &mut self.policy_stream) {
                        if a != b.activity {
                            self.preempt(sid);
                            self.start(sid, a);
                        }
                    }
                }
                Some(_) => {}
            }
        }
    }

    /// Checks the accounting identities, fork-branch balance, and work conservation.
    pub fn verify(&self) -> Result<()> {
        let fail = |detail: String| {
            Err(Error::Invariant {
                time: self.clock,
                detail,
            })
        };
        let topo = self.topo;
        for (k, label) in topo.buffers().iter().enumerate() {
            let b = BufferId(k);
            let inflow = match topo.feeder(b) {
                Some(f) => self.completions[f.0],
                None => topo.entry_of(b).map_or(0, |j| self.arrivals[j.0]),
            };
            let expected = (self.preloaded[k] + inflow) as i64 - self.completions[topo.depleter(b).0] as i64;
            if expected != self.buf.q[k] as i64 || self.buf.tokens[k].len() as u64 != self.buf.q[k] {
                return fail(format!(
                    "Q{label} = {} but counters give {expected}",
                    self.buf.q[k]
                ));
            }
        }
        for (branches, offsets) in self.branches.iter().zip(&self.branch_offsets) {
            let sums: Vec<i64> = branches
                .iter()
                .zip(offsets)
                .map(|(chain, off)| chain.iter().map(|b| self.buf.q[b.0] as i64).sum::<i64>() - off)
                .collect();
            if sums.windows(2).any(|w| w[0] != w[1]) {
                let names: Vec<String> = branches
                    .iter()
                    .map(|c| c.iter().map(|b| format!("Q{}", topo.buffers()[b.0])).collect::<Vec<_>>().join("+"))
                    .collect();
                return fail(format!("branch balance broken: {} = {:?}", names.join(" vs "), sums));
            }
        }
        for (s, server) in topo.servers().iter().enumerate() {
            if self.busy[s].is_none() {
                let ready = server
                    .activities
                    .iter()
                    .find(|a| topo.activity(**a).inputs.iter().all(|b| self.buf.q[b.0] > 0));
                if let Some(a) = ready {
                    return fail(format!(
                        "server {} idles while activity {} has work",
                        server.label,
                        topo.activity(*a).label
                    ));
                }
            }
        }
        Ok(())
    }

    /// Finishes the run and returns the recorded trace (empty if none).
    pub fn into_trace(self) -> Trace {
        let mut t = Trace {
            buffer_labels: self.topo.buffers().to_vec(),
            server_labels: self.topo.servers().iter().map(|s| s.label.clone()).collect(),
            end: self.clock,
            ..Trace::default()
        };
        if let Some(rec) = self.rec {
            t.buffers = rec.buffers;
            t.servers = rec.servers;
            t.events = rec.events;
        }
        t
    }
}

/// Options for [`run`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub stop: Stop,
    pub seed: u64,
    /// Measurement starts once every job type has had this many arrivals.
    pub warmup_jobs: u64,
    pub trace: TraceOptions,
    pub check_invariants: bool,
    pub arrival_limits: BTreeMap<JobTypeId, u64>,
    pub preload: Vec<(BufferId, u64)>,
}

impl RunOptions {
    pub fn new(stop: Stop, seed: u64) -> Self {
        RunOptions {
            stop,
            seed,
            warmup_jobs: 0,
            trace: TraceOptions::none(),
            check_invariants: false,
            arrival_limits: BTreeMap::new(),
            preload: Vec::new(),
        }
    }

    pub fn warmup(mut self, jobs: u64) -> Self {
        self.warmup_jobs = jobs;
        self
    }

    pub fn trace(mut self, opts: TraceOptions) -> Self {
        self.trace = opts;
        self
    }

    pub fn checked(mut self) -> Self {
        self.check_invariants = true;
        self
    }

    pub fn limit_arrivals(mut self, j: JobTypeId, n: u64) -> Self {
        self.arrival_limits.insert(j, n);
        self
    }
}

/// Counters accumulated over the measurement window `[start, end]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowStats {
    pub start: f64,
    pub end: f64,
    /// `int Q_b dt` over the window, per buffer.
    pub area: Vec<f64>,
    /// Busy time per activity over the window.
    pub busy: Vec<f64>,
}

impl WindowStats {
    pub fn span(&self) -> f64 {
        self.end - self.start
    }

    pub fn mean_queue(&self, b: BufferId) -> Result<f64> {
        let span = self.span();
        if !(span > 0.0) {
            return Err(Error::Input("measurement window is empty".into()));
        }
        Ok(self.area[b.0] / span)
    }

    pub fn utilization(&self, a: ActivityId) -> Result<f64> {
        let span = self.span();
        if !(span > 0.0) {
            return Err(Error::Input("measurement window is empty".into()));
        }
        Ok(self.busy[a.0] / span)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub state: SimState,
    pub trace: Trace,
    pub stats: WindowStats,
}

/// Runs `policy` on `topo` until `opts.stop`.
pub fn run(topo: &Topology, policy: &PolicySpec, opts: &RunOptions) -> Result<RunOutput> {
    let mut sim = Simulation::new(topo, policy, opts.seed)?;
    if let Stop::Jobs(n) = opts.stop {
        if let Some(j) = topo.job_types().iter().find(|j| j.arrival.is_none()) {
            return Err(Error::Configuration(format!(
                "job-count stop is unreachable: type {} has no arrivals",
                j.label
            )));
        }
        if let Some((j, lim)) = opts.arrival_limits.iter().find(|(_, lim)| **lim < n) {
            return Err(Error::Configuration(format!(
                "job-count stop {n} is unreachable: type {} is capped at {lim}",
                topo.job_types()[j.0].label
            )));
        }
        if opts.warmup_jobs >= n && n > 0 {
            return Err(Error::Configuration(format!(
                "warm-up of {} jobs leaves nothing of a {n}-job run",
                opts.warmup_jobs
            )));
        }
    }
    if let Stop::Horizon(t) = opts.stop {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Configuration(format!("horizon {t} must be finite and nonnegative")));
        }
    }
    sim.check_invariants(opts.check_invariants);
    for (j, n) in &opts.arrival_limits {
        sim.limit_arrivals(*j, *n);
    }
    for (b, n) in &opts.preload {
        sim.preload(*b, *n)?;
    }
    sim.record(opts.trace.clone());
    let nb = topo.buffers().len();
    let na = topo.activities().len();
    let types: Vec<JobTypeId> = (0..topo.job_types().len()).map(JobTypeId).collect();
    let warmed = |sim: &Simulation| types.iter().all(|j| sim.arrivals(*j) >= opts.warmup_jobs);
    let mark = |sim: &Simulation| -> (f64, Vec<f64>, Vec<f64>) {
        (
            sim.clock(),
            (0..nb).map(|b| sim.area(BufferId(b))).collect(),
            (0..na).map(|a| sim.busy_time(ActivityId(a))).collect(),
        )
    };
    let mut window = if warmed(&sim) { Some(mark(&sim)) } else { None };
    match opts.stop {
        Stop::Horizon(t) => {
            while sim.peek_time().is_some_and(|next| next <= t) {
                sim.step()?;
                if window.is_none() && warmed(&sim) {
                    window = Some(mark(&sim));
                }
            }
            if !sim.started {
                sim.dispatch_now();
            }
            sim.advance_to(t)?;
        }
        Stop::Jobs(n) => {
            while !types.iter().all(|j| sim.arrivals(*j) >= n) {
                if sim.step()?.is_none() {
                    return Err(Error::Configuration("event list ran dry before the job-count stop".into()));
                }
                if window.is_none() && warmed(&sim) {
                    window = Some(mark(&sim));
                }
            }
        }
    }
    let end = mark(&sim);
    let stats = match window {
        Some((start, area0, busy0)) => WindowStats {
            start,
            end: end.0,
            area: end.1.iter().zip(&area0).map(|(x, y)| x - y).collect(),
            busy: end.2.iter().zip(&busy0).map(|(x, y)| x - y).collect(),
        },
        None => WindowStats {
            start: end.0,
            end: end.0,
            area: vec![0.0; nb],
            busy: vec![0.0; na],
        },
    };
    let state = sim.snapshot();
    Ok(RunOutput {
        state,
        trace: sim.into_trace(),
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::DistributionSpec;
    use crate::topology::{build_preset, PresetKind, PresetParams};

    fn det(mean: f64) -> DistributionSpec {
        DistributionSpec::deterministic(mean).unwrap()
    }

    fn figure1(params: PresetParams) -> Topology {
        build_preset(&PresetKind::Figure1, &params).unwrap()
    }

    fn exp_net() -> Topology {
        figure1(PresetParams::uniform_exponential(1.0, 3.0))
    }

    #[test]
    fn empty_run() {
        let t = exp_net();
        let out = run(&t, &PolicySpec::sdp(), &RunOptions::new(Stop::Horizon(0.0), 1)).unwrap();
        assert!(out.state.queue_lengths.iter().all(|q| *q == 0));
        assert!(out.state.busy_time.iter().all(|x| *x == 0.0));
        assert!(out.state.idle_time.iter().all(|x| *x == 0.0));
        assert_eq!(out.state.clock, 0.0);
    }

    #[test]
    fn single_job_departs_at_four() {
        let mut p = PresetParams::new().arrival("a", det(1.0)).arrival("b", det(1.0));
        for a in ["1", "2", "3", "A", "B", "5", "6", "7"] {
            p = p.service(a, det(1.0));
        }
        let t = figure1(p);
        let opts = RunOptions::new(Stop::Horizon(10.0), 0)
            .limit_arrivals(JobTypeId(0), 1)
            .limit_arrivals(JobTypeId(1), 0)
            .trace(TraceOptions::all(&t))
            .checked();
        let out = run(&t, &PolicySpec::static_priority(), &opts).unwrap();
        let done: Vec<(f64, &str)> = out
            .trace
            .events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::Completion { activity, .. } => Some((e.time, t.activity(activity).label.as_str())),
                _ => None,
            })
            .collect();
        assert_eq!(done, vec![(2.0, "1"), (3.0, "3"), (3.0, "A"), (4.0, "6")]);
        assert_eq!(out.state.departures, vec![1, 0]);
        let fork = &out.trace.events[1];
        let b = |l: &str| t.buffer_by_label(l).unwrap();
        assert!(fork.deltas.contains(&(b("3"), 1)) && fork.deltas.contains(&(b("4"), 1)));
    }

    #[test]
    fn join_waits_for_both_inputs() {
        let t = exp_net();
        let mut sim = Simulation::new(&t, &PolicySpec::sdp(), 3).unwrap();
        sim.preload(t.buffer_by_label("7").unwrap(), 1).unwrap();
        sim.dispatch_now();
        let s6 = t.server_by_label("6").unwrap();
        assert!(sim.occupancy(s6).is_none());
    }

    #[test]
    fn shared_server_serves_b_when_only_b_waits() {
        let t = exp_net();
        let mut sim = Simulation::new(&t, &PolicySpec::sdp(), 3).unwrap();
        sim.preload(t.buffer_by_label("5").unwrap(), 2).unwrap();
        sim.dispatch_now();
        let s4 = t.server_by_label("4").unwrap();
        let occ = sim.occupancy(s4).expect("server 4 busy");
        assert_eq!(t.activity(occ.activity).label, "B");
    }

    #[test]
    fn balance_and_accounting_hold_under_every_policy() {
        let t = exp_net();
        for p in [
            PolicySpec::sdp(),
            PolicySpec::static_priority(),
            PolicySpec::fcfs(),
            PolicySpec::randomized(0.5),
            PolicySpec::proposed(),
            PolicySpec::preemptive(crate::policies::PolicyKind::Sdp),
        ] {
            let opts = RunOptions::new(Stop::Jobs(5_000), 9).checked();
            let out = run(&t, &p, &opts).unwrap();
            assert!(out.state.events > 20_000, "{p}");
        }
    }

    #[test]
    fn identical_seeds_identical_traces() {
        let t = exp_net();
        let opts = RunOptions::new(Stop::Horizon(200.0), 42).trace(TraceOptions::all(&t));
        let a = run(&t, &PolicySpec::randomized(0.3), &opts).unwrap();
        let b = run(&t, &PolicySpec::randomized(0.3), &opts).unwrap();
        assert_eq!(a.trace, b.trace);
        let c = run(&t, &PolicySpec::randomized(0.3), &RunOptions { seed: 43, ..opts }).unwrap();
        assert_ne!(a.trace, c.trace);
    }

    #[test]
    fn preemptive_resume_keeps_total_work() {
        let t = exp_net();
        let opts = RunOptions::new(Stop::Horizon(500.0), 5).checked();
        let out = run(&t, &PolicySpec::preemptive(crate::policies::PolicyKind::Sdp), &opts).unwrap();
        let s = &out.state;
        for (sid, idle) in s.idle_time.iter().enumerate() {
            assert!(*idle >= -1e-9, "server {sid}");
        }
        let total: f64 = s.busy_time.iter().sum::<f64>() + s.idle_time.iter().sum::<f64>();
        assert!((total - 500.0 * t.servers().len() as f64).abs() < 1e-6);
    }

    #[test]
    fn job_stop_needs_arrivals() {
        let t = exp_net();
        let opts = RunOptions::new(Stop::Jobs(10), 0).limit_arrivals(JobTypeId(1), 0);
        assert!(matches!(run(&t, &PolicySpec::sdp(), &opts), Err(Error::Configuration(_))));
        let opts = RunOptions::new(Stop::Jobs(10), 0).warmup(10);
        assert!(run(&t, &PolicySpec::sdp(), &opts).is_err());
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let t = exp_net();
        let opts = RunOptions::new(Stop::Horizon(5.0), 2).trace(TraceOptions::all(&t));
        let out = run(&t, &PolicySpec::sdp(), &opts).unwrap();
        let mut buf = Vec::new();
        out.trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time,Q1,Q2,Q3"));
        let mut ev = Vec::new();
        out.trace.write_events_csv(&t, &mut ev).unwrap();
        assert!(String::from_utf8(ev).unwrap().lines().count() > 1);
    }
}
