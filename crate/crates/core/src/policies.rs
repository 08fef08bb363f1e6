//! Scheduling rules for shared servers and the up/down interval classifier.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::Path;
use crate::stochastic::RandomStream;
use crate::topology::{ActivityId, BufferId, ServerId, Topology};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyKind {
    /// Slow departure pacing: the priority activity runs only while its
    /// buffer is longer than every sibling branch of the fork feeding it.
    Sdp,
    /// Strict priority to the first activity listed on each shared server.
    StaticPriority,
    /// Serve the input whose head job reached its buffer first.
    Fcfs,
    /// Pick the first activity with probability `p` when both are available.
    Randomized { p: f64 },
    /// `StaticPriority` when every sibling branch is at least as fast as the
    /// priority activity, `Sdp` otherwise.
    Proposed,
    /// Pacing against the maximum over all sibling branches.
    ForkSdp,
    /// Cost-regime rule for the three-type network.
    ThreeTypeRule { h_a: f64, h_b: f64, h_c: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    #[serde(flatten)]
    pub kind: PolicyKind,
    #[serde(default)]
    pub preemptive: bool,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        PolicySpec {
            kind,
            preemptive: false,
        }
    }

    pub fn preemptive(kind: PolicyKind) -> Self {
        PolicySpec {
            kind,
            preemptive: true,
        }
    }

    pub fn sdp() -> Self {
        Self::new(PolicyKind::Sdp)
    }

    pub fn static_priority() -> Self {
        Self::new(PolicyKind::StaticPriority)
    }

    pub fn fcfs() -> Self {
        Self::new(PolicyKind::Fcfs)
    }

    pub fn randomized(p: f64) -> Self {
        Self::new(PolicyKind::Randomized { p })
    }

    pub fn proposed() -> Self {
        Self::new(PolicyKind::Proposed)
    }

    /// Short stable name used in reports.
    pub fn name(&self) -> String {
        let base = match self.kind {
            PolicyKind::Sdp => "sdp".to_string(),
            PolicyKind::StaticPriority => "static".to_string(),
            PolicyKind::Fcfs => "fcfs".to_string(),
            PolicyKind::Randomized { p } if (p - 2.0 / 3.0).abs() < 1e-12 => "randomized-2/3".to_string(),
            PolicyKind::Randomized { p } if (p - 0.5).abs() < 1e-12 => "randomized".to_string(),
            PolicyKind::Randomized { p } => format!("randomized-{p}"),
            PolicyKind::Proposed => "proposed".to_string(),
            PolicyKind::ForkSdp => "fork-sdp".to_string(),
            PolicyKind::ThreeTypeRule { .. } => "threetype".to_string(),
        };
        if self.preemptive {
            format!("{base}-preemptive")
        } else {
            base
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PolicyKind::Randomized { p } if !(0.0..=1.0).contains(&p) => {
                Err(Error::Parameter(format!("randomization probability {p} outside [0, 1]")))
            }
            PolicyKind::Randomized { .. } | PolicyKind::Fcfs if self.preemptive => Err(Error::Configuration(
                format!("policy `{}` has no preemptive form", self.name()),
            )),
            PolicyKind::ThreeTypeRule { h_a, h_b, h_c } if [h_a, h_b, h_c].iter().any(|h| !(*h >= 0.0)) => {
                Err(Error::Parameter("holding costs must be nonnegative".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// What a rule may inspect when it decides.
pub trait QueueView {
    /// `Q_k`, including a job in service.
    fn len(&self, b: BufferId) -> u64;
    /// Time the head-of-line job entered `b`.
    fn head_time(&self, b: BufferId) -> Option<f64>;
}

#[derive(Clone, Debug)]
struct Candidate {
    id: ActivityId,
    inputs: Vec<BufferId>,
}

impl Candidate {
    fn available(&self, v: &dyn QueueView) -> bool {
        self.inputs.iter().all(|b| v.len(*b) > 0)
    }
}

/// Threshold of the three-type middle regime, shared by both servers.
#[derive(Clone, Debug)]
struct Matching {
    q4: BufferId,
    q5: BufferId,
    q6: BufferId,
    q7: BufferId,
    q8: BufferId,
    q9: BufferId,
    mu_a: f64,
    mu_b1: f64,
    mu_b2: f64,
    mu_c: f64,
}

impl Matching {
    fn threshold(&self, v: &dyn QueueView) -> f64 {
        let q = |b| v.len(b) as f64;
        let w5 = q(self.q5) + self.mu_a / self.mu_b1 * q(self.q6);
        let w6 = q(self.q7) + self.mu_b2 / self.mu_c * q(self.q8);
        let left = self.mu_b1 / self.mu_a * (w5 - q(self.q4)).max(0.0);
        let right = (w6 - self.mu_b2 / self.mu_c * q(self.q9)).max(0.0);
        left.min(right)
    }
}

#[derive(Clone, Debug)]
enum Rule {
    Priority(Vec<Candidate>),
    Pace {
        prio: Candidate,
        other: Candidate,
        own: BufferId,
        refs: Vec<BufferId>,
    },
    Match {
        prio: Candidate,
        other: Candidate,
        own: BufferId,
        m: Box<Matching>,
    },
    Fcfs(Vec<Candidate>),
    Randomized {
        first: Candidate,
        second: Candidate,
        p: f64,
    },
}

impl Rule {
    fn choose(&self, v: &dyn QueueView, rng: &mut RandomStream) -> Option<ActivityId> {
        match self {
            Rule::Priority(order) => order.iter().find(|c| c.available(v)).map(|c| c.id),
            Rule::Pace { prio, other, own, refs } => {
                let bar = refs.iter().map(|b| v.len(*b)).max().unwrap_or(0);
                paced(v, prio, other, v.len(*own) > bar)
            }
            Rule::Match { prio, other, own, m } => {
                let bar = m.threshold(v);
                paced(v, prio, other, v.len(*own) as f64 > bar)
            }
            Rule::Fcfs(cands) => cands
                .iter()
                .filter(|c| c.available(v))
                .filter_map(|c| v.head_time(c.inputs[0]).map(|t| (t, c.id)))
                .fold(None, |best: Option<(f64, ActivityId)>, (t, id)| match best {
                    Some((bt, _)) if bt <= t => best,
                    _ => Some((t, id)),
                })
                .map(|(_, id)| id),
            Rule::Randomized { first, second, p } => match (first.available(v), second.available(v)) {
                (true, true) => {
                    if rng.uniform() < *p {
                        Some(first.id)
                    } else {
                        Some(second.id)
                    }
                }
                (true, false) => Some(first.id),
                (false, true) => Some(second.id),
                (false, false) => None,
            },
        }
    }
}

fn paced(v: &dyn QueueView, prio: &Candidate, other: &Candidate, favour_prio: bool) -> Option<ActivityId> {
    let (p, o) = (prio.available(v), other.available(v));
    if p && (favour_prio || !o) {
        Some(prio.id)
    } else if o {
        Some(other.id)
    } else {
        None
    }
}

/// A policy compiled against one topology.
#[derive(Clone, Debug)]
pub struct Controller {
    spec: PolicySpec,
    rules: Vec<Option<Rule>>,
    single: Vec<Option<Candidate>>,
}

impl Controller {
    pub fn compile(topo: &Topology, spec: &PolicySpec) -> Result<Self> {
        spec.validate()?;
        let cand = |a: ActivityId| Candidate {
            id: a,
            inputs: topo.activity(a).inputs.clone(),
        };
        let mut rules: Vec<Option<Rule>> = vec![None; topo.servers().len()];
        let mut single = vec![None; topo.servers().len()];
        for (s, server) in topo.servers().iter().enumerate() {
            if server.activities.len() == 1 {
                single[s] = Some(cand(server.activities[0]));
            }
        }
        let shared = topo.shared_servers();
        if let PolicyKind::ThreeTypeRule { h_a, h_b, h_c } = spec.kind {
            three_type_rules(topo, h_a, h_b, h_c, &mut rules)?;
            return Ok(Controller {
                spec: *spec,
                rules,
                single,
            });
        }
        for s in shared {
            let acts = &topo.server(s).activities;
            let two = || -> Result<(Candidate, Candidate)> {
                if acts.len() != 2 {
                    return Err(Error::Configuration(format!(
                        "policy `{}` needs exactly two activities on server {}",
                        spec.name(),
                        topo.server(s).label
                    )));
                }
                Ok((cand(acts[0]), cand(acts[1])))
            };
            let rule = match spec.kind {
                PolicyKind::StaticPriority => Rule::Priority(acts.iter().map(|a| cand(*a)).collect()),
                PolicyKind::Fcfs => Rule::Fcfs(acts.iter().map(|a| cand(*a)).collect()),
                PolicyKind::Randomized { p } => {
                    let (first, second) = two()?;
                    Rule::Randomized { first, second, p }
                }
                PolicyKind::Sdp | PolicyKind::ForkSdp => {
                    let (prio, other) = two()?;
                    pace_rule(topo, prio, other)?
                }
                PolicyKind::Proposed => {
                    let (prio, other) = two()?;
                    if pacing_is_moot(topo, prio.id)? {
                        Rule::Priority(vec![prio, other])
                    } else {
                        pace_rule(topo, prio, other)?
                    }
                }
                PolicyKind::ThreeTypeRule { .. } => unreachable!(),
            };
            rules[s.0] = Some(rule);
        }
        Ok(Controller {
            spec: *spec,
            rules,
            single,
        })
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    pub fn is_preemptive(&self) -> bool {
        self.spec.preemptive
    }

    /// True when `s` carries a decision rule (as opposed to one activity).
    pub fn is_controlled(&self, s: ServerId) -> bool {
        self.rules[s.0].is_some()
    }

    /// Activity server `s` should work on now, or `None` if it must idle.
    pub fn choose(&self, s: ServerId, v: &dyn QueueView, rng: &mut RandomStream) -> Option<ActivityId> {
        match &self.rules[s.0] {
            Some(rule) => rule.choose(v, rng),
            None => self.single[s.0].as_ref().filter(|c| c.available(v)).map(|c| c.id),
        }
    }

    /// Human-readable description of the rule used at each shared server.
    pub fn describe(&self, topo: &Topology) -> Vec<(String, String)> {
        let lbl = |a: &Candidate| topo.activity(a.id).label.clone();
        let buf = |b: &BufferId| topo.buffers()[b.0].clone();
        self.rules
            .iter()
            .enumerate()
            .filter_map(|(s, r)| {
                let text = match r.as_ref()? {
                    Rule::Priority(order) => {
                        format!("priority {}", order.iter().map(lbl).collect::<Vec<_>>().join(" > "))
                    }
                    Rule::Pace { prio, other, own, refs } => format!(
                        "serve {} iff Q{} > max(Q{}), else {}",
                        lbl(prio),
                        buf(own),
                        refs.iter().map(buf).collect::<Vec<_>>().join(", Q"),
                        lbl(other)
                    ),
                    Rule::Match { prio, other, own, .. } => {
                        format!("serve {} iff Q{} > m, else {}", lbl(prio), buf(own), lbl(other))
                    }
                    Rule::Fcfs(_) => "fcfs".into(),
                    Rule::Randomized { first, p, .. } => format!("{} with probability {p}", lbl(first)),
                };
                Some((topo.servers()[s].label.clone(), text))
            })
            .collect()
    }
}

/// Buffers on the sibling branches of the fork feeding `a`'s input.
fn pacing_refs(topo: &Topology, a: ActivityId) -> Result<Vec<BufferId>> {
    let own = topo.activity(a).inputs[0];
    let fork = topo.feeder(own).ok_or_else(|| {
        Error::Configuration(format!(
            "activity {} is not fed by a fork; pacing is undefined",
            topo.activity(a).label
        ))
    })?;
    let refs: Vec<BufferId> = topo.activity(fork).outputs.iter().copied().filter(|b| *b != own).collect();
    if refs.is_empty() {
        return Err(Error::Configuration(format!(
            "activity {} is not fed by a fork; pacing is undefined",
            topo.activity(a).label
        )));
    }
    Ok(refs)
}

fn pace_rule(topo: &Topology, prio: Candidate, other: Candidate) -> Result<Rule> {
    let refs = pacing_refs(topo, prio.id)?;
    Ok(Rule::Pace {
        own: prio.inputs[0],
        prio,
        other,
        refs,
    })
}

/// True when every sibling branch drains at least as fast as `a`.
fn pacing_is_moot(topo: &Topology, a: ActivityId) -> Result<bool> {
    let mu = topo.service_rate(a);
    let slowest = pacing_refs(topo, a)?
        .iter()
        .map(|b| topo.service_rate(topo.depleter(*b)))
        .fold(f64::INFINITY, f64::min);
    Ok(slowest >= mu)
}

/// Cost regime of the three-type network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThreeTypeRegime {
    /// `h_a mu_A >= h_b mu_B1` and `h_b mu_B2 >= h_c mu_C`.
    First,
    /// `h_a mu_A >= h_b mu_B1` and `h_c mu_C >= h_b mu_B2`.
    Second,
    /// Type b has the larger `h mu` index on both servers and dominates their sum.
    ThirdStatic,
    /// Type b has the larger `h mu` index on both servers but does not dominate.
    ThirdMatching,
    /// Mirror of `First`.
    Fourth,
}

pub fn three_type_regime(h: [f64; 3], mu_a: f64, mu_b1: f64, mu_b2: f64, mu_c: f64) -> ThreeTypeRegime {
    let [h_a, h_b, h_c] = h;
    let left = h_a * mu_a >= h_b * mu_b1;
    let right = h_c * mu_c >= h_b * mu_b2;
    match (left, right) {
        (true, false) => ThreeTypeRegime::First,
        (true, true) => ThreeTypeRegime::Second,
        (false, false) => {
            if h_b >= h_a * mu_a / mu_b1 + h_c * mu_c / mu_b2 {
                ThreeTypeRegime::ThirdStatic
            } else {
                ThreeTypeRegime::ThirdMatching
            }
        }
        (false, true) => ThreeTypeRegime::Fourth,
    }
}

fn three_type_rules(topo: &Topology, h_a: f64, h_b: f64, h_c: f64, rules: &mut [Option<Rule>]) -> Result<()> {
    let act = |l: &str| topo.require_activity(l);
    let buf = |l: &str| topo.require_buffer(l);
    let cand = |a: ActivityId| Candidate {
        id: a,
        inputs: topo.activity(a).inputs.clone(),
    };
    let (a, b1, b2, c) = (act("A")?, act("B1")?, act("B2")?, act("C")?);
    let s5 = topo.activity(a).server;
    let s6 = topo.activity(c).server;
    if topo.activity(b1).server != s5 || topo.activity(b2).server != s6 || s5 == s6 {
        return Err(Error::Configuration("three-type rule needs A, B1 on one server and B2, C on another".into()));
    }
    let mu = |x| topo.service_rate(x);
    let regime = three_type_regime([h_a, h_b, h_c], mu(a), mu(b1), mu(b2), mu(c));
    let pace = |prio: ActivityId, other: ActivityId, refs: &[&str]| -> Result<Rule> {
        Ok(Rule::Pace {
            prio: cand(prio),
            other: cand(other),
            own: topo.activity(prio).inputs[0],
            refs: refs.iter().map(|l| buf(l)).collect::<Result<_>>()?,
        })
    };
    // Pacing against a dedicated branch is pointless when that branch is faster.
    let pace_or_static = |prio: ActivityId, other: ActivityId, reference: &str| -> Result<Rule> {
        let r = buf(reference)?;
        if mu(topo.depleter(r)) >= mu(prio) {
            Ok(Rule::Priority(vec![cand(prio), cand(other)]))
        } else {
            pace(prio, other, &[reference])
        }
    };
    let (r5, r6) = match regime {
        ThreeTypeRegime::First => (pace_or_static(a, b1, "4")?, pace(b2, c, &["6"])?),
        ThreeTypeRegime::Second => (pace_or_static(a, b1, "4")?, pace_or_static(c, b2, "9")?),
        ThreeTypeRegime::Fourth => (pace(b1, a, &["7"])?, pace_or_static(c, b2, "9")?),
        ThreeTypeRegime::ThirdStatic => (
            Rule::Priority(vec![cand(b1), cand(a)]),
            Rule::Priority(vec![cand(b2), cand(c)]),
        ),
        ThreeTypeRegime::ThirdMatching => {
            let m = Matching {
                q4: buf("4")?,
                q5: buf("5")?,
                q6: buf("6")?,
                q7: buf("7")?,
                q8: buf("8")?,
                q9: buf("9")?,
                mu_a: mu(a),
                mu_b1: mu(b1),
                mu_b2: mu(b2),
                mu_c: mu(c),
            };
            (
                Rule::Match {
                    prio: cand(b1),
                    other: cand(a),
                    own: buf("6")?,
                    m: Box::new(m.clone()),
                },
                Rule::Match {
                    prio: cand(b2),
                    other: cand(c),
                    own: buf("7")?,
                    m: Box::new(m),
                },
            )
        }
    };
    rules[s5.0] = Some(r5);
    rules[s6.0] = Some(r6);
    Ok(())
}

/// Activity chosen at the shared server of the two-type network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Choice {
    A,
    B,
}

/// The shared server's local state: `Q3`, `Q4`, `Q5`, head-of-line arrival
/// times at buffers 4 and 5, and the rates `Proposed` needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecisionView {
    pub q3: u64,
    pub q4: u64,
    pub q5: u64,
    pub head4: Option<f64>,
    pub head5: Option<f64>,
    pub mu3: f64,
    pub mu_a: f64,
}

struct LocalView<'a>(&'a DecisionView);

impl QueueView for LocalView<'_> {
    fn len(&self, b: BufferId) -> u64 {
        [self.0.q3, self.0.q4, self.0.q5][b.0]
    }

    fn head_time(&self, b: BufferId) -> Option<f64> {
        match b.0 {
            1 if self.0.q4 > 0 => self.0.head4,
            2 if self.0.q5 > 0 => self.0.head5,
            _ => None,
        }
    }
}

/// Decision of the shared server in the two-type network; `None` when both
/// of its buffers are empty.
pub fn decide(policy: &PolicySpec, view: &DecisionView, rng: &mut RandomStream) -> Option<Choice> {
    let a = Candidate {
        id: ActivityId(0),
        inputs: vec![BufferId(1)],
    };
    let b = Candidate {
        id: ActivityId(1),
        inputs: vec![BufferId(2)],
    };
    let pace = |prio: Candidate, other: Candidate| Rule::Pace {
        prio,
        other,
        own: BufferId(1),
        refs: vec![BufferId(0)],
    };
    let rule = match policy.kind {
        PolicyKind::Sdp | PolicyKind::ForkSdp => pace(a, b),
        PolicyKind::Proposed if view.mu3 < view.mu_a => pace(a, b),
        PolicyKind::Proposed | PolicyKind::StaticPriority | PolicyKind::ThreeTypeRule { .. } => {
            Rule::Priority(vec![a, b])
        }
        PolicyKind::Fcfs => Rule::Fcfs(vec![a, b]),
        PolicyKind::Randomized { p } => Rule::Randomized { first: a, second: b, p },
    };
    rule.choose(&LocalView(view), rng).map(|id| if id.0 == 0 { Choice::A } else { Choice::B })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalKind {
    Up,
    Down1,
    Down2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalLabel {
    pub start: f64,
    pub end: f64,
    pub label: IntervalKind,
}

/// Partitions `[start, horizon]` into up and down intervals.
///
/// An up interval starts when `Q3 = Q4 - 1` first holds inside a down
/// interval and ends when `Q3 = Q4` next holds. A down interval is `Down1`
/// until `Q5` first hits zero and `Down2` from then on.
pub fn classify_intervals(q3: &Path, q4: &Path, q5: &Path, horizon: f64) -> Result<Vec<IntervalLabel>> {
    let start = q3.start().max(q4.start()).max(q5.start());
    if !(horizon > start) {
        return Err(Error::Input(format!("horizon {horizon} not after path start {start}")));
    }
    if q3.value_at(start) != q4.value_at(start) {
        return Err(Error::Input("interval classification needs Q3 = Q4 at the start".into()));
    }
    let merged = Path::zip_with(&[q3, q4, q5], |v| encode(v[0], v[1], v[2]))?;
    let mut out = Vec::new();
    let mut open = (start, IntervalKind::Down1);
    let mut close = |at: f64, next: IntervalKind, open: &mut (f64, IntervalKind)| {
        if at > open.0 {
            out.push(IntervalLabel {
                start: open.0,
                end: at,
                label: open.1,
            });
        }
        *open = (at, next);
    };
    for (t, code) in merged.times().iter().zip(merged.values()) {
        if *t > horizon {
            break;
        }
        let (d, q5_empty) = decode(*code);
        match open.1 {
            IntervalKind::Up if d == 0 => {
                let next = if q5_empty { IntervalKind::Down2 } else { IntervalKind::Down1 };
                close(*t, next, &mut open);
            }
            IntervalKind::Down1 | IntervalKind::Down2 if d == 1 => close(*t, IntervalKind::Up, &mut open),
            IntervalKind::Down1 if q5_empty => close(*t, IntervalKind::Down2, &mut open),
            _ => {}
        }
    }
    let last = open.1;
    close(horizon, last, &mut open);
    Ok(out)
}

// Packs (Q4 - Q3, Q5 == 0) into one value so a single merged path carries both.
fn encode(q3: f64, q4: f64, q5: f64) -> f64 {
    2.0 * (q4 - q3) + if q5 == 0.0 { 1.0 } else { 0.0 }
}

fn decode(code: f64) -> (i64, bool) {
    let c = code as i64;
    (c.div_euclid(2), c.rem_euclid(2) == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(q3: u64, q4: u64, q5: u64) -> DecisionView {
        DecisionView {
            q3,
            q4,
            q5,
            head4: Some(0.0),
            head5: Some(0.0),
            mu3: 1.0,
            mu_a: 2.0,
        }
    }

    fn rng() -> RandomStream {
        RandomStream::new(1)
    }

    #[test]
    fn sdp_examples() {
        let p = PolicySpec::sdp();
        assert_eq!(decide(&p, &view(2, 3, 1), &mut rng()), Some(Choice::A));
        assert_eq!(decide(&p, &view(3, 3, 1), &mut rng()), Some(Choice::B));
        assert_eq!(decide(&p, &view(5, 2, 0), &mut rng()), Some(Choice::A));
        assert_eq!(decide(&p, &view(0, 0, 0), &mut rng()), None);
    }

    #[test]
    fn static_and_fcfs_examples() {
        assert_eq!(decide(&PolicySpec::static_priority(), &view(0, 1, 9), &mut rng()), Some(Choice::A));
        let v = DecisionView {
            head4: Some(3.0),
            head5: Some(2.5),
            ..view(0, 1, 1)
        };
        assert_eq!(decide(&PolicySpec::fcfs(), &v, &mut rng()), Some(Choice::B));
    }

    #[test]
    fn proposed_switches_on_rates() {
        let p = PolicySpec::proposed();
        let slow = view(3, 3, 1);
        assert_eq!(decide(&p, &slow, &mut rng()), Some(Choice::B));
        let fast = DecisionView { mu3: 3.0, ..slow };
        assert_eq!(decide(&p, &fast, &mut rng()), Some(Choice::A));
    }

    #[test]
    fn randomized_frequency() {
        let p = PolicySpec::randomized(2.0 / 3.0);
        let mut r = rng();
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| decide(&p, &view(1, 1, 1), &mut r) == Some(Choice::A))
            .count();
        assert!((hits as f64 / n as f64 - 2.0 / 3.0).abs() < 0.01);
        assert_eq!(decide(&p, &view(1, 0, 1), &mut r), Some(Choice::B));
    }

    #[test]
    fn policy_validation() {
        assert!(PolicySpec::randomized(1.5).validate().is_err());
        assert!(PolicySpec::preemptive(PolicyKind::Fcfs).validate().is_err());
        assert!(PolicySpec::preemptive(PolicyKind::Sdp).validate().is_ok());
        assert_eq!(PolicySpec::randomized(2.0 / 3.0).name(), "randomized-2/3");
    }

    #[test]
    fn regimes() {
        use ThreeTypeRegime::*;
        assert_eq!(three_type_regime([1.0, 3.0, 1.0], 1.0, 1.0, 1.0, 1.0), ThirdStatic);
        assert_eq!(three_type_regime([1.0, 1.5, 1.0], 1.0, 1.0, 1.0, 1.0), ThirdMatching);
        assert_eq!(three_type_regime([2.0, 1.0, 2.0], 1.0, 1.0, 1.0, 1.0), Second);
        assert_eq!(three_type_regime([2.0, 1.0, 0.5], 1.0, 1.0, 1.0, 1.0), First);
        assert_eq!(three_type_regime([0.5, 1.0, 2.0], 1.0, 1.0, 1.0, 1.0), Fourth);
    }

    fn p(times: &[f64], values: &[f64]) -> Path {
        Path::new(times.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn equal_queues_give_one_down_interval() {
        let q = p(&[0.0, 1.0], &[0.0, 2.0]);
        let q5 = Path::constant(1.0);
        let iv = classify_intervals(&q, &q, &q5, 5.0).unwrap();
        assert_eq!(
            iv,
            vec![IntervalLabel {
                start: 0.0,
                end: 5.0,
                label: IntervalKind::Down1
            }]
        );
    }

    #[test]
    fn empty_q5_at_start_is_all_down2() {
        let q = Path::constant(1.0);
        let iv = classify_intervals(&q, &q, &Path::constant(0.0), 3.0).unwrap();
        assert_eq!(iv.len(), 1);
        assert_eq!(iv[0].label, IntervalKind::Down2);
    }

    #[test]
    fn single_crossing() {
        let q3 = p(&[0.0, 3.0], &[1.0, 2.0]);
        let q4 = p(&[0.0, 1.0, 2.0], &[1.0, 2.0, 2.0 + 0.0]);
        let q5 = p(&[0.0, 4.0], &[1.0, 0.0]);
        let iv = classify_intervals(&q3, &q4, &q5, 6.0).unwrap();
        let kinds: Vec<_> = iv.iter().map(|i| (i.start, i.end, i.label)).collect();
        assert_eq!(
            kinds,
            vec![
                (0.0, 1.0, IntervalKind::Down1),
                (1.0, 3.0, IntervalKind::Up),
                (3.0, 4.0, IntervalKind::Down1),
                (4.0, 6.0, IntervalKind::Down2),
            ]
        );
    }

    #[test]
    fn classification_needs_equal_start() {
        let iv = classify_intervals(&Path::constant(1.0), &Path::constant(0.0), &Path::constant(0.0), 1.0);
        assert!(iv.is_err());
    }
}
