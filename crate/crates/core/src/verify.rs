//! Bounded verification of subject reduction, session fidelity, and
//! progress.
//!
//! All three properties are checked by breadth-first exploration of the
//! session's reachable states up to a depth bound and a state cap.
//! Subject reduction re-types every reachable state against the tracked
//! global pair; fidelity checks each fired communication against the
//! order, labels, and sorts the active global type prescribes, and flags
//! prescribed communications that can never fire; progress checks that
//! every input/output prefix is consumed on some path and that every
//! checkpoint name is the target of some rollback.
//!
//! Exploration is value-independent by default: receives substitute the
//! canonical value of the declared sort, so the state space stays finite
//! whenever the control structure is finite. A verdict of `Holds` or
//! `Violated` is definitive for the explored fragment; hitting a bound
//! first yields `Inconclusive`.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::kernel::{
    CkName, GlobalPair, GlobalType, Label, Participant, Process, ProcVar, Session,
};
use crate::parser::{print_pair, print_session};
use crate::semantics::{
    describe_step, normalize, render_step, session_steps, track_pair, RuleTag, SessionStep,
    ValuePolicy,
};
use crate::typing::type_session;

/// Exploration bounds and value policy.
#[derive(Debug, Clone)]
pub struct ExploreConfig {
    /// Maximum number of steps from the initial state.
    pub depth: usize,
    /// Maximum number of distinct states to visit.
    pub state_cap: usize,
    pub values: ValuePolicy,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig { depth: 12, state_cap: 10_000, values: ValuePolicy::Canonical }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// The properties the verifier knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Prop {
    SubjectReduction,
    Fidelity,
    Progress,
}

impl Prop {
    pub fn name(self) -> &'static str {
        match self {
            Prop::SubjectReduction => "subject-reduction",
            Prop::Fidelity => "session-fidelity",
            Prop::Progress => "progress",
        }
    }
}

impl std::str::FromStr for Prop {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sr" | "subject-reduction" => Ok(Prop::SubjectReduction),
            "fidelity" | "session-fidelity" => Ok(Prop::Fidelity),
            "progress" => Ok(Prop::Progress),
            other => Err(format!(
                "unknown property `{other}` (expected sr, fidelity, or progress)"
            )),
        }
    }
}

/// A shortest offending run: the trace from the initial state, the state
/// reached, and what went wrong there.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub steps: Vec<String>,
    pub state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub property: &'static str,
    pub verdict: Verdict,
    pub states: usize,
    pub truncated: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub properties: Vec<PropertyReport>,
}

impl VerifyReport {
    /// The worst verdict across all checked properties.
    pub fn overall(&self) -> Verdict {
        let mut v = Verdict::Holds;
        for p in &self.properties {
            match p.verdict {
                Verdict::Violated => return Verdict::Violated,
                Verdict::Inconclusive => v = Verdict::Inconclusive,
                Verdict::Holds => {}
            }
        }
        v
    }
}

/// Checks the requested properties in order.
pub fn verify_session(
    s: &Session,
    gp: &GlobalPair,
    cfg: &ExploreConfig,
    props: &[Prop],
) -> VerifyReport {
    let mut properties = Vec::new();
    for p in props {
        let report = match p {
            Prop::SubjectReduction => check_subject_reduction(s, gp, cfg),
            Prop::Fidelity => check_fidelity(s, gp, cfg),
            Prop::Progress => check_progress(s, cfg),
        };
        properties.push(report);
    }
    VerifyReport { properties }
}

struct Node {
    session: Session,
    pair: GlobalPair,
    depth: usize,
    parent: Option<usize>,
    line: Option<String>,
}

fn trace_to(nodes: &[Node], mut idx: usize) -> Vec<String> {
    let mut rev = Vec::new();
    loop {
        let n = &nodes[idx];
        if let Some(line) = &n.line {
            rev.push(line.clone());
        }
        match n.parent {
            Some(p) => idx = p,
            None => break,
        }
    }
    rev.reverse();
    rev
}

fn counterexample(nodes: &[Node], idx: usize, reason: String) -> Counterexample {
    Counterexample {
        steps: trace_to(nodes, idx),
        state: print_session(&normalize(&nodes[idx].session)),
        pair: Some(print_pair(&nodes[idx].pair)),
        reason,
    }
}

fn state_key(s: &Session, gp: &GlobalPair) -> (Session, GlobalPair) {
    (normalize(s), gp.clone())
}

/// Explores all reachable states, re-typing each against its tracked
/// global pair.
pub fn check_subject_reduction(
    s: &Session,
    gp: &GlobalPair,
    cfg: &ExploreConfig,
) -> PropertyReport {
    let initial = type_session(s, gp);
    if !initial.accepted() {
        let reasons: Vec<String> = initial
            .failures
            .iter()
            .map(|f| format!("{}: {}", f.condition, f.locus))
            .collect();
        return PropertyReport {
            property: Prop::SubjectReduction.name(),
            verdict: Verdict::Violated,
            states: 1,
            truncated: false,
            detail: "the initial session is not well typed".into(),
            counterexample: Some(Counterexample {
                steps: Vec::new(),
                state: print_session(&normalize(s)),
                pair: Some(print_pair(gp)),
                reason: reasons.join("; "),
            }),
        };
    }

    let mut nodes = vec![Node {
        session: s.clone(),
        pair: gp.clone(),
        depth: 0,
        parent: None,
        line: None,
    }];
    let mut visited: HashSet<(Session, GlobalPair)> = HashSet::new();
    visited.insert(state_key(s, gp));
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(0);
    let mut truncated = false;

    while let Some(idx) = queue.pop_front() {
        if nodes[idx].depth == cfg.depth {
            truncated = true;
            continue;
        }
        let steps = session_steps(&nodes[idx].session, &cfg.values);
        for step in &steps {
            let Some(next_pair) = track_pair(&nodes[idx].pair, step) else {
                let reason = format!(
                    "step [{}] {} by {} has no matching reduction of the tracked global type",
                    step.rule,
                    describe_step(step),
                    step.participants
                        .iter()
                        .map(|p| p.as_str().to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                );
                return PropertyReport {
                    property: Prop::SubjectReduction.name(),
                    verdict: Verdict::Violated,
                    states: visited.len(),
                    truncated,
                    detail: "a reachable step cannot be tracked".into(),
                    counterexample: Some(counterexample(&nodes, idx, reason)),
                };
            };
            let key = state_key(&step.next, &next_pair);
            if visited.contains(&key) {
                continue;
            }
            if visited.len() >= cfg.state_cap {
                truncated = true;
                continue;
            }
            visited.insert(key);
            let child = Node {
                session: step.next.clone(),
                pair: next_pair.clone(),
                depth: nodes[idx].depth + 1,
                parent: Some(idx),
                line: Some(render_step(nodes[idx].depth + 1, step)),
            };
            nodes.push(child);
            let child_idx = nodes.len() - 1;
            let report = type_session(&step.next, &next_pair);
            if !report.accepted() {
                let reasons: Vec<String> = report
                    .failures
                    .iter()
                    .map(|f| format!("{}: {}", f.condition, f.locus))
                    .collect();
                return PropertyReport {
                    property: Prop::SubjectReduction.name(),
                    verdict: Verdict::Violated,
                    states: visited.len(),
                    truncated,
                    detail: "a reachable state is not well typed against its tracked pair"
                        .into(),
                    counterexample: Some(counterexample(
                        &nodes,
                        child_idx,
                        reasons.join("; "),
                    )),
                };
            }
            queue.push_back(child_idx);
        }
    }

    PropertyReport {
        property: Prop::SubjectReduction.name(),
        verdict: if truncated { Verdict::Inconclusive } else { Verdict::Holds },
        states: visited.len(),
        truncated,
        detail: format!("{} states re-typed without failure", visited.len()),
        counterexample: None,
    }
}

/// The pair's head with a checkpointed communication unwrapped. The commit
/// is a free internal step, so the communication the global type prescribes
/// next is the checkpoint's body, and firing it pushes the checkpointed
/// type onto the history.
fn unwrap_ck_head(pair: &GlobalPair) -> (Vec<GlobalType>, GlobalType) {
    let head = pair.active.unfold_head();
    match head {
        GlobalType::CkComm { ref from, ref to, ref branches, .. } => {
            let mut history = pair.history.clone();
            history.push(head.clone());
            let comm = GlobalType::Comm {
                from: from.clone(),
                to: to.clone(),
                branches: branches.clone(),
            };
            (history, comm)
        }
        other => (pair.history.clone(), other),
    }
}

/// A communication the active global type prescribes but the session can
/// never fire, observed at one state.
fn blocked_reason(session: &Session, pair: &GlobalPair) -> Option<String> {
    let (_, head) = unwrap_ck_head(pair);
    let GlobalType::Comm { from, to, branches } = head else {
        return None;
    };
    let sender = session.0.get(&from)?;
    let receiver = session.0.get(&to)?;
    let sender_head = sender.active.unfold_head();
    if matches!(sender_head, Process::End) {
        return Some(format!(
            "{from} has terminated but the global type prescribes {from} -> {to}"
        ));
    }
    // Only a committed sender pins down the label; an uncommitted choice
    // may still commit to a viable branch later.
    let Process::Int { to: s_to, branches: s_branches } = sender_head else {
        return None;
    };
    if s_branches.len() != 1 || s_to != to {
        return None;
    }
    let (label, b) = s_branches.into_iter().next().unwrap();
    if !branches.contains_key(&label) {
        return Some(format!(
            "{from} is committed to `{label}` which the global type does not offer here"
        ));
    }
    let (r_from, r_branches, r_what) = match receiver.active.unfold_head() {
        Process::Ext { from, branches } => (from, branches, "external choice"),
        Process::CkExt { from, branches, .. } => (from, branches, "external choice"),
        Process::End => {
            return Some(format!(
                "{to} has terminated but the global type prescribes {from} -> {to} {label}"
            ));
        }
        _ => return None,
    };
    if r_from != from {
        return None;
    }
    match r_branches.get(&label) {
        None => Some(format!(
            "{to} offers no `{label}` branch in its {r_what} from {from}"
        )),
        Some(rb) => {
            if rb.bind.is_some() != b.payload.is_some() {
                Some(format!(
                    "payload presence of `{label}` disagrees between {from} and {to}"
                ))
            } else {
                None
            }
        }
    }
}

/// Explores all reachable states, checking each communication against the
/// tracked global type.
pub fn check_fidelity(s: &Session, gp: &GlobalPair, cfg: &ExploreConfig) -> PropertyReport {
    let mut nodes = vec![Node {
        session: s.clone(),
        pair: gp.clone(),
        depth: 0,
        parent: None,
        line: None,
    }];
    let mut visited: HashSet<(Session, GlobalPair)> = HashSet::new();
    visited.insert(state_key(s, gp));
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(0);
    let mut truncated = false;

    while let Some(idx) = queue.pop_front() {
        if let Some(reason) = blocked_reason(&nodes[idx].session, &nodes[idx].pair) {
            return PropertyReport {
                property: Prop::Fidelity.name(),
                verdict: Verdict::Violated,
                states: visited.len(),
                truncated,
                detail: "a prescribed communication is blocked".into(),
                counterexample: Some(counterexample(&nodes, idx, reason)),
            };
        }
        if nodes[idx].depth == cfg.depth {
            truncated = true;
            continue;
        }
        let steps = session_steps(&nodes[idx].session, &cfg.values);
        for step in &steps {
            let next_pair = match fidelity_advance(&nodes[idx].pair, step) {
                Ok(p) => p,
                Err(reason) => {
                    let detail = match step.rule {
                        RuleTag::Com => "a communication violates the global type",
                        _ => "a rollback targets a checkpoint the global type never crossed",
                    };
                    return PropertyReport {
                        property: Prop::Fidelity.name(),
                        verdict: Verdict::Violated,
                        states: visited.len(),
                        truncated,
                        detail: detail.into(),
                        counterexample: Some(counterexample(&nodes, idx, reason)),
                    };
                }
            };
            let key = state_key(&step.next, &next_pair);
            if visited.contains(&key) {
                continue;
            }
            if visited.len() >= cfg.state_cap {
                truncated = true;
                continue;
            }
            visited.insert(key);
            nodes.push(Node {
                session: step.next.clone(),
                pair: next_pair,
                depth: nodes[idx].depth + 1,
                parent: Some(idx),
                line: Some(render_step(nodes[idx].depth + 1, step)),
            });
            queue.push_back(nodes.len() - 1);
        }
    }

    PropertyReport {
        property: Prop::Fidelity.name(),
        verdict: if truncated { Verdict::Inconclusive } else { Verdict::Holds },
        states: visited.len(),
        truncated,
        detail: format!(
            "{} states explored; every communication matched the global type",
            visited.len()
        ),
        counterexample: None,
    }
}

/// Advances the pair tracked by the fidelity check. Fidelity constrains
/// communications and rollbacks only, so commits leave the pair in place;
/// when the head is checkpointed and its communication fires, the commit
/// and the communication are taken together.
fn fidelity_advance(pair: &GlobalPair, step: &SessionStep) -> Result<GlobalPair, String> {
    match step.rule {
        RuleTag::Com => {
            let c = step.comm.as_ref().expect("Com steps carry comm info");
            let (history, head) = unwrap_ck_head(pair);
            let GlobalType::Comm { from, to, branches } = head else {
                return Err(format!(
                    "{} -> {} {} fired while the global type prescribes no communication",
                    c.from, c.to, c.label
                ));
            };
            if from != c.from || to != c.to {
                return Err(format!(
                    "{} -> {} {} fired while the global type prescribes {from} -> {to}",
                    c.from, c.to, c.label
                ));
            }
            let Some(gb) = branches.get(&c.label) else {
                return Err(format!(
                    "label `{}` is not offered by the global type at {from} -> {to}",
                    c.label
                ));
            };
            // A type mismatch: no common sort for the communicated value
            // and the receiver's binder for this label.
            let sent_sort = c.sent_value.as_ref().map(|v| v.sort());
            if sent_sort != c.binder_sort {
                return Err(format!(
                    "communicated value has sort {} but the binder of `{}` expects {}",
                    opt_sort(&sent_sort),
                    c.label,
                    opt_sort(&c.binder_sort)
                ));
            }
            if sent_sort != gb.sort {
                return Err(format!(
                    "communicated value has sort {} but the global type declares {} for `{}`",
                    opt_sort(&sent_sort),
                    opt_sort(&gb.sort),
                    c.label
                ));
            }
            Ok(GlobalPair { history, active: gb.cont.clone() })
        }
        RuleTag::RbM => {
            let name = step.rollback.as_ref().expect("RbM steps carry the name");
            match pair.history.iter().rposition(|g| g.ck_name() == Some(name)) {
                Some(i) => Ok(GlobalPair {
                    history: pair.history[..i].to_vec(),
                    active: pair.history[i].clone(),
                }),
                None => Err(format!(
                    "roll {name} fired but the global type never crossed checkpoint {name}"
                )),
            }
        }
        _ => Ok(pair.clone()),
    }
}

fn opt_sort(s: &Option<crate::kernel::Sort>) -> String {
    match s {
        Some(s) => s.to_string(),
        None => "no payload".into(),
    }
}

// ---------------------------------------------------------------------
// Progress.
//
// Progress is a coverage property, so exploration runs over a mirror of
// the session in which every choice node carries a stable occurrence id.
// Ids survive commitment, history pushes, rollbacks, and recursion
// unfolding (each unfolded copy keeps the ids of the body it was copied
// from), so consuming any copy consumes the original occurrence. The
// mirror carries no expressions: payloads reduce to their presence, which
// is all that communication matching needs.

type OccId = u32;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct TIn {
    bind: bool,
    cont: TProc,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct TOut {
    payload: bool,
    cont: TProc,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum TProc {
    Ext { id: OccId, from: Participant, branches: BTreeMap<Label, TIn> },
    Int { id: OccId, to: Participant, branches: BTreeMap<Label, TOut> },
    CkExt { id: OccId, name: CkName, from: Participant, branches: BTreeMap<Label, TIn> },
    CkInt { id: OccId, name: CkName, to: Participant, branches: BTreeMap<Label, TOut> },
    Rec { var: ProcVar, body: Box<TProc> },
    Var(ProcVar),
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct TConfig {
    history: Vec<TProc>,
    active: TProc,
}

type TSession = BTreeMap<Participant, TConfig>;

struct Tagger {
    next: OccId,
    descriptions: BTreeMap<OccId, String>,
}

impl Tagger {
    fn new() -> Self {
        Tagger { next: 0, descriptions: BTreeMap::new() }
    }

    fn tag(&mut self, owner: &Participant, p: &Process) -> TProc {
        match p {
            Process::Ext { from, branches } => {
                let id = self.claim(owner, "?", from, branches.keys());
                TProc::Ext {
                    id,
                    from: from.clone(),
                    branches: branches
                        .iter()
                        .map(|(l, b)| {
                            (l.clone(), TIn {
                                bind: b.bind.is_some(),
                                cont: self.tag(owner, &b.cont),
                            })
                        })
                        .collect(),
                }
            }
            Process::CkExt { name, from, branches } => {
                let id = self.claim(owner, "?", from, branches.keys());
                TProc::CkExt {
                    id,
                    name: name.clone(),
                    from: from.clone(),
                    branches: branches
                        .iter()
                        .map(|(l, b)| {
                            (l.clone(), TIn {
                                bind: b.bind.is_some(),
                                cont: self.tag(owner, &b.cont),
                            })
                        })
                        .collect(),
                }
            }
            Process::Int { to, branches } => {
                let id = self.claim(owner, "!", to, branches.keys());
                TProc::Int {
                    id,
                    to: to.clone(),
                    branches: branches
                        .iter()
                        .map(|(l, b)| {
                            (l.clone(), TOut {
                                payload: b.payload.is_some(),
                                cont: self.tag(owner, &b.cont),
                            })
                        })
                        .collect(),
                }
            }
            Process::CkInt { name, to, branches } => {
                let id = self.claim(owner, "!", to, branches.keys());
                TProc::CkInt {
                    id,
                    name: name.clone(),
                    to: to.clone(),
                    branches: branches
                        .iter()
                        .map(|(l, b)| {
                            (l.clone(), TOut {
                                payload: b.payload.is_some(),
                                cont: self.tag(owner, &b.cont),
                            })
                        })
                        .collect(),
                }
            }
            Process::Rec { var, body } => TProc::Rec {
                var: var.clone(),
                body: Box::new(self.tag(owner, body)),
            },
            Process::Var(x) => TProc::Var(x.clone()),
            Process::End => TProc::End,
        }
    }

    fn claim<'a>(
        &mut self,
        owner: &Participant,
        dir: &str,
        peer: &Participant,
        labels: impl Iterator<Item = &'a Label>,
    ) -> OccId {
        let id = self.next;
        self.next += 1;
        let ls: Vec<String> = labels.map(|l| l.as_str().to_string()).collect();
        self.descriptions
            .insert(id, format!("{owner}: {peer}{dir}{{{}}}", ls.join(", ")));
        id
    }
}

impl TProc {
    fn subst_proc(&self, var: &ProcVar, with: &TProc) -> TProc {
        match self {
            TProc::Ext { id, from, branches } => TProc::Ext {
                id: *id,
                from: from.clone(),
                branches: branches
                    .iter()
                    .map(|(l, b)| {
                        (l.clone(), TIn { bind: b.bind, cont: b.cont.subst_proc(var, with) })
                    })
                    .collect(),
            },
            TProc::CkExt { id, name, from, branches } => TProc::CkExt {
                id: *id,
                name: name.clone(),
                from: from.clone(),
                branches: branches
                    .iter()
                    .map(|(l, b)| {
                        (l.clone(), TIn { bind: b.bind, cont: b.cont.subst_proc(var, with) })
                    })
                    .collect(),
            },
            TProc::Int { id, to, branches } => TProc::Int {
                id: *id,
                to: to.clone(),
                branches: branches
                    .iter()
                    .map(|(l, b)| {
                        (l.clone(), TOut {
                            payload: b.payload,
                            cont: b.cont.subst_proc(var, with),
                        })
                    })
                    .collect(),
            },
            TProc::CkInt { id, name, to, branches } => TProc::CkInt {
                id: *id,
                name: name.clone(),
                to: to.clone(),
                branches: branches
                    .iter()
                    .map(|(l, b)| {
                        (l.clone(), TOut {
                            payload: b.payload,
                            cont: b.cont.subst_proc(var, with),
                        })
                    })
                    .collect(),
            },
            TProc::Rec { var: v, body } => {
                if v == var {
                    self.clone()
                } else {
                    TProc::Rec { var: v.clone(), body: Box::new(body.subst_proc(var, with)) }
                }
            }
            TProc::Var(x) => {
                if x == var {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            TProc::End => TProc::End,
        }
    }

    fn unfold_head(&self) -> TProc {
        let mut p = self.clone();
        let mut fuel = 1024;
        while let TProc::Rec { var, body } = &p {
            if fuel == 0 {
                break;
            }
            fuel -= 1;
            p = body.subst_proc(var, &p);
        }
        p
    }

    fn ids_and_names(&self, ids: &mut BTreeSet<OccId>, names: &mut BTreeSet<CkName>) {
        match self {
            TProc::Ext { id, branches, .. } => {
                ids.insert(*id);
                for b in branches.values() {
                    b.cont.ids_and_names(ids, names);
                }
            }
            TProc::CkExt { id, name, branches, .. } => {
                ids.insert(*id);
                names.insert(name.clone());
                for b in branches.values() {
                    b.cont.ids_and_names(ids, names);
                }
            }
            TProc::Int { id, branches, .. } => {
                ids.insert(*id);
                for b in branches.values() {
                    b.cont.ids_and_names(ids, names);
                }
            }
            TProc::CkInt { id, name, branches, .. } => {
                ids.insert(*id);
                names.insert(name.clone());
                for b in branches.values() {
                    b.cont.ids_and_names(ids, names);
                }
            }
            TProc::Rec { body, .. } => body.ids_and_names(ids, names),
            TProc::Var(_) | TProc::End => {}
        }
    }

    fn ck_name(&self) -> Option<&CkName> {
        match self {
            TProc::CkExt { name, .. } | TProc::CkInt { name, .. } => Some(name),
            _ => None,
        }
    }
}

struct TStep {
    consumed: Vec<OccId>,
    roll: Option<CkName>,
    next: TSession,
}

fn t_steps(ts: &TSession) -> Vec<TStep> {
    let mut out = Vec::new();

    // Commits.
    for (p, c) in ts {
        match c.active.unfold_head() {
            TProc::Int { id, to, branches } if branches.len() > 1 => {
                for (l, b) in &branches {
                    let mut next = ts.clone();
                    next.insert(
                        p.clone(),
                        TConfig {
                            history: c.history.clone(),
                            active: TProc::Int {
                                id,
                                to: to.clone(),
                                branches: BTreeMap::from([(l.clone(), b.clone())]),
                            },
                        },
                    );
                    out.push(TStep { consumed: Vec::new(), roll: None, next });
                }
            }
            TProc::CkInt { id, to, branches, .. } => {
                let pushed = c.active.unfold_head();
                for (l, b) in &branches {
                    let mut history = c.history.clone();
                    history.push(pushed.clone());
                    let mut next = ts.clone();
                    next.insert(
                        p.clone(),
                        TConfig {
                            history,
                            active: TProc::Int {
                                id,
                                to: to.clone(),
                                branches: BTreeMap::from([(l.clone(), b.clone())]),
                            },
                        },
                    );
                    out.push(TStep { consumed: Vec::new(), roll: None, next });
                }
            }
            _ => {}
        }
    }

    // Communications.
    for (p, c) in ts {
        let TProc::Int { id: sid, to: q, branches } = c.active.unfold_head() else {
            continue;
        };
        if branches.len() != 1 || &q == p {
            continue;
        }
        let (l, b) = branches.into_iter().next().unwrap();
        let Some(qc) = ts.get(&q) else { continue };
        let (rid, rfrom, rbranches, push) = match qc.active.unfold_head() {
            TProc::Ext { id, from, branches } => (id, from, branches, None),
            t @ TProc::CkExt { .. } => {
                let TProc::CkExt { id, from, branches, .. } = t.clone() else { unreachable!() };
                (id, from, branches, Some(t))
            }
            _ => continue,
        };
        if &rfrom != p {
            continue;
        }
        let Some(rb) = rbranches.get(&l) else { continue };
        if rb.bind != b.payload {
            continue;
        }
        let mut history = qc.history.clone();
        if let Some(orig) = push {
            history.push(orig);
        }
        let mut next = ts.clone();
        next.insert(p.clone(), TConfig { history: c.history.clone(), active: b.cont.clone() });
        next.insert(q.clone(), TConfig { history, active: rb.cont.clone() });
        out.push(TStep { consumed: vec![sid, rid], roll: None, next });
    }

    // Rollbacks.
    let mut names: BTreeSet<CkName> = BTreeSet::new();
    for c in ts.values() {
        names.extend(c.history.iter().filter_map(|p| p.ck_name().cloned()));
    }
    'names: for name in names {
        let mut next = ts.clone();
        for (p, c) in ts {
            let idx = c.history.iter().rposition(|q| q.ck_name() == Some(&name));
            match idx {
                Some(i) => {
                    next.insert(
                        p.clone(),
                        TConfig {
                            history: c.history[..i].to_vec(),
                            active: c.history[i].clone(),
                        },
                    );
                }
                None => {
                    if !matches!(c.active.unfold_head(), TProc::End) {
                        continue 'names;
                    }
                }
            }
        }
        out.push(TStep { consumed: Vec::new(), roll: Some(name), next });
    }

    out
}

/// Explores the session checking that every input/output prefix fires on
/// some path and every checkpoint name is the target of some rollback.
pub fn check_progress(s: &Session, cfg: &ExploreConfig) -> PropertyReport {
    let mut tagger = Tagger::new();
    let initial: TSession = s
        .0
        .iter()
        .map(|(p, c)| {
            (
                p.clone(),
                TConfig {
                    history: c.history.0.iter().map(|q| tagger.tag(p, q)).collect(),
                    active: tagger.tag(p, &c.active),
                },
            )
        })
        .collect();

    let mut needed_ids: BTreeSet<OccId> = BTreeSet::new();
    let mut needed_names: BTreeSet<CkName> = BTreeSet::new();
    for c in initial.values() {
        c.active.ids_and_names(&mut needed_ids, &mut needed_names);
        for h in &c.history {
            h.ids_and_names(&mut needed_ids, &mut needed_names);
        }
    }

    let mut consumed: BTreeSet<OccId> = BTreeSet::new();
    let mut witnessed: BTreeSet<CkName> = BTreeSet::new();
    let mut visited: HashSet<TSession> = HashSet::new();
    visited.insert(initial.clone());
    let mut queue: VecDeque<(TSession, usize)> = VecDeque::new();
    queue.push_back((initial, 0));
    let mut truncated = false;

    while let Some((ts, depth)) = queue.pop_front() {
        if consumed.len() == needed_ids.len() && witnessed.len() == needed_names.len() {
            break;
        }
        if depth == cfg.depth {
            truncated = true;
            continue;
        }
        for step in t_steps(&ts) {
            consumed.extend(step.consumed.iter().copied());
            if let Some(name) = &step.roll {
                witnessed.insert(name.clone());
            }
            if visited.contains(&step.next) {
                continue;
            }
            if visited.len() >= cfg.state_cap {
                truncated = true;
                continue;
            }
            visited.insert(step.next.clone());
            queue.push_back((step.next, depth + 1));
        }
    }

    let missing_ids: Vec<String> = needed_ids
        .difference(&consumed)
        .map(|id| tagger.descriptions[id].clone())
        .collect();
    let missing_names: Vec<String> = needed_names
        .difference(&witnessed)
        .map(|n| n.as_str().to_string())
        .collect();

    if missing_ids.is_empty() && missing_names.is_empty() {
        return PropertyReport {
            property: Prop::Progress.name(),
            verdict: Verdict::Holds,
            states: visited.len(),
            truncated,
            detail: format!(
                "all {} prefixes fired and all {} checkpoint names rolled back",
                needed_ids.len(),
                needed_names.len()
            ),
            counterexample: None,
        };
    }

    let mut reasons = Vec::new();
    if !missing_ids.is_empty() {
        reasons.push(format!("prefixes never consumed: {}", missing_ids.join("; ")));
    }
    if !missing_names.is_empty() {
        reasons.push(format!(
            "checkpoint names never rolled back to: {}",
            missing_names.join(", ")
        ));
    }
    PropertyReport {
        property: Prop::Progress.name(),
        verdict: if truncated { Verdict::Inconclusive } else { Verdict::Violated },
        states: visited.len(),
        truncated,
        detail: reasons.join("; "),
        counterexample: Some(Counterexample {
            steps: Vec::new(),
            state: print_session(&normalize(s)),
            pair: None,
            reason: reasons.join("; "),
        }),
    }
}
