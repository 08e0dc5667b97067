//! Forward and backward operational semantics.
//!
//! Configurations step by the six process-level rules: committing a branch
//! of an internal choice (checkpointed or not), sending from a committed
//! output, receiving into an external choice (checkpointed or not), and
//! rolling back to any checkpoint held in the history. Sessions combine
//! them: a commit is a silent step of one participant, a communication
//! pairs a committed sender with a willing receiver, and a rollback on a
//! name reactivates that checkpoint for every participant holding it —
//! provided everyone else has terminated without ever crossing it.
//! Recursion is unfolded on demand at the head of active processes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::kernel::{
    CkName, Configuration, EvalError, GlobalPair, GlobalType, Label, Network, OutBranch,
    Participant, Process, Session, Sort, Value,
};
use crate::parser::print_session;

/// The reduction rule behind a step, as named in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleTag {
    Chc,
    CkChc,
    Snd,
    Rcv,
    CkRcv,
    RbP,
    Com,
    RbM,
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleTag::Chc => "Chc",
            RuleTag::CkChc => "CkChc",
            RuleTag::Snd => "Snd",
            RuleTag::Rcv => "Rcv",
            RuleTag::CkRcv => "CkRcv",
            RuleTag::RbP => "RbP",
            RuleTag::Com => "Com",
            RuleTag::RbM => "RbM",
        };
        f.write_str(s)
    }
}

/// Transition labels of the configuration LTS.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionLabel {
    Tau,
    Send { to: Participant, label: Label, value: Option<Value> },
    Recv { from: Participant, label: Label, value: Option<Value> },
    Roll(CkName),
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::Tau => f.write_str("tau"),
            ActionLabel::Send { to, label, value } => match value {
                Some(v) => write!(f, "{to}!{label}({v})"),
                None => write!(f, "{to}!{label}"),
            },
            ActionLabel::Recv { from, label, value } => match value {
                Some(v) => write!(f, "{from}?{label}({v})"),
                None => write!(f, "{from}?{label}"),
            },
            ActionLabel::Roll(name) => write!(f, "{name}"),
        }
    }
}

/// One step of a configuration. Receive steps are value-dependent: they
/// carry no successor here, and [`apply_receive`] completes them once the
/// value to substitute is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigStep {
    pub rule: RuleTag,
    pub label: ActionLabel,
    pub branch: Option<Label>,
    pub next: Option<Configuration>,
}

/// A committed output whose expression does not evaluate; such a send can
/// never fire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalFault {
    pub to: Participant,
    pub label: Label,
    pub error: EvalError,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigMoves {
    pub steps: Vec<ConfigStep>,
    pub faults: Vec<EvalFault>,
}

/// Enumerates the moves of a configuration.
pub fn config_moves(c: &Configuration) -> ConfigMoves {
    let mut out = ConfigMoves::default();
    let active = c.active.unfold_head();
    match &active {
        Process::Int { to, branches } => {
            if branches.len() == 1 {
                let (l, b) = branches.iter().next().unwrap();
                match b.payload.as_ref().map(|e| e.eval(&BTreeMap::new())).transpose() {
                    Ok(value) => out.steps.push(ConfigStep {
                        rule: RuleTag::Snd,
                        label: ActionLabel::Send { to: to.clone(), label: l.clone(), value },
                        branch: Some(l.clone()),
                        next: Some(Configuration {
                            history: c.history.clone(),
                            active: b.cont.clone(),
                        }),
                    }),
                    Err(error) => out.faults.push(EvalFault {
                        to: to.clone(),
                        label: l.clone(),
                        error,
                    }),
                }
            } else {
                for (l, b) in branches {
                    out.steps.push(ConfigStep {
                        rule: RuleTag::Chc,
                        label: ActionLabel::Tau,
                        branch: Some(l.clone()),
                        next: Some(Configuration {
                            history: c.history.clone(),
                            active: committed(to, l, b),
                        }),
                    });
                }
            }
        }
        Process::CkInt { to, branches, .. } => {
            for (l, b) in branches {
                let mut history = c.history.clone();
                history.0.push(active.clone());
                out.steps.push(ConfigStep {
                    rule: RuleTag::CkChc,
                    label: ActionLabel::Tau,
                    branch: Some(l.clone()),
                    next: Some(Configuration { history, active: committed(to, l, b) }),
                });
            }
        }
        Process::Ext { from, branches } => {
            for l in branches.keys() {
                out.steps.push(ConfigStep {
                    rule: RuleTag::Rcv,
                    label: ActionLabel::Recv { from: from.clone(), label: l.clone(), value: None },
                    branch: Some(l.clone()),
                    next: None,
                });
            }
        }
        Process::CkExt { from, branches, .. } => {
            for l in branches.keys() {
                out.steps.push(ConfigStep {
                    rule: RuleTag::CkRcv,
                    label: ActionLabel::Recv { from: from.clone(), label: l.clone(), value: None },
                    branch: Some(l.clone()),
                    next: None,
                });
            }
        }
        Process::End | Process::Var(_) | Process::Rec { .. } => {}
    }
    for (i, p) in c.history.0.iter().enumerate() {
        if let Some(name) = p.ck_name() {
            out.steps.push(ConfigStep {
                rule: RuleTag::RbP,
                label: ActionLabel::Roll(name.clone()),
                branch: None,
                next: Some(Configuration {
                    history: crate::kernel::CkSeq(c.history.0[..i].to_vec()),
                    active: p.clone(),
                }),
            });
        }
    }
    out
}

fn committed(to: &Participant, label: &Label, b: &OutBranch) -> Process {
    let mut branches = BTreeMap::new();
    branches.insert(label.clone(), b.clone());
    Process::Int { to: to.clone(), branches }
}

/// Completes a receive step: substitutes the value (when the branch binds
/// one) and pushes the choice onto the history if it was checkpointed.
/// Returns `None` when the configuration cannot receive this message —
/// wrong sender, unknown label, or a payload/binder presence mismatch.
pub fn apply_receive(
    c: &Configuration,
    from: &Participant,
    label: &Label,
    value: Option<&Value>,
) -> Option<Configuration> {
    let active = c.active.unfold_head();
    let (f, branches, push) = match &active {
        Process::Ext { from, branches } => (from, branches, false),
        Process::CkExt { from, branches, .. } => (from, branches, true),
        _ => return None,
    };
    if f != from {
        return None;
    }
    let b = branches.get(label)?;
    let next_active = match (&b.bind, value) {
        (Some((x, _)), Some(v)) => b.cont.subst_val(x, v),
        (None, None) => b.cont.clone(),
        _ => return None,
    };
    let mut history = c.history.clone();
    if push {
        history.0.push(active.clone());
    }
    Some(Configuration { history, active: next_active })
}

/// The checkpoint names a terminated configuration has crossed, or `None`
/// when the active process has not terminated (the mapping is undefined
/// then, which blocks rollbacks it would otherwise permit).
pub fn ck_names(c: &Configuration) -> Option<BTreeSet<CkName>> {
    if matches!(c.active.unfold_head(), Process::End) {
        Some(c.history.names().into_iter().collect())
    } else {
        None
    }
}

/// How receive substitution picks values during exploration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuePolicy {
    /// Substitute exactly what the sender evaluated.
    SenderEval,
    /// Substitute the canonical value of the declared binder sort,
    /// regardless of the transmitted value.
    Canonical,
    /// Substitute each listed value whose sort matches the binder, one
    /// successor per value; falls back to the canonical value when none
    /// matches.
    Enumerated(Vec<Value>),
}

/// Everything known about one fired communication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommInfo {
    pub from: Participant,
    pub to: Participant,
    pub label: Label,
    /// Value substituted at the receiver (per policy).
    pub value: Option<Value>,
    /// Value the sender evaluated.
    pub sent_value: Option<Value>,
    /// Sort the receiver declared for this branch's binder.
    pub binder_sort: Option<Sort>,
}

/// One step of a session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionStep {
    pub rule: RuleTag,
    pub label: ActionLabel,
    pub participants: Vec<Participant>,
    pub branch: Option<Label>,
    pub rollback: Option<CkName>,
    pub comm: Option<CommInfo>,
    pub next: Session,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionMoves {
    pub steps: Vec<SessionStep>,
    pub faults: Vec<(Participant, EvalFault)>,
}

/// Enumerates the moves of a session: first the per-participant commits,
/// then the communications (by sender, receiver, label), then the
/// rollbacks (by checkpoint name).
pub fn session_moves(s: &Session, policy: &ValuePolicy) -> SessionMoves {
    let mut out = SessionMoves::default();
    let mut committed_sends: Vec<(Participant, Participant, Label, OutBranch)> = Vec::new();

    for (p, c) in &s.0 {
        let moves = config_moves(c);
        for f in moves.faults {
            out.faults.push((p.clone(), f));
        }
        for step in moves.steps {
            match step.rule {
                RuleTag::Chc | RuleTag::CkChc => {
                    let mut next = s.clone();
                    next.0.insert(p.clone(), step.next.clone().expect("commit successor"));
                    out.steps.push(SessionStep {
                        rule: step.rule,
                        label: ActionLabel::Tau,
                        participants: vec![p.clone()],
                        branch: step.branch,
                        rollback: None,
                        comm: None,
                        next,
                    });
                }
                _ => {}
            }
        }
        if let Process::Int { to, branches } = c.active.unfold_head() {
            if branches.len() == 1 {
                let (l, b) = branches.into_iter().next().unwrap();
                committed_sends.push((p.clone(), to, l, b));
            }
        }
    }

    for (p, q, l, b) in committed_sends {
        let Some(qc) = s.0.get(&q) else { continue };
        if q == p {
            continue;
        }
        let sent_value = match b.payload.as_ref().map(|e| e.eval(&BTreeMap::new())).transpose() {
            Ok(v) => v,
            // Already reported as a fault above.
            Err(_) => continue,
        };
        let binder_sort = receive_binder_sort(qc, &p, &l);
        let candidates: Vec<Option<Value>> = match (policy, &binder_sort) {
            (_, None) => vec![None],
            (ValuePolicy::SenderEval, Some(_)) => vec![sent_value.clone()],
            (ValuePolicy::Canonical, Some(sort)) => vec![Some(sort.canonical_value())],
            (ValuePolicy::Enumerated(vs), Some(sort)) => {
                let matching: Vec<Option<Value>> = vs
                    .iter()
                    .filter(|v| &v.sort() == sort)
                    .map(|v| Some(v.clone()))
                    .collect();
                if matching.is_empty() {
                    vec![Some(sort.canonical_value())]
                } else {
                    matching
                }
            }
        };
        for value in candidates {
            let Some(next_q) = apply_receive(qc, &p, &l, value.as_ref()) else { continue };
            let mut next = s.clone();
            next.0.insert(
                p.clone(),
                Configuration {
                    history: s.0[&p].history.clone(),
                    active: b.cont.clone(),
                },
            );
            next.0.insert(q.clone(), next_q);
            out.steps.push(SessionStep {
                rule: RuleTag::Com,
                label: ActionLabel::Tau,
                participants: vec![p.clone(), q.clone()],
                branch: Some(l.clone()),
                rollback: None,
                comm: Some(CommInfo {
                    from: p.clone(),
                    to: q.clone(),
                    label: l.clone(),
                    value,
                    sent_value: sent_value.clone(),
                    binder_sort: binder_sort.clone(),
                }),
                next,
            });
        }
    }

    let mut names: BTreeSet<CkName> = BTreeSet::new();
    for c in s.0.values() {
        names.extend(c.history.names());
    }
    for name in names {
        if let Some(step) = rollback_step(s, &name) {
            out.steps.push(step);
        }
    }

    out
}

/// Steps only, discarding fault diagnostics.
pub fn session_steps(s: &Session, policy: &ValuePolicy) -> Vec<SessionStep> {
    session_moves(s, policy).steps
}

fn receive_binder_sort(c: &Configuration, from: &Participant, label: &Label) -> Option<Sort> {
    let (f, branches) = match c.active.unfold_head() {
        Process::Ext { from, branches } => (from, branches),
        Process::CkExt { from, branches, .. } => (from, branches),
        _ => return None,
    };
    if &f != from {
        return None;
    }
    branches.get(label).and_then(|b| b.bind.as_ref().map(|(_, s)| s.clone()))
}

/// The session rollback on a name, if enabled: every participant holding
/// the checkpoint rolls to it (the topmost occurrence), and every other
/// participant must have terminated without holding it.
pub fn rollback_step(s: &Session, name: &CkName) -> Option<SessionStep> {
    let mut rollers: Vec<(Participant, Configuration)> = Vec::new();
    for (p, c) in &s.0 {
        let idx = c.history.0.iter().rposition(|q| q.ck_name() == Some(name));
        match idx {
            Some(i) => rollers.push((
                p.clone(),
                Configuration {
                    history: crate::kernel::CkSeq(c.history.0[..i].to_vec()),
                    active: c.history.0[i].clone(),
                },
            )),
            None => match ck_names(c) {
                // With the name absent from the history, membership cannot
                // fail; termination is the binding requirement.
                Some(_) => {}
                None => return None,
            },
        }
    }
    if rollers.is_empty() {
        return None;
    }
    let mut next = s.clone();
    let mut participants = Vec::new();
    for (p, c) in rollers {
        participants.push(p.clone());
        next.0.insert(p, c);
    }
    Some(SessionStep {
        rule: RuleTag::RbM,
        label: ActionLabel::Roll(name.clone()),
        participants,
        branch: None,
        rollback: Some(name.clone()),
        comm: None,
        next,
    })
}

/// Drops terminated participants with empty histories — the neutral
/// elements of parallel composition.
pub fn normalize(s: &Session) -> Session {
    Session(
        s.0.iter()
            .filter(|(_, c)| {
                !(c.history.is_empty() && matches!(c.active.unfold_head(), Process::End))
            })
            .map(|(p, c)| (p.clone(), c.clone()))
            .collect(),
    )
}

/// Structural equivalence of sessions.
pub fn session_equiv(a: &Session, b: &Session) -> bool {
    normalize(a) == normalize(b)
}

/// One step of a network: some session moved, the rest stand still.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkStep {
    pub session_index: usize,
    pub step: SessionStep,
    pub next: Network,
}

pub fn network_steps(n: &Network, policy: &ValuePolicy) -> Vec<NetworkStep> {
    let mut out = Vec::new();
    for (i, s) in n.0.iter().enumerate() {
        for step in session_steps(s, policy) {
            let mut next = n.clone();
            next.0[i] = step.next.clone();
            out.push(NetworkStep { session_index: i, step, next });
        }
    }
    out
}

/// The global-type counterpart of a session step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GRule {
    CkChc,
    Com(Label),
    Rb(CkName),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalStep {
    pub rule: GRule,
    pub next: GlobalPair,
}

/// Enumerates the reductions of a tracked pair: committing a checkpointed
/// communication pushes it and leaves the full uncheckpointed choice
/// active, an uncheckpointed communication picks a branch, and a rollback
/// pops to any element of the history.
pub fn global_steps(gp: &GlobalPair) -> Vec<GlobalStep> {
    let mut out = Vec::new();
    let head = gp.active.unfold_head();
    match &head {
        GlobalType::CkComm { from, to, branches, .. } => {
            let mut history = gp.history.clone();
            history.push(head.clone());
            out.push(GlobalStep {
                rule: GRule::CkChc,
                next: GlobalPair {
                    history,
                    active: GlobalType::Comm {
                        from: from.clone(),
                        to: to.clone(),
                        branches: branches.clone(),
                    },
                },
            });
        }
        GlobalType::Comm { branches, .. } => {
            for (l, b) in branches {
                out.push(GlobalStep {
                    rule: GRule::Com(l.clone()),
                    next: GlobalPair { history: gp.history.clone(), active: b.cont.clone() },
                });
            }
        }
        _ => {}
    }
    for (i, g) in gp.history.iter().enumerate() {
        if let Some(name) = g.ck_name() {
            out.push(GlobalStep {
                rule: GRule::Rb(name.clone()),
                next: GlobalPair { history: gp.history[..i].to_vec(), active: g.clone() },
            });
        }
    }
    out
}

/// Tracks a session step on the global side: a plain commit leaves the
/// pair unchanged, a checkpointed commit pushes, a communication follows
/// the branch, and a rollback pops to the named checkpoint.
pub fn track_pair(gp: &GlobalPair, step: &SessionStep) -> Option<GlobalPair> {
    match step.rule {
        RuleTag::Chc => Some(gp.clone()),
        RuleTag::CkChc => {
            let head = gp.active.unfold_head();
            match &head {
                GlobalType::CkComm { from, to, branches, .. } => {
                    let mut history = gp.history.clone();
                    history.push(head.clone());
                    Some(GlobalPair {
                        history,
                        active: GlobalType::Comm {
                            from: from.clone(),
                            to: to.clone(),
                            branches: branches.clone(),
                        },
                    })
                }
                _ => None,
            }
        }
        RuleTag::Com => {
            let label = step.branch.as_ref()?;
            match gp.active.unfold_head() {
                GlobalType::Comm { branches, .. } => branches.get(label).map(|b| GlobalPair {
                    history: gp.history.clone(),
                    active: b.cont.clone(),
                }),
                _ => None,
            }
        }
        RuleTag::RbM => {
            let name = step.rollback.as_ref()?;
            let i = gp.history.iter().rposition(|g| g.ck_name() == Some(name))?;
            Some(GlobalPair {
                history: gp.history[..i].to_vec(),
                active: gp.history[i].clone(),
            })
        }
        _ => None,
    }
}

/// Finds the enumerated step matching a script directive.
pub fn find_directive_step<'a>(
    steps: &'a [SessionStep],
    d: &crate::parser::Directive,
) -> Option<&'a SessionStep> {
    use crate::parser::Directive;
    steps.iter().find(|s| match d {
        Directive::Choose { who, label } => {
            matches!(s.rule, RuleTag::Chc | RuleTag::CkChc)
                && s.participants == [who.clone()]
                && s.branch.as_ref() == Some(label)
        }
        Directive::Comm { from, to, label } => {
            s.rule == RuleTag::Com
                && s.participants == [from.clone(), to.clone()]
                && s.branch.as_ref() == Some(label)
        }
        Directive::Roll(name) => s.rule == RuleTag::RbM && s.rollback.as_ref() == Some(name),
    })
}

/// A short human account of what a step did.
pub fn describe_step(step: &SessionStep) -> String {
    match step.rule {
        RuleTag::Chc | RuleTag::CkChc => {
            format!("choose {}", step.branch.as_ref().expect("commit branch"))
        }
        RuleTag::Com => {
            let c = step.comm.as_ref().expect("comm info");
            match &c.value {
                Some(v) => format!("{} -> {} {}({v})", c.from, c.to, c.label),
                None => format!("{} -> {} {}", c.from, c.to, c.label),
            }
        }
        RuleTag::RbM => format!("roll {}", step.rollback.as_ref().expect("rollback name")),
        _ => step.label.to_string(),
    }
}

/// Renders one trace line: the step number, rule, description,
/// participants, and the normalized successor.
pub fn render_step(n: usize, step: &SessionStep) -> String {
    let participants: Vec<String> =
        step.participants.iter().map(|p| p.as_str().to_string()).collect();
    format!(
        "step {n}: [{}] {} @ {} |- {}",
        step.rule,
        describe_step(step),
        participants.join(","),
        print_session(&normalize(&step.next))
    )
}
