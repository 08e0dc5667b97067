//! Type synthesis for processes and admission of sessions against tracked
//! global types.
//!
//! Process typing is structural: external choices synthesize intersections,
//! internal choices synthesize unions, checkpoints carry over with their
//! name, recursion synthesizes an equi-recursive type with deterministic
//! fresh variables. A session is admitted against a tracked pair when every
//! participant's configuration type agrees with it: history entries are
//! pointwise subtypes of the projected history, and the active type lines
//! up with the active global type according to its shape (`end`, union, or
//! intersection — the latter allowing the one-step lag of a receiver whose
//! checkpoint is not yet in its history).

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{
    validate_session_type, CkSeq, ConfigType, Configuration, EvalError, ExprVar, GlobalPair,
    Label, Network, Participant, ProcVar, Process, Session, SessionType, Sort, TBranch, TypeSeq,
    TypeVar,
};
use crate::parser::{print_config_type, print_global, print_pair, print_stype};
use crate::projection::{participants_pair, project, Proj};
use crate::subtyping::is_subtype;

/// Typing environment: sorts for expression variables, session types for
/// process variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    pub exprs: BTreeMap<ExprVar, Sort>,
    pub procs: BTreeMap<ProcVar, SessionType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("expression in branch `{label}`: {source}")]
    Expr {
        label: Label,
        #[source]
        source: EvalError,
    },
    #[error("unbound process variable `{0}`")]
    UnboundProcVar(ProcVar),
    #[error("history element {index}: {source}")]
    History {
        index: usize,
        #[source]
        source: Box<TypeError>,
    },
    #[error("synthesized type is not well formed: {0}")]
    Invalid(String),
    #[error("network has {sessions} sessions but {pairs} tracked pairs")]
    PairCount { sessions: usize, pairs: usize },
}

/// Synthesizes the session type of a process.
pub fn type_process(env: &Env, p: &Process) -> Result<SessionType, TypeError> {
    let mut fresh = 0usize;
    let t = synth(env, p, &mut fresh)?;
    let violations = validate_session_type(&t);
    if violations.is_empty() {
        Ok(t)
    } else {
        Err(TypeError::Invalid(
            violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "),
        ))
    }
}

fn fresh_var(fresh: &mut usize) -> TypeVar {
    let name = if *fresh == 0 { "t".to_string() } else { format!("t{fresh}") };
    *fresh += 1;
    TypeVar::new(name)
}

fn synth(env: &Env, p: &Process, fresh: &mut usize) -> Result<SessionType, TypeError> {
    match p {
        Process::End => Ok(SessionType::End),
        Process::Var(x) => {
            env.procs.get(x).cloned().ok_or_else(|| TypeError::UnboundProcVar(x.clone()))
        }
        Process::Rec { var, body } => {
            let t = fresh_var(fresh);
            let mut inner = env.clone();
            inner.procs.insert(var.clone(), SessionType::Var(t.clone()));
            let body_ty = synth(&inner, body, fresh)?;
            Ok(SessionType::Rec { var: t, body: Box::new(body_ty) })
        }
        Process::Ext { from, branches } | Process::CkExt { from, branches, .. } => {
            let mut out = BTreeMap::new();
            for (l, b) in branches {
                let mut inner = env.clone();
                let sort = b.bind.as_ref().map(|(x, s)| {
                    inner.exprs.insert(x.clone(), s.clone());
                    s.clone()
                });
                let cont = synth(&inner, &b.cont, fresh)?;
                out.insert(l.clone(), TBranch { sort, cont });
            }
            let plain = SessionType::Inter { from: from.clone(), branches: out };
            Ok(match p.ck_name() {
                Some(name) => match plain {
                    SessionType::Inter { from, branches } => {
                        SessionType::CkInter { name: name.clone(), from, branches }
                    }
                    _ => unreachable!(),
                },
                None => plain,
            })
        }
        Process::Int { to, branches } | Process::CkInt { to, branches, .. } => {
            let mut out = BTreeMap::new();
            for (l, b) in branches {
                let sort = match &b.payload {
                    Some(e) => Some(
                        e.sort(&env.exprs)
                            .map_err(|source| TypeError::Expr { label: l.clone(), source })?,
                    ),
                    None => None,
                };
                let cont = synth(env, &b.cont, fresh)?;
                out.insert(l.clone(), TBranch { sort, cont });
            }
            let plain = SessionType::Union { to: to.clone(), branches: out };
            Ok(match p.ck_name() {
                Some(name) => match plain {
                    SessionType::Union { to, branches } => {
                        SessionType::CkUnion { name: name.clone(), to, branches }
                    }
                    _ => unreachable!(),
                },
                None => plain,
            })
        }
    }
}

/// Types every element of a checkpointed sequence (under the empty
/// environment, as sequence elements are closed).
pub fn type_ckseq(r: &CkSeq) -> Result<TypeSeq, TypeError> {
    let env = Env::default();
    let mut out = Vec::new();
    for (index, p) in r.0.iter().enumerate() {
        let t = type_process(&env, p)
            .map_err(|e| TypeError::History { index, source: Box::new(e) })?;
        out.push(t);
    }
    Ok(TypeSeq(out))
}

/// Types a configuration: the history pointwise plus the active process.
pub fn type_configuration(c: &Configuration) -> Result<ConfigType, TypeError> {
    let history = type_ckseq(&c.history)?;
    let active = type_process(&Env::default(), &c.active)?;
    Ok(ConfigType { history, active })
}

/// One agreement condition, with a human-readable account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub ok: bool,
    pub detail: String,
}

impl ConditionCheck {
    fn pass(condition: &str, detail: impl Into<String>) -> Self {
        ConditionCheck { condition: condition.into(), ok: true, detail: detail.into() }
    }

    fn fail(condition: &str, detail: impl Into<String>) -> Self {
        ConditionCheck { condition: condition.into(), ok: false, detail: detail.into() }
    }
}

/// Result of checking that a configuration type agrees with a tracked pair
/// at a participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Agreement {
    pub ok: bool,
    pub conditions: Vec<ConditionCheck>,
}

fn proj_or(g: &crate::kernel::GlobalType, p: &Participant) -> Result<SessionType, String> {
    match project(g, p) {
        Proj::Defined(t) => Ok(t),
        Proj::Undefined { reason, path } => Err(format!(
            "projection of {} onto {p} is undefined at {path}: {reason}",
            print_global(g)
        )),
    }
}

/// Checks the four agreement conditions of a configuration type against a
/// tracked pair at a participant.
pub fn agrees(ct: &ConfigType, p: &Participant, gp: &GlobalPair) -> Agreement {
    let n = ct.history.0.len();
    let m = gp.history.len();
    let mut conditions = Vec::new();

    // Condition 1: the type history is pointwise below the projected
    // tracked history.
    let c1 = 'c1: {
        if n > m {
            break 'c1 ConditionCheck::fail(
                "agreement-history",
                format!("participant history has length {n}, tracked history only {m}"),
            );
        }
        for i in 0..n {
            let gi = match proj_or(&gp.history[i], p) {
                Ok(t) => t,
                Err(e) => break 'c1 ConditionCheck::fail("agreement-history", e),
            };
            let ti = &ct.history.0[i];
            if !is_subtype(ti, &gi) {
                break 'c1 ConditionCheck::fail(
                    "agreement-history",
                    format!(
                        "history entry {}: {} is not a subtype of {}",
                        i + 1,
                        print_stype(ti),
                        print_stype(&gi)
                    ),
                );
            }
        }
        ConditionCheck::pass("agreement-history", format!("{n} entries aligned"))
    };
    conditions.push(c1);

    let head = ct.active.unfold_head();
    let is_end = matches!(head, SessionType::End);
    let is_union = matches!(head, SessionType::Union { .. } | SessionType::CkUnion { .. });
    let is_inter = matches!(head, SessionType::Inter { .. } | SessionType::CkInter { .. });

    // Condition 2: a finished participant stays finished, also across every
    // rollback target it never reached.
    let c2 = 'c2: {
        if !is_end {
            break 'c2 ConditionCheck::pass("agreement-end", "active type is not end");
        }
        if n > m {
            break 'c2 ConditionCheck::fail(
                "agreement-end",
                format!("participant history has length {n}, tracked history only {m}"),
            );
        }
        match proj_or(&gp.active, p) {
            Ok(t) if !t.is_end() => {
                break 'c2 ConditionCheck::fail(
                    "agreement-end",
                    format!(
                        "active process finished but the active global type projects to {}",
                        print_stype(&t)
                    ),
                )
            }
            Err(e) => break 'c2 ConditionCheck::fail("agreement-end", e),
            Ok(_) => {}
        }
        for (i, g) in gp.history.iter().enumerate().skip(n) {
            match proj_or(g, p) {
                Ok(t) if !t.is_end() => {
                    break 'c2 ConditionCheck::fail(
                        "agreement-end",
                        format!(
                            "active process finished but tracked entry {} projects to {}",
                            i + 1,
                            print_stype(&t)
                        ),
                    )
                }
                Err(e) => break 'c2 ConditionCheck::fail("agreement-end", e),
                Ok(_) => {}
            }
        }
        ConditionCheck::pass("agreement-end", "all remaining projections are end")
    };
    conditions.push(c2);

    // Condition 3: an output participant is fully caught up.
    let c3 = 'c3: {
        if !is_union {
            break 'c3 ConditionCheck::pass("agreement-union", "active type is not a union");
        }
        if n != m {
            break 'c3 ConditionCheck::fail(
                "agreement-union",
                format!("output participant must have full history: {n} != {m}"),
            );
        }
        let g = match proj_or(&gp.active, p) {
            Ok(t) => t,
            Err(e) => break 'c3 ConditionCheck::fail("agreement-union", e),
        };
        if is_subtype(&ct.active, &g) {
            ConditionCheck::pass("agreement-union", "active type below active projection")
        } else {
            ConditionCheck::fail(
                "agreement-union",
                format!(
                    "{} is not a subtype of {}",
                    print_stype(&ct.active),
                    print_stype(&g)
                ),
            )
        }
    };
    conditions.push(c3);

    // Condition 4: an input participant is either fully caught up, or lags
    // one step behind a committed sender, in which case its own checkpoint
    // is still on its active type rather than in its history.
    let c4 = 'c4: {
        if !is_inter {
            break 'c4 ConditionCheck::pass(
                "agreement-intersection",
                "active type is not an intersection",
            );
        }
        if n == m {
            let g = match proj_or(&gp.active, p) {
                Ok(t) => t,
                Err(e) => break 'c4 ConditionCheck::fail("agreement-intersection", e),
            };
            if is_subtype(&ct.active, &g) {
                break 'c4 ConditionCheck::pass(
                    "agreement-intersection",
                    "active type below active projection",
                );
            }
            break 'c4 ConditionCheck::fail(
                "agreement-intersection",
                format!(
                    "{} is not a subtype of {}",
                    print_stype(&ct.active),
                    print_stype(&g)
                ),
            );
        }
        if n + 1 == m {
            let lagging = 'lag: {
                let stripped = match &head {
                    SessionType::CkInter { .. } => head.strip_ck(),
                    _ => break 'lag Err("active type is not checkpointed".to_string()),
                };
                let gm = match proj_or(&gp.history[m - 1], p) {
                    Ok(t) => t,
                    Err(e) => break 'lag Err(e),
                };
                if !is_subtype(&ct.active, &gm) {
                    break 'lag Err(format!(
                        "{} is not a subtype of the last tracked projection {}",
                        print_stype(&ct.active),
                        print_stype(&gm)
                    ));
                }
                let g = match proj_or(&gp.active, p) {
                    Ok(t) => t,
                    Err(e) => break 'lag Err(e),
                };
                if !is_subtype(&stripped, &g) {
                    break 'lag Err(format!(
                        "{} is not a subtype of {}",
                        print_stype(&stripped),
                        print_stype(&g)
                    ));
                }
                Ok(())
            };
            break 'c4 match lagging {
                Ok(()) => ConditionCheck::pass(
                    "agreement-intersection",
                    "lagging receiver aligned with last tracked entry",
                ),
                Err(e) => ConditionCheck::fail("agreement-intersection", e),
            };
        }
        ConditionCheck::fail(
            "agreement-intersection",
            format!("input participant history may lag at most one entry: {n} vs {m}"),
        )
    };
    conditions.push(c4);

    Agreement { ok: conditions.iter().all(|c| c.ok), conditions }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParticipantReport {
    pub participant: String,
    pub config_type: Option<String>,
    pub error: Option<String>,
    pub conditions: Vec<ConditionCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub condition: String,
    pub participant: Option<String>,
    pub locus: String,
}

/// Admission report for one session against one tracked pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypingReport {
    pub outcome: Outcome,
    pub pair: String,
    pub participants: Vec<ParticipantReport>,
    pub failures: Vec<Failure>,
}

impl TypingReport {
    pub fn accepted(&self) -> bool {
        self.outcome == Outcome::Accepted
    }
}

/// Types a session against a tracked pair: every configuration must type,
/// every configuration type must agree, the tracked history must be as long
/// as the longest participant history, and all participants of the pair
/// must be present.
pub fn type_session(s: &Session, gp: &GlobalPair) -> TypingReport {
    let mut participants = Vec::new();
    let mut failures = Vec::new();
    let mut lens = Vec::new();

    for (p, c) in &s.0 {
        match type_configuration(c) {
            Ok(ct) => {
                lens.push(ct.history.0.len());
                let agreement = agrees(&ct, p, gp);
                for cond in &agreement.conditions {
                    if !cond.ok {
                        failures.push(Failure {
                            condition: cond.condition.clone(),
                            participant: Some(p.as_str().into()),
                            locus: cond.detail.clone(),
                        });
                    }
                }
                participants.push(ParticipantReport {
                    participant: p.as_str().into(),
                    config_type: Some(print_config_type(&ct)),
                    error: None,
                    conditions: agreement.conditions,
                });
            }
            Err(e) => {
                failures.push(Failure {
                    condition: "process-typing".into(),
                    participant: Some(p.as_str().into()),
                    locus: e.to_string(),
                });
                participants.push(ParticipantReport {
                    participant: p.as_str().into(),
                    config_type: None,
                    error: Some(e.to_string()),
                    conditions: Vec::new(),
                });
            }
        }
    }

    let max_len = lens.iter().copied().max().unwrap_or(0);
    if gp.history.len() != max_len {
        failures.push(Failure {
            condition: "history-length".into(),
            participant: None,
            locus: format!(
                "tracked history has length {} but the longest participant history is {max_len}",
                gp.history.len()
            ),
        });
    }

    let missing: Vec<String> = participants_pair(gp)
        .into_iter()
        .filter(|p| !s.0.contains_key(p))
        .map(|p| p.as_str().to_string())
        .collect();
    if !missing.is_empty() {
        failures.push(Failure {
            condition: "participants".into(),
            participant: None,
            locus: format!("missing participants: {}", missing.join(", ")),
        });
    }

    TypingReport {
        outcome: if failures.is_empty() { Outcome::Accepted } else { Outcome::Rejected },
        pair: print_pair(gp),
        participants,
        failures,
    }
}

/// Admission report for a whole network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetworkReport {
    pub outcome: Outcome,
    pub sessions: Vec<TypingReport>,
}

/// Types each session of a network against its tracked pair, positionally.
pub fn type_network(n: &Network, pairs: &[GlobalPair]) -> Result<NetworkReport, TypeError> {
    if n.0.len() != pairs.len() {
        return Err(TypeError::PairCount { sessions: n.0.len(), pairs: pairs.len() });
    }
    let sessions: Vec<TypingReport> =
        n.0.iter().zip(pairs).map(|(s, gp)| type_session(s, gp)).collect();
    let outcome = if sessions.iter().all(|r| r.accepted()) {
        Outcome::Accepted
    } else {
        Outcome::Rejected
    };
    Ok(NetworkReport { outcome, sessions })
}
