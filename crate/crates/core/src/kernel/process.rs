//! Processes, checkpoint histories, configurations, sessions, and networks.

use std::collections::{BTreeMap, BTreeSet};

use super::{CkName, Expr, ExprVar, Label, Participant, ProcVar, Sort, Value};

/// An external-choice branch: optional typed binder, then a continuation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InBranch {
    pub bind: Option<(ExprVar, Sort)>,
    pub cont: Process,
}

/// An internal-choice branch: optional payload expression, then a
/// continuation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutBranch {
    pub payload: Option<Expr>,
    pub cont: Process,
}

/// Process terms. Checkpoints wrap exactly one choice, so the checkpointed
/// forms are constructors of their own. Branch maps are keyed by label,
/// which keeps labels distinct by construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    /// External choice: receive one of the offered labels from `from`.
    Ext {
        from: Participant,
        branches: BTreeMap<Label, InBranch>,
    },
    /// Internal choice: send one of the labels to `to`. A singleton is a
    /// committed output.
    Int {
        to: Participant,
        branches: BTreeMap<Label, OutBranch>,
    },
    /// Checkpointed external choice.
    CkExt {
        name: CkName,
        from: Participant,
        branches: BTreeMap<Label, InBranch>,
    },
    /// Checkpointed internal choice.
    CkInt {
        name: CkName,
        to: Participant,
        branches: BTreeMap<Label, OutBranch>,
    },
    Rec { var: ProcVar, body: Box<Process> },
    Var(ProcVar),
    /// Inaction.
    End,
}

impl Process {
    /// The checkpoint name if the top constructor is checkpointed.
    pub fn ck_name(&self) -> Option<&CkName> {
        match self {
            Process::CkExt { name, .. } | Process::CkInt { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn free_proc_vars(&self) -> BTreeSet<ProcVar> {
        fn go(p: &Process, bound: &mut Vec<ProcVar>, acc: &mut BTreeSet<ProcVar>) {
            match p {
                Process::Ext { branches, .. } | Process::CkExt { branches, .. } => {
                    for b in branches.values() {
                        go(&b.cont, bound, acc);
                    }
                }
                Process::Int { branches, .. } | Process::CkInt { branches, .. } => {
                    for b in branches.values() {
                        go(&b.cont, bound, acc);
                    }
                }
                Process::Rec { var, body } => {
                    bound.push(var.clone());
                    go(body, bound, acc);
                    bound.pop();
                }
                Process::Var(x) => {
                    if !bound.contains(x) {
                        acc.insert(x.clone());
                    }
                }
                Process::End => {}
            }
        }
        let mut acc = BTreeSet::new();
        go(self, &mut Vec::new(), &mut acc);
        acc
    }

    /// Substitutes a value for a free expression variable in payload
    /// expressions; input binders shadow.
    pub fn subst_val(&self, x: &ExprVar, v: &Value) -> Process {
        match self {
            Process::Ext { from, branches } => Process::Ext {
                from: from.clone(),
                branches: subst_in_branches(branches, x, v),
            },
            Process::CkExt { name, from, branches } => Process::CkExt {
                name: name.clone(),
                from: from.clone(),
                branches: subst_in_branches(branches, x, v),
            },
            Process::Int { to, branches } => Process::Int {
                to: to.clone(),
                branches: subst_out_branches(branches, x, v),
            },
            Process::CkInt { name, to, branches } => Process::CkInt {
                name: name.clone(),
                to: to.clone(),
                branches: subst_out_branches(branches, x, v),
            },
            Process::Rec { var, body } => Process::Rec {
                var: var.clone(),
                body: Box::new(body.subst_val(x, v)),
            },
            Process::Var(_) | Process::End => self.clone(),
        }
    }

    /// Capture-avoiding substitution of a process for a free recursion
    /// variable.
    pub fn subst_proc(&self, x: &ProcVar, repl: &Process) -> Process {
        match self {
            Process::Var(y) => {
                if y == x {
                    repl.clone()
                } else {
                    self.clone()
                }
            }
            Process::End => Process::End,
            Process::Ext { from, branches } => Process::Ext {
                from: from.clone(),
                branches: branches
                    .iter()
                    .map(|(l, b)| {
                        (l.clone(), InBranch { bind: b.bind.clone(), cont: b.cont.subst_proc(x, repl) })
                    })
                    .collect(),
            },
            Process::CkExt { name, from, branches } => Process::CkExt {
                name: name.clone(),
                from: from.clone(),
                branches: branches
                    .iter()
                    .map(|(l, b)| {
                        (l.clone(), InBranch { bind: b.bind.clone(), cont: b.cont.subst_proc(x, repl) })
                    })
                    .collect(),
            },
            Process::Int { to, branches } => Process::Int {
                to: to.clone(),
                branches: branches
                    .iter()
                    .map(|(l, b)| {
                        (l.clone(), OutBranch { payload: b.payload.clone(), cont: b.cont.subst_proc(x, repl) })
                    })
                    .collect(),
            },
            Process::CkInt { name, to, branches } => Process::CkInt {
                name: name.clone(),
                to: to.clone(),
                branches: branches
                    .iter()
                    .map(|(l, b)| {
                        (l.clone(), OutBranch { payload: b.payload.clone(), cont: b.cont.subst_proc(x, repl) })
                    })
                    .collect(),
            },
            Process::Rec { var, body } => {
                if var == x {
                    self.clone()
                } else {
                    let free = repl.free_proc_vars();
                    if free.contains(var) {
                        let fresh = fresh_proc_var(var, &free, body);
                        let renamed = body.subst_proc(var, &Process::Var(fresh.clone()));
                        Process::Rec {
                            var: fresh,
                            body: Box::new(renamed.subst_proc(x, repl)),
                        }
                    } else {
                        Process::Rec {
                            var: var.clone(),
                            body: Box::new(body.subst_proc(x, repl)),
                        }
                    }
                }
            }
        }
    }

    /// Unfolds top-level recursion until a non-`Rec` head. Guarded terms
    /// stabilize; a degenerate `mu X. X` is returned as-is.
    pub fn unfold_head(&self) -> Process {
        let mut cur = self.clone();
        for _ in 0..1024 {
            match &cur {
                Process::Rec { var, body } => {
                    let next = body.subst_proc(var, &cur);
                    if next == cur {
                        return cur;
                    }
                    cur = next;
                }
                _ => return cur,
            }
        }
        cur
    }
}

fn subst_in_branches(
    branches: &BTreeMap<Label, InBranch>,
    x: &ExprVar,
    v: &Value,
) -> BTreeMap<Label, InBranch> {
    branches
        .iter()
        .map(|(l, b)| {
            let shadowed = matches!(&b.bind, Some((y, _)) if y == x);
            let cont = if shadowed { b.cont.clone() } else { b.cont.subst_val(x, v) };
            (l.clone(), InBranch { bind: b.bind.clone(), cont })
        })
        .collect()
}

fn subst_out_branches(
    branches: &BTreeMap<Label, OutBranch>,
    x: &ExprVar,
    v: &Value,
) -> BTreeMap<Label, OutBranch> {
    branches
        .iter()
        .map(|(l, b)| {
            (
                l.clone(),
                OutBranch {
                    payload: b.payload.as_ref().map(|e| e.subst(x, v)),
                    cont: b.cont.subst_val(x, v),
                },
            )
        })
        .collect()
}

fn fresh_proc_var(base: &ProcVar, avoid: &BTreeSet<ProcVar>, body: &Process) -> ProcVar {
    let taken = body.free_proc_vars();
    for i in 1.. {
        let cand = ProcVar::new(format!("{}_{i}", base.as_str()));
        if !avoid.contains(&cand) && !taken.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// A checkpoint history: the sequence of checkpointed processes recorded so
/// far, oldest first. Elements are expected to be checkpointed choices;
/// `validate_configuration` reports offenders.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CkSeq(pub Vec<Process>);

impl CkSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Names of the checkpointed elements, in history order.
    pub fn names(&self) -> Vec<CkName> {
        self.0.iter().filter_map(|p| p.ck_name().cloned()).collect()
    }
}

/// A configuration pairs a checkpoint history with the active process.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub history: CkSeq,
    pub active: Process,
}

impl Configuration {
    pub fn initial(active: Process) -> Self {
        Configuration { history: CkSeq::default(), active }
    }
}

/// A session: a finite map from participants to configurations.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Session(pub BTreeMap<Participant, Configuration>);

impl Session {
    pub fn get(&self, p: &Participant) -> Option<&Configuration> {
        self.0.get(p)
    }

    pub fn participants(&self) -> impl Iterator<Item = &Participant> {
        self.0.keys()
    }
}

/// A network: parallel composition of sessions.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Network(pub Vec<Session>);
