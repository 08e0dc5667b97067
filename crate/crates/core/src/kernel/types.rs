//! Global types, session types, and the checkpointed pairs that type
//! configurations and sessions.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use super::{CkName, Label, Participant, Sort, TypeVar};

/// A global-type branch: optional payload sort, then a continuation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GBranch {
    pub sort: Option<Sort>,
    pub cont: GlobalType,
}

/// Single-threaded global types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GlobalType {
    Comm {
        from: Participant,
        to: Participant,
        branches: BTreeMap<Label, GBranch>,
    },
    CkComm {
        name: CkName,
        from: Participant,
        to: Participant,
        branches: BTreeMap<Label, GBranch>,
    },
    Rec { var: TypeVar, body: Box<GlobalType> },
    Var(TypeVar),
    End,
}

impl GlobalType {
    pub fn ck_name(&self) -> Option<&CkName> {
        match self {
            GlobalType::CkComm { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn free_type_vars(&self) -> BTreeSet<TypeVar> {
        fn go(g: &GlobalType, bound: &mut Vec<TypeVar>, acc: &mut BTreeSet<TypeVar>) {
            match g {
                GlobalType::Comm { branches, .. } | GlobalType::CkComm { branches, .. } => {
                    for b in branches.values() {
                        go(&b.cont, bound, acc);
                    }
                }
                GlobalType::Rec { var, body } => {
                    bound.push(var.clone());
                    go(body, bound, acc);
                    bound.pop();
                }
                GlobalType::Var(t) => {
                    if !bound.contains(t) {
                        acc.insert(t.clone());
                    }
                }
                GlobalType::End => {}
            }
        }
        let mut acc = BTreeSet::new();
        go(self, &mut Vec::new(), &mut acc);
        acc
    }

    /// Capture-avoiding substitution of a global type for a free variable.
    pub fn subst(&self, t: &TypeVar, repl: &GlobalType) -> GlobalType {
        match self {
            GlobalType::Var(u) => {
                if u == t {
                    repl.clone()
                } else {
                    self.clone()
                }
            }
            GlobalType::End => GlobalType::End,
            GlobalType::Comm { from, to, branches } => GlobalType::Comm {
                from: from.clone(),
                to: to.clone(),
                branches: subst_gbranches(branches, t, repl),
            },
            GlobalType::CkComm { name, from, to, branches } => GlobalType::CkComm {
                name: name.clone(),
                from: from.clone(),
                to: to.clone(),
                branches: subst_gbranches(branches, t, repl),
            },
            GlobalType::Rec { var, body } => {
                if var == t {
                    self.clone()
                } else {
                    let free = repl.free_type_vars();
                    if free.contains(var) {
                        let fresh = fresh_type_var(var, &free, &body.free_type_vars());
                        let renamed = body.subst(var, &GlobalType::Var(fresh.clone()));
                        GlobalType::Rec { var: fresh, body: Box::new(renamed.subst(t, repl)) }
                    } else {
                        GlobalType::Rec { var: var.clone(), body: Box::new(body.subst(t, repl)) }
                    }
                }
            }
        }
    }

    /// One unfolding step: `mu t. G` becomes `G[mu t. G / t]`; identity on
    /// other heads.
    pub fn unfold(&self) -> GlobalType {
        match self {
            GlobalType::Rec { var, body } => body.subst(var, self),
            _ => self.clone(),
        }
    }

    /// Unfolds until the head is not `Rec`. Guarded terms stabilize; a
    /// degenerate `mu t. t` is returned as-is.
    pub fn unfold_head(&self) -> GlobalType {
        let mut cur = self.clone();
        for _ in 0..1024 {
            match &cur {
                GlobalType::Rec { .. } => {
                    let next = cur.unfold();
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

fn subst_gbranches(
    branches: &BTreeMap<Label, GBranch>,
    t: &TypeVar,
    repl: &GlobalType,
) -> BTreeMap<Label, GBranch> {
    branches
        .iter()
        .map(|(l, b)| (l.clone(), GBranch { sort: b.sort, cont: b.cont.subst(t, repl) }))
        .collect()
}

fn fresh_type_var(base: &TypeVar, avoid: &BTreeSet<TypeVar>, taken: &BTreeSet<TypeVar>) -> TypeVar {
    for i in 1.. {
        let cand = TypeVar::new(format!("{}_{i}", base.as_str()));
        if !avoid.contains(&cand) && !taken.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// A checkpointed global pair: the global-type history (all checkpointed,
/// distinct names) and the active global type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalPair {
    pub history: Vec<GlobalType>,
    pub active: GlobalType,
}

impl GlobalPair {
    pub fn initial(active: GlobalType) -> Self {
        GlobalPair { history: Vec::new(), active }
    }
}

/// A session-type branch: optional payload sort, then a continuation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TBranch {
    pub sort: Option<Sort>,
    pub cont: SessionType,
}

/// Local session types: intersections of inputs, unions of outputs, their
/// checkpointed forms, recursion, and end.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SessionType {
    Inter {
        from: Participant,
        branches: BTreeMap<Label, TBranch>,
    },
    Union {
        to: Participant,
        branches: BTreeMap<Label, TBranch>,
    },
    CkInter {
        name: CkName,
        from: Participant,
        branches: BTreeMap<Label, TBranch>,
    },
    CkUnion {
        name: CkName,
        to: Participant,
        branches: BTreeMap<Label, TBranch>,
    },
    Rec { var: TypeVar, body: Box<SessionType> },
    Var(TypeVar),
    End,
}

impl SessionType {
    pub fn ck_name(&self) -> Option<&CkName> {
        match self {
            SessionType::CkInter { name, .. } | SessionType::CkUnion { name, .. } => Some(name),
            _ => None,
        }
    }

    /// Strips one checkpoint layer, if any.
    pub fn strip_ck(&self) -> SessionType {
        match self {
            SessionType::CkInter { from, branches, .. } => {
                SessionType::Inter { from: from.clone(), branches: branches.clone() }
            }
            SessionType::CkUnion { to, branches, .. } => {
                SessionType::Union { to: to.clone(), branches: branches.clone() }
            }
            _ => self.clone(),
        }
    }

    pub fn free_type_vars(&self) -> BTreeSet<TypeVar> {
        fn go(t: &SessionType, bound: &mut Vec<TypeVar>, acc: &mut BTreeSet<TypeVar>) {
            match t {
                SessionType::Inter { branches, .. }
                | SessionType::Union { branches, .. }
                | SessionType::CkInter { branches, .. }
                | SessionType::CkUnion { branches, .. } => {
                    for b in branches.values() {
                        go(&b.cont, bound, acc);
                    }
                }
                SessionType::Rec { var, body } => {
                    bound.push(var.clone());
                    go(body, bound, acc);
                    bound.pop();
                }
                SessionType::Var(v) => {
                    if !bound.contains(v) {
                        acc.insert(v.clone());
                    }
                }
                SessionType::End => {}
            }
        }
        let mut acc = BTreeSet::new();
        go(self, &mut Vec::new(), &mut acc);
        acc
    }

    /// Capture-avoiding substitution of a session type for a free variable.
    pub fn subst(&self, t: &TypeVar, repl: &SessionType) -> SessionType {
        let on_branches = |branches: &BTreeMap<Label, TBranch>| -> BTreeMap<Label, TBranch> {
            branches
                .iter()
                .map(|(l, b)| (l.clone(), TBranch { sort: b.sort, cont: b.cont.subst(t, repl) }))
                .collect()
        };
        match self {
            SessionType::Var(u) => {
                if u == t {
                    repl.clone()
                } else {
                    self.clone()
                }
            }
            SessionType::End => SessionType::End,
            SessionType::Inter { from, branches } => SessionType::Inter {
                from: from.clone(),
                branches: on_branches(branches),
            },
            SessionType::Union { to, branches } => SessionType::Union {
                to: to.clone(),
                branches: on_branches(branches),
            },
            SessionType::CkInter { name, from, branches } => SessionType::CkInter {
                name: name.clone(),
                from: from.clone(),
                branches: on_branches(branches),
            },
            SessionType::CkUnion { name, to, branches } => SessionType::CkUnion {
                name: name.clone(),
                to: to.clone(),
                branches: on_branches(branches),
            },
            SessionType::Rec { var, body } => {
                if var == t {
                    self.clone()
                } else {
                    let free = repl.free_type_vars();
                    if free.contains(var) {
                        let fresh = fresh_type_var(var, &free, &body.free_type_vars());
                        let renamed = body.subst(var, &SessionType::Var(fresh.clone()));
                        SessionType::Rec { var: fresh, body: Box::new(renamed.subst(t, repl)) }
                    } else {
                        SessionType::Rec { var: var.clone(), body: Box::new(body.subst(t, repl)) }
                    }
                }
            }
        }
    }

    /// One unfolding step: `mu t. T` becomes `T[mu t. T / t]`; identity on
    /// other heads.
    pub fn unfold(&self) -> SessionType {
        match self {
            SessionType::Rec { var, body } => body.subst(var, self),
            _ => self.clone(),
        }
    }

    /// Unfolds until the head is not `Rec`. Guarded terms stabilize; a
    /// degenerate `mu t. t` is returned as-is.
    pub fn unfold_head(&self) -> SessionType {
        let mut cur = self.clone();
        for _ in 0..1024 {
            match &cur {
                SessionType::Rec { .. } => {
                    let next = cur.unfold();
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

    /// Whether the type denotes the terminated protocol (end after head
    /// unfolding).
    pub fn is_end(&self) -> bool {
        matches!(self.unfold_head(), SessionType::End)
    }
}

/// The type-level checkpoint history (all checkpointed session types).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeSeq(pub Vec<SessionType>);

impl TypeSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The type of a configuration: a checkpointed type history and the type of
/// the active process.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigType {
    pub history: TypeSeq,
    pub active: SessionType,
}
