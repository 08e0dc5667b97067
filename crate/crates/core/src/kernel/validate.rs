//! Grammar side conditions, checked over constructed trees.
//!
//! Labels within one choice are distinct by representation (branch maps are
//! keyed by label; the parser reports textual duplicates). The remaining
//! conditions are checked here: choices are non-empty, checkpointed choices
//! have at least two branches, a checkpoint name never occurs inside a term
//! checkpointed by the same name, recursion is guarded by at least one
//! choice constructor, and history sequences contain only checkpointed
//! elements (with distinct names on the global side).

use std::collections::BTreeSet;
use std::fmt;

use super::{
    CkName, ConfigType, Configuration, GlobalPair, GlobalType, Network, Process, Session,
    SessionType, TypeVar,
};
use super::ProcVar;

/// A violated side condition at some position in the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: &'static str,
    pub path: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.constraint, self.path, self.detail)
    }
}

struct Ctx {
    path: Vec<String>,
    enclosing_cks: Vec<CkName>,
    out: Vec<Violation>,
}

impl Ctx {
    fn new() -> Self {
        Ctx { path: Vec::new(), enclosing_cks: Vec::new(), out: Vec::new() }
    }

    fn here(&self) -> String {
        if self.path.is_empty() {
            "root".to_string()
        } else {
            self.path.join("/")
        }
    }

    fn report(&mut self, constraint: &'static str, detail: String) {
        let path = self.here();
        self.out.push(Violation { constraint, path, detail });
    }

    fn check_arity(&mut self, len: usize, checkpointed: bool) {
        if len == 0 {
            self.report("non-empty-choice", "choice has no branches".to_string());
        } else if checkpointed && len < 2 {
            self.report(
                "checkpointed-choice-arity",
                "checkpointed choice needs at least two branches".to_string(),
            );
        }
    }

    fn check_ck_name(&mut self, name: &CkName) {
        if self.enclosing_cks.contains(name) {
            self.report(
                "self-nested-checkpoint",
                format!("checkpoint name `{name}` occurs inside a term checkpointed by `{name}`"),
            );
        }
    }
}

pub fn validate_process(p: &Process) -> Vec<Violation> {
    let mut ctx = Ctx::new();
    walk_process(p, &mut ctx, &mut Vec::new());
    ctx.out
}

fn walk_process(p: &Process, ctx: &mut Ctx, unguarded: &mut Vec<ProcVar>) {
    match p {
        Process::End => {}
        Process::Var(x) => {
            if unguarded.contains(x) {
                ctx.report(
                    "guarded-recursion",
                    format!("recursion variable `{x}` occurs without an intervening choice"),
                );
            }
        }
        Process::Rec { var, body } => {
            ctx.path.push(format!("mu {var}"));
            unguarded.push(var.clone());
            walk_process(body, ctx, unguarded);
            unguarded.pop();
            ctx.path.pop();
        }
        Process::Ext { from: _, branches } => {
            ctx.check_arity(branches.len(), false);
            for (l, b) in branches {
                ctx.path.push(l.to_string());
                walk_process(&b.cont, ctx, &mut Vec::new());
                ctx.path.pop();
            }
        }
        Process::Int { to: _, branches } => {
            ctx.check_arity(branches.len(), false);
            for (l, b) in branches {
                ctx.path.push(l.to_string());
                walk_process(&b.cont, ctx, &mut Vec::new());
                ctx.path.pop();
            }
        }
        Process::CkExt { name, from: _, branches } => {
            ctx.check_ck_name(name);
            ctx.check_arity(branches.len(), true);
            ctx.enclosing_cks.push(name.clone());
            ctx.path.push(format!("ckpt {name}"));
            for (l, b) in branches {
                ctx.path.push(l.to_string());
                walk_process(&b.cont, ctx, &mut Vec::new());
                ctx.path.pop();
            }
            ctx.path.pop();
            ctx.enclosing_cks.pop();
        }
        Process::CkInt { name, to: _, branches } => {
            ctx.check_ck_name(name);
            ctx.check_arity(branches.len(), true);
            ctx.enclosing_cks.push(name.clone());
            ctx.path.push(format!("ckpt {name}"));
            for (l, b) in branches {
                ctx.path.push(l.to_string());
                walk_process(&b.cont, ctx, &mut Vec::new());
                ctx.path.pop();
            }
            ctx.path.pop();
            ctx.enclosing_cks.pop();
        }
    }
}

pub fn validate_global(g: &GlobalType) -> Vec<Violation> {
    let mut ctx = Ctx::new();
    walk_global(g, &mut ctx, &mut Vec::new());
    ctx.out
}

fn walk_global(g: &GlobalType, ctx: &mut Ctx, unguarded: &mut Vec<TypeVar>) {
    match g {
        GlobalType::End => {}
        GlobalType::Var(t) => {
            if unguarded.contains(t) {
                ctx.report(
                    "guarded-recursion",
                    format!("recursion variable `{t}` occurs without an intervening communication"),
                );
            }
        }
        GlobalType::Rec { var, body } => {
            ctx.path.push(format!("mu {var}"));
            unguarded.push(var.clone());
            walk_global(body, ctx, unguarded);
            unguarded.pop();
            ctx.path.pop();
        }
        GlobalType::Comm { from, to, branches } => {
            if from == to {
                ctx.report("self-communication", format!("participant `{from}` talks to itself"));
            }
            ctx.check_arity(branches.len(), false);
            for (l, b) in branches {
                ctx.path.push(l.to_string());
                walk_global(&b.cont, ctx, &mut Vec::new());
                ctx.path.pop();
            }
        }
        GlobalType::CkComm { name, from, to, branches } => {
            if from == to {
                ctx.report("self-communication", format!("participant `{from}` talks to itself"));
            }
            ctx.check_ck_name(name);
            ctx.check_arity(branches.len(), true);
            ctx.enclosing_cks.push(name.clone());
            ctx.path.push(format!("ckpt {name}"));
            for (l, b) in branches {
                ctx.path.push(l.to_string());
                walk_global(&b.cont, ctx, &mut Vec::new());
                ctx.path.pop();
            }
            ctx.path.pop();
            ctx.enclosing_cks.pop();
        }
    }
}

pub fn validate_session_type(t: &SessionType) -> Vec<Violation> {
    let mut ctx = Ctx::new();
    walk_session_type(t, &mut ctx, &mut Vec::new());
    ctx.out
}

fn walk_session_type(t: &SessionType, ctx: &mut Ctx, unguarded: &mut Vec<TypeVar>) {
    match t {
        SessionType::End => {}
        SessionType::Var(v) => {
            if unguarded.contains(v) {
                ctx.report(
                    "guarded-recursion",
                    format!("recursion variable `{v}` occurs without an intervening choice"),
                );
            }
        }
        SessionType::Rec { var, body } => {
            ctx.path.push(format!("mu {var}"));
            unguarded.push(var.clone());
            walk_session_type(body, ctx, unguarded);
            unguarded.pop();
            ctx.path.pop();
        }
        SessionType::Inter { branches, .. } | SessionType::Union { branches, .. } => {
            ctx.check_arity(branches.len(), false);
            for (l, b) in branches {
                ctx.path.push(l.to_string());
                walk_session_type(&b.cont, ctx, &mut Vec::new());
                ctx.path.pop();
            }
        }
        SessionType::CkInter { name, branches, .. } | SessionType::CkUnion { name, branches, .. } => {
            ctx.check_ck_name(name);
            ctx.check_arity(branches.len(), true);
            ctx.enclosing_cks.push(name.clone());
            ctx.path.push(format!("ckpt {name}"));
            for (l, b) in branches {
                ctx.path.push(l.to_string());
                walk_session_type(&b.cont, ctx, &mut Vec::new());
                ctx.path.pop();
            }
            ctx.path.pop();
            ctx.enclosing_cks.pop();
        }
    }
}

pub fn validate_configuration(c: &Configuration) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, p) in c.history.0.iter().enumerate() {
        if p.ck_name().is_none() {
            out.push(Violation {
                constraint: "checkpointed-history-element",
                path: format!("history[{i}]"),
                detail: "history element is not a checkpointed choice".to_string(),
            });
        }
        out.extend(prefix_paths(validate_process(p), &format!("history[{i}]")));
    }
    out.extend(prefix_paths(validate_process(&c.active), "active"));
    out
}

pub fn validate_session(m: &Session) -> Vec<Violation> {
    let mut out = Vec::new();
    for (p, c) in &m.0 {
        out.extend(prefix_paths(validate_configuration(c), p.as_str()));
    }
    out
}

pub fn validate_network(n: &Network) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, m) in n.0.iter().enumerate() {
        out.extend(prefix_paths(validate_session(m), &format!("session[{i}]")));
    }
    out
}

pub fn validate_global_pair(gp: &GlobalPair) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen: BTreeSet<CkName> = BTreeSet::new();
    for (i, g) in gp.history.iter().enumerate() {
        match g.ck_name() {
            None => out.push(Violation {
                constraint: "checkpointed-history-element",
                path: format!("history[{i}]"),
                detail: "global history element is not checkpointed".to_string(),
            }),
            Some(name) => {
                if !seen.insert(name.clone()) {
                    out.push(Violation {
                        constraint: "distinct-history-names",
                        path: format!("history[{i}]"),
                        detail: format!("checkpoint name `{name}` repeats in the global history"),
                    });
                }
            }
        }
        out.extend(prefix_paths(validate_global(g), &format!("history[{i}]")));
    }
    out.extend(prefix_paths(validate_global(&gp.active), "active"));
    out
}

pub fn validate_config_type(ct: &ConfigType) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, t) in ct.history.0.iter().enumerate() {
        if t.ck_name().is_none() {
            out.push(Violation {
                constraint: "checkpointed-history-element",
                path: format!("history[{i}]"),
                detail: "type history element is not checkpointed".to_string(),
            });
        }
        out.extend(prefix_paths(validate_session_type(t), &format!("history[{i}]")));
    }
    out.extend(prefix_paths(validate_session_type(&ct.active), "active"));
    out
}

fn prefix_paths(violations: Vec<Violation>, prefix: &str) -> Vec<Violation> {
    violations
        .into_iter()
        .map(|mut v| {
            v.path = if v.path == "root" {
                prefix.to_string()
            } else {
                format!("{prefix}/{}", v.path)
            };
            v
        })
        .collect()
}
