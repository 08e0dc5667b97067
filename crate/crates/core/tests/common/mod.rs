//! Seeded random generators for terms of the calculus, plus a small
//! finite-unfolding subtyping oracle kept independent of the library's
//! coinductive algorithm.
//!
//! Everything is driven by an explicit ChaCha8 seed so suites are
//! reproducible run to run; pools of names are deliberately tiny to make
//! collisions (shared labels, shared participants) common.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use rms_core::kernel::{
    BinOp, CkName, Expr, ExprVar, GBranch, GlobalType, InBranch, Label, OutBranch, Participant,
    ProcVar, Process, SessionType, Sort, TBranch, TypeVar, UnOp, Value,
};

pub const PARTS: [&str; 4] = ["p", "q", "r", "s"];
pub const LABELS: [&str; 4] = ["a", "b", "c", "d"];
pub const CKS: [&str; 3] = ["A", "B", "C"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gen_sort(r: &mut ChaCha8Rng) -> Sort {
    *[Sort::Int, Sort::Bool, Sort::Str].choose(r).unwrap()
}

pub fn gen_value(r: &mut ChaCha8Rng, s: Sort) -> Value {
    match s {
        Sort::Int => Value::Int(r.gen_range(-5..=5)),
        Sort::Bool => Value::Bool(r.gen()),
        Sort::Str => Value::Str(["s", "t", "in", "x"].choose(r).unwrap().to_string()),
    }
}

pub fn gen_participant(r: &mut ChaCha8Rng) -> Participant {
    Participant::new(*PARTS.choose(r).unwrap())
}

pub fn gen_label(r: &mut ChaCha8Rng) -> Label {
    Label::new(*LABELS.choose(r).unwrap())
}

fn distinct_labels(r: &mut ChaCha8Rng, n: usize) -> Vec<Label> {
    let mut pool: Vec<&str> = LABELS.to_vec();
    pool.shuffle(r);
    pool.into_iter().take(n).map(Label::new).collect()
}

/// A closed, well-sorted expression of the given sort. `env` lists binders
/// in scope; variables of a matching sort are used with some probability.
pub fn gen_expr(r: &mut ChaCha8Rng, sort: Sort, env: &[(ExprVar, Sort)]) -> Expr {
    let vars: Vec<&ExprVar> =
        env.iter().filter(|(_, s)| *s == sort).map(|(x, _)| x).collect();
    if !vars.is_empty() && r.gen_bool(0.4) {
        return Expr::Var((*vars.choose(r).unwrap()).clone());
    }
    match sort {
        Sort::Int if r.gen_bool(0.3) => Expr::Bin(
            if r.gen() { BinOp::Add } else { BinOp::Sub },
            Box::new(gen_expr(r, Sort::Int, &[])),
            Box::new(gen_expr(r, Sort::Int, &[])),
        ),
        Sort::Bool if r.gen_bool(0.3) => match r.gen_range(0..3) {
            0 => Expr::Un(UnOp::Not, Box::new(Expr::Lit(gen_value(r, Sort::Bool)))),
            1 => Expr::Bin(
                BinOp::Lt,
                Box::new(Expr::Lit(gen_value(r, Sort::Int))),
                Box::new(Expr::Lit(gen_value(r, Sort::Int))),
            ),
            _ => {
                let s = gen_sort(r);
                Expr::Bin(
                    BinOp::Eq,
                    Box::new(Expr::Lit(gen_value(r, s))),
                    Box::new(Expr::Lit(gen_value(r, s))),
                )
            }
        },
        _ => Expr::Lit(gen_value(r, sort)),
    }
}

struct ProcGen {
    env: Vec<(ExprVar, Sort)>,
    recvars: Vec<ProcVar>,
    cks: Vec<CkName>,
    binders: usize,
}

impl ProcGen {
    fn leaf(&self, r: &mut ChaCha8Rng, guarded: bool) -> Process {
        if guarded && !self.recvars.is_empty() && r.gen_bool(0.3) {
            Process::Var(self.recvars.choose(r).unwrap().clone())
        } else {
            Process::End
        }
    }

    fn gen(&mut self, r: &mut ChaCha8Rng, depth: usize, guarded: bool) -> Process {
        if depth == 0 {
            return self.leaf(r, guarded);
        }
        let ck_ok = self.cks.len() < CKS.len();
        match r.gen_range(0..10) {
            0 | 1 => self.ext(r, depth, false),
            2 | 3 => self.int(r, depth, false),
            4 if ck_ok => self.ext(r, depth, true),
            5 if ck_ok => self.int(r, depth, true),
            6 => {
                let var = ProcVar::new(format!("X{}", self.recvars.len()));
                self.recvars.push(var.clone());
                // The body must guard the variable, so it is a choice.
                let body = if r.gen() {
                    self.ext(r, depth, false)
                } else {
                    self.int(r, depth, false)
                };
                self.recvars.pop();
                Process::Rec { var, body: Box::new(body) }
            }
            _ => self.leaf(r, guarded),
        }
    }

    fn ext(&mut self, r: &mut ChaCha8Rng, depth: usize, ck: bool) -> Process {
        let n = if ck { r.gen_range(2..=3) } else { r.gen_range(1..=3) };
        let from = gen_participant(r);
        let name = self.push_ck(r, ck);
        let mut branches = BTreeMap::new();
        for l in distinct_labels(r, n) {
            let bind = if r.gen_bool(0.6) {
                let x = ExprVar::new(format!("x{}", self.binders));
                self.binders += 1;
                let s = gen_sort(r);
                self.env.push((x.clone(), s));
                Some((x, s))
            } else {
                None
            };
            let cont = self.gen(r, depth - 1, true);
            if bind.is_some() {
                self.env.pop();
            }
            branches.insert(l, InBranch { bind, cont });
        }
        self.pop_ck(ck);
        match name {
            Some(name) => Process::CkExt { name, from, branches },
            None => Process::Ext { from, branches },
        }
    }

    fn int(&mut self, r: &mut ChaCha8Rng, depth: usize, ck: bool) -> Process {
        let n = if ck { r.gen_range(2..=3) } else { r.gen_range(1..=3) };
        let to = gen_participant(r);
        let name = self.push_ck(r, ck);
        let mut branches = BTreeMap::new();
        for l in distinct_labels(r, n) {
            let payload = if r.gen_bool(0.6) {
                let s = gen_sort(r);
                Some(gen_expr(r, s, &self.env))
            } else {
                None
            };
            let cont = self.gen(r, depth - 1, true);
            branches.insert(l, OutBranch { payload, cont });
        }
        self.pop_ck(ck);
        match name {
            Some(name) => Process::CkInt { name, to, branches },
            None => Process::Int { to, branches },
        }
    }

    fn push_ck(&mut self, r: &mut ChaCha8Rng, ck: bool) -> Option<CkName> {
        if !ck {
            return None;
        }
        let free: Vec<&str> =
            CKS.iter().filter(|c| !self.cks.iter().any(|k| k.as_str() == **c)).copied().collect();
        let name = CkName::new(*free.choose(r).unwrap());
        self.cks.push(name.clone());
        Some(name)
    }

    fn pop_ck(&mut self, ck: bool) {
        if ck {
            self.cks.pop();
        }
    }
}

/// A closed, structurally valid process (guarded recursion, checkpointed
/// choices with at least two branches, no same-name checkpoint nesting).
pub fn gen_process(r: &mut ChaCha8Rng, depth: usize) -> Process {
    let mut g = ProcGen { env: Vec::new(), recvars: Vec::new(), cks: Vec::new(), binders: 0 };
    g.gen(r, depth, false)
}

/// Like [`gen_process`], but with one free expression variable in scope,
/// so payloads may mention it.
pub fn gen_process_with_var(r: &mut ChaCha8Rng, depth: usize, x: &ExprVar, s: Sort) -> Process {
    let mut g =
        ProcGen { env: vec![(x.clone(), s)], recvars: Vec::new(), cks: Vec::new(), binders: 0 };
    // Bias towards output-bearing processes so the variable is actually
    // exercised; external choices still occur in continuations.
    g.int(r, depth.max(1), false)
}

struct GlobalGen {
    recvars: Vec<TypeVar>,
    cks: Vec<CkName>,
}

impl GlobalGen {
    fn gen(&mut self, r: &mut ChaCha8Rng, depth: usize, guarded: bool) -> GlobalType {
        if depth == 0 {
            return self.leaf(r, guarded);
        }
        let ck_ok = self.cks.len() < CKS.len();
        match r.gen_range(0..8) {
            0 | 1 | 2 => self.comm(r, depth, false),
            3 if ck_ok => self.comm(r, depth, true),
            4 => {
                let var = TypeVar::new(format!("t{}", self.recvars.len()));
                self.recvars.push(var.clone());
                let body = self.comm(r, depth, false);
                self.recvars.pop();
                GlobalType::Rec { var, body: Box::new(body) }
            }
            _ => self.leaf(r, guarded),
        }
    }

    fn leaf(&self, r: &mut ChaCha8Rng, guarded: bool) -> GlobalType {
        if guarded && !self.recvars.is_empty() && r.gen_bool(0.3) {
            GlobalType::Var(self.recvars.choose(r).unwrap().clone())
        } else {
            GlobalType::End
        }
    }

    fn comm(&mut self, r: &mut ChaCha8Rng, depth: usize, ck: bool) -> GlobalType {
        let n = if ck { r.gen_range(2..=3) } else { r.gen_range(1..=3) };
        let from = gen_participant(r);
        let to = loop {
            let q = gen_participant(r);
            if q != from {
                break q;
            }
        };
        let name = if ck {
            let free: Vec<&str> = CKS
                .iter()
                .filter(|c| !self.cks.iter().any(|k| k.as_str() == **c))
                .copied()
                .collect();
            let name = CkName::new(*free.choose(r).unwrap());
            self.cks.push(name.clone());
            Some(name)
        } else {
            None
        };
        let mut branches = BTreeMap::new();
        for l in distinct_labels(r, n) {
            let sort = if r.gen_bool(0.6) { Some(gen_sort(r)) } else { None };
            let cont = self.gen(r, depth - 1, true);
            branches.insert(l, GBranch { sort, cont });
        }
        if ck {
            self.cks.pop();
        }
        match name {
            Some(name) => GlobalType::CkComm { name, from, to, branches },
            None => GlobalType::Comm { from, to, branches },
        }
    }
}

/// A structurally valid global type; not necessarily projectable.
pub fn gen_global(r: &mut ChaCha8Rng, depth: usize) -> GlobalType {
    GlobalGen { recvars: Vec::new(), cks: Vec::new() }.gen(r, depth, false)
}

struct STypeGen {
    recvars: Vec<TypeVar>,
    cks: Vec<CkName>,
}

impl STypeGen {
    fn gen(&mut self, r: &mut ChaCha8Rng, depth: usize, guarded: bool) -> SessionType {
        if depth == 0 {
            return self.leaf(r, guarded);
        }
        let ck_ok = self.cks.len() < CKS.len();
        match r.gen_range(0..10) {
            0 | 1 => self.choice(r, depth, false, false),
            2 | 3 => self.choice(r, depth, true, false),
            4 if ck_ok => self.choice(r, depth, false, true),
            5 if ck_ok => self.choice(r, depth, true, true),
            6 => {
                let var = TypeVar::new(format!("t{}", self.recvars.len()));
                self.recvars.push(var.clone());
                let output = r.gen();
                let body = self.choice(r, depth, output, false);
                self.recvars.pop();
                SessionType::Rec { var, body: Box::new(body) }
            }
            _ => self.leaf(r, guarded),
        }
    }

    fn leaf(&self, r: &mut ChaCha8Rng, guarded: bool) -> SessionType {
        if guarded && !self.recvars.is_empty() && r.gen_bool(0.3) {
            SessionType::Var(self.recvars.choose(r).unwrap().clone())
        } else {
            SessionType::End
        }
    }

    fn choice(&mut self, r: &mut ChaCha8Rng, depth: usize, output: bool, ck: bool) -> SessionType {
        let n = if ck { r.gen_range(2..=3) } else { r.gen_range(1..=3) };
        let peer = gen_participant(r);
        let name = if ck {
            let free: Vec<&str> = CKS
                .iter()
                .filter(|c| !self.cks.iter().any(|k| k.as_str() == **c))
                .copied()
                .collect();
            let name = CkName::new(*free.choose(r).unwrap());
            self.cks.push(name.clone());
            Some(name)
        } else {
            None
        };
        let mut branches = BTreeMap::new();
        for l in distinct_labels(r, n) {
            let sort = if r.gen_bool(0.6) { Some(gen_sort(r)) } else { None };
            let cont = self.gen(r, depth - 1, true);
            branches.insert(l, TBranch { sort, cont });
        }
        if ck {
            self.cks.pop();
        }
        match (output, name) {
            (false, None) => SessionType::Inter { from: peer, branches },
            (true, None) => SessionType::Union { to: peer, branches },
            (false, Some(name)) => SessionType::CkInter { name, from: peer, branches },
            (true, Some(name)) => SessionType::CkUnion { name, to: peer, branches },
        }
    }
}

/// A closed, structurally valid session type.
pub fn gen_stype(r: &mut ChaCha8Rng, depth: usize) -> SessionType {
    STypeGen { recvars: Vec::new(), cks: Vec::new() }.gen(r, depth, false)
}

/// A supertype of `t` by construction: drop input branches (keeping the
/// checkpointed-arity floor), add output branches, recurse elsewhere.
pub fn widen(r: &mut ChaCha8Rng, t: &SessionType) -> SessionType {
    match t {
        SessionType::End => SessionType::End,
        SessionType::Var(v) => SessionType::Var(v.clone()),
        SessionType::Rec { var, body } => {
            SessionType::Rec { var: var.clone(), body: Box::new(widen(r, body)) }
        }
        SessionType::Inter { from, branches } => SessionType::Inter {
            from: from.clone(),
            branches: drop_and_widen(r, branches, 1),
        },
        SessionType::CkInter { name, from, branches } => SessionType::CkInter {
            name: name.clone(),
            from: from.clone(),
            branches: drop_and_widen(r, branches, 2),
        },
        SessionType::Union { to, branches } => SessionType::Union {
            to: to.clone(),
            branches: add_and_widen(r, branches),
        },
        SessionType::CkUnion { name, to, branches } => SessionType::CkUnion {
            name: name.clone(),
            to: to.clone(),
            branches: add_and_widen(r, branches),
        },
    }
}

fn drop_and_widen(
    r: &mut ChaCha8Rng,
    branches: &BTreeMap<Label, TBranch>,
    floor: usize,
) -> BTreeMap<Label, TBranch> {
    let mut labels: Vec<&Label> = branches.keys().collect();
    labels.shuffle(r);
    let mut keep: Vec<&Label> = Vec::new();
    for l in labels {
        if keep.len() < floor || r.gen_bool(0.7) {
            keep.push(l);
        }
    }
    keep.into_iter()
        .map(|l| {
            let b = &branches[l];
            (l.clone(), TBranch { sort: b.sort, cont: widen(r, &b.cont) })
        })
        .collect()
}

fn add_and_widen(
    r: &mut ChaCha8Rng,
    branches: &BTreeMap<Label, TBranch>,
) -> BTreeMap<Label, TBranch> {
    let mut out: BTreeMap<Label, TBranch> = branches
        .iter()
        .map(|(l, b)| (l.clone(), TBranch { sort: b.sort, cont: widen(r, &b.cont) }))
        .collect();
    for l in LABELS {
        let l = Label::new(l);
        if !out.contains_key(&l) && r.gen_bool(0.25) {
            let sort = if r.gen_bool(0.6) { Some(gen_sort(r)) } else { None };
            let cont = gen_stype(r, 1);
            out.insert(l, TBranch { sort, cont });
        }
    }
    out
}

/// Syntactic node count (recursion variables and `end` included).
pub fn node_count(t: &SessionType) -> usize {
    match t {
        SessionType::End | SessionType::Var(_) => 1,
        SessionType::Rec { body, .. } => 1 + node_count(body),
        SessionType::Inter { branches, .. }
        | SessionType::Union { branches, .. }
        | SessionType::CkInter { branches, .. }
        | SessionType::CkUnion { branches, .. } => {
            1 + branches.values().map(|b| node_count(&b.cont)).sum::<usize>()
        }
    }
}

/// Brute-force subtyping on finite unfoldings: checks the simulation
/// clauses recursively and declares success when the observation budget is
/// exhausted. Kept independent of the library's cached coinduction.
pub fn oracle_subtype(sub: &SessionType, sup: &SessionType, fuel: usize) -> bool {
    if fuel == 0 {
        return true;
    }
    let a = sub.unfold_head();
    let b = sup.unfold_head();
    match (&a, &b) {
        (SessionType::End, SessionType::End) => true,
        (SessionType::Var(x), SessionType::Var(y)) => x == y,
        (
            SessionType::Inter { from: fa, branches: ba },
            SessionType::Inter { from: fb, branches: bb },
        ) => fa == fb && inputs_simulate(ba, bb, fuel),
        (
            SessionType::Union { to: ta, branches: ba },
            SessionType::Union { to: tb, branches: bb },
        ) => ta == tb && outputs_simulate(ba, bb, fuel),
        (
            SessionType::CkInter { name: na, from: fa, branches: ba },
            SessionType::CkInter { name: nb, from: fb, branches: bb },
        ) => na == nb && fa == fb && inputs_simulate(ba, bb, fuel),
        (
            SessionType::CkUnion { name: na, to: ta, branches: ba },
            SessionType::CkUnion { name: nb, to: tb, branches: bb },
        ) => na == nb && ta == tb && outputs_simulate(ba, bb, fuel),
        _ => false,
    }
}

fn inputs_simulate(
    sub: &BTreeMap<Label, TBranch>,
    sup: &BTreeMap<Label, TBranch>,
    fuel: usize,
) -> bool {
    // The subtype offers every input the supertype offers.
    sup.iter().all(|(l, b)| match sub.get(l) {
        Some(a) => a.sort == b.sort && oracle_subtype(&a.cont, &b.cont, fuel - 1),
        None => false,
    })
}

fn outputs_simulate(
    sub: &BTreeMap<Label, TBranch>,
    sup: &BTreeMap<Label, TBranch>,
    fuel: usize,
) -> bool {
    // The subtype selects only outputs the supertype allows.
    sub.iter().all(|(l, a)| match sup.get(l) {
        Some(b) => a.sort == b.sort && oracle_subtype(&a.cont, &b.cont, fuel - 1),
        None => false,
    })
}

/// Removes every branch labelled `label` from the checkpointed external
/// choices of a process — the standard way to build an ill-behaved mutant.
pub fn drop_branch(p: &Process, label: &str) -> Process {
    let map_in = |branches: &BTreeMap<Label, InBranch>, drop: bool| -> BTreeMap<Label, InBranch> {
        branches
            .iter()
            .filter(|(l, _)| !(drop && l.as_str() == label))
            .map(|(l, b)| {
                let mut b = b.clone();
                b.cont = drop_branch(&b.cont, label);
                (l.clone(), b)
            })
            .collect()
    };
    let map_out = |branches: &BTreeMap<Label, OutBranch>| -> BTreeMap<Label, OutBranch> {
        branches
            .iter()
            .map(|(l, b)| {
                let mut b = b.clone();
                b.cont = drop_branch(&b.cont, label);
                (l.clone(), b)
            })
            .collect()
    };
    match p {
        Process::Ext { from, branches } => Process::Ext {
            from: from.clone(),
            branches: map_in(branches, false),
        },
        Process::CkExt { name, from, branches } => Process::CkExt {
            name: name.clone(),
            from: from.clone(),
            branches: map_in(branches, true),
        },
        Process::Int { to, branches } => {
            Process::Int { to: to.clone(), branches: map_out(branches) }
        }
        Process::CkInt { name, to, branches } => Process::CkInt {
            name: name.clone(),
            to: to.clone(),
            branches: map_out(branches),
        },
        Process::Rec { var, body } => Process::Rec {
            var: var.clone(),
            body: Box::new(drop_branch(body, label)),
        },
        Process::Var(_) | Process::End => p.clone(),
    }
}
