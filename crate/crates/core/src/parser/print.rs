//! Canonical printing. Every printer here round-trips through the parser,
//! and equal trees print identically (branch maps are ordered), so printed
//! forms double as equality witnesses in tests and traces.

use crate::kernel::{
    ConfigType, Configuration, Expr, GlobalPair, GlobalType, Network, Process, Session,
    SessionType, UnOp, Value,
};

use super::{Directive, SessionDecl, SourceFile};

pub fn print_process(p: &Process) -> String {
    match p {
        Process::End => "end".into(),
        Process::Var(x) => x.as_str().into(),
        Process::Rec { var, body } => format!("mu {var}. {}", print_process(body)),
        Process::Ext { from, branches } => {
            let bs: Vec<String> = branches
                .iter()
                .map(|(l, b)| {
                    let bind = match &b.bind {
                        Some((x, s)) => format!("({x}:{s})"),
                        None => String::new(),
                    };
                    format!("{l}{bind}.{}", print_process(&b.cont))
                })
                .collect();
            format!("{from}?{{ {} }}", bs.join(", "))
        }
        Process::Int { to, branches } => {
            if branches.len() == 1 {
                let (l, b) = branches.iter().next().unwrap();
                let payload = match &b.payload {
                    Some(e) => format!("({})", print_expr(e)),
                    None => String::new(),
                };
                format!("{to}!{l}{payload}.{}", print_process(&b.cont))
            } else {
                let bs: Vec<String> = branches
                    .iter()
                    .map(|(l, b)| {
                        let payload = match &b.payload {
                            Some(e) => format!("({})", print_expr(e)),
                            None => String::new(),
                        };
                        format!("{l}{payload}.{}", print_process(&b.cont))
                    })
                    .collect();
                format!("{to}!{{ {} }}", bs.join(", "))
            }
        }
        Process::CkExt { name, from, branches } => {
            let inner = Process::Ext { from: from.clone(), branches: branches.clone() };
            format!("ckpt {name} {{ {} }}", print_process(&inner))
        }
        Process::CkInt { name, to, branches } => {
            let inner = Process::Int { to: to.clone(), branches: branches.clone() };
            format!("ckpt {name} {{ {} }}", print_process(&inner))
        }
    }
}

pub fn print_global(g: &GlobalType) -> String {
    match g {
        GlobalType::End => "end".into(),
        GlobalType::Var(t) => t.as_str().into(),
        GlobalType::Rec { var, body } => format!("mu {var}. {}", print_global(body)),
        GlobalType::Comm { from, to, branches } | GlobalType::CkComm { from, to, branches, .. } => {
            let bs: Vec<String> = branches
                .iter()
                .map(|(l, b)| {
                    let sort = match &b.sort {
                        Some(s) => format!("({s})"),
                        None => String::new(),
                    };
                    format!("{l}{sort}.{}", print_global(&b.cont))
                })
                .collect();
            let comm = format!("{from} -> {to} {{ {} }}", bs.join(", "));
            match g.ck_name() {
                Some(name) => format!("ckpt {name} {comm}"),
                None => comm,
            }
        }
    }
}

pub fn print_stype(t: &SessionType) -> String {
    match t {
        SessionType::End => "end".into(),
        SessionType::Var(v) => v.as_str().into(),
        SessionType::Rec { var, body } => format!("mu {var}. {}", print_stype(body)),
        SessionType::Inter { from, branches } => {
            let bs: Vec<String> = branches
                .iter()
                .map(|(l, b)| {
                    let sort = match &b.sort {
                        Some(s) => format!("({s})"),
                        None => String::new(),
                    };
                    format!("{l}{sort}.{}", print_stype(&b.cont))
                })
                .collect();
            format!("{from}?{{ {} }}", bs.join(", "))
        }
        SessionType::Union { to, branches } => {
            if branches.len() == 1 {
                let (l, b) = branches.iter().next().unwrap();
                let sort = match &b.sort {
                    Some(s) => format!("({s})"),
                    None => String::new(),
                };
                format!("{to}!{l}{sort}.{}", print_stype(&b.cont))
            } else {
                let bs: Vec<String> = branches
                    .iter()
                    .map(|(l, b)| {
                        let sort = match &b.sort {
                            Some(s) => format!("({s})"),
                            None => String::new(),
                        };
                        format!("{l}{sort}.{}", print_stype(&b.cont))
                    })
                    .collect();
                format!("{to}!{{ {} }}", bs.join(", "))
            }
        }
        SessionType::CkInter { name, from, branches } => {
            let inner = SessionType::Inter { from: from.clone(), branches: branches.clone() };
            format!("ckpt {name} {{ {} }}", print_stype(&inner))
        }
        SessionType::CkUnion { name, to, branches } => {
            let inner = SessionType::Union { to: to.clone(), branches: branches.clone() };
            format!("ckpt {name} {{ {} }}", print_stype(&inner))
        }
    }
}

pub fn print_config(c: &Configuration) -> String {
    let hist: Vec<String> = c.history.0.iter().map(print_process).collect();
    format!("< [{}] ; {} >", hist.join(", "), print_process(&c.active))
}

pub fn print_session(s: &Session) -> String {
    let entries: Vec<String> = s
        .0
        .iter()
        .map(|(p, c)| {
            if c.history.is_empty() {
                format!("{p} |> {}", print_process(&c.active))
            } else {
                format!("{p} |> {}", print_config(c))
            }
        })
        .collect();
    format!("{{ {} }}", entries.join(", "))
}

pub fn print_network(n: &Network) -> String {
    let sessions: Vec<String> = n.0.iter().map(print_session).collect();
    sessions.join(" || ")
}

pub fn print_pair(gp: &GlobalPair) -> String {
    let hist: Vec<String> = gp.history.iter().map(print_global).collect();
    format!("< [{}] ; {} >", hist.join(", "), print_global(&gp.active))
}

pub fn print_config_type(ct: &ConfigType) -> String {
    let hist: Vec<String> = ct.history.0.iter().map(print_stype).collect();
    format!("< [{}] ; {} >", hist.join(", "), print_stype(&ct.active))
}

pub fn print_value(v: &Value) -> String {
    v.to_string()
}

pub fn print_directive(d: &Directive) -> String {
    d.to_string()
}

// Precedence levels, loosest first: && , comparison, +/-, unary, atom.
fn expr_prec(e: &Expr) -> u8 {
    use crate::kernel::BinOp::*;
    match e {
        Expr::Bin(And, _, _) => 0,
        Expr::Bin(Eq, _, _) | Expr::Bin(Lt, _, _) => 1,
        Expr::Bin(Add, _, _) | Expr::Bin(Sub, _, _) => 2,
        Expr::Un(_, _) => 3,
        Expr::Lit(_) | Expr::Var(_) => 4,
    }
}

fn expr_at(e: &Expr, min: u8) -> String {
    let prec = expr_prec(e);
    let body = match e {
        Expr::Lit(v) => v.to_string(),
        Expr::Var(x) => x.as_str().into(),
        Expr::Un(UnOp::Not, inner) => format!("!{}", expr_at(inner, 3)),
        Expr::Bin(op, l, r) => {
            // && and +/- associate left; comparisons do not chain.
            let (lp, rp) = match prec {
                0 => (0, 1),
                1 => (2, 2),
                _ => (2, 3),
            };
            format!("{} {} {}", expr_at(l, lp), op.symbol(), expr_at(r, rp))
        }
    };
    if prec < min {
        format!("({body})")
    } else {
        body
    }
}

pub fn print_expr(e: &Expr) -> String {
    expr_at(e, 0)
}

fn print_session_decl(d: &SessionDecl) -> String {
    let mut out = format!("session {}", d.name);
    if let Some(pair) = &d.pair {
        if pair.history.is_empty() {
            out.push_str(&format!(" : {}", print_global(&pair.active)));
        } else {
            out.push_str(&format!(" : {}", print_pair(pair)));
        }
    }
    out.push_str(" {\n");
    let entries: Vec<String> = d
        .session
        .0
        .iter()
        .map(|(p, c)| {
            if c.history.is_empty() {
                format!("  {p} |> {}", print_process(&c.active))
            } else {
                format!("  {p} |> {}", print_config(c))
            }
        })
        .collect();
    out.push_str(&entries.join(",\n"));
    out.push_str("\n}");
    out
}

/// Prints a whole source file in canonical form. Declaration references were
/// resolved at parse time, so the output is self-contained.
pub fn print_source(f: &SourceFile) -> String {
    let mut blocks: Vec<String> = Vec::new();
    for (name, g) in &f.globals {
        blocks.push(format!("global {name} = {}", print_global(g)));
    }
    for (name, p) in &f.processes {
        blocks.push(format!("process {name} = {}", print_process(p)));
    }
    for d in &f.sessions {
        blocks.push(print_session_decl(d));
    }
    if let Some(names) = &f.network {
        blocks.push(format!("network {{ {} }}", names.join(" || ")));
    }
    if let Some(script) = &f.script {
        let lines: Vec<String> = script.iter().map(|d| format!("  {d}")).collect();
        blocks.push(format!("script {{\n{}\n}}", lines.join("\n")));
    }
    let mut out = blocks.join("\n\n");
    out.push('\n');
    out
}
