//! Surface syntax for the calculus and its types.
//!
//! Grammar sketch (`//` comments, double-quoted strings):
//!
//! ```text
//! file      := decl*
//! decl      := "global" NAME "=" gtype
//!            | "process" NAME "=" proc
//!            | "session" NAME (":" pair)? "{" p "|>" conf ("," p "|>" conf)* "}"
//!            | "network" "{" NAME ("||" NAME)* "}"
//!            | "script" "{" directive* "}"
//! proc      := "end" | "mu" X "." proc | X
//!            | p "?" "{" l ("(" x ":" sort ")")? "." proc, ... "}"
//!            | p "!" "{" l ("(" expr ")")? "." proc, ... "}"
//!            | p "!" l ("(" expr ")")? "." proc
//!            | "ckpt" A "{" choice "}"
//! gtype     := "end" | "mu" t "." gtype | t
//!            | p "->" q "{" l ("(" sort ")")? "." gtype, ... "}"
//!            | "ckpt" A p "->" q "{" ... "}"
//! stype     := like proc, with sorts in payload position
//! conf      := "<" "[" proc, ... "]" ";" proc ">" | proc
//! pair      := "<" "[" gtype, ... "]" ";" gtype ">" | gtype
//! directive := "choose" p l | "comm" p q l | "roll" A
//! ```
//!
//! Declared names are resolved (inlined) at parse time, define-before-use.
//! Every accepted tree has the kernel validations applied. Standalone
//! scheduler scripts (`.steps` files) are line-based with `#` comments; see
//! [`parse_script`].

mod lexer;
mod print;

pub use lexer::{lex, Pos, Tok};
pub use print::{
    print_config, print_config_type, print_directive, print_expr, print_global, print_network,
    print_pair, print_process, print_session, print_source, print_stype, print_value,
};

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::kernel::{
    validate_configuration, validate_global, validate_global_pair, validate_process,
    validate_session, validate_session_type, BinOp, CkName, CkSeq, Configuration, Expr, ExprVar,
    GBranch, GlobalPair, GlobalType, InBranch, Label, Network, OutBranch, Participant, ProcVar,
    Process, Session, SessionType, Sort, TBranch, TypeVar, UnOp, Value, Violation,
};

/// A scheduler-script directive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    /// Commit participant's internal choice to a branch.
    Choose { who: Participant, label: Label },
    /// Fire the communication between two participants on a label.
    Comm { from: Participant, to: Participant, label: Label },
    /// Fire the session rollback on a checkpoint name.
    Roll(CkName),
}

/// A parse or validation error with its source location.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

impl ParseError {
    pub fn new(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError { pos, msg: msg.into() }
    }
}

/// A session declaration: optional global-pair annotation, then the
/// participant bindings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionDecl {
    pub name: String,
    pub pair: Option<GlobalPair>,
    pub session: Session,
}

/// A parsed `.rms` file, with declaration references resolved.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceFile {
    pub globals: Vec<(String, GlobalType)>,
    pub processes: Vec<(String, Process)>,
    pub sessions: Vec<SessionDecl>,
    pub network: Option<Vec<String>>,
    pub script: Option<Vec<Directive>>,
}

impl SourceFile {
    pub fn global(&self, name: &str) -> Option<&GlobalType> {
        self.globals.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    pub fn session_decl(&self, name: &str) -> Option<&SessionDecl> {
        self.sessions.iter().find(|d| d.name == name)
    }

    /// The sessions composed by the `network` declaration, or all declared
    /// sessions in order when the declaration is absent.
    pub fn network_sessions(&self) -> Vec<&SessionDecl> {
        match &self.network {
            Some(names) => names.iter().filter_map(|n| self.session_decl(n)).collect(),
            None => self.sessions.iter().collect(),
        }
    }
}

/// Start symbols for [`parse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    File,
    Process,
    Global,
    SType,
    Config,
    Session,
    Network,
}

/// A parse result for any start symbol.
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    File(SourceFile),
    Process(Process),
    Global(GlobalType),
    SType(SessionType),
    Config(Configuration),
    Session(Session),
    Network(Network),
}

pub fn parse(text: &str, start: Start) -> Result<Parsed, ParseError> {
    let mut p = P::new(text)?;
    let out = match start {
        Start::File => Parsed::File(p.file()?),
        Start::Process => {
            let t = p.proc()?;
            p.expect_eof()?;
            check_violations(validate_process(&t), p.start_pos)?;
            Parsed::Process(t)
        }
        Start::Global => {
            let g = p.gtype()?;
            p.expect_eof()?;
            check_violations(validate_global(&g), p.start_pos)?;
            Parsed::Global(g)
        }
        Start::SType => {
            let t = p.stype()?;
            p.expect_eof()?;
            check_violations(validate_session_type(&t), p.start_pos)?;
            Parsed::SType(t)
        }
        Start::Config => {
            let c = p.config()?;
            p.expect_eof()?;
            check_violations(validate_configuration(&c), p.start_pos)?;
            Parsed::Config(c)
        }
        Start::Session => {
            let s = p.session_value()?;
            p.expect_eof()?;
            check_violations(validate_session(&s), p.start_pos)?;
            Parsed::Session(s)
        }
        Start::Network => {
            let mut sessions = vec![p.session_value()?];
            while p.eat(&Tok::ParPar) {
                sessions.push(p.session_value()?);
            }
            p.expect_eof()?;
            let n = Network(sessions);
            for m in &n.0 {
                check_violations(validate_session(m), p.start_pos)?;
            }
            Parsed::Network(n)
        }
    };
    Ok(out)
}

pub fn parse_file(text: &str) -> Result<SourceFile, ParseError> {
    match parse(text, Start::File)? {
        Parsed::File(f) => Ok(f),
        _ => unreachable!(),
    }
}

pub fn parse_process(text: &str) -> Result<Process, ParseError> {
    match parse(text, Start::Process)? {
        Parsed::Process(p) => Ok(p),
        _ => unreachable!(),
    }
}

pub fn parse_global(text: &str) -> Result<GlobalType, ParseError> {
    match parse(text, Start::Global)? {
        Parsed::Global(g) => Ok(g),
        _ => unreachable!(),
    }
}

pub fn parse_stype(text: &str) -> Result<SessionType, ParseError> {
    match parse(text, Start::SType)? {
        Parsed::SType(t) => Ok(t),
        _ => unreachable!(),
    }
}

pub fn parse_config(text: &str) -> Result<Configuration, ParseError> {
    match parse(text, Start::Config)? {
        Parsed::Config(c) => Ok(c),
        _ => unreachable!(),
    }
}

pub fn parse_session(text: &str) -> Result<Session, ParseError> {
    match parse(text, Start::Session)? {
        Parsed::Session(s) => Ok(s),
        _ => unreachable!(),
    }
}

/// Parses a standalone scheduler script: one directive per line, `#` starts
/// a comment.
pub fn parse_script(text: &str) -> Result<Vec<Directive>, ParseError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let pos = Pos { line: (idx + 1) as u32, col: 1 };
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let d = match (words[0], words.len()) {
            ("choose", 3) => Directive::Choose {
                who: Participant::from(words[1]),
                label: Label::from(words[2]),
            },
            ("comm", 4) => Directive::Comm {
                from: Participant::from(words[1]),
                to: Participant::from(words[2]),
                label: Label::from(words[3]),
            },
            ("roll", 2) => Directive::Roll(CkName::from(words[1])),
            (w, _) if ["choose", "comm", "roll"].contains(&w) => {
                return Err(ParseError::new(pos, format!("malformed `{w}` directive")))
            }
            (w, _) => return Err(ParseError::new(pos, format!("unknown directive `{w}`"))),
        };
        out.push(d);
    }
    Ok(out)
}

const RESERVED: &[&str] = &[
    "global", "process", "session", "network", "script", "ckpt", "mu", "end", "true", "false",
    "Int", "Bool", "Str",
];

fn check_violations(violations: Vec<Violation>, pos: Pos) -> Result<(), ParseError> {
    if violations.is_empty() {
        return Ok(());
    }
    let msg = violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ");
    Err(ParseError::new(pos, format!("validation: {msg}")))
}

struct P {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    start_pos: Pos,
    globals: BTreeMap<String, GlobalType>,
    processes: BTreeMap<String, Process>,
    tvars: Vec<String>,
    pvars: Vec<String>,
}

impl P {
    fn new(text: &str) -> Result<Self, ParseError> {
        let toks = lex(text)?;
        Ok(P {
            toks,
            i: 0,
            start_pos: Pos { line: 1, col: 1 },
            globals: BTreeMap::new(),
            processes: BTreeMap::new(),
            tvars: Vec::new(),
            pvars: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(ParseError::new(self.pos(), format!("expected {t}, found {}", self.peek())))
        }
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(ParseError::new(self.pos(), format!("expected end of input, found {}", self.peek())))
        }
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) => Some(s.as_str()),
            _ => None,
        }
    }

    /// A non-reserved identifier (names, labels, participants, variables).
    fn ident(&mut self) -> Result<String, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            Tok::Ident(s) => Err(ParseError::new(pos, format!("`{s}` is a reserved word"))),
            t => Err(ParseError::new(pos, format!("expected an identifier, found {t}"))),
        }
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => match s.as_str() {
                "Int" => {
                    self.bump();
                    Ok(Sort::Int)
                }
                "Bool" => {
                    self.bump();
                    Ok(Sort::Bool)
                }
                "Str" => {
                    self.bump();
                    Ok(Sort::Str)
                }
                _ => Err(ParseError::new(pos, format!("expected a sort (Int, Bool, Str), found `{s}`"))),
            },
            t => Err(ParseError::new(pos, format!("expected a sort, found {t}"))),
        }
    }

    // ---- processes ----

    fn proc(&mut self) -> Result<Process, ParseError> {
        let pos = self.pos();
        match self.peek_ident() {
            Some("end") => {
                self.bump();
                Ok(Process::End)
            }
            Some("mu") => {
                self.bump();
                let var = self.ident()?;
                self.expect(&Tok::Dot)?;
                self.pvars.push(var.clone());
                let body = self.proc()?;
                self.pvars.pop();
                Ok(Process::Rec { var: ProcVar::new(var), body: Box::new(body) })
            }
            Some("ckpt") => {
                self.bump();
                let name = self.ident()?;
                self.expect(&Tok::LBrace)?;
                let inner = self.proc()?;
                self.expect(&Tok::RBrace)?;
                match inner {
                    Process::Ext { from, branches } => {
                        Ok(Process::CkExt { name: CkName::new(name), from, branches })
                    }
                    Process::Int { to, branches } => {
                        Ok(Process::CkInt { name: CkName::new(name), to, branches })
                    }
                    _ => Err(ParseError::new(
                        pos,
                        "a checkpoint must wrap an uncheckpointed choice",
                    )),
                }
            }
            Some(_) => {
                let name = self.ident()?;
                match self.peek() {
                    Tok::Bang => {
                        self.bump();
                        self.output(Participant::new(name))
                    }
                    Tok::Question => {
                        self.bump();
                        self.expect(&Tok::LBrace)?;
                        let branches = self.in_branches()?;
                        self.expect(&Tok::RBrace)?;
                        Ok(Process::Ext { from: Participant::new(name), branches })
                    }
                    _ => {
                        if self.pvars.contains(&name) {
                            Ok(Process::Var(ProcVar::new(name)))
                        } else if let Some(p) = self.processes.get(&name) {
                            Ok(p.clone())
                        } else {
                            Err(ParseError::new(pos, format!("unknown process name `{name}`")))
                        }
                    }
                }
            }
            None => Err(ParseError::new(pos, format!("expected a process, found {}", self.peek()))),
        }
    }

    fn output(&mut self, to: Participant) -> Result<Process, ParseError> {
        if self.eat(&Tok::LBrace) {
            let branches = self.out_branches()?;
            self.expect(&Tok::RBrace)?;
            Ok(Process::Int { to, branches })
        } else {
            let label = self.ident()?;
            let payload = if self.eat(&Tok::LParen) {
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Some(e)
            } else {
                None
            };
            self.expect(&Tok::Dot)?;
            let cont = self.proc()?;
            let mut branches = BTreeMap::new();
            branches.insert(Label::new(label), OutBranch { payload, cont });
            Ok(Process::Int { to, branches })
        }
    }

    fn out_branches(&mut self) -> Result<BTreeMap<Label, OutBranch>, ParseError> {
        let mut branches = BTreeMap::new();
        loop {
            let pos = self.pos();
            let label = self.ident()?;
            let payload = if self.eat(&Tok::LParen) {
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Some(e)
            } else {
                None
            };
            self.expect(&Tok::Dot)?;
            let cont = self.proc()?;
            if branches.insert(Label::new(label.clone()), OutBranch { payload, cont }).is_some() {
                return Err(ParseError::new(pos, format!("duplicate label `{label}`")));
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(branches)
    }

    fn in_branches(&mut self) -> Result<BTreeMap<Label, InBranch>, ParseError> {
        let mut branches = BTreeMap::new();
        loop {
            let pos = self.pos();
            let label = self.ident()?;
            let bind = if self.eat(&Tok::LParen) {
                let x = self.ident()?;
                self.expect(&Tok::Colon)?;
                let s = self.sort()?;
                self.expect(&Tok::RParen)?;
                Some((ExprVar::new(x), s))
            } else {
                None
            };
            self.expect(&Tok::Dot)?;
            let cont = self.proc()?;
            if branches.insert(Label::new(label.clone()), InBranch { bind, cont }).is_some() {
                return Err(ParseError::new(pos, format!("duplicate label `{label}`")));
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(branches)
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.cmp_expr()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.cmp_expr()?;
            e = Expr::Bin(BinOp::And, Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let e = self.add_expr()?;
        let op = match self.peek() {
            Tok::EqEq => Some(BinOp::Eq),
            Tok::LAngle => Some(BinOp::Lt),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let rhs = self.add_expr()?;
            Ok(Expr::Bin(op, Box::new(e), Box::new(rhs)))
        } else {
            Ok(e)
        }
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.unary_expr()?;
            e = Expr::Bin(op, Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Bang) {
            let e = self.unary_expr()?;
            Ok(Expr::Un(UnOp::Not, Box::new(e)))
        } else if *self.peek() == Tok::Minus {
            // Negative integer literals only; there is no general negation.
            let pos = self.pos();
            self.bump();
            match self.peek().clone() {
                Tok::Int(n) => {
                    self.bump();
                    Ok(Expr::Lit(Value::Int(-n)))
                }
                t => Err(ParseError::new(pos, format!("expected an integer after `-`, found {t}"))),
            }
        } else {
            self.atom_expr()
        }
    }

    fn atom_expr(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Lit(Value::Int(n)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Lit(Value::Str(s)))
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Expr::Lit(Value::Bool(true)))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Expr::Lit(Value::Bool(false)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(_) => {
                let x = self.ident()?;
                Ok(Expr::Var(ExprVar::new(x)))
            }
            t => Err(ParseError::new(pos, format!("expected an expression, found {t}"))),
        }
    }

    // ---- global types ----

    fn gtype(&mut self) -> Result<GlobalType, ParseError> {
        let pos = self.pos();
        match self.peek_ident() {
            Some("end") => {
                self.bump();
                Ok(GlobalType::End)
            }
            Some("mu") => {
                self.bump();
                let var = self.ident()?;
                self.expect(&Tok::Dot)?;
                self.tvars.push(var.clone());
                let body = self.gtype()?;
                self.tvars.pop();
                Ok(GlobalType::Rec { var: TypeVar::new(var), body: Box::new(body) })
            }
            Some("ckpt") => {
                self.bump();
                let name = self.ident()?;
                let from = self.ident()?;
                self.expect(&Tok::Arrow)?;
                let to = self.ident()?;
                self.expect(&Tok::LBrace)?;
                let branches = self.gbranches()?;
                self.expect(&Tok::RBrace)?;
                Ok(GlobalType::CkComm {
                    name: CkName::new(name),
                    from: Participant::new(from),
                    to: Participant::new(to),
                    branches,
                })
            }
            Some(_) => {
                let name = self.ident()?;
                if self.eat(&Tok::Arrow) {
                    let to = self.ident()?;
                    self.expect(&Tok::LBrace)?;
                    let branches = self.gbranches()?;
                    self.expect(&Tok::RBrace)?;
                    Ok(GlobalType::Comm {
                        from: Participant::new(name),
                        to: Participant::new(to),
                        branches,
                    })
                } else if self.tvars.contains(&name) {
                    Ok(GlobalType::Var(TypeVar::new(name)))
                } else if let Some(g) = self.globals.get(&name) {
                    Ok(g.clone())
                } else {
                    Err(ParseError::new(pos, format!("unknown global type name `{name}`")))
                }
            }
            None => {
                Err(ParseError::new(pos, format!("expected a global type, found {}", self.peek())))
            }
        }
    }

    fn gbranches(&mut self) -> Result<BTreeMap<Label, GBranch>, ParseError> {
        let mut branches = BTreeMap::new();
        loop {
            let pos = self.pos();
            let label = self.ident()?;
            let sort = if self.eat(&Tok::LParen) {
                let s = self.sort()?;
                self.expect(&Tok::RParen)?;
                Some(s)
            } else {
                None
            };
            self.expect(&Tok::Dot)?;
            let cont = self.gtype()?;
            if branches.insert(Label::new(label.clone()), GBranch { sort, cont }).is_some() {
                return Err(ParseError::new(pos, format!("duplicate label `{label}`")));
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(branches)
    }

    // ---- session types ----

    fn stype(&mut self) -> Result<SessionType, ParseError> {
        let pos = self.pos();
        match self.peek_ident() {
            Some("end") => {
                self.bump();
                Ok(SessionType::End)
            }
            Some("mu") => {
                self.bump();
                let var = self.ident()?;
                self.expect(&Tok::Dot)?;
                self.tvars.push(var.clone());
                let body = self.stype()?;
                self.tvars.pop();
                Ok(SessionType::Rec { var: TypeVar::new(var), body: Box::new(body) })
            }
            Some("ckpt") => {
                self.bump();
                let name = self.ident()?;
                self.expect(&Tok::LBrace)?;
                let inner = self.stype()?;
                self.expect(&Tok::RBrace)?;
                match inner {
                    SessionType::Inter { from, branches } => {
                        Ok(SessionType::CkInter { name: CkName::new(name), from, branches })
                    }
                    SessionType::Union { to, branches } => {
                        Ok(SessionType::CkUnion { name: CkName::new(name), to, branches })
                    }
                    _ => Err(ParseError::new(
                        pos,
                        "a checkpoint must wrap an uncheckpointed choice type",
                    )),
                }
            }
            Some(_) => {
                let name = self.ident()?;
                match self.peek() {
                    Tok::Bang => {
                        self.bump();
                        if self.eat(&Tok::LBrace) {
                            let branches = self.tbranches()?;
                            self.expect(&Tok::RBrace)?;
                            Ok(SessionType::Union { to: Participant::new(name), branches })
                        } else {
                            let label = self.ident()?;
                            let sort = if self.eat(&Tok::LParen) {
                                let s = self.sort()?;
                                self.expect(&Tok::RParen)?;
                                Some(s)
                            } else {
                                None
                            };
                            self.expect(&Tok::Dot)?;
                            let cont = self.stype()?;
                            let mut branches = BTreeMap::new();
                            branches.insert(Label::new(label), TBranch { sort, cont });
                            Ok(SessionType::Union { to: Participant::new(name), branches })
                        }
                    }
                    Tok::Question => {
                        self.bump();
                        self.expect(&Tok::LBrace)?;
                        let branches = self.tbranches()?;
                        self.expect(&Tok::RBrace)?;
                        Ok(SessionType::Inter { from: Participant::new(name), branches })
                    }
                    _ => {
                        if self.tvars.contains(&name) {
                            Ok(SessionType::Var(TypeVar::new(name)))
                        } else {
                            Err(ParseError::new(pos, format!("unknown type variable `{name}`")))
                        }
                    }
                }
            }
            None => {
                Err(ParseError::new(pos, format!("expected a session type, found {}", self.peek())))
            }
        }
    }

    fn tbranches(&mut self) -> Result<BTreeMap<Label, TBranch>, ParseError> {
        let mut branches = BTreeMap::new();
        loop {
            let pos = self.pos();
            let label = self.ident()?;
            let sort = if self.eat(&Tok::LParen) {
                let s = self.sort()?;
                self.expect(&Tok::RParen)?;
                Some(s)
            } else {
                None
            };
            self.expect(&Tok::Dot)?;
            let cont = self.stype()?;
            if branches.insert(Label::new(label.clone()), TBranch { sort, cont }).is_some() {
                return Err(ParseError::new(pos, format!("duplicate label `{label}`")));
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(branches)
    }

    // ---- configurations, sessions, declarations ----

    fn config(&mut self) -> Result<Configuration, ParseError> {
        self.expect(&Tok::LAngle)?;
        self.expect(&Tok::LBracket)?;
        let mut history = Vec::new();
        if self.peek() != &Tok::RBracket {
            loop {
                history.push(self.proc()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RBracket)?;
        self.expect(&Tok::Semi)?;
        let active = self.proc()?;
        self.expect(&Tok::RAngle)?;
        Ok(Configuration { history: CkSeq(history), active })
    }

    fn pair(&mut self) -> Result<GlobalPair, ParseError> {
        if self.peek() == &Tok::LAngle {
            self.bump();
            self.expect(&Tok::LBracket)?;
            let mut history = Vec::new();
            if self.peek() != &Tok::RBracket {
                loop {
                    history.push(self.gtype()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(&Tok::RBracket)?;
            self.expect(&Tok::Semi)?;
            let active = self.gtype()?;
            self.expect(&Tok::RAngle)?;
            Ok(GlobalPair { history, active })
        } else {
            Ok(GlobalPair::initial(self.gtype()?))
        }
    }

    fn session_value(&mut self) -> Result<Session, ParseError> {
        self.expect(&Tok::LBrace)?;
        let mut map = BTreeMap::new();
        loop {
            let pos = self.pos();
            let p = self.ident()?;
            self.expect(&Tok::MapsTo)?;
            let conf = if self.peek() == &Tok::LAngle {
                self.config()?
            } else {
                Configuration::initial(self.proc()?)
            };
            if map.insert(Participant::new(p.clone()), conf).is_some() {
                return Err(ParseError::new(pos, format!("duplicate participant `{p}`")));
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::RBrace)?;
        Ok(Session(map))
    }

    fn file(&mut self) -> Result<SourceFile, ParseError> {
        let mut out = SourceFile::default();
        loop {
            let pos = self.pos();
            match self.peek_ident() {
                None => {
                    self.expect_eof()?;
                    break;
                }
                Some("global") => {
                    self.bump();
                    let name = self.ident()?;
                    if self.globals.contains_key(&name) {
                        return Err(ParseError::new(pos, format!("duplicate global type `{name}`")));
                    }
                    self.expect(&Tok::Assign)?;
                    let g = self.gtype()?;
                    check_violations(validate_global(&g), pos)?;
                    self.globals.insert(name.clone(), g.clone());
                    out.globals.push((name, g));
                }
                Some("process") => {
                    self.bump();
                    let name = self.ident()?;
                    if self.processes.contains_key(&name) {
                        return Err(ParseError::new(pos, format!("duplicate process `{name}`")));
                    }
                    self.expect(&Tok::Assign)?;
                    let p = self.proc()?;
                    check_violations(validate_process(&p), pos)?;
                    self.processes.insert(name.clone(), p.clone());
                    out.processes.push((name, p));
                }
                Some("session") => {
                    self.bump();
                    let name = self.ident()?;
                    if out.sessions.iter().any(|d| d.name == name) {
                        return Err(ParseError::new(pos, format!("duplicate session `{name}`")));
                    }
                    let pair = if self.eat(&Tok::Colon) {
                        let gp = self.pair()?;
                        check_violations(validate_global_pair(&gp), pos)?;
                        Some(gp)
                    } else {
                        None
                    };
                    let session = self.session_value()?;
                    check_violations(validate_session(&session), pos)?;
                    out.sessions.push(SessionDecl { name, pair, session });
                }
                Some("network") => {
                    self.bump();
                    if out.network.is_some() {
                        return Err(ParseError::new(pos, "duplicate network declaration"));
                    }
                    self.expect(&Tok::LBrace)?;
                    let mut names = Vec::new();
                    loop {
                        let npos = self.pos();
                        let n = self.ident()?;
                        if out.session_decl(&n).is_none() {
                            return Err(ParseError::new(npos, format!("unknown session `{n}`")));
                        }
                        names.push(n);
                        if !self.eat(&Tok::ParPar) {
                            break;
                        }
                    }
                    self.expect(&Tok::RBrace)?;
                    out.network = Some(names);
                }
                Some("script") => {
                    self.bump();
                    if out.script.is_some() {
                        return Err(ParseError::new(pos, "duplicate script block"));
                    }
                    self.expect(&Tok::LBrace)?;
                    let mut ds = Vec::new();
                    while self.peek() != &Tok::RBrace {
                        let dpos = self.pos();
                        let word = self.ident()?;
                        let d = match word.as_str() {
                            "choose" => Directive::Choose {
                                who: Participant::new(self.ident()?),
                                label: Label::new(self.ident()?),
                            },
                            "comm" => Directive::Comm {
                                from: Participant::new(self.ident()?),
                                to: Participant::new(self.ident()?),
                                label: Label::new(self.ident()?),
                            },
                            "roll" => Directive::Roll(CkName::new(self.ident()?)),
                            w => {
                                return Err(ParseError::new(dpos, format!("unknown directive `{w}`")))
                            }
                        };
                        ds.push(d);
                    }
                    self.expect(&Tok::RBrace)?;
                    out.script = Some(ds);
                }
                Some(w) => {
                    return Err(ParseError::new(
                        pos,
                        format!("expected a declaration (global, process, session, network, script), found `{w}`"),
                    ))
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Directive::Choose { who, label } => write!(f, "choose {who} {label}"),
            Directive::Comm { from, to, label } => write!(f, "comm {from} {to} {label}"),
            Directive::Roll(name) => write!(f, "roll {name}"),
        }
    }
}
