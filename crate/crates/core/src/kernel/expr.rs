//! Payload sorts, values, and the small expression language used in output
//! prefixes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::ExprVar;

/// Payload sorts. The sort set is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Int,
    Bool,
    Str,
}

impl Sort {
    /// The representative value used by the canonical value policy.
    pub fn canonical_value(self) -> Value {
        match self {
            Sort::Int => Value::Int(0),
            Sort::Bool => Value::Bool(true),
            Sort::Str => Value::Str("s".to_string()),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sort::Int => "Int",
            Sort::Bool => "Bool",
            Sort::Str => "Str",
        })
    }
}

/// A closed value of one of the three sorts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
            Value::Str(_) => Sort::Str,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnOp {
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    And,
    Eq,
    Lt,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Lt => "<",
        }
    }
}

/// Payload expressions: literals, variables, integer arithmetic, boolean
/// negation/conjunction, and comparisons.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Lit(Value),
    Var(ExprVar),
    Un(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(ExprVar),
    #[error("operator `{op}` expects {expected}, got {got}")]
    OperandSort {
        op: &'static str,
        expected: &'static str,
        got: Sort,
    },
    #[error("operator `==` expects operands of one sort, got {0} and {1}")]
    EqSort(Sort, Sort),
}

impl Expr {
    /// Evaluates under a value environment.
    pub fn eval(&self, env: &BTreeMap<ExprVar, Value>) -> Result<Value, EvalError> {
        match self {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Var(x) => env.get(x).cloned().ok_or_else(|| EvalError::Unbound(x.clone())),
            Expr::Un(UnOp::Not, e) => match e.eval(env)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                v => Err(EvalError::OperandSort { op: "!", expected: "Bool", got: v.sort() }),
            },
            Expr::Bin(op, a, b) => {
                let va = a.eval(env)?;
                let vb = b.eval(env)?;
                match op {
                    BinOp::Add | BinOp::Sub => match (va, vb) {
                        (Value::Int(x), Value::Int(y)) => Ok(Value::Int(if *op == BinOp::Add {
                            x.wrapping_add(y)
                        } else {
                            x.wrapping_sub(y)
                        })),
                        (Value::Int(_), v) | (v, _) => Err(EvalError::OperandSort {
                            op: op.symbol(),
                            expected: "Int",
                            got: v.sort(),
                        }),
                    },
                    BinOp::And => match (va, vb) {
                        (Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(x && y)),
                        (Value::Bool(_), v) | (v, _) => Err(EvalError::OperandSort {
                            op: "&&",
                            expected: "Bool",
                            got: v.sort(),
                        }),
                    },
                    BinOp::Eq => {
                        if va.sort() != vb.sort() {
                            Err(EvalError::EqSort(va.sort(), vb.sort()))
                        } else {
                            Ok(Value::Bool(va == vb))
                        }
                    }
                    BinOp::Lt => match (va, vb) {
                        (Value::Int(x), Value::Int(y)) => Ok(Value::Bool(x < y)),
                        (Value::Int(_), v) | (v, _) => Err(EvalError::OperandSort {
                            op: "<",
                            expected: "Int",
                            got: v.sort(),
                        }),
                    },
                }
            }
        }
    }

    /// Infers the sort under a sort environment; shares the error type with
    /// evaluation.
    pub fn sort(&self, env: &BTreeMap<ExprVar, Sort>) -> Result<Sort, EvalError> {
        match self {
            Expr::Lit(v) => Ok(v.sort()),
            Expr::Var(x) => env.get(x).copied().ok_or_else(|| EvalError::Unbound(x.clone())),
            Expr::Un(UnOp::Not, e) => match e.sort(env)? {
                Sort::Bool => Ok(Sort::Bool),
                s => Err(EvalError::OperandSort { op: "!", expected: "Bool", got: s }),
            },
            Expr::Bin(op, a, b) => {
                let sa = a.sort(env)?;
                let sb = b.sort(env)?;
                match op {
                    BinOp::Add | BinOp::Sub => match (sa, sb) {
                        (Sort::Int, Sort::Int) => Ok(Sort::Int),
                        (Sort::Int, s) | (s, _) => Err(EvalError::OperandSort {
                            op: op.symbol(),
                            expected: "Int",
                            got: s,
                        }),
                    },
                    BinOp::And => match (sa, sb) {
                        (Sort::Bool, Sort::Bool) => Ok(Sort::Bool),
                        (Sort::Bool, s) | (s, _) => Err(EvalError::OperandSort {
                            op: "&&",
                            expected: "Bool",
                            got: s,
                        }),
                    },
                    BinOp::Eq => {
                        if sa != sb {
                            Err(EvalError::EqSort(sa, sb))
                        } else {
                            Ok(Sort::Bool)
                        }
                    }
                    BinOp::Lt => match (sa, sb) {
                        (Sort::Int, Sort::Int) => Ok(Sort::Bool),
                        (Sort::Int, s) | (s, _) => Err(EvalError::OperandSort {
                            op: "<",
                            expected: "Int",
                            got: s,
                        }),
                    },
                }
            }
        }
    }

    /// Substitutes a value for a free variable.
    pub fn subst(&self, x: &ExprVar, v: &Value) -> Expr {
        match self {
            Expr::Lit(_) => self.clone(),
            Expr::Var(y) => {
                if y == x {
                    Expr::Lit(v.clone())
                } else {
                    self.clone()
                }
            }
            Expr::Un(op, e) => Expr::Un(*op, Box::new(e.subst(x, v))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.subst(x, v)), Box::new(b.subst(x, v))),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<ExprVar> {
        let mut acc = BTreeSet::new();
        self.collect_free(&mut acc);
        acc
    }

    fn collect_free(&self, acc: &mut BTreeSet<ExprVar>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(x) => {
                acc.insert(x.clone());
            }
            Expr::Un(_, e) => e.collect_free(acc),
            Expr::Bin(_, a, b) => {
                a.collect_free(acc);
                b.collect_free(acc);
            }
        }
    }
}
