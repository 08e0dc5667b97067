//! Core syntax of the calculus: sorts, expressions, processes, checkpointed
//! configurations, sessions and networks, plus global and session types.
//!
//! Everything here is plain data with structural equality and ordering;
//! the operational and type-level judgments live in the sibling modules.

mod expr;
mod process;
mod types;
mod validate;

pub use expr::{BinOp, EvalError, Expr, Sort, UnOp, Value};
pub use process::{CkSeq, Configuration, InBranch, Network, OutBranch, Process, Session};
pub use types::{ConfigType, GBranch, GlobalPair, GlobalType, SessionType, TBranch, TypeSeq};
pub use validate::{
    validate_config_type, validate_configuration, validate_global, validate_global_pair,
    validate_network, validate_process, validate_session, validate_session_type, Violation,
};

macro_rules! ident_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }
    };
}

ident_type!(
    /// A session participant (role) name.
    Participant
);
ident_type!(
    /// A branch label in a choice or communication.
    Label
);
ident_type!(
    /// A checkpoint name.
    CkName
);
ident_type!(
    /// A process recursion variable.
    ProcVar
);
ident_type!(
    /// A type recursion variable.
    TypeVar
);
ident_type!(
    /// An expression variable (input binder).
    ExprVar
);
