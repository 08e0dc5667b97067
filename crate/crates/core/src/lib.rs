//! Reversible multiparty sessions with named checkpoints.
//!
//! A session is a set of participants, each running a process that can
//! communicate, record named checkpoints, and later roll the whole session
//! back to one of them. This crate provides the calculus itself (processes,
//! configurations with checkpoint histories, forward and backward steps),
//! the type layer (single-threaded global types, projection onto local
//! session types, subtyping, and type checking of running sessions against
//! global-type pairs), and a bounded verifier for subject reduction, session
//! fidelity, and progress. The `rms` binary exposes all of it on `.rms`
//! source files.

pub mod cli;
pub mod kernel;
pub mod parser;
pub mod projection;
pub mod semantics;
pub mod subtyping;
pub mod typing;
pub mod verify;
