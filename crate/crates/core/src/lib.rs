//! Agents that are interpreters of a small S-expression language.
//!
//! Each agent evaluates incoming messages with a nondeterministic evaluator
//! running inside a per-partner copy of its environment. The procedures that
//! interpret messages live in that environment too, so a partner can teach an
//! agent new performatives or special forms just by sending definitions.

pub mod acl;
pub mod agent;
pub mod amb;
pub mod interp;
pub mod scenarios;
pub mod transport;
pub mod sexpr;

pub use interp::{evaluate, Env, EvalError, Value};
pub use sexpr::{read, read_all, SExpr, Symbol};
