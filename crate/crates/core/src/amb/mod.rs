//! Nondeterministic evaluation with `amb` and chronological backtracking.

mod driver;
mod machine;
mod prelude;

pub use driver::{all_values, drive, drive_in, drive_with, Outcome, ResumeHandle};
pub use machine::{ambevaluate, backtrack, Continuation, Delivered, ExecutionContext, FailureContinuation, Limits};
pub use prelude::{load, load_prelude, prelude_env, LoadError, PRELUDE};
