//! Top-level driving of the machine: first value plus a resumable handle.

use std::fmt;
use std::sync::Arc;

use parking_lot::Mutex;

use super::machine::{ambevaluate, backtrack, Delivered, ExecutionContext, FailureContinuation, Limits};
use crate::interp::{Env, EvalError, Value};
use crate::sexpr::SExpr;

/// Outcome of driving or resuming a search.
pub enum Outcome {
    /// A value, with a handle that resumes the search after it.
    Value { value: Value, handle: ResumeHandle },
    /// The search space is exhausted.
    NoMoreValues,
}

impl Outcome {
    pub fn value(&self) -> Option<&Value> {
        match self {
            Outcome::Value { value, .. } => Some(value),
            Outcome::NoMoreValues => None,
        }
    }
}

struct Pending {
    on_failure: FailureContinuation,
    top: Env,
    limits: Limits,
}

#[derive(Clone)]
enum HandleState {
    /// Untried alternatives remain. The slot is emptied on first use.
    Pending(Arc<Mutex<Option<Pending>>>),
    Exhausted,
}

/// Resumes a search where the previous value left off. A handle with
/// pending alternatives is single-use; an exhausted handle reports
/// no more values every time it is resumed.
#[derive(Clone)]
pub struct ResumeHandle {
    state: HandleState,
    produced: usize,
}

impl fmt::Debug for ResumeHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResumeHandle")
            .field("exhausted", &self.is_exhausted())
            .field("produced", &self.produced)
            .finish()
    }
}

impl ResumeHandle {
    fn new(on_failure: FailureContinuation, top: Env, limits: Limits, produced: usize) -> Self {
        let state = if on_failure.is_exhausted() {
            HandleState::Exhausted
        } else {
            HandleState::Pending(Arc::new(Mutex::new(Some(Pending { on_failure, top, limits }))))
        };
        ResumeHandle { state, produced }
    }

    /// A handle for a finished search.
    pub fn exhausted() -> Self {
        ResumeHandle { state: HandleState::Exhausted, produced: 0 }
    }

    /// True when no alternatives remain.
    pub fn is_exhausted(&self) -> bool {
        matches!(self.state, HandleState::Exhausted)
    }

    /// Number of values produced so far by this search.
    pub fn produced(&self) -> usize {
        self.produced
    }

    /// Searches for the next value.
    pub fn resume(&self) -> Result<Outcome, EvalError> {
        let slot = match &self.state {
            HandleState::Exhausted => return Ok(Outcome::NoMoreValues),
            HandleState::Pending(slot) => slot,
        };
        let Some(pending) = slot.lock().take() else {
            return Err(EvalError::StaleHandle);
        };
        let delivered = backtrack(pending.on_failure, &pending.top, pending.limits)?;
        Ok(finish(delivered, pending.top, pending.limits, self.produced))
    }
}

fn finish(delivered: Delivered, top: Env, limits: Limits, produced: usize) -> Outcome {
    match delivered {
        Delivered::Success { value, on_failure } => {
            Outcome::Value { value, handle: ResumeHandle::new(on_failure, top, limits, produced + 1) }
        }
        Delivered::Failure => Outcome::NoMoreValues,
    }
}

/// Evaluates `expr` in `env` with default limits.
pub fn drive(expr: &SExpr, env: &Env) -> Result<Outcome, EvalError> {
    drive_with(expr, env, Limits::default())
}

/// Evaluates `expr` in `env`, which is also the top-level environment.
pub fn drive_with(expr: &SExpr, env: &Env, limits: Limits) -> Result<Outcome, EvalError> {
    drive_in(expr, env, env, limits)
}

/// Evaluates `expr` in `env`, with `top` as the environment for `eval`.
pub fn drive_in(expr: &SExpr, env: &Env, top: &Env, limits: Limits) -> Result<Outcome, EvalError> {
    let delivered = ambevaluate(ExecutionContext::new(expr.clone(), env.clone()), top, limits)?;
    Ok(finish(delivered, top.clone(), limits, 0))
}

/// Collects up to `max` values of `expr`, resuming until exhaustion.
pub fn all_values(expr: &SExpr, env: &Env, limits: Limits, max: usize) -> Result<Vec<Value>, EvalError> {
    let mut values = Vec::new();
    let mut outcome = drive_with(expr, env, limits)?;
    while let Outcome::Value { value, handle } = outcome {
        values.push(value);
        if values.len() >= max {
            break;
        }
        outcome = handle.resume()?;
    }
    Ok(values)
}
