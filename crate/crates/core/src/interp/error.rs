use thiserror::Error;

use crate::sexpr::{SExpr, Symbol};

/// Evaluation failures. These are ordinary results: an agent turns them into
/// error-carrying replies instead of aborting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(Symbol),
    #[error("{procedure} expects {expected} argument(s), got {got}")]
    Arity {
        procedure: String,
        expected: String,
        got: usize,
    },
    #[error("not applicable: {expr}")]
    NotApplicable { expr: SExpr },
    #[error("malformed {form}: {expr}")]
    Malformed { form: &'static str, expr: SExpr },
    #[error("{operation}: wrong type argument {value}")]
    WrongType { operation: String, value: SExpr },
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("{0} is a core form and cannot be redefined as a taught form")]
    ProtectedForm(Symbol),
    #[error("value is not syntax: {value}")]
    NotSyntax { value: SExpr },
    #[error("amb is only available in the nondeterministic evaluator: {expr}")]
    AmbUnsupported { expr: SExpr },
    #[error("resource limit exceeded: {what} > {limit}")]
    ResourceLimit { what: &'static str, limit: u64 },
    #[error("resume handle already used")]
    StaleHandle,
}

impl EvalError {
    pub fn malformed(form: &'static str, expr: &SExpr) -> Self {
        EvalError::Malformed { form, expr: expr.clone() }
    }

    /// The S-expression carried by `(error <description>)` replies.
    pub fn to_sexpr(&self) -> SExpr {
        fn tag(name: &'static str, rest: Vec<SExpr>) -> SExpr {
            let mut items = vec![SExpr::sym(name)];
            items.extend(rest);
            SExpr::list(items)
        }
        fn word(s: &str) -> SExpr {
            Symbol::new(s).map(SExpr::Symbol).unwrap_or_else(|_| SExpr::string(s))
        }
        match self {
            EvalError::Unbound(s) => tag("unbound-variable", vec![SExpr::Symbol(s.clone())]),
            EvalError::Arity { procedure, expected, got } => tag(
                "wrong-arity",
                vec![word(procedure), word(expected), SExpr::int(*got as i64)],
            ),
            EvalError::NotApplicable { expr } => tag("not-applicable", vec![expr.clone()]),
            EvalError::Malformed { form, expr } => tag("malformed", vec![word(form), expr.clone()]),
            EvalError::WrongType { operation, value } => {
                tag("wrong-type", vec![word(operation), value.clone()])
            }
            EvalError::DivisionByZero => tag("division-by-zero", vec![]),
            EvalError::Overflow(op) => tag("integer-overflow", vec![word(op)]),
            EvalError::ProtectedForm(s) => tag("protected-form", vec![SExpr::Symbol(s.clone())]),
            EvalError::NotSyntax { value } => tag("not-syntax", vec![value.clone()]),
            EvalError::AmbUnsupported { expr } => tag("amb-unsupported", vec![expr.clone()]),
            EvalError::ResourceLimit { what, limit } => {
                tag("resource-limit", vec![word(what), SExpr::int(*limit as i64)])
            }
            EvalError::StaleHandle => tag("stale-handle", vec![]),
        }
    }
}
