//! Environments with value history and the deterministic evaluator.

mod env;
mod error;
mod eval;
mod primitives;
pub mod syntax;
mod value;

pub use env::{Env, FrameSnapshot};
pub use error::EvalError;
pub use eval::{evaluate, Evaluator, DEFAULT_MAX_DEPTH};
pub(crate) use eval::{bind_arguments, check_intrinsic_arity, make_lambda, register_taught_form};
pub use primitives::{install_primitives, primitive_names};
pub use value::{Intrinsic, Lambda, Primitive, PrimitiveFn, Procedure, TaughtForm, Value};

/// A fresh environment frame on top of a frame holding the primitives.
pub fn standard_env() -> Env {
    let primitives = Env::new();
    install_primitives(&primitives);
    primitives.extend()
}
