use thiserror::Error;

use crate::interp::{standard_env, Env, EvalError};
use crate::sexpr::{read_all, ParseError};

use super::driver::drive;

/// Library procedures every nondeterministic environment starts with.
pub const PRELUDE: &str = "\
(define (require p)
  (if (not p) (amb)))

(define (an-element-of items)
  (require (not (null? items)))
  (amb (car items) (an-element-of (cdr items))))
";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Evaluates the prelude into `env`.
pub fn load_prelude(env: &Env) -> Result<(), LoadError> {
    load(env, PRELUDE)
}

/// Evaluates every form of `src` in `env`, keeping the first value of each.
pub fn load(env: &Env, src: &str) -> Result<(), LoadError> {
    let forms = read_all(src)?;
    for form in forms {
        drive(&form, env)?;
    }
    Ok(())
}

/// A standard environment with the prelude loaded.
pub fn prelude_env() -> Env {
    let env = standard_env();
    load_prelude(&env).expect("prelude evaluates");
    env
}
