//! The five-floor dwelling puzzle, solved by plain search over `amb`.

use crate::amb::{drive_with, load, prelude_env, Limits, LoadError, Outcome};
use crate::interp::{Env, EvalError, Value};
use crate::sexpr::read;

pub const MULTIPLE_DWELLING: &str = "\
(define (multiple-dwelling)
  (let ((baker (amb 1 2 3 4 5))
        (cooper (amb 1 2 3 4 5))
        (fletcher (amb 1 2 3 4 5))
        (miller (amb 1 2 3 4 5))
        (smith (amb 1 2 3 4 5)))
    (require (distinct? (list baker cooper
                              fletcher miller smith)))
    (require (not (= baker 5)))
    (require (not (= cooper 1)))
    (require (not (= fletcher 5)))
    (require (not (= fletcher 1)))
    (require (> miller cooper))
    (require
     (not (= (abs (- smith fletcher)) 1)))
    (require
     (not (= (abs (- fletcher cooper)) 1)))
    (list (list 'baker baker)
          (list 'cooper cooper)
          (list 'fletcher fletcher)
          (list 'miller miller)
          (list 'smith smith))))
";

pub const EXPECTED: &str = "((baker 3) (cooper 2) (fletcher 4) (miller 5) (smith 1))";

/// A prelude environment with `multiple-dwelling` defined.
pub fn dwelling_env() -> Result<Env, LoadError> {
    let env = prelude_env();
    load(&env, MULTIPLE_DWELLING)?;
    Ok(env)
}

/// Every solution of the puzzle, in search order.
pub fn all_solutions(env: &Env) -> Result<Vec<Value>, EvalError> {
    all_solutions_with(env, Limits::default())
}

pub fn all_solutions_with(env: &Env, limits: Limits) -> Result<Vec<Value>, EvalError> {
    let mut found = Vec::new();
    let mut outcome = drive_with(&read("(multiple-dwelling)").expect("literal parses"), env, limits)?;
    while let Outcome::Value { value, handle } = outcome {
        found.push(value);
        outcome = handle.resume()?;
    }
    Ok(found)
}
