//! Deterministic evaluator: plain recursive `evaluate` / `apply_procedure`.
//!
//! This is the baseline interpreter and the reference the nondeterministic
//! evaluator is checked against on programs that never call `amb`.

use std::sync::Arc;

use super::env::Env;
use super::error::EvalError;
use super::syntax::{self, CoreForm, DefineParts};
use super::value::{Intrinsic, Lambda, Procedure, TaughtForm, Value};
use crate::sexpr::{SExpr, Symbol};

/// Nesting limit for the recursive evaluator; deeper programs get a
/// resource-limit error instead of exhausting the native stack.
pub const DEFAULT_MAX_DEPTH: usize = 400;

/// Evaluates `expr` in `env`, which also serves as the top-level environment
/// for `eval` and `register-form`.
pub fn evaluate(expr: &SExpr, env: &Env) -> Result<Value, EvalError> {
    Evaluator::new(env.clone()).eval(expr, env)
}

pub struct Evaluator {
    top: Env,
    depth: usize,
    max_depth: usize,
}

impl Evaluator {
    pub fn new(top: Env) -> Self {
        Evaluator { top, depth: 0, max_depth: DEFAULT_MAX_DEPTH }
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn eval(&mut self, expr: &SExpr, env: &Env) -> Result<Value, EvalError> {
        if self.depth >= self.max_depth {
            return Err(EvalError::ResourceLimit { what: "recursion-depth", limit: self.max_depth as u64 });
        }
        self.depth += 1;
        let result = self.eval_inner(expr, env);
        self.depth -= 1;
        result
    }

    fn eval_inner(&mut self, expr: &SExpr, env: &Env) -> Result<Value, EvalError> {
        let items = match expr {
            SExpr::Symbol(name) => return env.lookup(name),
            SExpr::List(items) => items,
            atom => return Ok(Value::from_datum(atom)),
        };
        let Some(head) = items.first() else {
            return Err(EvalError::malformed("application", expr));
        };
        if let Some(form) = head.as_symbol().and_then(CoreForm::of) {
            return self.eval_core(form, items, expr, env);
        }
        let operator = self.eval(head, env)?;
        if let Value::Form(form) = &operator {
            let expansion = self.apply(&form.expander, vec![Value::from_datum(expr)])?;
            return self.eval(&expansion.to_datum()?, env);
        }
        if !matches!(operator, Value::Procedure(_)) {
            return Err(EvalError::NotApplicable { expr: expr.clone() });
        }
        let args = items[1..].iter().map(|a| self.eval(a, env)).collect::<Result<Vec<_>, _>>()?;
        self.apply(&operator, args)
    }

    fn eval_core(&mut self, form: CoreForm, items: &[SExpr], whole: &SExpr, env: &Env) -> Result<Value, EvalError> {
        match form {
            CoreForm::Quote => Ok(Value::from_datum(&syntax::quote(items, whole)?)),
            CoreForm::Define => match syntax::define(items, whole)? {
                DefineParts::Variable { name, value } => {
                    let value = self.eval(value, env)?;
                    env.define(name.clone(), value);
                    Ok(Value::Symbol(name))
                }
                DefineParts::Procedure { name, lambda } => {
                    let procedure = make_lambda(Some(name.clone()), lambda, env);
                    env.define(name.clone(), procedure);
                    Ok(Value::Symbol(name))
                }
            },
            CoreForm::Set => {
                let (name, value) = syntax::set(items, whole)?;
                let value = self.eval(value, env)?;
                env.set(&name, value)?;
                Ok(Value::sym("ok"))
            }
            CoreForm::Lambda => Ok(make_lambda(None, syntax::lambda(items, whole)?, env)),
            CoreForm::If => {
                let parts = syntax::if_parts(items, whole)?;
                if self.eval(parts.test, env)?.is_true() {
                    self.eval(parts.consequent, env)
                } else {
                    match parts.alternative {
                        Some(alt) => self.eval(alt, env),
                        None => Ok(Value::Unspecified),
                    }
                }
            }
            CoreForm::Begin => {
                let body = syntax::begin(items, whole)?;
                self.eval_sequence(&body, env)
            }
            CoreForm::Let => {
                let parts = syntax::let_parts(items, whole)?;
                let args = parts.inits.iter().map(|i| self.eval(i, env)).collect::<Result<Vec<_>, _>>()?;
                let frame = env.extend();
                for (name, value) in parts.names.iter().zip(args) {
                    frame.define(name.clone(), value);
                }
                self.eval_sequence(&parts.body, &frame)
            }
            CoreForm::Amb => Err(EvalError::AmbUnsupported { expr: whole.clone() }),
        }
    }

    fn eval_sequence(&mut self, body: &[SExpr], env: &Env) -> Result<Value, EvalError> {
        let (last, init) = body.split_last().expect("bodies are non-empty");
        for expr in init {
            self.eval(expr, env)?;
        }
        self.eval(last, env)
    }

    pub fn apply(&mut self, procedure: &Value, args: Vec<Value>) -> Result<Value, EvalError> {
        let Value::Procedure(p) = procedure else {
            return Err(EvalError::NotApplicable { expr: procedure.to_sexpr() });
        };
        match &**p {
            Procedure::Primitive(prim) => {
                prim.check_arity(args.len())?;
                (prim.fun)(&args)
            }
            Procedure::Compound(lambda) => {
                let frame = bind_arguments(p, lambda, args)?;
                self.eval_sequence(&lambda.body, &frame)
            }
            Procedure::Intrinsic(Intrinsic::Eval) => {
                check_intrinsic_arity(Intrinsic::Eval, &args, 1)?;
                let code = args[0].to_datum()?;
                let top = self.top.clone();
                self.eval(&code, &top)
            }
            Procedure::Intrinsic(Intrinsic::RegisterForm) => {
                check_intrinsic_arity(Intrinsic::RegisterForm, &args, 2)?;
                register_taught_form(&self.top, &args[0], &args[1])
            }
        }
    }
}

pub(crate) fn make_lambda(name: Option<Symbol>, parts: syntax::LambdaParts, env: &Env) -> Value {
    Value::Procedure(Arc::new(Procedure::Compound(Lambda {
        name,
        params: parts.params,
        body: parts.body,
        env: env.clone(),
    })))
}

/// Fresh call frame for a compound procedure, parented on its closure.
pub(crate) fn bind_arguments(p: &Procedure, lambda: &Lambda, args: Vec<Value>) -> Result<Env, EvalError> {
    if args.len() != lambda.params.len() {
        return Err(EvalError::Arity {
            procedure: p.name(),
            expected: lambda.params.len().to_string(),
            got: args.len(),
        });
    }
    let frame = lambda.env.extend();
    for (param, arg) in lambda.params.iter().zip(args) {
        frame.define(param.clone(), arg);
    }
    Ok(frame)
}

pub(crate) fn check_intrinsic_arity(i: Intrinsic, args: &[Value], n: usize) -> Result<(), EvalError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(EvalError::Arity { procedure: i.name().to_string(), expected: n.to_string(), got: args.len() })
    }
}

/// Binds `name` to a taught special form in `top`. Core form names are
/// refused; the handler must be a procedure.
pub(crate) fn register_taught_form(top: &Env, name: &Value, handler: &Value) -> Result<Value, EvalError> {
    let Value::Symbol(name) = name else {
        return Err(EvalError::WrongType { operation: "register-form".into(), value: name.to_sexpr() });
    };
    if syntax::is_core_form(name) {
        return Err(EvalError::ProtectedForm(name.clone()));
    }
    if !matches!(handler, Value::Procedure(_)) {
        return Err(EvalError::WrongType { operation: "register-form".into(), value: handler.to_sexpr() });
    }
    top.define(
        name.clone(),
        Value::Form(Arc::new(TaughtForm { name: name.clone(), expander: handler.clone() })),
    );
    Ok(Value::Symbol(name.clone()))
}
