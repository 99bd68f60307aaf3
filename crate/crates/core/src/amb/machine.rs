//! The nondeterministic evaluator as an explicit machine.
//!
//! An execution context is `(expr, env, on_success, on_failure)`. Both
//! continuations are persistent linked structures on the heap: the success
//! continuation is a stack of pending evaluation frames, the failure
//! continuation a stack of choice points, each holding the alternatives an
//! `amb` has not tried yet together with the success continuation that was
//! current when the `amb` ran. Invoking the failure continuation resumes the
//! most recent choice point, which gives chronological, left-to-right,
//! depth-first backtracking. Because nothing lives on the native stack, the
//! length of a search is bounded only by the configured limits.

use std::sync::Arc;

use crate::interp::syntax::{self, CoreForm, DefineParts};
use crate::interp::{
    bind_arguments, check_intrinsic_arity, make_lambda, register_taught_form, Env, EvalError, Intrinsic, Procedure,
    Value,
};
use crate::sexpr::{SExpr, Symbol};

/// Search safety caps. Exceeding either is a resource-limit error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Backtracks allowed while searching for one value.
    pub max_backtracks: u64,
    /// Machine steps allowed while searching for one value.
    pub max_steps: Option<u64>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_backtracks: 1_000_000, max_steps: Some(500_000_000) }
    }
}

/// Success continuation: what to do with a value once it is produced.
#[derive(Clone, Default)]
pub struct Continuation(Option<Arc<Frame>>);

/// Failure continuation: how to resume the search when a branch fails.
#[derive(Clone, Default)]
pub struct FailureContinuation(Option<Arc<ChoicePoint>>);

impl FailureContinuation {
    /// True when no untried alternatives remain.
    pub fn is_exhausted(&self) -> bool {
        self.0.is_none()
    }
}

impl Continuation {
    /// The top-level success continuation: hand the value to the caller.
    pub fn top() -> Self {
        Continuation(None)
    }

    fn push(&self, kind: FrameKind) -> Continuation {
        Continuation(Some(Arc::new(Frame { kind, next: self.clone() })))
    }
}

struct Frame {
    kind: FrameKind,
    next: Continuation,
}

// Long chains are unlinked iteratively so dropping them cannot overflow the
// native stack.
impl Drop for Continuation {
    fn drop(&mut self) {
        let mut next = self.0.take();
        while let Some(frame) = next {
            next = match Arc::try_unwrap(frame) {
                Ok(mut frame) => frame.next.0.take(),
                Err(_) => None,
            };
        }
    }
}

impl Drop for FailureContinuation {
    fn drop(&mut self) {
        let mut next = self.0.take();
        while let Some(choice) = next {
            next = match Arc::try_unwrap(choice) {
                Ok(mut choice) => choice.previous.0.take(),
                Err(_) => None,
            };
        }
    }
}

enum FrameKind {
    Test { consequent: SExpr, alternative: Option<SExpr>, env: Env },
    Sequence { body: Arc<[SExpr]>, next: usize, env: Env },
    Define { name: Symbol, env: Env },
    Assign { name: Symbol, env: Env },
    Operator { form: Arc<[SExpr]>, env: Env },
    Operand { procedure: Value, operands: Arc<[SExpr]>, next: usize, evaluated: Vec<Value>, env: Env },
    Expand { env: Env },
}

struct ChoicePoint {
    alternatives: Arc<[SExpr]>,
    next: usize,
    env: Env,
    on_success: Continuation,
    previous: FailureContinuation,
}

pub struct ExecutionContext {
    pub expr: SExpr,
    pub env: Env,
    pub on_success: Continuation,
    pub on_failure: FailureContinuation,
}

impl ExecutionContext {
    /// A top-level context: deliver to the caller, fail to exhaustion.
    pub fn new(expr: SExpr, env: Env) -> Self {
        ExecutionContext { expr, env, on_success: Continuation::top(), on_failure: FailureContinuation::default() }
    }
}

/// Result of running the machine until it reaches the top of a continuation.
pub enum Delivered {
    /// A value reached the top-level success continuation, together with the
    /// failure continuation that resumes the search right after it.
    Success { value: Value, on_failure: FailureContinuation },
    /// The top-level failure continuation was invoked: no more values.
    Failure,
}

/// Evaluates the context. `top` is the environment used by `eval` and
/// `register-form`.
pub fn ambevaluate(ctx: ExecutionContext, top: &Env, limits: Limits) -> Result<Delivered, EvalError> {
    Machine::new(top.clone(), limits).run(Control::Eval(ctx.expr, ctx.env), ctx.on_success, ctx.on_failure)
}

/// Invokes a failure continuation, searching for the next value.
pub fn backtrack(on_failure: FailureContinuation, top: &Env, limits: Limits) -> Result<Delivered, EvalError> {
    Machine::new(top.clone(), limits).run(Control::Backtrack, Continuation::top(), on_failure)
}

enum Control {
    Eval(SExpr, Env),
    Return(Value),
    Apply(Value, Vec<Value>),
    Backtrack,
}

struct Machine {
    top: Env,
    limits: Limits,
    steps: u64,
    backtracks: u64,
}

impl Machine {
    fn new(top: Env, limits: Limits) -> Self {
        Machine { top, limits, steps: 0, backtracks: 0 }
    }

    fn run(
        &mut self,
        mut control: Control,
        mut k: Continuation,
        mut kf: FailureContinuation,
    ) -> Result<Delivered, EvalError> {
        loop {
            self.steps += 1;
            if let Some(max) = self.limits.max_steps {
                if self.steps > max {
                    return Err(EvalError::ResourceLimit { what: "steps", limit: max });
                }
            }
            control = match control {
                Control::Eval(expr, env) => self.eval(expr, env, &mut k, &mut kf)?,
                Control::Return(value) => {
                    let Some(frame) = k.0.take() else {
                        return Ok(Delivered::Success { value, on_failure: kf });
                    };
                    k = frame.next.clone();
                    self.resume_frame(&frame.kind, value, &mut k)?
                }
                Control::Apply(procedure, args) => self.apply(procedure, args, &mut k)?,
                Control::Backtrack => {
                    self.backtracks += 1;
                    if self.backtracks > self.limits.max_backtracks {
                        return Err(EvalError::ResourceLimit {
                            what: "backtracks",
                            limit: self.limits.max_backtracks,
                        });
                    }
                    let Some(choice) = kf.0.take() else {
                        return Ok(Delivered::Failure);
                    };
                    let index = choice.next;
                    kf = if index + 1 < choice.alternatives.len() {
                        FailureContinuation(Some(Arc::new(ChoicePoint {
                            alternatives: choice.alternatives.clone(),
                            next: index + 1,
                            env: choice.env.clone(),
                            on_success: choice.on_success.clone(),
                            previous: choice.previous.clone(),
                        })))
                    } else {
                        choice.previous.clone()
                    };
                    k = choice.on_success.clone();
                    Control::Eval(choice.alternatives[index].clone(), choice.env.clone())
                }
            };
        }
    }

    fn eval(
        &mut self,
        expr: SExpr,
        env: Env,
        k: &mut Continuation,
        kf: &mut FailureContinuation,
    ) -> Result<Control, EvalError> {
        let items = match &expr {
            SExpr::Symbol(name) => return Ok(Control::Return(env.lookup(name)?)),
            SExpr::List(items) => items.clone(),
            atom => return Ok(Control::Return(Value::from_datum(atom))),
        };
        let Some(head) = items.first() else {
            return Err(EvalError::malformed("application", &expr));
        };
        let Some(form) = head.as_symbol().and_then(CoreForm::of) else {
            *k = k.push(FrameKind::Operator { form: items.clone(), env: env.clone() });
            return Ok(Control::Eval(head.clone(), env));
        };
        Ok(match form {
            CoreForm::Quote => Control::Return(Value::from_datum(&syntax::quote(&items, &expr)?)),
            CoreForm::Define => match syntax::define(&items, &expr)? {
                DefineParts::Variable { name, value } => {
                    let value = value.clone();
                    *k = k.push(FrameKind::Define { name, env: env.clone() });
                    Control::Eval(value, env)
                }
                DefineParts::Procedure { name, lambda } => {
                    env.define(name.clone(), make_lambda(Some(name.clone()), lambda, &env));
                    Control::Return(Value::Symbol(name))
                }
            },
            CoreForm::Set => {
                let (name, value) = syntax::set(&items, &expr)?;
                let value = value.clone();
                *k = k.push(FrameKind::Assign { name, env: env.clone() });
                Control::Eval(value, env)
            }
            CoreForm::Lambda => Control::Return(make_lambda(None, syntax::lambda(&items, &expr)?, &env)),
            CoreForm::If => {
                let parts = syntax::if_parts(&items, &expr)?;
                let test = parts.test.clone();
                *k = k.push(FrameKind::Test {
                    consequent: parts.consequent.clone(),
                    alternative: parts.alternative.cloned(),
                    env: env.clone(),
                });
                Control::Eval(test, env)
            }
            CoreForm::Begin => sequence(syntax::begin(&items, &expr)?, env, k),
            CoreForm::Let => {
                let parts = syntax::let_parts(&items, &expr)?;
                let procedure = make_lambda(None, syntax::LambdaParts { params: parts.names, body: parts.body }, &env);
                let inits: Arc<[SExpr]> = parts.inits.into();
                match inits.first().cloned() {
                    None => Control::Apply(procedure, Vec::new()),
                    Some(first) => {
                        *k = k.push(FrameKind::Operand {
                            procedure,
                            operands: inits,
                            next: 1,
                            evaluated: Vec::new(),
                            env: env.clone(),
                        });
                        Control::Eval(first, env)
                    }
                }
            }
            CoreForm::Amb => {
                if items.len() == 1 {
                    return Ok(Control::Backtrack);
                }
                if items.len() > 2 {
                    *kf = FailureContinuation(Some(Arc::new(ChoicePoint {
                        alternatives: items.clone(),
                        next: 2,
                        env: env.clone(),
                        on_success: k.clone(),
                        previous: kf.clone(),
                    })));
                }
                Control::Eval(items[1].clone(), env)
            }
        })
    }

    fn resume_frame(&mut self, frame: &FrameKind, value: Value, k: &mut Continuation) -> Result<Control, EvalError> {
        Ok(match frame {
            FrameKind::Test { consequent, alternative, env } => {
                if value.is_true() {
                    Control::Eval(consequent.clone(), env.clone())
                } else {
                    match alternative {
                        Some(alt) => Control::Eval(alt.clone(), env.clone()),
                        None => Control::Return(Value::Unspecified),
                    }
                }
            }
            FrameKind::Sequence { body, next, env } => {
                if next + 1 < body.len() {
                    *k = k.push(FrameKind::Sequence { body: body.clone(), next: next + 1, env: env.clone() });
                }
                Control::Eval(body[*next].clone(), env.clone())
            }
            FrameKind::Define { name, env } => {
                env.define(name.clone(), value);
                Control::Return(Value::Symbol(name.clone()))
            }
            FrameKind::Assign { name, env } => {
                env.set(name, value)?;
                Control::Return(Value::sym("ok"))
            }
            FrameKind::Operator { form, env } => match &value {
                Value::Form(taught) => {
                    *k = k.push(FrameKind::Expand { env: env.clone() });
                    let datum = Value::from_datum(&SExpr::List(form.clone()));
                    Control::Apply(taught.expander.clone(), vec![datum])
                }
                Value::Procedure(_) if form.len() == 1 => Control::Apply(value, Vec::new()),
                Value::Procedure(_) => {
                    *k = k.push(FrameKind::Operand {
                        procedure: value,
                        operands: form.clone(),
                        next: 2,
                        evaluated: Vec::new(),
                        env: env.clone(),
                    });
                    Control::Eval(form[1].clone(), env.clone())
                }
                _ => return Err(EvalError::NotApplicable { expr: SExpr::List(form.clone()) }),
            },
            FrameKind::Operand { procedure, operands, next, evaluated, env } => {
                // The frame may be resumed again after backtracking, so the
                // accumulated arguments are copied, never mutated in place.
                let mut evaluated = evaluated.clone();
                evaluated.push(value);
                if *next < operands.len() {
                    *k = k.push(FrameKind::Operand {
                        procedure: procedure.clone(),
                        operands: operands.clone(),
                        next: next + 1,
                        evaluated,
                        env: env.clone(),
                    });
                    Control::Eval(operands[*next].clone(), env.clone())
                } else {
                    Control::Apply(procedure.clone(), evaluated)
                }
            }
            FrameKind::Expand { env } => Control::Eval(value.to_datum()?, env.clone()),
        })
    }

    fn apply(&mut self, procedure: Value, args: Vec<Value>, k: &mut Continuation) -> Result<Control, EvalError> {
        let Value::Procedure(p) = &procedure else {
            return Err(EvalError::NotApplicable { expr: procedure.to_sexpr() });
        };
        Ok(match &**p {
            Procedure::Primitive(prim) => {
                prim.check_arity(args.len())?;
                Control::Return((prim.fun)(&args)?)
            }
            Procedure::Compound(lambda) => {
                let frame = bind_arguments(p, lambda, args)?;
                sequence(lambda.body.clone(), frame, k)
            }
            Procedure::Intrinsic(Intrinsic::Eval) => {
                check_intrinsic_arity(Intrinsic::Eval, &args, 1)?;
                Control::Eval(args[0].to_datum()?, self.top.clone())
            }
            Procedure::Intrinsic(Intrinsic::RegisterForm) => {
                check_intrinsic_arity(Intrinsic::RegisterForm, &args, 2)?;
                Control::Return(register_taught_form(&self.top, &args[0], &args[1])?)
            }
        })
    }
}

fn sequence(body: Arc<[SExpr]>, env: Env, k: &mut Continuation) -> Control {
    let first = body[0].clone();
    if body.len() > 1 {
        *k = k.push(FrameKind::Sequence { body, next: 1, env: env.clone() });
    }
    Control::Eval(first, env)
}
