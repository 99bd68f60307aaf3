use std::io::Write;
use std::sync::Arc;

use super::env::Env;
use super::error::EvalError;
use super::value::{Intrinsic, Primitive, PrimitiveFn, Procedure, Value};
use crate::sexpr::{Number, Symbol};

const PRIMITIVES: &[(&str, usize, Option<usize>, PrimitiveFn)] = &[
    ("+", 0, None, add),
    ("-", 1, None, sub),
    ("*", 0, None, mul),
    ("/", 1, None, div),
    ("=", 1, None, num_eq),
    ("<", 1, None, lt),
    (">", 1, None, gt),
    ("abs", 1, Some(1), abs),
    ("not", 1, Some(1), not),
    ("eq?", 2, Some(2), eq),
    ("null?", 1, Some(1), null),
    ("pair?", 1, Some(1), pair),
    ("car", 1, Some(1), car),
    ("cdr", 1, Some(1), cdr),
    ("cons", 2, Some(2), cons),
    ("list", 0, None, list),
    ("distinct?", 1, Some(1), distinct),
    ("display", 1, Some(1), display),
];

/// Installs the primitive procedures and the evaluator intrinsics in `env`.
pub fn install_primitives(env: &Env) {
    for &(name, min_args, max_args, fun) in PRIMITIVES {
        let p = Primitive { name, min_args, max_args, fun };
        env.define(Symbol::from_static(name), Value::Procedure(Arc::new(Procedure::Primitive(p))));
    }
    for intrinsic in [Intrinsic::Eval, Intrinsic::RegisterForm] {
        env.define(
            Symbol::from_static(intrinsic.name()),
            Value::Procedure(Arc::new(Procedure::Intrinsic(intrinsic))),
        );
    }
}

pub fn primitive_names() -> impl Iterator<Item = &'static str> {
    PRIMITIVES.iter().map(|p| p.0).chain(["eval", "register-form"])
}

fn wrong_type(op: &str, v: &Value) -> EvalError {
    EvalError::WrongType { operation: op.to_string(), value: v.to_sexpr() }
}

fn number(op: &str, v: &Value) -> Result<Number, EvalError> {
    match v {
        Value::Number(n) => Ok(*n),
        other => Err(wrong_type(op, other)),
    }
}

fn finite(op: &'static str, d: f64) -> Result<Number, EvalError> {
    if d.is_finite() {
        Ok(Number::Dec(d))
    } else {
        Err(EvalError::Overflow(op))
    }
}

fn arith(
    op: &'static str,
    a: Number,
    b: Number,
    int: fn(i64, i64) -> Option<i64>,
    dec: fn(f64, f64) -> f64,
) -> Result<Number, EvalError> {
    match (a, b) {
        (Number::Int(x), Number::Int(y)) => int(x, y).map(Number::Int).ok_or(EvalError::Overflow(op)),
        _ => finite(op, dec(a.as_f64(), b.as_f64())),
    }
}

fn fold(
    op: &'static str,
    args: &[Value],
    init: Number,
    int: fn(i64, i64) -> Option<i64>,
    dec: fn(f64, f64) -> f64,
) -> Result<Value, EvalError> {
    let mut acc = init;
    for a in args {
        acc = arith(op, acc, number(op, a)?, int, dec)?;
    }
    Ok(Value::Number(acc))
}

fn add(args: &[Value]) -> Result<Value, EvalError> {
    fold("+", args, Number::Int(0), i64::checked_add, |a, b| a + b)
}

fn mul(args: &[Value]) -> Result<Value, EvalError> {
    fold("*", args, Number::Int(1), i64::checked_mul, |a, b| a * b)
}

fn sub(args: &[Value]) -> Result<Value, EvalError> {
    let first = number("-", &args[0])?;
    if args.len() == 1 {
        return Ok(Value::Number(arith("-", Number::Int(0), first, i64::checked_sub, |a, b| a - b)?));
    }
    let mut acc = first;
    for a in &args[1..] {
        acc = arith("-", acc, number("-", a)?, i64::checked_sub, |a, b| a - b)?;
    }
    Ok(Value::Number(acc))
}

fn divide(a: Number, b: Number) -> Result<Number, EvalError> {
    if b.as_f64() == 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    match (a, b) {
        (Number::Int(x), Number::Int(y)) if x.checked_rem(y) == Some(0) => {
            x.checked_div(y).map(Number::Int).ok_or(EvalError::Overflow("/"))
        }
        _ => finite("/", a.as_f64() / b.as_f64()),
    }
}

fn div(args: &[Value]) -> Result<Value, EvalError> {
    let first = number("/", &args[0])?;
    if args.len() == 1 {
        return Ok(Value::Number(divide(Number::Int(1), first)?));
    }
    let mut acc = first;
    for a in &args[1..] {
        acc = divide(acc, number("/", a)?)?;
    }
    Ok(Value::Number(acc))
}

fn compare(op: &str, args: &[Value], holds: fn(f64, f64) -> bool, exact: fn(i64, i64) -> bool) -> Result<Value, EvalError> {
    let nums = args.iter().map(|a| number(op, a)).collect::<Result<Vec<_>, _>>()?;
    let ok = nums.windows(2).all(|w| match (w[0], w[1]) {
        (Number::Int(a), Number::Int(b)) => exact(a, b),
        (a, b) => holds(a.as_f64(), b.as_f64()),
    });
    Ok(Value::Bool(ok))
}

fn num_eq(args: &[Value]) -> Result<Value, EvalError> {
    compare("=", args, |a, b| a == b, |a, b| a == b)
}

fn lt(args: &[Value]) -> Result<Value, EvalError> {
    compare("<", args, |a, b| a < b, |a, b| a < b)
}

fn gt(args: &[Value]) -> Result<Value, EvalError> {
    compare(">", args, |a, b| a > b, |a, b| a > b)
}

fn abs(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Number(match number("abs", &args[0])? {
        Number::Int(i) => Number::Int(i.checked_abs().ok_or(EvalError::Overflow("abs"))?),
        Number::Dec(d) => Number::Dec(d.abs()),
    }))
}

fn not(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Bool(!args[0].is_true()))
}

fn eq(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Bool(args[0].is_eq(&args[1])))
}

fn list_arg<'a>(op: &str, v: &'a Value) -> Result<&'a [Value], EvalError> {
    v.as_list().ok_or_else(|| wrong_type(op, v))
}

fn null(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Bool(matches!(args[0].as_list(), Some([]))))
}

fn pair(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::Bool(matches!(args[0].as_list(), Some([_, ..]))))
}

fn car(args: &[Value]) -> Result<Value, EvalError> {
    match list_arg("car", &args[0])? {
        [first, ..] => Ok(first.clone()),
        [] => Err(wrong_type("car", &args[0])),
    }
}

fn cdr(args: &[Value]) -> Result<Value, EvalError> {
    match list_arg("cdr", &args[0])? {
        [_, rest @ ..] => Ok(Value::List(Arc::from(rest))),
        [] => Err(wrong_type("cdr", &args[0])),
    }
}

fn cons(args: &[Value]) -> Result<Value, EvalError> {
    // Only proper lists exist, so the tail must be a list.
    let tail = list_arg("cons", &args[1])?;
    let mut items = Vec::with_capacity(tail.len() + 1);
    items.push(args[0].clone());
    items.extend_from_slice(tail);
    Ok(Value::list(items))
}

fn list(args: &[Value]) -> Result<Value, EvalError> {
    Ok(Value::list(args.to_vec()))
}

fn distinct(args: &[Value]) -> Result<Value, EvalError> {
    let items = list_arg("distinct?", &args[0])?;
    let all_distinct = items
        .iter()
        .enumerate()
        .all(|(i, a)| items[i + 1..].iter().all(|b| a != b));
    Ok(Value::Bool(all_distinct))
}

fn display(args: &[Value]) -> Result<Value, EvalError> {
    let text = match &args[0] {
        Value::Str(s) => s.to_string(),
        other => other.to_string(),
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    Ok(Value::Unspecified)
}
