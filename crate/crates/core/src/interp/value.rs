use std::fmt;
use std::sync::Arc;

use super::env::Env;
use super::error::EvalError;
use crate::sexpr::{Number, SExpr, Symbol};

/// Runtime values: data that mirrors [`SExpr`] plus procedures, taught
/// special forms and the unspecified value of a one-armed `if`.
#[derive(Clone)]
pub enum Value {
    Symbol(Symbol),
    Number(Number),
    Bool(bool),
    Str(Arc<str>),
    List(Arc<[Value]>),
    Procedure(Arc<Procedure>),
    Form(Arc<TaughtForm>),
    Unspecified,
}

pub enum Procedure {
    Compound(Lambda),
    Primitive(Primitive),
    Intrinsic(Intrinsic),
}

pub struct Lambda {
    pub name: Option<Symbol>,
    pub params: Arc<[Symbol]>,
    pub body: Arc<[SExpr]>,
    pub env: Env,
}

pub type PrimitiveFn = fn(&[Value]) -> Result<Value, EvalError>;

#[derive(Clone, Copy)]
pub struct Primitive {
    pub name: &'static str,
    pub min_args: usize,
    pub max_args: Option<usize>,
    pub fun: PrimitiveFn,
}

/// Procedures that need the evaluator itself: `eval` runs a datum in the
/// top-level environment of the current evaluation, `register-form` installs
/// a taught special form there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intrinsic {
    Eval,
    RegisterForm,
}

impl Intrinsic {
    pub fn name(self) -> &'static str {
        match self {
            Intrinsic::Eval => "eval",
            Intrinsic::RegisterForm => "register-form",
        }
    }
}

/// A special form taught at runtime. `expander` maps the whole form (as a
/// datum) to an expression in already-supported forms.
pub struct TaughtForm {
    pub name: Symbol,
    pub expander: Value,
}

impl Procedure {
    pub fn name(&self) -> String {
        match self {
            Procedure::Compound(l) => l.name.as_ref().map_or_else(|| "lambda".to_string(), |n| n.to_string()),
            Procedure::Primitive(p) => p.name.to_string(),
            Procedure::Intrinsic(i) => i.name().to_string(),
        }
    }
}

impl Primitive {
    pub fn check_arity(&self, got: usize) -> Result<(), EvalError> {
        let ok = got >= self.min_args && self.max_args.is_none_or(|max| got <= max);
        if ok {
            return Ok(());
        }
        let expected = match self.max_args {
            Some(max) if max == self.min_args => max.to_string(),
            Some(max) => format!("{}..{}", self.min_args, max),
            None => format!("{}+", self.min_args),
        };
        Err(EvalError::Arity { procedure: self.name.to_string(), expected, got })
    }
}

impl Value {
    pub fn sym(name: &'static str) -> Value {
        Value::Symbol(Symbol::from_static(name))
    }

    pub fn int(i: i64) -> Value {
        Value::Number(Number::Int(i))
    }

    pub fn list(items: Vec<Value>) -> Value {
        Value::List(Arc::from(items))
    }

    pub fn nil() -> Value {
        Value::List(Arc::from(Vec::new()))
    }

    pub fn is_true(&self) -> bool {
        !matches!(self, Value::Bool(false))
    }

    /// Quotation: data S-expressions become values.
    pub fn from_datum(expr: &SExpr) -> Value {
        match expr {
            SExpr::Symbol(s) => Value::Symbol(s.clone()),
            SExpr::Number(n) => Value::Number(*n),
            SExpr::Bool(b) => Value::Bool(*b),
            SExpr::Str(s) => Value::Str(s.clone()),
            SExpr::List(items) => Value::List(items.iter().map(Value::from_datum).collect()),
        }
    }

    /// Converts back to an S-expression, failing on procedures and other
    /// values without a datum form. Used where a value must become code.
    pub fn to_datum(&self) -> Result<SExpr, EvalError> {
        Ok(match self {
            Value::Symbol(s) => SExpr::Symbol(s.clone()),
            Value::Number(n) => SExpr::Number(*n),
            Value::Bool(b) => SExpr::Bool(*b),
            Value::Str(s) => SExpr::Str(s.clone()),
            Value::List(items) => {
                SExpr::List(items.iter().map(Value::to_datum).collect::<Result<_, _>>()?)
            }
            Value::Procedure(_) | Value::Form(_) | Value::Unspecified => {
                return Err(EvalError::NotSyntax { value: self.to_sexpr() })
            }
        })
    }

    /// Total rendering used for replies and diagnostics: procedures become
    /// `(compound-procedure name)` and similar descriptive lists.
    pub fn to_sexpr(&self) -> SExpr {
        let described = |kind: &'static str, name: String| {
            let name = Symbol::new(&name).map(SExpr::Symbol).unwrap_or_else(|_| SExpr::string(&name));
            SExpr::list(vec![SExpr::sym(kind), name])
        };
        match self {
            Value::Symbol(s) => SExpr::Symbol(s.clone()),
            Value::Number(n) => SExpr::Number(*n),
            Value::Bool(b) => SExpr::Bool(*b),
            Value::Str(s) => SExpr::Str(s.clone()),
            Value::List(items) => SExpr::List(items.iter().map(Value::to_sexpr).collect()),
            Value::Procedure(p) => match &**p {
                Procedure::Compound(_) => described("compound-procedure", p.name()),
                Procedure::Primitive(_) | Procedure::Intrinsic(_) => described("primitive-procedure", p.name()),
            },
            Value::Form(f) => described("special-form", f.name.to_string()),
            Value::Unspecified => SExpr::sym("unspecified"),
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(items) => Some(items),
            _ => None,
        }
    }

    /// `eq?`: atoms by value, the empty list equal to itself, everything else
    /// by identity.
    pub fn is_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Symbol(a), Value::Symbol(b)) => a == b,
            (Value::Number(a), Value::Number(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => Arc::ptr_eq(a, b),
            (Value::List(a), Value::List(b)) => (a.is_empty() && b.is_empty()) || Arc::ptr_eq(a, b),
            (Value::Procedure(a), Value::Procedure(b)) => Arc::ptr_eq(a, b),
            (Value::Form(a), Value::Form(b)) => Arc::ptr_eq(a, b),
            (Value::Unspecified, Value::Unspecified) => true,
            _ => false,
        }
    }
}

/// Structural equality on data, identity on procedures.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::List(a), Value::List(b)) => a == b,
            _ => self.is_eq(other),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexpr())
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexpr())
    }
}

impl fmt::Debug for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#<procedure {}>", self.name())
    }
}

impl From<SExpr> for Value {
    fn from(expr: SExpr) -> Self {
        Value::from_datum(&expr)
    }
}
