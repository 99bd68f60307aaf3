//! Destructuring of the core special forms, shared by both evaluators.

use std::sync::Arc;

use super::error::EvalError;
use crate::sexpr::{SExpr, Symbol};

/// Forms recognized syntactically by the evaluators. Taught forms can never
/// take one of these names.
pub const CORE_FORMS: [&str; 8] = ["quote", "define", "set!", "lambda", "if", "begin", "let", "amb"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoreForm {
    Quote,
    Define,
    Set,
    Lambda,
    If,
    Begin,
    Let,
    Amb,
}

impl CoreForm {
    pub fn of(head: &Symbol) -> Option<CoreForm> {
        Some(match head.as_str() {
            "quote" => CoreForm::Quote,
            "define" => CoreForm::Define,
            "set!" => CoreForm::Set,
            "lambda" => CoreForm::Lambda,
            "if" => CoreForm::If,
            "begin" => CoreForm::Begin,
            "let" => CoreForm::Let,
            "amb" => CoreForm::Amb,
            _ => return None,
        })
    }
}

pub fn is_core_form(name: &Symbol) -> bool {
    CoreForm::of(name).is_some()
}

pub struct LambdaParts {
    pub params: Arc<[Symbol]>,
    pub body: Arc<[SExpr]>,
}

pub enum DefineParts<'a> {
    Variable { name: Symbol, value: &'a SExpr },
    Procedure { name: Symbol, lambda: LambdaParts },
}

pub struct LetParts {
    pub names: Arc<[Symbol]>,
    pub inits: Vec<SExpr>,
    pub body: Arc<[SExpr]>,
}

pub struct IfParts<'a> {
    pub test: &'a SExpr,
    pub consequent: &'a SExpr,
    pub alternative: Option<&'a SExpr>,
}

fn symbol_list(form: &'static str, whole: &SExpr, expr: &SExpr) -> Result<Arc<[Symbol]>, EvalError> {
    let items = expr.as_list().ok_or_else(|| EvalError::malformed(form, whole))?;
    let mut names: Vec<Symbol> = Vec::with_capacity(items.len());
    for item in items {
        let name = item.as_symbol().ok_or_else(|| EvalError::malformed(form, whole))?;
        if names.contains(name) {
            return Err(EvalError::malformed(form, whole));
        }
        names.push(name.clone());
    }
    Ok(names.into())
}

fn body(form: &'static str, whole: &SExpr, exprs: &[SExpr]) -> Result<Arc<[SExpr]>, EvalError> {
    if exprs.is_empty() {
        return Err(EvalError::malformed(form, whole));
    }
    Ok(Arc::from(exprs))
}

pub fn quote(items: &[SExpr], whole: &SExpr) -> Result<SExpr, EvalError> {
    match items {
        [_, datum] => Ok(datum.clone()),
        _ => Err(EvalError::malformed("quote", whole)),
    }
}

pub fn define<'a>(items: &'a [SExpr], whole: &SExpr) -> Result<DefineParts<'a>, EvalError> {
    match items {
        [_, SExpr::Symbol(name), value] => Ok(DefineParts::Variable { name: name.clone(), value }),
        [_, SExpr::List(signature), rest @ ..] => {
            let (name, params) = signature.split_first().ok_or_else(|| EvalError::malformed("define", whole))?;
            let name = name.as_symbol().ok_or_else(|| EvalError::malformed("define", whole))?;
            let params = symbol_list("define", whole, &SExpr::list(params.to_vec()))?;
            Ok(DefineParts::Procedure {
                name: name.clone(),
                lambda: LambdaParts { params, body: body("define", whole, rest)? },
            })
        }
        _ => Err(EvalError::malformed("define", whole)),
    }
}

pub fn set<'a>(items: &'a [SExpr], whole: &SExpr) -> Result<(Symbol, &'a SExpr), EvalError> {
    match items {
        [_, SExpr::Symbol(name), value] => Ok((name.clone(), value)),
        _ => Err(EvalError::malformed("set!", whole)),
    }
}

pub fn lambda(items: &[SExpr], whole: &SExpr) -> Result<LambdaParts, EvalError> {
    match items {
        [_, params, rest @ ..] => Ok(LambdaParts {
            params: symbol_list("lambda", whole, params)?,
            body: body("lambda", whole, rest)?,
        }),
        _ => Err(EvalError::malformed("lambda", whole)),
    }
}

pub fn if_parts<'a>(items: &'a [SExpr], whole: &SExpr) -> Result<IfParts<'a>, EvalError> {
    match items {
        [_, test, consequent] => Ok(IfParts { test, consequent, alternative: None }),
        [_, test, consequent, alternative] => Ok(IfParts { test, consequent, alternative: Some(alternative) }),
        _ => Err(EvalError::malformed("if", whole)),
    }
}

pub fn begin(items: &[SExpr], whole: &SExpr) -> Result<Arc<[SExpr]>, EvalError> {
    body("begin", whole, &items[1..])
}

pub fn let_parts(items: &[SExpr], whole: &SExpr) -> Result<LetParts, EvalError> {
    let malformed = || EvalError::malformed("let", whole);
    let [_, bindings, rest @ ..] = items else {
        return Err(malformed());
    };
    let bindings = bindings.as_list().ok_or_else(malformed)?;
    let mut names: Vec<Symbol> = Vec::with_capacity(bindings.len());
    let mut inits = Vec::with_capacity(bindings.len());
    for binding in bindings {
        match binding.as_list() {
            Some([SExpr::Symbol(name), init]) if !names.contains(name) => {
                names.push(name.clone());
                inits.push(init.clone());
            }
            _ => return Err(malformed()),
        }
    }
    Ok(LetParts { names: names.into(), inits, body: body("let", whole, rest)? })
}
