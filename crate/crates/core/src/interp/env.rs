//! First-class environments whose bindings keep every value they have held.
//!
//! A binding is `(var val1 ... valn)`: defining or assigning appends to the
//! history and lookup returns the newest entry.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;

use super::error::EvalError;
use super::value::{Lambda, Procedure, TaughtForm, Value};
use crate::sexpr::Symbol;

static NEXT_ENV_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone)]
pub struct Env(Arc<EnvNode>);

struct EnvNode {
    id: u64,
    frame: Mutex<BTreeMap<Symbol, Vec<Value>>>,
    parent: Option<Env>,
}

impl Env {
    /// A root environment with no bindings.
    pub fn new() -> Env {
        Env::with_parent(None)
    }

    fn with_parent(parent: Option<Env>) -> Env {
        Env(Arc::new(EnvNode {
            id: NEXT_ENV_ID.fetch_add(1, Ordering::Relaxed),
            frame: Mutex::new(BTreeMap::new()),
            parent,
        }))
    }

    /// A new empty frame whose parent is `self`.
    pub fn extend(&self) -> Env {
        Env::with_parent(Some(self.clone()))
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn parent(&self) -> Option<&Env> {
        self.0.parent.as_ref()
    }

    pub fn ptr_eq(&self, other: &Env) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Binds `name` in this frame. Redefinition appends to the history.
    pub fn define(&self, name: Symbol, value: Value) {
        self.0.frame.lock().entry(name).or_default().push(value);
    }

    /// Appends `value` to the innermost binding of `name`.
    pub fn set(&self, name: &Symbol, value: Value) -> Result<(), EvalError> {
        let mut env = self;
        loop {
            if let Some(history) = env.0.frame.lock().get_mut(name) {
                history.push(value);
                return Ok(());
            }
            match &env.0.parent {
                Some(parent) => env = parent,
                None => return Err(EvalError::Unbound(name.clone())),
            }
        }
    }

    pub fn lookup(&self, name: &Symbol) -> Result<Value, EvalError> {
        self.find(name, |history| history.last().cloned().expect("history is never empty"))
    }

    /// Full history of the innermost binding of `name`, oldest first.
    pub fn history(&self, name: &Symbol) -> Result<Vec<Value>, EvalError> {
        self.find(name, |history| history.clone())
    }

    pub fn is_bound(&self, name: &Symbol) -> bool {
        self.find(name, |_| ()).is_ok()
    }

    /// True when `name` is bound in this frame (not a parent).
    pub fn binds_locally(&self, name: &Symbol) -> bool {
        self.0.frame.lock().contains_key(name)
    }

    fn find<T>(&self, name: &Symbol, read: impl Fn(&Vec<Value>) -> T) -> Result<T, EvalError> {
        let mut env = self;
        loop {
            if let Some(history) = env.0.frame.lock().get(name) {
                return Ok(read(history));
            }
            match &env.0.parent {
                Some(parent) => env = parent,
                None => return Err(EvalError::Unbound(name.clone())),
            }
        }
    }

    /// Names bound in this frame, sorted.
    pub fn local_names(&self) -> Vec<Symbol> {
        self.0.frame.lock().keys().cloned().collect()
    }

    /// Deep copy of the whole frame chain and of every environment reachable
    /// through closures stored in it. Closures in the copy point into the
    /// copied chain, so mutating either side is never visible in the other.
    pub fn deep_clone(&self) -> Env {
        Cloner::default().env(self)
    }

    /// Structural picture of the frame chain, innermost first. Procedures are
    /// rendered with their parameters and body, not their identity.
    pub fn snapshot(&self) -> Vec<FrameSnapshot> {
        let mut out = Vec::new();
        let mut env = Some(self);
        while let Some(e) = env {
            let bindings = e
                .0
                .frame
                .lock()
                .iter()
                .map(|(name, history)| (name.clone(), history.iter().map(render_for_snapshot).collect()))
                .collect();
            out.push(FrameSnapshot { bindings });
            env = e.parent();
        }
        out
    }
}

impl Default for Env {
    fn default() -> Self {
        Env::new()
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#<env {}>", self.0.id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSnapshot {
    pub bindings: Vec<(Symbol, Vec<String>)>,
}

fn render_for_snapshot(value: &Value) -> String {
    match value {
        Value::Procedure(p) => match &**p {
            Procedure::Compound(l) => {
                let params: Vec<_> = l.params.iter().map(Symbol::to_string).collect();
                let body: Vec<_> = l.body.iter().map(|b| b.to_string()).collect();
                format!("#<lambda {} ({}) {}>", p.name(), params.join(" "), body.join(" "))
            }
            _ => value.to_string(),
        },
        Value::List(items) => {
            let inner: Vec<_> = items.iter().map(render_for_snapshot).collect();
            format!("({})", inner.join(" "))
        }
        Value::Form(form) => format!("#<form {} {}>", form.name, render_for_snapshot(&form.expander)),
        other => other.to_string(),
    }
}

#[derive(Default)]
struct Cloner {
    envs: HashMap<*const EnvNode, Env>,
    procedures: HashMap<*const Procedure, Arc<Procedure>>,
}

impl Cloner {
    fn env(&mut self, env: &Env) -> Env {
        let key = Arc::as_ptr(&env.0);
        if let Some(done) = self.envs.get(&key) {
            return done.clone();
        }
        let parent = env.0.parent.as_ref().map(|p| self.env(p));
        let copy = Env::with_parent(parent);
        // Registered before copying values so cycles through closures that
        // capture this very frame resolve to the copy.
        self.envs.insert(key, copy.clone());
        let source: Vec<(Symbol, Vec<Value>)> =
            env.0.frame.lock().iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let copied: BTreeMap<Symbol, Vec<Value>> = source
            .into_iter()
            .map(|(name, history)| (name, history.iter().map(|v| self.value(v)).collect()))
            .collect();
        *copy.0.frame.lock() = copied;
        copy
    }

    fn value(&mut self, value: &Value) -> Value {
        match value {
            Value::Procedure(p) => Value::Procedure(self.procedure(p)),
            Value::List(items) => Value::List(items.iter().map(|v| self.value(v)).collect()),
            Value::Form(form) => Value::Form(Arc::new(TaughtForm {
                name: form.name.clone(),
                expander: self.value(&form.expander),
            })),
            other => other.clone(),
        }
    }

    fn procedure(&mut self, p: &Arc<Procedure>) -> Arc<Procedure> {
        let key = Arc::as_ptr(p);
        if let Some(done) = self.procedures.get(&key) {
            return done.clone();
        }
        let copy = match &**p {
            Procedure::Compound(l) => Arc::new(Procedure::Compound(Lambda {
                name: l.name.clone(),
                params: l.params.clone(),
                body: l.body.clone(),
                env: self.env(&l.env),
            })),
            _ => p.clone(),
        };
        self.procedures.insert(key, copy.clone());
        copy
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{evaluate, standard_env};
    use crate::sexpr::read;
    use proptest::prelude::*;

    fn s(name: &str) -> Symbol {
        Symbol::new(name).unwrap()
    }

    fn ints(values: &[i64]) -> Vec<Value> {
        values.iter().map(|&i| Value::int(i)).collect()
    }

    #[test]
    fn define_then_lookup() {
        let env = Env::new();
        env.define(s("x"), Value::int(1));
        assert_eq!(env.lookup(&s("x")).unwrap(), Value::int(1));
    }

    #[test]
    fn redefine_appends_history() {
        let env = Env::new();
        env.define(s("x"), Value::int(1));
        env.define(s("x"), Value::int(5));
        assert_eq!(env.lookup(&s("x")).unwrap(), Value::int(5));
        assert_eq!(env.history(&s("x")).unwrap(), ints(&[1, 5]));
    }

    #[test]
    fn define_procedure() {
        let env = standard_env();
        evaluate(&read("(define (square x) (* x x))").unwrap(), &env).unwrap();
        let square = env.lookup(&s("square")).unwrap();
        assert!(matches!(&square, Value::Procedure(p) if matches!(&**p, Procedure::Compound(l) if l.params.len() == 1)));
    }

    #[test]
    fn set_appends_to_history() {
        let env = Env::new();
        env.define(s("x"), Value::int(1));
        env.set(&s("x"), Value::int(2)).unwrap();
        env.set(&s("x"), Value::int(3)).unwrap();
        assert_eq!(env.lookup(&s("x")).unwrap(), Value::int(3));
        assert_eq!(env.history(&s("x")).unwrap(), ints(&[1, 2, 3]));
    }

    #[test]
    fn set_unbound_is_an_error() {
        let env = Env::new();
        assert_eq!(env.set(&s("y"), Value::int(1)), Err(EvalError::Unbound(s("y"))));
    }

    #[test]
    fn set_reaches_outer_frame() {
        let outer = Env::new();
        outer.define(s("x"), Value::int(1));
        let inner = outer.extend();
        inner.set(&s("x"), Value::int(2)).unwrap();
        assert_eq!(outer.history(&s("x")).unwrap(), ints(&[1, 2]));
        assert!(!inner.binds_locally(&s("x")));
    }

    #[test]
    fn shadowing() {
        let outer = Env::new();
        outer.define(s("x"), Value::int(1));
        outer.define(s("x"), Value::int(2));
        let inner = outer.extend();
        inner.define(s("x"), Value::int(9));
        assert_eq!(inner.lookup(&s("x")).unwrap(), Value::int(9));
        assert_eq!(inner.history(&s("x")).unwrap(), ints(&[9]));
        assert_eq!(outer.lookup(&s("x")).unwrap(), Value::int(2));
        assert_eq!(Env::new().lookup(&s("x")), Err(EvalError::Unbound(s("x"))));
    }

    #[test]
    fn clone_isolates_data() {
        let env = Env::new();
        env.define(s("x"), Value::int(1));
        let copy = env.deep_clone();
        copy.set(&s("x"), Value::int(2)).unwrap();
        assert_eq!(env.history(&s("x")).unwrap(), ints(&[1]));
        assert_eq!(copy.history(&s("x")).unwrap(), ints(&[1, 2]));
        assert_ne!(env.id(), copy.id());
    }

    #[test]
    fn clone_remaps_closures() {
        let env = standard_env();
        let run = |e: &Env, src: &str| evaluate(&read(src).unwrap(), e).unwrap();
        run(&env, "(define k 2)");
        run(&env, "(define (scale x) (* k x))");
        let copy = env.deep_clone();
        run(&copy, "(set! k 10)");
        run(&copy, "(define (square x) (* x x))");
        assert_eq!(run(&env, "(scale 3)"), Value::int(6));
        assert_eq!(run(&copy, "(scale 3)"), Value::int(30));
        assert!(!env.is_bound(&s("square")));
    }

    #[test]
    fn clone_then_redefine_keeps_original_behaviour() {
        let env = standard_env();
        let run = |e: &Env, src: &str| evaluate(&read(src).unwrap(), e).unwrap();
        run(&env, "(define (square x) (* x x))");
        let copy = env.deep_clone();
        run(&copy, "(define (square x) (+ x x))");
        assert_eq!(run(&env, "(square 5)"), Value::int(25));
        assert_eq!(run(&copy, "(square 5)"), Value::int(10));
    }

    #[test]
    fn clone_of_empty_env() {
        let copy = Env::new().deep_clone();
        assert!(copy.local_names().is_empty());
        assert!(copy.parent().is_none());
    }

    #[test]
    fn clone_handles_self_referencing_closures() {
        let env = standard_env();
        let run = |e: &Env, src: &str| evaluate(&read(src).unwrap(), e).unwrap();
        run(&env, "(define (count n) (if (= n 0) 0 (+ 1 (count (- n 1)))))");
        let copy = env.deep_clone();
        run(&copy, "(define (count n) 42)");
        assert_eq!(run(&env, "(count 3)"), Value::int(3));
        assert_eq!(env.snapshot().len(), copy.snapshot().len());
    }

    #[derive(Debug, Clone)]
    enum Mutation {
        Define(usize, i64),
        Set(usize, i64),
        DefineInner(usize, i64),
        Redefine(usize),
    }

    const NAMES: [&str; 4] = ["a", "b", "c", "d"];

    fn arb_mutation() -> impl Strategy<Value = Mutation> {
        prop_oneof![
            (0..4usize, -50..50i64).prop_map(|(n, v)| Mutation::Define(n, v)),
            (0..4usize, -50..50i64).prop_map(|(n, v)| Mutation::Set(n, v)),
            (0..4usize, -50..50i64).prop_map(|(n, v)| Mutation::DefineInner(n, v)),
            (0..4usize).prop_map(Mutation::Redefine),
        ]
    }

    fn apply(env: &Env, inner: &Env, m: &Mutation) {
        match m {
            Mutation::Define(n, v) => env.define(s(NAMES[*n]), Value::int(*v)),
            Mutation::Set(n, v) => {
                let _ = inner.set(&s(NAMES[*n]), Value::int(*v));
            }
            Mutation::DefineInner(n, v) => inner.define(s(NAMES[*n]), Value::int(*v)),
            Mutation::Redefine(n) => {
                let src = format!("(define ({} x) (+ x {}))", NAMES[*n], n);
                evaluate(&read(&src).unwrap(), env).unwrap();
            }
        }
    }

    proptest! {
        #[test]
        fn lookup_is_last_of_history(script in prop::collection::vec(arb_mutation(), 0..40)) {
            let env = standard_env();
            let inner = env.extend();
            let mut lengths: BTreeMap<(u64, Symbol), usize> = BTreeMap::new();
            for m in &script {
                apply(&env, &inner, m);
                for frame in [&env, &inner] {
                    for name in NAMES.iter().map(|n| s(n)) {
                        if let Ok(history) = frame.history(&name) {
                            prop_assert!(!history.is_empty());
                            prop_assert_eq!(frame.lookup(&name).unwrap(), history.last().unwrap().clone());
                        }
                        if frame.binds_locally(&name) {
                            let len = frame.history(&name).unwrap().len();
                            let prev = lengths.insert((frame.id(), name.clone()), len).unwrap_or(0);
                            prop_assert!(len >= prev);
                        }
                    }
                }
            }
        }

        #[test]
        fn clone_isolation(
            setup in prop::collection::vec(arb_mutation(), 0..15),
            script in prop::collection::vec(arb_mutation(), 0..30),
        ) {
            let env = standard_env();
            let inner = env.extend();
            for m in &setup {
                apply(&env, &inner, m);
            }
            let before = inner.snapshot();
            let copy = inner.deep_clone();
            prop_assert_eq!(copy.snapshot(), before.clone());
            let copy_parent = copy.parent().unwrap().clone();
            for m in &script {
                apply(&copy_parent, &copy, m);
            }
            prop_assert_eq!(inner.snapshot(), before);
        }
    }
}
