//! Agents: a private global environment, a dispatch template, and one
//! conversation (environment plus interpreter) per partner.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use log::{trace, warn};
use parking_lot::Mutex;
use thiserror::Error;

use crate::acl::{self, decode, Message};
use crate::amb::{drive_in, load_prelude, LoadError, Limits, Outcome, ResumeHandle};
use crate::interp::{install_primitives, Env, EvalError, FrameSnapshot, Value};
use crate::sexpr::{SExpr, Symbol};


/// Shared FIFO of incoming messages.
pub type Mailbox = Arc<Mutex<VecDeque<Message>>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub direction: Direction,
    pub message: Message,
    /// Index of the processed message this entry belongs to, from 1.
    pub step: u64,
}

/// Constraint templates accumulated by a scenario hook.
#[derive(Debug, Clone, Default)]
pub struct ConstraintStore {
    pub templates: Vec<SExpr>,
    /// Set when templates changed since the derived program was regenerated.
    pub dirty: bool,
}

impl ConstraintStore {
    pub fn push(&mut self, template: SExpr) {
        self.templates.push(template);
        self.dirty = true;
    }
}

/// The representation of one partner.
pub struct ConversationState {
    pub partner: Symbol,
    /// Clone of the agent's global environment.
    pub env: Env,
    /// This conversation's copy of the dispatch frame; `env` sits on it.
    pub interp: Env,
    /// Handle of the last search that produced replies.
    pub resume: Option<ResumeHandle>,
    pub pending_constraints: ConstraintStore,
}

impl ConversationState {
    fn new(partner: Symbol, global_env: &Env) -> Self {
        let env = global_env.deep_clone();
        let interp = env.parent().expect("global frame sits on the dispatch frame").clone();
        ConversationState { partner, env, interp, resume: None, pending_constraints: ConstraintStore::default() }
    }

    /// History of the dispatch binding in this conversation, oldest first.
    pub fn dispatch_history(&self) -> Vec<Value> {
        self.env.history(&Symbol::from_static(acl::DISPATCH_BINDING)).unwrap_or_default()
    }
}

pub enum Intercept {
    /// Send these messages instead of running the dispatcher.
    Reply(Vec<Message>),
    /// Dispatch this (possibly rewritten) message as usual.
    Continue(Message),
}

/// Host-side hook consulted before the dispatcher.
pub trait Behavior: Send {
    fn intercept(&mut self, conv: &mut ConversationState, msg: Message, limits: Limits) -> Intercept;
}

#[derive(Debug, Error)]
pub enum SpawnError {
    #[error("agent {0} already exists")]
    DuplicateName(Symbol),
    #[error("seed definitions failed: {0}")]
    Seed(#[from] LoadError),
}

pub struct Agent {
    name: Symbol,
    global_env: Env,
    global_inter: Env,
    other: BTreeMap<Symbol, ConversationState>,
    inbox: Mailbox,
    outbox: VecDeque<Message>,
    log: Vec<LogEntry>,
    steps: u64,
    behavior: Option<Box<dyn Behavior>>,
    limits: Limits,
    malformed: u64,
}

impl Agent {
    /// A new agent whose global environment holds the prelude and the seed
    /// definitions, on top of the default dispatch frame.
    pub fn spawn(name: Symbol, seeds: &[SExpr]) -> Result<Agent, SpawnError> {
        let primitives = Env::new();
        install_primitives(&primitives);
        let global_inter = primitives.extend();
        acl::make_default_dispatch(&global_inter)?;
        let global_env = global_inter.extend();
        load_prelude(&global_env)?;
        for seed in seeds {
            drive_in(seed, &global_env, &global_env, Limits::default()).map_err(LoadError::from)?;
        }
        Ok(Agent {
            name,
            global_env,
            global_inter,
            other: BTreeMap::new(),
            inbox: Mailbox::default(),
            outbox: VecDeque::new(),
            log: Vec::new(),
            steps: 0,
            behavior: None,
            limits: Limits::default(),
            malformed: 0,
        })
    }

    pub fn with_behavior(mut self, behavior: Box<dyn Behavior>) -> Self {
        self.behavior = Some(behavior);
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn set_limits(&mut self, limits: Limits) {
        self.limits = limits;
    }

    pub fn name(&self) -> &Symbol {
        &self.name
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn global_env(&self) -> &Env {
        &self.global_env
    }

    pub fn global_inter(&self) -> &Env {
        &self.global_inter
    }

    pub fn global_snapshot(&self) -> Vec<FrameSnapshot> {
        self.global_env.snapshot()
    }

    /// Evaluates `expr` against a throwaway copy of the global environment.
    pub fn query(&self, expr: &SExpr) -> Result<Option<Value>, EvalError> {
        let env = self.global_env.deep_clone();
        Ok(match drive_in(expr, &env, &env, self.limits)? {
            Outcome::Value { value, .. } => Some(value),
            Outcome::NoMoreValues => None,
        })
    }

    pub fn inbox(&self) -> Mailbox {
        self.inbox.clone()
    }

    pub fn deliver(&self, msg: Message) {
        self.inbox.lock().push_back(msg);
    }

    /// Decodes and enqueues one wire line. Malformed lines are logged and
    /// dropped.
    pub fn deliver_line(&mut self, line: &str) -> bool {
        match decode(line) {
            Ok(msg) => {
                self.deliver(msg);
                true
            }
            Err(err) => {
                warn!("{}: dropping malformed line: {err}", self.name);
                self.malformed += 1;
                false
            }
        }
    }

    pub fn malformed_dropped(&self) -> u64 {
        self.malformed
    }

    pub fn take_outbox(&mut self) -> Vec<Message> {
        self.outbox.drain(..).collect()
    }

    pub fn outbox(&self) -> &VecDeque<Message> {
        &self.outbox
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    /// Number of messages processed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn conversation(&self, partner: &Symbol) -> Option<&ConversationState> {
        self.other.get(partner)
    }

    pub fn conversation_mut(&mut self, partner: &Symbol) -> Option<&mut ConversationState> {
        self.other.get_mut(partner)
    }

    /// The existing conversation with `partner`, or a fresh clone of the
    /// global environment and interpreter.
    pub fn get_or_create_conversation(&mut self, partner: &Symbol) -> &mut ConversationState {
        let global = &self.global_env;
        self.other
            .entry(partner.clone())
            .or_insert_with(|| ConversationState::new(partner.clone(), global))
    }

    /// Discards the conversation with `partner`.
    pub fn end_conversation(&mut self, partner: &Symbol) -> bool {
        self.other.remove(partner).is_some()
    }

    /// Partners with a conversation, sorted, minus `requester`.
    pub fn current_partners(&self, requester: Option<&Symbol>) -> Vec<Symbol> {
        self.other.keys().filter(|p| Some(*p) != requester).cloned().collect()
    }

    /// One read-eval-print-listen turn. Returns false when the inbox was empty.
    pub fn repl_step(&mut self) -> bool {
        let Some(msg) = self.inbox.lock().pop_front() else {
            return false;
        };
        self.steps += 1;
        let step = self.steps;
        trace!("{} <- {msg}", self.name);
        self.log.push(LogEntry { direction: Direction::In, message: msg.clone(), step });
        if msg.receiver != self.name {
            warn!("{}: dropping message addressed to {}", self.name, msg.receiver);
            return true;
        }
        let sender = msg.sender.clone();
        let limits = self.limits;
        self.get_or_create_conversation(&sender);
        let partners = self.current_partners(Some(&sender));
        let conv = self.other.get_mut(&sender).expect("conversation was just created");
        let replies = match self.behavior.as_mut() {
            Some(behavior) => match behavior.intercept(conv, msg, limits) {
                Intercept::Reply(replies) => replies,
                Intercept::Continue(msg) => acl::dispatch(conv, &msg, &partners, limits),
            },
            None => acl::dispatch(conv, &msg, &partners, limits),
        };
        for reply in replies {
            trace!("{} -> {reply}", self.name);
            self.log.push(LogEntry { direction: Direction::Out, message: reply.clone(), step });
            self.outbox.push_back(reply);
        }
        true
    }

    /// Steps until the inbox is empty; returns the number of steps taken.
    pub fn run_to_quiescence(&mut self) -> usize {
        let mut n = 0;
        while self.repl_step() {
            n += 1;
        }
        n
    }
}
