use std::collections::BTreeMap;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use parking_lot::Mutex;

use crate::acl::Message;
use crate::agent::Mailbox;
use crate::sexpr::Symbol;

/// One delivery, in bus order.
#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub seq: u64,
    /// Virtual time of the delivery.
    pub time: u64,
    pub message: Message,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointKind {
    /// An agent stepped by a society.
    Agent,
    /// A queue drained by someone else, such as a TCP session.
    Remote,
}

struct Endpoint {
    kind: EndpointKind,
    mailbox: Mailbox,
}

#[derive(Default)]
struct BusState {
    registry: BTreeMap<Symbol, Endpoint>,
    log: Vec<Delivery>,
    dead: Vec<Delivery>,
    seq: u64,
    clock: u64,
}

/// Routes messages to registered mailboxes. Unknown receivers go to a
/// dead-letter list. Cloning shares the bus.
#[derive(Clone, Default)]
pub struct Bus {
    state: Arc<Mutex<BusState>>,
    in_flight: Arc<AtomicI64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0} is already registered")]
pub struct AlreadyRegistered(pub Symbol);

impl Bus {
    pub fn new() -> Self {
        Bus::default()
    }

    pub fn register(&self, name: Symbol, kind: EndpointKind, mailbox: Mailbox) -> Result<(), AlreadyRegistered> {
        let mut state = self.state.lock();
        if state.registry.contains_key(&name) {
            return Err(AlreadyRegistered(name));
        }
        state.registry.insert(name, Endpoint { kind, mailbox });
        Ok(())
    }

    pub fn is_registered(&self, name: &Symbol) -> bool {
        self.state.lock().registry.contains_key(name)
    }

    pub fn kind(&self, name: &Symbol) -> Option<EndpointKind> {
        self.state.lock().registry.get(name).map(|e| e.kind)
    }

    pub fn mailbox(&self, name: &Symbol) -> Option<Mailbox> {
        self.state.lock().registry.get(name).map(|e| e.mailbox.clone())
    }

    /// Appends `msg` to its receiver's mailbox, or records a dead letter.
    pub fn deliver(&self, msg: Message) {
        let mut state = self.state.lock();
        state.seq += 1;
        let delivery = Delivery { seq: state.seq, time: state.clock, message: msg };
        match state.registry.get(&delivery.message.receiver) {
            Some(endpoint) => {
                if endpoint.kind == EndpointKind::Agent {
                    self.in_flight.fetch_add(1, Ordering::SeqCst);
                }
                endpoint.mailbox.lock().push_back(delivery.message.clone());
                state.log.push(delivery);
            }
            None => {
                log::warn!("dead letter: {}", delivery.message);
                state.dead.push(delivery);
            }
        }
    }

    pub fn deliveries(&self) -> Vec<Delivery> {
        self.state.lock().log.clone()
    }

    pub fn dead_letters(&self) -> Vec<Delivery> {
        self.state.lock().dead.clone()
    }

    pub fn clock(&self) -> u64 {
        self.state.lock().clock
    }

    pub(crate) fn set_clock(&self, time: u64) {
        self.state.lock().clock = time;
    }

    /// Messages delivered to agents and not yet fully processed.
    pub fn in_flight(&self) -> i64 {
        self.in_flight.load(Ordering::SeqCst)
    }

    pub(crate) fn processed(&self) {
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}
