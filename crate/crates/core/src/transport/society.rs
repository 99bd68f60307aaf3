//! A set of agents sharing a bus, stepped by a scheduler.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use thiserror::Error;

use super::bus::{AlreadyRegistered, Bus, Delivery, EndpointKind};
use crate::acl::Message;
use crate::agent::{Agent, SpawnError};
use crate::amb::Limits;
use crate::sexpr::{SExpr, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheduler {
    /// One message per agent per round, agents in registration order.
    #[default]
    RoundRobin,
    /// One thread per agent until nothing is in flight.
    Free,
}

#[derive(Debug, Error)]
pub enum SocietyError {
    #[error(transparent)]
    Spawn(#[from] SpawnError),
    #[error("no quiescence after {0} rounds")]
    NoQuiescence(usize),
    #[error("delays need the round-robin scheduler")]
    DelaysNeedRoundRobin,
}

impl From<AlreadyRegistered> for SocietyError {
    fn from(e: AlreadyRegistered) -> Self {
        SocietyError::Spawn(SpawnError::DuplicateName(e.0))
    }
}

struct Scheduled {
    due: u64,
    seq: u64,
    message: Message,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.due, self.seq) == (other.due, other.seq)
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.due, self.seq).cmp(&(other.due, other.seq))
    }
}

pub const DEFAULT_MAX_ROUNDS: usize = 100_000;

pub struct Society {
    bus: Bus,
    agents: Vec<Agent>,
    index: BTreeMap<Symbol, usize>,
    /// Virtual reply delay of each agent, in milliseconds.
    delays: BTreeMap<Symbol, u64>,
    scheduled: BinaryHeap<Reverse<Scheduled>>,
    scheduled_seq: u64,
    scheduler: Scheduler,
    max_rounds: usize,
}

impl Default for Society {
    fn default() -> Self {
        Society::new()
    }
}

impl Society {
    pub fn new() -> Self {
        Society {
            bus: Bus::new(),
            agents: Vec::new(),
            index: BTreeMap::new(),
            delays: BTreeMap::new(),
            scheduled: BinaryHeap::new(),
            scheduled_seq: 0,
            scheduler: Scheduler::RoundRobin,
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }

    pub fn with_scheduler(mut self, scheduler: Scheduler) -> Self {
        self.scheduler = scheduler;
        self
    }

    pub fn scheduler(&self) -> Scheduler {
        self.scheduler
    }

    pub fn bus(&self) -> &Bus {
        &self.bus
    }

    pub fn add(&mut self, agent: Agent) -> Result<(), SocietyError> {
        self.bus.register(agent.name().clone(), EndpointKind::Agent, agent.inbox())?;
        self.index.insert(agent.name().clone(), self.agents.len());
        self.agents.push(agent);
        Ok(())
    }

    /// Spawns and registers an agent. Duplicate names are refused before
    /// anything is evaluated.
    pub fn spawn(&mut self, name: &str, seeds: &[SExpr]) -> Result<&mut Agent, SocietyError> {
        let name = Symbol::new(name).expect("valid agent name");
        if self.bus.is_registered(&name) {
            return Err(SpawnError::DuplicateName(name).into());
        }
        self.add(Agent::spawn(name, seeds)?)?;
        Ok(self.agents.last_mut().expect("just added"))
    }

    pub fn agent(&self, name: &str) -> Option<&Agent> {
        self.index.get(name).map(|&i| &self.agents[i])
    }

    pub fn agent_mut(&mut self, name: &str) -> Option<&mut Agent> {
        self.index.get(name).map(|&i| &mut self.agents[i])
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn set_limits(&mut self, limits: Limits) {
        for agent in &mut self.agents {
            agent.set_limits(limits);
        }
    }

    /// Messages sent by `name` reach their receiver `delay_ms` of virtual
    /// time later.
    pub fn set_delay(&mut self, name: &str, delay_ms: u64) {
        self.delays.insert(Symbol::new(name).expect("valid agent name"), delay_ms);
    }

    pub fn clock(&self) -> u64 {
        self.bus.clock()
    }

    /// Injects a message as if `msg.sender` had sent it, without delay.
    pub fn send_as(&self, msg: Message) {
        self.bus.deliver(msg);
    }

    fn post(&mut self, msg: Message) {
        match self.delays.get(&msg.sender) {
            Some(&delay) if delay > 0 => {
                self.scheduled_seq += 1;
                let due = self.bus.clock() + delay;
                self.scheduled.push(Reverse(Scheduled { due, seq: self.scheduled_seq, message: msg }));
            }
            _ => self.bus.deliver(msg),
        }
    }

    fn release_due(&mut self) {
        let now = self.bus.clock();
        while self.scheduled.peek().is_some_and(|Reverse(s)| s.due <= now) {
            let Reverse(s) = self.scheduled.pop().expect("peeked");
            self.bus.deliver(s.message);
        }
    }

    /// One round: every agent processes at most one message and its output
    /// is posted immediately. Returns the number of messages processed.
    pub fn step_round(&mut self) -> usize {
        self.release_due();
        let mut processed = 0;
        for i in 0..self.agents.len() {
            if self.agents[i].repl_step() {
                processed += 1;
                for out in self.agents[i].take_outbox() {
                    self.post(out);
                }
                self.bus.processed();
            }
        }
        processed
    }

    /// Runs the configured scheduler until no message is pending.
    pub fn run_until_quiescent(&mut self) -> Result<usize, SocietyError> {
        match self.scheduler {
            Scheduler::RoundRobin => self.run_round_robin(),
            Scheduler::Free => self.run_free(),
        }
    }

    fn run_round_robin(&mut self) -> Result<usize, SocietyError> {
        let mut rounds = 0;
        loop {
            if rounds >= self.max_rounds {
                return Err(SocietyError::NoQuiescence(rounds));
            }
            if self.step_round() > 0 {
                rounds += 1;
                continue;
            }
            match self.scheduled.peek() {
                Some(Reverse(next)) => {
                    let due = next.due;
                    self.bus.set_clock(due);
                }
                None => return Ok(rounds),
            }
        }
    }

    /// Steps every agent on its own thread until the bus has nothing in
    /// flight. Output order between agents is not deterministic.
    fn run_free(&mut self) -> Result<usize, SocietyError> {
        if self.delays.values().any(|&d| d > 0) {
            return Err(SocietyError::DelaysNeedRoundRobin);
        }
        let bus = self.bus.clone();
        let done = AtomicBool::new(false);
        let steps = std::sync::atomic::AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for agent in self.agents.iter_mut() {
                let bus = &bus;
                let done = &done;
                let steps = &steps;
                scope.spawn(move || {
                    while !done.load(Ordering::SeqCst) {
                        if agent.repl_step() {
                            for out in agent.take_outbox() {
                                bus.deliver(out);
                            }
                            bus.processed();
                            steps.fetch_add(1, Ordering::SeqCst);
                        } else if bus.in_flight() <= 0 {
                            done.store(true, Ordering::SeqCst);
                        } else {
                            std::thread::sleep(Duration::from_micros(50));
                        }
                    }
                });
            }
        });
        Ok(steps.load(Ordering::SeqCst))
    }

    pub fn deliveries(&self) -> Vec<Delivery> {
        self.bus.deliveries()
    }

    pub fn dead_letters(&self) -> Vec<Delivery> {
        self.bus.dead_letters()
    }
}
