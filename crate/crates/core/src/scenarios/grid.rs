//! Choosing fast workers for a heavy computation, then teaching them a
//! memoized Fibonacci.

use crate::acl::{Message, ACTIVATE_BROADCAST, LEARN_BROADCAST_CODE};
use crate::sexpr::{read, SExpr, Symbol};
use crate::transport::{Scheduler, Society, SocietyError};

use super::transcript::Transcript;
use super::RunOptions;

pub const NAME: &str = "grid-selection";
pub const GOLDEN: &str = include_str!("../../golden/grid-selection.txt");
pub const COORDINATOR: &str = "coordinator";
pub const CLIENT: &str = "grid";

/// Naive Fibonacci with a call counter, known to every worker.
pub const WORKER_SEEDS: &str = "\
(define fib-calls 0)
(define (fib n)
  (set! fib-calls (+ fib-calls 1))
  (if (< n 2) n (+ (fib (- n 1)) (fib (- n 2)))))
";

/// Taught to the selected workers, one definition per message.
pub const MEMO_FIB: [&str; 4] = [
    "(define (memo-lookup key table)
       (if (null? table)
           '()
           (if (= (car (car table)) key)
               (cdr (car table))
               (memo-lookup key (cdr table)))))",
    "(define (memoize f)
       (let ((table '()))
         (lambda (n)
           (let ((hit (memo-lookup n table)))
             (if (pair? hit)
                 (car hit)
                 (let ((value (f n)))
                   (set! table (cons (list n value) table))
                   value))))))",
    "(define (fib-step n)
       (set! fib-calls (+ fib-calls 1))
       (if (< n 2) n (+ (memo-fib (- n 1)) (memo-fib (- n 2)))))",
    "(define memo-fib (memoize fib-step))",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridConfig {
    /// Reply delay of each worker; workers are named w1, w2, ...
    pub delays_ms: Vec<u64>,
    pub k: usize,
    pub probe_n: i64,
    pub big_n: i64,
    /// Workers slower than this are never selected.
    pub timeout_ms: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { delays_ms: vec![50, 10, 30], k: 2, probe_n: 10, big_n: 20, timeout_ms: 1_000 }
    }
}

pub struct Run {
    pub society: Society,
    pub transcript: Transcript,
    /// Probe latency per worker; `None` when it timed out.
    pub latencies: Vec<(Symbol, Option<u64>)>,
    pub selected: Vec<Symbol>,
    /// Reply content of each selected worker to the big task.
    pub results: Vec<(Symbol, SExpr)>,
    /// Interpreted calls of the memoized step for the big task.
    pub memo_calls: Vec<(Symbol, SExpr)>,
    /// Interpreted calls of naive `fib` for the same argument.
    pub naive_calls: Vec<(Symbol, SExpr)>,
}

fn parse(src: &str) -> SExpr {
    read(src).expect("scenario source parses")
}

pub fn worker_name(i: usize) -> String {
    format!("w{}", i + 1)
}

/// Lowest latency first, ties by name; timed-out workers are dropped.
pub fn select(latencies: &[(Symbol, Option<u64>)], k: usize, timeout_ms: u64) -> Vec<Symbol> {
    let mut candidates: Vec<(u64, Symbol)> = latencies
        .iter()
        .filter_map(|(name, latency)| latency.filter(|&l| l <= timeout_ms).map(|l| (l, name.clone())))
        .collect();
    candidates.sort();
    candidates.into_iter().take(k).map(|(_, name)| name).collect()
}

pub fn society(config: &GridConfig, scheduler: Scheduler) -> Result<Society, SocietyError> {
    let mut society = Society::new().with_scheduler(scheduler);
    society.spawn(CLIENT, &[])?;
    society.spawn(COORDINATOR, &[])?;
    let seeds = crate::sexpr::read_all(WORKER_SEEDS).expect("worker seeds parse");
    for (i, &delay) in config.delays_ms.iter().enumerate() {
        let name = worker_name(i);
        society.spawn(&name, &seeds)?;
        society.set_delay(&name, delay);
    }
    let coordinator = society.agent_mut(COORDINATOR).expect("spawned");
    for i in 0..config.delays_ms.len() {
        coordinator.get_or_create_conversation(&Symbol::new(&worker_name(i)).expect("valid"));
    }
    Ok(society)
}

fn to_coordinator(perf: &str, content: SExpr) -> Message {
    Message::build(perf, CLIENT, COORDINATOR, content)
}

fn broadcast(perf: &str, content: SExpr) -> Message {
    to_coordinator("broadcast", SExpr::list(vec![SExpr::Symbol(Symbol::new(perf).expect("valid")), content]))
}

fn settle(society: &mut Society, msg: Message) -> Result<u64, SocietyError> {
    let mark = society.deliveries().last().map_or(0, |d| d.seq);
    society.send_as(msg);
    society.run_until_quiescent()?;
    Ok(mark)
}

/// Replies from workers to the coordinator delivered after `mark`.
fn replies_since(society: &Society, mark: u64, performative: &str) -> Vec<(Symbol, SExpr)> {
    society
        .deliveries()
        .into_iter()
        .filter(|d| d.seq > mark && d.message.receiver == COORDINATOR && d.message.performative == performative)
        .map(|d| (d.message.sender, d.message.content))
        .collect()
}

fn latencies(society: &Society, mark: u64, workers: &[Symbol]) -> Vec<(Symbol, Option<u64>)> {
    let deliveries: Vec<_> = society.deliveries().into_iter().filter(|d| d.seq > mark).collect();
    workers
        .iter()
        .map(|w| {
            let sent = deliveries
                .iter()
                .find(|d| &d.message.receiver == w && d.message.sender == COORDINATOR)
                .map(|d| d.time);
            let answered = deliveries
                .iter()
                .find(|d| &d.message.sender == w && d.message.receiver == COORDINATOR)
                .map(|d| d.time);
            let latency = match (sent, answered) {
                (Some(s), Some(a)) => Some(a - s),
                _ => None,
            };
            (w.clone(), latency)
        })
        .collect()
}

pub fn run(config: &GridConfig, opts: RunOptions) -> Result<Run, SocietyError> {
    let mut society = society(config, opts.scheduler)?;
    society.set_limits(opts.limits);
    let workers: Vec<Symbol> =
        (0..config.delays_ms.len()).map(|i| Symbol::new(&worker_name(i)).expect("valid")).collect();

    settle(&mut society, to_coordinator("assertion", parse(LEARN_BROADCAST_CODE)))?;
    settle(&mut society, to_coordinator("order", parse(ACTIVATE_BROADCAST)))?;

    let probe = parse(&format!("(fib {})", config.probe_n));
    let mark = settle(&mut society, broadcast("order", probe))?;
    let latencies = latencies(&society, mark, &workers);
    let selected = select(&latencies, config.k, config.timeout_ms);

    let coordinator = society.agent_mut(COORDINATOR).expect("spawned");
    for w in &workers {
        if !selected.contains(w) {
            coordinator.end_conversation(w);
        }
    }

    for definition in MEMO_FIB {
        settle(&mut society, broadcast("assertion", parse(definition)))?;
    }
    settle(&mut society, broadcast("assertion", parse("(define fib-calls 0)")))?;
    let mark = settle(&mut society, broadcast("order", parse(&format!("(memo-fib {})", config.big_n))))?;
    let results = replies_since(&society, mark, "executed");
    let mark = settle(&mut society, broadcast("request", parse("fib-calls")))?;
    let memo_calls = replies_since(&society, mark, "answer");
    let naive = format!("(begin (define fib-calls 0) (fib {}) fib-calls)", config.big_n);
    let mark = settle(&mut society, broadcast("request", parse(&naive)))?;
    let naive_calls = replies_since(&society, mark, "answer");

    let extra = vec![
        SExpr::list(
            std::iter::once(SExpr::sym("selected")).chain(selected.iter().cloned().map(SExpr::Symbol)).collect(),
        ),
        SExpr::list(
            std::iter::once(SExpr::sym("latencies"))
                .chain(latencies.iter().map(|(w, l)| {
                    SExpr::list(vec![
                        SExpr::Symbol(w.clone()),
                        l.map_or(SExpr::sym("timeout"), |l| SExpr::int(l as i64)),
                    ])
                }))
                .collect(),
        ),
    ];
    let transcript = Transcript::from_society(NAME, &society, extra);
    Ok(Run { society, transcript, latencies, selected, results, memo_calls, naive_calls })
}
