use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use amb_agents::acl::Message;
use amb_agents::agent::{Agent, LogEntry};
use amb_agents::amb::{all_values, drive, prelude_env, Limits, Outcome};
use amb_agents::interp::{standard_env, Env, Value};
use amb_agents::scenarios::{dwelling, grid, teacher_student, ticket, RunOptions};
use amb_agents::transport::Society;
use amb_agents::{evaluate, read, SExpr, Symbol};
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

const DWELLING_BUDGET: Duration = Duration::from_secs(1);
const CORPUS_SIZE: usize = 250;
const MUTATION_SCRIPTS: usize = 200;
const CHOICE_PROGRAMS: usize = 300;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn s(name: &str) -> Symbol {
    Symbol::new(name).unwrap()
}

fn parse(src: &str) -> SExpr {
    read(src).unwrap()
}

fn first_value(expr: &SExpr, env: &Env) -> Result<(Value, amb_agents::amb::ResumeHandle), String> {
    match drive(expr, env).map_err(|e| e.to_string())? {
        Outcome::Value { value, handle } => Ok((value, handle)),
        Outcome::NoMoreValues => Err(format!("no value for {expr}")),
    }
}

fn exhausted(handle: &amb_agents::amb::ResumeHandle) -> bool {
    matches!(handle.resume(), Ok(Outcome::NoMoreValues))
}

fn drive_all(expr: &SExpr, env: &Env) -> Result<Vec<String>, String> {
    all_values(expr, env, Limits::default(), 100_000)
        .map(|vs| vs.iter().map(Value::to_string).collect())
        .map_err(|e| e.to_string())
}

fn dwelling_brute_force() -> Vec<[i64; 5]> {
    (0..5)
        .map(|_| 1..=5i64)
        .multi_cartesian_product()
        .map(|v| [v[0], v[1], v[2], v[3], v[4]])
        .filter(|&[b, c, f, m, s]| {
            [b, c, f, m, s].iter().all_unique()
                && b != 5
                && c != 1
                && f != 5
                && f != 1
                && m > c
                && (s - f).abs() != 1
                && (f - c).abs() != 1
        })
        .collect()
}

fn multiple_dwelling() -> Check {
    let assignments = (0..5).map(|_| 1..=5).multi_cartesian_product().count();
    ensure!(assignments == 3125, "oracle enumerated {assignments} assignments");
    let oracle = dwelling_brute_force();
    ensure!(oracle == [[3, 2, 4, 5, 1]], "oracle solutions {oracle:?}");
    let [b, c, f, m, s] = oracle[0];
    let expected = format!("((baker {b}) (cooper {c}) (fletcher {f}) (miller {m}) (smith {s}))");
    ensure!(expected == dwelling::EXPECTED, "oracle disagrees with the listed result");

    let env = dwelling::dwelling_env().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (value, handle) = first_value(&parse("(multiple-dwelling)"), &env)?;
    let done = exhausted(&handle);
    let elapsed = start.elapsed();
    ensure!(value.to_string() == expected, "drive gave {value}");
    ensure!(done, "resume did not report no-more-values");
    ensure!(elapsed < DWELLING_BUDGET, "took {elapsed:?}");
    Ok(())
}

fn amb_enumeration() -> Check {
    let expected: Vec<String> = [1, 2, 3]
        .iter()
        .cartesian_product(["a", "b"])
        .map(|(n, sym)| format!("({n} {sym})"))
        .collect();
    let env = prelude_env();
    let expr = parse("(list (amb 1 2 3) (amb 'a 'b))");
    let (value, mut handle) = first_value(&expr, &env)?;
    let mut got = vec![value.to_string()];
    while let Outcome::Value { value, handle: next } = handle.resume().map_err(|e| e.to_string())? {
        got.push(value.to_string());
        handle = next;
    }
    ensure!(got == expected, "got {got:?}");
    ensure!(got == ["(1 a)", "(1 b)", "(2 a)", "(2 b)", "(3 a)", "(3 b)"], "order {got:?}");
    Ok(())
}

fn teacher_student_transcript() -> Check {
    let first = teacher_student::run(RunOptions::default()).map_err(|e| e.to_string())?;
    let second = teacher_student::run(RunOptions::default()).map_err(|e| e.to_string())?;
    first.transcript.check(teacher_student::GOLDEN).map_err(|d| d.to_string())?;
    ensure!(first.transcript.render() == second.transcript.render(), "runs differ");
    let flow: Vec<String> = first
        .society
        .deliveries()
        .iter()
        .filter(|d| d.message.sender == "student" || d.message.receiver == "student" && d.message.sender != "teacher")
        .map(|d| format!("{} {} {} {}", d.message.sender, d.message.performative, d.message.receiver, d.message.content))
        .collect();
    let expected = [
        "student ack teacher square",
        "student answer teacher (no-such-performative broadcast)",
        "student ack teacher learn-broadcast-code",
        "student executed teacher ok",
        "student order a1 (square 3)",
        "student order a2 (square 3)",
        "a1 executed student 9",
        "a2 executed student 9",
    ];
    ensure!(flow == expected, "flow {flow:#?}");
    let partners = first.society.agent("student").unwrap().current_partners(Some(&s("teacher")));
    ensure!(partners == [s("a1"), s("a2")], "partners {partners:?}");
    Ok(())
}

fn learning_locality() -> Check {
    let mut run = teacher_student::run(RunOptions::default()).map_err(|e| e.to_string())?;
    let before = run.society.agent("student").unwrap().global_snapshot();
    run.society.spawn("a3", &[]).map_err(|e| e.to_string())?;
    run.society.send_as(Message::build("broadcast", "a3", "student", parse(teacher_student::BROADCAST_CONTENT)));
    run.society.run_until_quiescent().map_err(|e| e.to_string())?;
    let reply = run.society.deliveries().last().unwrap().message.to_string();
    ensure!(reply == "(kqmlmsg answer student a3 (no-such-performative broadcast))", "reply {reply}");
    let student = run.society.agent("student").unwrap();
    ensure!(before == student.global_snapshot(), "global snapshot changed");
    let dispatch = s("ambevaluate-kqmlmsg");
    let global = student.global_inter().history(&dispatch).map_err(|e| e.to_string())?;
    ensure!(global.len() == 1, "global dispatch history {}", global.len());
    Ok(())
}

/// Evaluates a constraint template over one catalog row.
fn row_satisfies(template: &SExpr, row: &ticket::TicketRow) -> bool {
    let SExpr::List(outer) = template else { panic!("bad template {template}") };
    let SExpr::List(pred) = &outer[1] else { panic!("bad predicate {template}") };
    let slot = |e: &SExpr| -> Result<i64, String> {
        match e.to_string().as_str() {
            "prix" => Ok(row.prix),
            "date" => Ok(row.minutes),
            "depart" => Err(row.depart.to_string()),
            "dest" => Err(row.dest.to_string()),
            other => other
                .parse()
                .ok()
                .or_else(|| ticket::DATE_ALIASES.iter().find(|a| a.0 == other).map(|a| a.1))
                .or_else(|| ticket::CATALOG.iter().find(|r| r.label == other).map(|r| r.minutes))
                .ok_or_else(|| other.to_string()),
        }
    };
    let (a, b) = (slot(&pred[1]), slot(&pred[2]));
    match pred[0].to_string().as_str() {
        "eq?" => a == b,
        "<" => a.unwrap() < b.unwrap(),
        ">" => a.unwrap() > b.unwrap(),
        other => panic!("oracle has no {other}"),
    }
}

fn catalog_filter(templates: &[SExpr]) -> Vec<&'static ticket::TicketRow> {
    ticket::CATALOG
        .iter()
        .filter(|row| row.depart != row.dest && templates.iter().all(|t| row_satisfies(t, row)))
        .collect()
}

fn record(row: &ticket::TicketRow) -> String {
    format!("((depart {}) (destination {}) (prix {}) (date {}))", row.depart, row.dest, row.prix, row.label)
}

fn ticket_dialogue() -> Check {
    let run = ticket::run(RunOptions::default()).map_err(|e| e.to_string())?;
    let got: Vec<String> = run.solutions.iter().map(SExpr::to_string).collect();

    let mut active = Vec::new();
    let mut current: Vec<&ticket::TicketRow> = Vec::new();
    let mut cursor = 0;
    let mut oracle = Vec::new();
    for msg in ticket::script() {
        if msg.content.is_form("require") {
            active.push(msg.content.clone());
            continue;
        }
        if msg.content.to_string() == "(find-ticket)" {
            current = catalog_filter(&active);
            cursor = 0;
        } else {
            cursor += 1;
        }
        let row = current.get(cursor).ok_or("oracle ran out of solutions")?;
        ensure!(active.iter().all(|t| row_satisfies(t, row)), "oracle row violates constraints");
        oracle.push(record(row));
    }
    ensure!(got == oracle, "seller {got:#?} oracle {oracle:#?}");
    let prices: Vec<i64> = got
        .iter()
        .map(|r| ticket::CATALOG.iter().find(|row| record(row) == *r).unwrap().prix)
        .collect();
    let dates: Vec<&str> = got
        .iter()
        .map(|r| ticket::CATALOG.iter().find(|row| record(row) == *r).unwrap().label)
        .collect();
    ensure!(prices == [150, 95, 98], "prices {prices:?}");
    ensure!(dates == ["dem9H30", "dem8H41", "dem9H15"], "dates {dates:?}");

    let base: Vec<SExpr> = ticket::script().iter().take(3).map(|m| m.content.clone()).collect();
    let mut narrowed = base.clone();
    narrowed.push(parse("(require (< prix 100))"));
    let (wide, narrow) = (catalog_filter(&base), catalog_filter(&narrowed));
    ensure!(narrow.len() < wide.len(), "no strict shrink: {} vs {}", narrow.len(), wide.len());
    ensure!(narrow.iter().all(|r| wide.iter().any(|w| std::ptr::eq(*w, *r))), "narrowed set is not a subset");
    Ok(())
}

fn history_bindings() -> Check {
    let env = standard_env();
    for src in ["(define x 1)", "(set! x 2)", "(set! x 3)"] {
        evaluate(&parse(src), &env).map_err(|e| e.to_string())?;
    }
    let x = s("x");
    let lookup = env.lookup(&x).map_err(|e| e.to_string())?.to_string();
    let history = Value::list(env.history(&x).map_err(|e| e.to_string())?).to_string();
    ensure!(lookup == "3" && history == "(1 2 3)", "lookup {lookup} history {history}");

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let names = ["a", "b", "c"];
    for script in 0..MUTATION_SCRIPTS {
        let outer = standard_env();
        let inner = outer.extend();
        let frames = [&outer, &inner];
        let mut model: [std::collections::BTreeMap<&str, Vec<i64>>; 2] = Default::default();
        for _ in 0..rng.gen_range(1..30) {
            let name = *names.choose(&mut rng).unwrap();
            let value: i64 = rng.gen_range(-50..50);
            let frame = rng.gen_range(0..2);
            if rng.gen_bool(0.5) {
                evaluate(&parse(&format!("(define {name} {value})")), frames[frame]).map_err(|e| e.to_string())?;
                model[frame].entry(name).or_default().push(value);
            } else {
                let owner = (0..=frame).rev().find(|&f| model[f].contains_key(name));
                let result = evaluate(&parse(&format!("(set! {name} {value})")), frames[frame]);
                match owner {
                    Some(f) => {
                        result.map_err(|e| e.to_string())?;
                        model[f].get_mut(name).unwrap().push(value);
                    }
                    None => ensure!(result.is_err(), "script {script}: set! of unbound {name} succeeded"),
                }
            }
            for (f, env) in frames.iter().enumerate() {
                for name in names {
                    let expected = (0..=f).rev().find_map(|g| model[g].get(name));
                    let sym = s(name);
                    match expected {
                        Some(values) => {
                            let history = env.history(&sym).map_err(|e| e.to_string())?;
                            let lookup = env.lookup(&sym).map_err(|e| e.to_string())?;
                            ensure!(history.last() == Some(&lookup), "script {script}: lookup is not the newest entry");
                            let history: Vec<String> = history.iter().map(Value::to_string).collect();
                            let values: Vec<String> = values.iter().map(i64::to_string).collect();
                            ensure!(history == values, "script {script}: history {history:?} model {values:?}");
                        }
                        None => ensure!(env.lookup(&sym).is_err(), "script {script}: {name} should be unbound"),
                    }
                }
            }
        }
    }
    Ok(())
}

struct Gen {
    rng: ChaCha8Rng,
    fresh: usize,
}

impl Gen {
    fn var(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn lit(&mut self) -> String {
        self.rng.gen_range(-9..10).to_string()
    }

    fn int(&mut self, depth: u32, vars: &[String]) -> String {
        if depth == 0 || self.rng.gen_ratio(1, 5) {
            return match vars.choose(&mut self.rng) {
                Some(v) if self.rng.gen_bool(0.5) => v.clone(),
                _ => self.lit(),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..9) {
            0 => format!("(+ {} {})", self.int(d, vars), self.int(d, vars)),
            1 => format!("(- {} {})", self.int(d, vars), self.int(d, vars)),
            2 => format!("(* {} {})", self.lit(), self.lit()),
            3 => format!("(if {} {} {})", self.boolean(d, vars), self.int(d, vars), self.int(d, vars)),
            4 | 5 => {
                let v = self.var();
                let init = self.int(d, vars);
                let scope = [vars, std::slice::from_ref(&v)].concat();
                if self.rng.gen_bool(0.5) {
                    format!("(let (({v} {init})) {})", self.int(d, &scope))
                } else {
                    format!("((lambda ({v}) {}) {init})", self.int(d, &scope))
                }
            }
            6 => format!("(car (cdr (list {} {})))", self.int(d, vars), self.int(d, vars)),
            7 => {
                let v = self.var();
                let init = self.int(d, vars);
                let scope = [vars, std::slice::from_ref(&v)].concat();
                format!("(begin (define {v} {init}) (set! {v} (+ {v} 1)) {})", self.int(d, &scope))
            }
            _ => {
                let n = self.rng.gen_range(0..30);
                format!("(begin (define (sum n) (if (= n 0) 0 (+ n (sum (- n 1))))) (sum {n}))")
            }
        }
    }

    fn boolean(&mut self, depth: u32, vars: &[String]) -> String {
        let d = depth.saturating_sub(1);
        match self.rng.gen_range(0..6) {
            0 => format!("(< {} {})", self.int(d, vars), self.int(d, vars)),
            1 => format!("(= {} {})", self.int(d, vars), self.int(d, vars)),
            2 => format!("(not {})", self.boolean(d, vars)),
            3 => "(eq? 'x 'x)".to_string(),
            4 => format!("(null? (list {}))", self.int(d, vars)),
            _ => format!("(pair? (cons {} '()))", self.int(d, vars)),
        }
    }

    fn program(&mut self) -> String {
        match self.rng.gen_range(0..4) {
            0 => format!("(list {} {} 'done)", self.int(3, &[]), self.boolean(3, &[])),
            1 => self.boolean(4, &[]),
            _ => self.int(4, &[]),
        }
    }
}

fn evaluator_agreement() -> Check {
    let mut gen = Gen { rng: ChaCha8Rng::seed_from_u64(7), fresh: 0 };
    let corpus: Vec<String> = (0..CORPUS_SIZE).map(|_| gen.program()).collect();
    let distinct = corpus.iter().unique().count();
    ensure!(distinct >= 200, "only {distinct} distinct programs");
    for src in &corpus {
        ensure!(!src.contains("(amb "), "generated program uses amb: {src}");
        let expr = parse(src);
        let expected = evaluate(&expr, &standard_env()).map_err(|e| format!("{src}: {e}"))?;
        let (value, handle) = first_value(&expr, &prelude_env())?;
        ensure!(value.to_string() == expected.to_string(), "{src}: drive {value} evaluate {expected}");
        ensure!(exhausted(&handle), "{src}: resume produced another value");
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
enum Pred {
    Less(usize, usize),
    NotEqual(usize, i64),
    SumAbove(usize, usize, i64),
}

impl Pred {
    fn holds(self, v: &[i64]) -> bool {
        match self {
            Pred::Less(i, j) => v[i] < v[j],
            Pred::NotEqual(i, c) => v[i] != c,
            Pred::SumAbove(i, j, c) => v[i] + v[j] > c,
        }
    }

    fn source(self) -> String {
        match self {
            Pred::Less(i, j) => format!("(require (< c{i} c{j}))"),
            Pred::NotEqual(i, c) => format!("(require (not (= c{i} {c})))"),
            Pred::SumAbove(i, j, c) => format!("(require (> (+ c{i} c{j}) {c}))"),
        }
    }
}

fn backtracking_completeness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..CHOICE_PROGRAMS {
        let points = rng.gen_range(1..=4);
        let choices: Vec<Vec<i64>> =
            (0..points).map(|_| (0..rng.gen_range(1..=4)).map(|_| rng.gen_range(-3..4)).collect()).collect();
        let preds: Vec<Pred> = (0..rng.gen_range(0..=3))
            .map(|_| {
                let (i, j) = (rng.gen_range(0..points), rng.gen_range(0..points));
                match rng.gen_range(0..3) {
                    0 => Pred::Less(i, j),
                    1 => Pred::NotEqual(i, rng.gen_range(-3..4)),
                    _ => Pred::SumAbove(i, j, rng.gen_range(-4..4)),
                }
            })
            .collect();
        let mut body = String::new();
        for (i, alts) in choices.iter().enumerate() {
            body += &format!("(let ((c{i} (amb {}))) ", alts.iter().join(" "));
        }
        body += &preds.iter().map(|p| p.source()).join(" ");
        body += &format!(" (list {})", (0..points).map(|i| format!("c{i}")).join(" "));
        body += &")".repeat(points);

        let oracle: Vec<String> = choices
            .iter()
            .map(|alts| alts.iter().copied())
            .multi_cartesian_product()
            .filter(|v| preds.iter().all(|p| p.holds(v)))
            .map(|v| format!("({})", v.iter().join(" ")))
            .collect();
        let got = drive_all(&parse(&body), &prelude_env())?;
        ensure!(got == oracle, "case {case} {body}: got {got:?} oracle {oracle:?}");
        let (mut a, mut b) = (got.clone(), oracle.clone());
        a.sort();
        b.sort();
        ensure!(a == b, "case {case}: multisets differ");
    }
    Ok(())
}

const LET_STAR_LESSON: [&str; 2] = [
    "(define (let*-expand form)
       (let ((bindings (car (cdr form)))
             (body (cdr (cdr form))))
         (if (null? bindings)
             (cons 'let (cons '() body))
             (list 'let (list (car bindings))
                   (cons 'let* (cons (cdr bindings) body))))))",
    "(register-form 'let* let*-expand)",
];

fn taught_special_form() -> Check {
    let mut agent = Agent::spawn(s("student"), &[]).map_err(|e| e.to_string())?;
    let mut say = |from: &str, perf: &str, content: &str| {
        agent.deliver(Message::build(perf, from, "student", parse(content)));
        agent.run_to_quiescence();
        agent.take_outbox().iter().map(Message::to_string).collect::<Vec<_>>()
    };
    for lesson in LET_STAR_LESSON {
        let reply = say("teacher", "assertion", lesson);
        ensure!(reply.len() == 1 && reply[0].starts_with("(kqmlmsg ack student teacher"), "lesson reply {reply:?}");
        ensure!(!reply[0].contains("(error"), "lesson failed {reply:?}");
    }
    let query = "(let* ((a 1) (b (+ a 1))) b)";
    let taught = say("teacher", "request", query);
    ensure!(taught == ["(kqmlmsg answer student teacher 2)"], "taught {taught:?}");
    let fresh = say("other", "request", query);
    ensure!(fresh == ["(kqmlmsg answer student other (error (unbound-variable let*)))"], "fresh {fresh:?}");
    Ok(())
}

fn fib_iterative(n: u32) -> u64 {
    (0..n).fold((0u64, 1u64), |(a, b), _| (b, a + b)).0
}

fn grid_selection() -> Check {
    let configs = [
        grid::GridConfig::default(),
        grid::GridConfig { delays_ms: vec![40, 40, 5, 300, 20], k: 3, timeout_ms: 200, ..Default::default() },
    ];
    for config in &configs {
        let run = grid::run(config, RunOptions::default()).map_err(|e| e.to_string())?;
        let again = grid::run(config, RunOptions::default()).map_err(|e| e.to_string())?;
        ensure!(run.selected == again.selected, "selection not deterministic");
        ensure!(run.transcript.render() == again.transcript.render(), "transcripts differ");
        let mut by_delay: Vec<(u64, String)> = config
            .delays_ms
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= config.timeout_ms)
            .map(|(i, &d)| (d, format!("w{}", i + 1)))
            .collect();
        by_delay.sort();
        let expected: Vec<String> = by_delay.into_iter().take(config.k).map(|(_, n)| n).collect();
        let selected: Vec<String> = run.selected.iter().map(|n| n.to_string()).collect();
        ensure!(selected == expected, "selected {selected:?} expected {expected:?}");

        let oracle = fib_iterative(config.big_n as u32);
        ensure!(oracle == 6765, "iterative oracle gave {oracle}");
        ensure!(run.results.len() == config.k, "{} results", run.results.len());
        for (worker, value) in &run.results {
            ensure!(value.to_string() == oracle.to_string(), "{worker} returned {value}");
        }
        for (worker, calls) in &run.memo_calls {
            let calls: i64 = calls.to_string().parse().map_err(|_| format!("{worker} memo calls {calls}"))?;
            ensure!(calls <= 21, "{worker} memo calls {calls}");
        }
        for (worker, calls) in &run.naive_calls {
            let calls: i64 = calls.to_string().parse().map_err(|_| format!("{worker} naive calls {calls}"))?;
            ensure!(calls >= 10_000, "{worker} naive calls {calls}");
        }
        ensure!(run.memo_calls.len() == config.k && run.naive_calls.len() == config.k, "missing call counts");
    }
    Ok(())
}

fn logs(society: &Society, name: &str) -> Vec<LogEntry> {
    society.agent(name).map(|a| a.log().to_vec()).unwrap_or_default()
}

fn transport_equivalence() -> Check {
    let local = teacher_student::run(RunOptions::default()).map_err(|e| e.to_string())?;
    let remote = teacher_student::run_over_tcp(RunOptions::default()).map_err(|e| e.to_string())?;
    for name in ["student", "a1", "a2"] {
        let (a, b) = (logs(&local.society, name), logs(&remote.society, name));
        ensure!(!a.is_empty(), "{name} has an empty log");
        ensure!(a == b, "{name} logs differ");
    }
    let teacher_inbox: Vec<String> = local
        .society
        .deliveries()
        .iter()
        .filter(|d| d.message.receiver == "teacher")
        .map(|d| d.message.to_string())
        .collect();
    let received: Vec<String> = remote.received.iter().map(Message::to_string).collect();
    ensure!(received == teacher_inbox, "remote teacher saw {received:#?}");
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("multiple-dwelling", multiple_dwelling),
        ("amb-enumeration", amb_enumeration),
        ("teacher-student-transcript", teacher_student_transcript),
        ("learning-locality", learning_locality),
        ("ticket-dialogue", ticket_dialogue),
        ("history-bindings", history_bindings),
        ("evaluator-agreement", evaluator_agreement),
        ("backtracking-completeness", backtracking_completeness),
        ("taught-special-form", taught_special_form),
        ("grid-selection", grid_selection),
        ("transport-equivalence", transport_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(()) => println!("PASS {:>2} {name}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {reason}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
