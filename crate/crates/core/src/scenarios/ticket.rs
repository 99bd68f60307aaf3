//! A client builds a ticket search with the railway agent one constraint
//! at a time.

use std::collections::BTreeSet;

use crate::acl::{self, Message};
use crate::agent::{Agent, Behavior, ConversationState, Intercept};
use crate::amb::{drive_in, Limits};
use crate::sexpr::{read, SExpr, Symbol};
use crate::transport::{Scheduler, Society, SocietyError};

use super::transcript::Transcript;
use super::RunOptions;

pub const NAME: &str = "ticket";
pub const GOLDEN: &str = include_str!("../../golden/ticket.txt");
pub const SELLER: &str = "sncf";
pub const CLIENT: &str = "client";

/// Searchable slots of a ticket.
pub const SLOTS: [&str; 4] = ["depart", "dest", "prix", "date"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TicketRow {
    pub train: i64,
    pub depart: &'static str,
    pub dest: &'static str,
    pub prix: i64,
    /// Minutes since midnight today.
    pub minutes: i64,
    pub label: &'static str,
}

const fn row(train: i64, depart: &'static str, dest: &'static str, prix: i64, minutes: i64, label: &'static str) -> TicketRow {
    TicketRow { train, depart, dest, prix, minutes, label }
}

/// The catalog in search order.
pub const CATALOG: [TicketRow; 8] = [
    row(34170, "montpellier", "paris", 150, 2010, "dem9H30"),
    row(34730, "montpellier", "paris", 95, 1961, "dem8H41"),
    row(34500, "montpellier", "lyon", 60, 1980, "dem9H00"),
    row(34392, "montpellier", "paris", 98, 1995, "dem9H15"),
    row(34620, "paris", "montpellier", 90, 1990, "dem9H10"),
    row(34810, "montpellier", "paris", 80, 2100, "dem11H00"),
    row(34900, "montpellier", "montpellier", 50, 1970, "dem8H50"),
    row(34214, "lyon", "paris", 70, 2000, "dem9H20"),
];

/// Named dates that are not departure times of a catalog row.
pub const DATE_ALIASES: [(&str, i64); 1] = [("demain10H", 2040)];

pub const CITIES: [&str; 3] = ["montpellier", "paris", "lyon"];

fn parse(src: &str) -> SExpr {
    read(src).expect("scenario source parses")
}

/// Catalog, city and date constants for the seller's global environment.
pub fn seller_seeds() -> Vec<SExpr> {
    let rows: Vec<String> = CATALOG
        .iter()
        .map(|r| format!("({} {} {} {} {} {})", r.train, r.depart, r.dest, r.prix, r.minutes, r.label))
        .collect();
    let mut seeds = vec![parse(&format!("(define *catalog* '({}))", rows.join(" ")))];
    for city in CITIES {
        seeds.push(parse(&format!("(define {city} '{city})")));
    }
    let mut dates: Vec<(&str, i64)> = CATALOG.iter().map(|r| (r.label, r.minutes)).collect();
    dates.extend(DATE_ALIASES);
    for (label, minutes) in dates {
        seeds.push(parse(&format!("(define {label} {minutes})")));
    }
    seeds
}

/// The search procedure with `constraints` spliced in after the built-in
/// one.
pub fn find_ticket_definition(constraints: &[SExpr]) -> SExpr {
    let requires: Vec<String> = constraints.iter().map(SExpr::to_string).collect();
    parse(&format!(
        "(define (find-ticket)
           (let ((ticket (an-element-of *catalog*)))
             (let ((depart (car (cdr ticket)))
                   (dest (car (cdr (cdr ticket))))
                   (prix (car (cdr (cdr (cdr ticket)))))
                   (date (car (cdr (cdr (cdr (cdr ticket))))))
                   (label (car (cdr (cdr (cdr (cdr (cdr ticket))))))))
               (require (not (eq? depart dest)))
               {}
               (list (list 'depart depart) (list 'destination dest) (list 'prix prix) (list 'date label)))))",
        requires.join("\n               ")
    ))
}

/// The literal four-slot cross-product formulation over value sets. It
/// pairs every price with every date, so it cannot give the catalog's
/// answers; shipped for comparison only.
pub const CROSS_PRODUCT_DEMO: &str = "\
(define *ens-ville* '(montpellier paris lyon))
(define *ens-prix* '(150 98 95))
(define *ens-date* '(2010 1995 1961))
(define (find-ticket)
  (let ((depart (an-element-of *ens-ville*))
        (dest (an-element-of *ens-ville*))
        (prix (an-element-of *ens-prix*))
        (date (an-element-of *ens-date*)))
    (require (not (eq? depart dest)))
    (require (eq? depart 'montpellier))
    (require (eq? dest 'paris))
    (list (list 'depart depart) (list 'destination dest) (list 'prix prix) (list 'date date))))
";

fn error(tag: &'static str) -> SExpr {
    SExpr::list(vec![SExpr::sym("error"), SExpr::sym(tag)])
}

fn free_symbols(expr: &SExpr, out: &mut BTreeSet<Symbol>) {
    match expr {
        SExpr::Symbol(s) => {
            out.insert(s.clone());
        }
        SExpr::List(_) if expr.is_form("quote") => {}
        SExpr::List(items) => items.iter().for_each(|e| free_symbols(e, out)),
        _ => {}
    }
}

/// Checks a `(require <predicate>)` template: every symbol must be a slot or
/// bound in `env`.
pub fn validate_template(template: &SExpr, conv: &ConversationState) -> Result<(), SExpr> {
    let Some([SExpr::Symbol(head), predicate]) = template.as_list() else {
        return Err(error("malformed-constraint"));
    };
    if head != "require" {
        return Err(error("malformed-constraint"));
    }
    let mut symbols = BTreeSet::new();
    free_symbols(predicate, &mut symbols);
    let unknown = symbols.iter().any(|s| !SLOTS.contains(&s.as_str()) && !conv.env.is_bound(s));
    if unknown {
        Err(error("unknown-slot"))
    } else {
        Ok(())
    }
}

/// The seller's host-side behavior: collects constraints and keeps
/// `find-ticket` in step with them.
#[derive(Default)]
pub struct TicketBehavior;

impl TicketBehavior {
    fn regenerate(conv: &mut ConversationState, limits: Limits) -> Result<(), SExpr> {
        let definition = find_ticket_definition(&conv.pending_constraints.templates);
        drive_in(&definition, &conv.env, &conv.env, limits).map_err(|e| acl::error_content(&e))?;
        conv.pending_constraints.dirty = false;
        conv.resume = None;
        Ok(())
    }
}

fn is_try_again(content: &SExpr) -> bool {
    match content {
        SExpr::Symbol(s) => s == "try-again",
        other => matches!(other.as_list(), Some([SExpr::Symbol(s)]) if s == "try-again"),
    }
}

impl Behavior for TicketBehavior {
    fn intercept(&mut self, conv: &mut ConversationState, msg: Message, limits: Limits) -> Intercept {
        let find = parse("(find-ticket)");
        match msg.performative.as_str() {
            "assertion" if msg.content.is_form("require") => {
                let reply = match validate_template(&msg.content, conv) {
                    Ok(()) => {
                        conv.pending_constraints.push(msg.content.clone());
                        SExpr::sym("ok")
                    }
                    Err(e) => e,
                };
                Intercept::Reply(vec![msg.reply(Symbol::from_static("ack"), reply)])
            }
            "order" if msg.content == find || (is_try_again(&msg.content) && conv.pending_constraints.dirty) => {
                let stale = conv.pending_constraints.dirty || !conv.env.is_bound(&Symbol::from_static("find-ticket"));
                if stale {
                    if let Err(e) = Self::regenerate(conv, limits) {
                        return Intercept::Reply(vec![msg.reply(Symbol::from_static("executed"), e)]);
                    }
                }
                Intercept::Continue(Message { content: find, ..msg })
            }
            _ => Intercept::Continue(msg),
        }
    }
}

/// The client's turns. Constraints travel as assertions.
pub fn script() -> Vec<Message> {
    let c = |perf: &str, content: &str| Message::build(perf, CLIENT, SELLER, parse(content));
    vec![
        c("assertion", "(require (eq? depart montpellier))"),
        c("assertion", "(require (eq? dest paris))"),
        c("assertion", "(require (< date demain10H))"),
        c("order", "(find-ticket)"),
        c("assertion", "(require (< prix 100))"),
        c("order", "(find-ticket)"),
        c("order", "(try-again)"),
    ]
}

pub fn society(scheduler: Scheduler) -> Result<Society, SocietyError> {
    let mut society = Society::new().with_scheduler(scheduler);
    society.spawn(CLIENT, &[])?;
    let seller = Agent::spawn(Symbol::from_static(SELLER), &seller_seeds())?;
    society.add(seller.with_behavior(Box::new(TicketBehavior)))?;
    Ok(society)
}

pub struct Run {
    pub society: Society,
    pub transcript: Transcript,
    /// Content of every `executed` reply to the client, in order.
    pub solutions: Vec<SExpr>,
}

/// `executed` contents sent by the seller to the client.
pub fn solutions(society: &Society) -> Vec<SExpr> {
    society
        .deliveries()
        .iter()
        .filter(|d| d.message.sender == SELLER && d.message.performative == "executed")
        .map(|d| d.message.content.clone())
        .collect()
}

pub fn run(opts: RunOptions) -> Result<Run, SocietyError> {
    let mut society = society(opts.scheduler)?;
    society.set_limits(opts.limits);
    for msg in script() {
        society.send_as(msg);
        society.run_until_quiescent()?;
    }
    let solutions = solutions(&society);
    let extra = vec![SExpr::list(
        std::iter::once(SExpr::sym("solutions")).chain(solutions.iter().cloned()).collect(),
    )];
    let transcript = Transcript::from_society(NAME, &society, extra);
    Ok(Run { society, transcript, solutions })
}
