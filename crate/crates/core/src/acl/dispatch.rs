//! Performative dispatch. The dispatcher is object-language code bound to
//! `ambevaluate-kqmlmsg`; the host only calls it and turns its result into
//! messages.

use log::{debug, warn};

use super::message::Message;
use crate::agent::ConversationState;
use crate::amb::{drive_in, load, LoadError, Limits, Outcome, ResumeHandle};
use crate::interp::{Env, EvalError, Value};
use crate::sexpr::{SExpr, Symbol};

/// Name of the binding that interprets incoming messages.
pub const DISPATCH_BINDING: &str = "ambevaluate-kqmlmsg";

/// Default message interpretation. Called with the performative, the sender,
/// the content and the list of other current partners; returns a list of
/// `(reply <performative> <content>)` and
/// `(send <receiver> <performative> <content>)` descriptors.
pub const DEFAULT_DISPATCH: &str = "\
(define (kqml-reply performative content)
  (list (list 'reply performative content)))

(define (assertion-payload content value)
  (if (pair? content)
      (if (eq? (car content) 'define) value 'ok)
      'ok))

(define (acknowledgement? performative)
  (if (eq? performative 'ack)
      #t
      (if (eq? performative 'executed) #t (eq? performative 'answer))))

(define (ambevaluate-kqmlmsg performative sender content partners)
  (if (eq? performative 'assertion)
      (kqml-reply 'ack (assertion-payload content (eval content)))
      (if (eq? performative 'order)
          (kqml-reply 'executed (eval content))
          (if (eq? performative 'request)
              (kqml-reply 'answer (eval content))
              (if (acknowledgement? performative)
                  '()
                  (kqml-reply 'answer (list 'no-such-performative performative)))))))
";

/// Content of the assertion that teaches `broadcast`. The new dispatcher
/// forwards `(perform content')` to every partner and defers everything else
/// to the dispatcher it replaces.
pub const LEARN_BROADCAST_CODE: &str = "\
(define learn-broadcast-code
  (let ((previous ambevaluate-kqmlmsg))
    (lambda (performative sender content partners)
      (define (fan-out targets)
        (if (null? targets)
            '()
            (cons (list 'send (car targets) (car content) (car (cdr content)))
                  (fan-out (cdr targets)))))
      (if (eq? performative 'broadcast)
          (fan-out partners)
          (previous performative sender content partners)))))
";

/// Content of the order that activates the taught dispatcher.
pub const ACTIVATE_BROADCAST: &str = "(set! ambevaluate-kqmlmsg learn-broadcast-code)";

/// Installs the default dispatcher as interpreted definitions in `env`.
pub fn make_default_dispatch(env: &Env) -> Result<(), LoadError> {
    load(env, DEFAULT_DISPATCH)
}

fn sym(s: &'static str) -> Symbol {
    Symbol::from_static(s)
}

/// Performatives that answer something. Host-level failures are never
/// replied to when the incoming message is one of these.
pub fn is_acknowledgement(performative: &Symbol) -> bool {
    matches!(performative.as_str(), "ack" | "executed" | "answer")
}

/// Reply performative used when the host itself has to answer.
pub fn reply_performative(incoming: &Symbol) -> Symbol {
    match incoming.as_str() {
        "assertion" => sym("ack"),
        "order" => sym("executed"),
        _ => sym("answer"),
    }
}

/// `(error <description>)`.
pub fn error_content(err: &EvalError) -> SExpr {
    SExpr::list(vec![SExpr::sym("error"), err.to_sexpr()])
}

fn is_try_again(msg: &Message) -> bool {
    matches!(msg.performative.as_str(), "order" | "request")
        && match &msg.content {
            SExpr::Symbol(s) => s == "try-again",
            SExpr::List(items) => matches!(&items[..], [SExpr::Symbol(s)] if s == "try-again"),
            _ => false,
        }
}

/// Interprets `msg` in the conversation. Never fails: evaluation errors and
/// exhausted searches become replies.
pub fn dispatch(conv: &mut ConversationState, msg: &Message, partners: &[Symbol], limits: Limits) -> Vec<Message> {
    let result = if is_try_again(msg) {
        match conv.resume.take() {
            Some(handle) => handle.resume(),
            None => {
                let nothing = SExpr::list(vec![SExpr::sym("error"), SExpr::sym("nothing-to-resume")]);
                return vec![msg.reply(reply_performative(&msg.performative), nothing)];
            }
        }
    } else {
        drive_in(&dispatch_call(msg, partners), &conv.env, &conv.env, limits)
    };
    deliver(conv, msg, result)
}

/// Handles a search outcome the way `dispatch` does; for hooks that drive
/// the conversation themselves.
pub fn deliver(conv: &mut ConversationState, msg: &Message, result: Result<Outcome, EvalError>) -> Vec<Message> {
    let host_reply = |content: SExpr| {
        if is_acknowledgement(&msg.performative) {
            warn!("dropping failure on {} from {}: {content}", msg.performative, msg.sender);
            Vec::new()
        } else {
            vec![msg.reply(reply_performative(&msg.performative), content)]
        }
    };
    match result {
        Ok(Outcome::Value { value, handle }) => match descriptors(msg, &value) {
            Ok(out) => {
                if !out.is_empty() {
                    conv.resume = Some(handle);
                }
                out
            }
            Err(bad) => {
                conv.resume = None;
                host_reply(SExpr::list(vec![
                    SExpr::sym("error"),
                    SExpr::list(vec![SExpr::sym("bad-dispatch-result"), bad]),
                ]))
            }
        },
        Ok(Outcome::NoMoreValues) => {
            conv.resume = Some(ResumeHandle::exhausted());
            host_reply(SExpr::sym("no-more-values"))
        }
        Err(err) => {
            debug!("evaluation error for {} from {}: {err}", msg.performative, msg.sender);
            conv.resume = None;
            host_reply(error_content(&err))
        }
    }
}

fn quoted(expr: SExpr) -> SExpr {
    SExpr::list(vec![SExpr::sym("quote"), expr])
}

fn dispatch_call(msg: &Message, partners: &[Symbol]) -> SExpr {
    SExpr::list(vec![
        SExpr::sym(DISPATCH_BINDING),
        quoted(SExpr::Symbol(msg.performative.clone())),
        quoted(SExpr::Symbol(msg.sender.clone())),
        quoted(msg.content.clone()),
        quoted(SExpr::list(partners.iter().cloned().map(SExpr::Symbol).collect())),
    ])
}

fn descriptors(msg: &Message, value: &Value) -> Result<Vec<Message>, SExpr> {
    let bad = || value.to_sexpr();
    let items = value.as_list().ok_or_else(bad)?;
    items
        .iter()
        .map(|item| match item.as_list() {
            Some([Value::Symbol(tag), Value::Symbol(perf), content]) if tag == "reply" => {
                Ok(msg.reply(perf.clone(), content.to_sexpr()))
            }
            Some([Value::Symbol(tag), Value::Symbol(to), Value::Symbol(perf), content]) if tag == "send" => {
                Ok(Message::new(perf.clone(), msg.receiver.clone(), to.clone(), content.to_sexpr()))
            }
            _ => Err(bad()),
        })
        .collect()
}
