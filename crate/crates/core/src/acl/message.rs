use std::fmt;

use thiserror::Error;

use crate::sexpr::{read, ParseError, SExpr, Symbol};

/// One agent-communication message.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub performative: Symbol,
    pub sender: Symbol,
    pub receiver: Symbol,
    pub content: SExpr,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MalformedMessage {
    #[error("unreadable message: {0}")]
    Parse(#[from] ParseError),
    #[error("not a kqmlmsg: {0}")]
    Shape(SExpr),
}

impl Message {
    pub fn new(performative: Symbol, sender: Symbol, receiver: Symbol, content: SExpr) -> Self {
        Message { performative, sender, receiver, content }
    }

    /// Parses the textual names; panics on invalid symbols. Meant for tests
    /// and fixtures.
    pub fn build(performative: &str, sender: &str, receiver: &str, content: SExpr) -> Self {
        let sym = |s: &str| Symbol::new(s).expect("valid symbol");
        Message::new(sym(performative), sym(sender), sym(receiver), content)
    }

    pub fn to_sexpr(&self) -> SExpr {
        SExpr::list(vec![
            SExpr::sym("kqmlmsg"),
            SExpr::Symbol(self.performative.clone()),
            SExpr::Symbol(self.sender.clone()),
            SExpr::Symbol(self.receiver.clone()),
            self.content.clone(),
        ])
    }

    pub fn from_sexpr(expr: &SExpr) -> Result<Self, MalformedMessage> {
        match expr.as_list() {
            Some([SExpr::Symbol(head), SExpr::Symbol(perf), SExpr::Symbol(sender), SExpr::Symbol(receiver), content])
                if head == "kqmlmsg" =>
            {
                Ok(Message::new(perf.clone(), sender.clone(), receiver.clone(), content.clone()))
            }
            _ => Err(MalformedMessage::Shape(expr.clone())),
        }
    }

    /// The same message with sender and receiver set for a reply.
    pub fn reply(&self, performative: Symbol, content: SExpr) -> Message {
        Message::new(performative, self.receiver.clone(), self.sender.clone(), content)
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_sexpr().fmt(f)
    }
}

/// Wire form: the canonical text of the message followed by a newline.
pub fn encode(msg: &Message) -> String {
    format!("{msg}\n")
}

/// Parses one wire line. A trailing newline is accepted.
pub fn decode(line: &str) -> Result<Message, MalformedMessage> {
    Message::from_sexpr(&read(line)?)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn encodes_the_fig_shape() {
        let msg = Message::build("assertion", "teacher", "student", read("(define (square x) (* x x))").unwrap());
        assert_eq!(encode(&msg), "(kqmlmsg assertion teacher student (define (square x) (* x x)))\n");
        assert_eq!(decode(&encode(&msg)).unwrap(), msg);
    }

    #[test]
    fn rejects_malformed_lines() {
        for line in ["(kqmlmsg)", "(msg a b c d)", "(kqmlmsg a b c)", "(kqmlmsg 1 b c d)", "(kqmlmsg a b c d e)", "x"] {
            assert!(matches!(decode(line), Err(MalformedMessage::Shape(_))), "{line}");
        }
        assert!(matches!(decode("(kqmlmsg a b"), Err(MalformedMessage::Parse(_))));
    }

    fn symbol() -> impl Strategy<Value = Symbol> {
        "[a-z][a-z0-9!?*<>=/+-]{0,8}".prop_map(|s| Symbol::new(&s).unwrap())
    }

    fn content() -> impl Strategy<Value = SExpr> {
        let leaf = prop_oneof![
            symbol().prop_map(SExpr::Symbol),
            any::<i64>().prop_map(SExpr::int),
            any::<bool>().prop_map(SExpr::Bool),
            "[ -~]{0,6}".prop_map(|s| SExpr::string(&s)),
        ];
        leaf.prop_recursive(3, 24, 4, |inner| prop::collection::vec(inner, 0..4).prop_map(SExpr::list))
    }

    proptest! {
        #[test]
        fn wire_round_trip(perf in symbol(), sender in symbol(), receiver in symbol(), content in content()) {
            let msg = Message::new(perf, sender, receiver, content);
            let line = encode(&msg);
            prop_assert!(line.ends_with('\n') && !line[..line.len() - 1].contains('\n'));
            prop_assert_eq!(decode(&line).unwrap(), msg);
        }
    }
}
