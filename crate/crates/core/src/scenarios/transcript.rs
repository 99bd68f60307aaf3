//! Replayable transcripts: one encoded message per line, then a summary.

use std::fmt;

use crate::acl::encode;
use crate::sexpr::SExpr;
use crate::transport::Society;

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub scenario: String,
    /// Encoded messages in delivery order, without newlines.
    pub messages: Vec<String>,
    pub summary: Vec<SExpr>,
}

impl Transcript {
    /// The delivery log of `society`, with `extra` appended to the summary.
    pub fn from_society(scenario: &str, society: &Society, extra: Vec<SExpr>) -> Transcript {
        let messages: Vec<String> =
            society.deliveries().iter().map(|d| encode(&d.message).trim_end().to_string()).collect();
        let mut summary = vec![
            SExpr::list(vec![SExpr::sym("messages"), SExpr::int(messages.len() as i64)]),
            SExpr::list(vec![SExpr::sym("dead-letters"), SExpr::int(society.dead_letters().len() as i64)]),
        ];
        summary.extend(extra);
        Transcript { scenario: scenario.to_string(), messages, summary }
    }

    pub fn summary_line(&self) -> String {
        let mut items = vec![SExpr::sym("summary"), SExpr::string(&self.scenario)];
        items.extend(self.summary.iter().cloned());
        SExpr::list(items).to_string()
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Compares with a golden rendering and names the first differing line.
    pub fn check(&self, golden: &str) -> Result<(), Divergence> {
        let rendered = self.render();
        let mut actual = rendered.lines();
        let mut expected = golden.lines();
        let mut line = 0;
        loop {
            line += 1;
            match (expected.next(), actual.next()) {
                (None, None) => return Ok(()),
                (e, a) if e == a => continue,
                (e, a) => {
                    return Err(Divergence {
                        line,
                        expected: e.map(str::to_string),
                        actual: a.map(str::to_string),
                    })
                }
            }
        }
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.messages {
            writeln!(f, "{line}")?;
        }
        writeln!(f, "{}", self.summary_line())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("transcript diverges at line {line}: expected {expected:?}, got {actual:?}")]
pub struct Divergence {
    pub line: usize,
    pub expected: Option<String>,
    pub actual: Option<String>,
}
