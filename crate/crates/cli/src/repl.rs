//! Line-oriented session between a human and one agent.

use std::io::{self, BufRead, IsTerminal, Write};
use std::time::Duration;

use amb_agents::acl::Message;
use amb_agents::agent::Mailbox;
use amb_agents::sexpr::ParseErrorKind;
use amb_agents::transport::{EndpointKind, PeerError, Society, TcpPeer};
use amb_agents::{read_all, SExpr, Symbol};

/// Carries one message to the agent side and returns what came back.
pub trait Link {
    fn exchange(&mut self, msg: &Message) -> Result<Vec<Message>, String>;
    /// Every message seen so far, encoded, oldest first.
    fn log(&self) -> Vec<String>;
}

pub struct InProcess {
    society: Society,
    mailbox: Mailbox,
}

impl InProcess {
    pub fn new(society: Society, human: &Symbol) -> Result<InProcess, String> {
        let mailbox = Mailbox::default();
        society
            .bus()
            .register(human.clone(), EndpointKind::Remote, mailbox.clone())
            .map_err(|e| format!("name {} is already taken", e.0))?;
        Ok(InProcess { society, mailbox })
    }
}

impl Link for InProcess {
    fn exchange(&mut self, msg: &Message) -> Result<Vec<Message>, String> {
        self.society.send_as(msg.clone());
        self.society.run_until_quiescent().map_err(|e| e.to_string())?;
        Ok(self.mailbox.lock().drain(..).collect())
    }

    fn log(&self) -> Vec<String> {
        self.society.deliveries().iter().map(|d| d.message.to_string()).collect()
    }
}

pub struct Remote {
    peer: TcpPeer,
    first_reply: Duration,
    quiet: Duration,
    lines: Vec<String>,
}

impl Remote {
    pub fn new(peer: TcpPeer, first_reply: Duration) -> Remote {
        Remote { peer, first_reply, quiet: Duration::from_millis(150), lines: Vec::new() }
    }
}

impl Link for Remote {
    fn exchange(&mut self, msg: &Message) -> Result<Vec<Message>, String> {
        let lost = |e: PeerError| format!("connection lost: {e}");
        self.peer.send(msg).map_err(lost)?;
        self.lines.push(msg.to_string());
        let mut replies = Vec::new();
        let mut wait = self.first_reply;
        while let Some(reply) = self.peer.recv(Some(wait)).map_err(lost)? {
            self.lines.push(reply.to_string());
            replies.push(reply);
            wait = self.quiet;
        }
        Ok(replies)
    }

    fn log(&self) -> Vec<String> {
        self.lines.clone()
    }
}

pub struct Session<L> {
    pub link: L,
    pub human: Symbol,
    pub target: Symbol,
    pub wrap: Symbol,
}

/// How a session ended.
pub enum End {
    Quit,
    Lost(String),
}

fn incomplete(kind: &ParseErrorKind) -> bool {
    matches!(kind, ParseErrorKind::UnexpectedEof | ParseErrorKind::UnterminatedString)
}

impl<L: Link> Session<L> {
    fn message_for(&self, datum: SExpr) -> Result<Message, String> {
        if datum.is_form("kqmlmsg") {
            return Message::from_sexpr(&datum).map_err(|e| e.to_string());
        }
        let perf = if datum.as_symbol().is_some_and(|s| s == "try-again") {
            Symbol::from_static("order")
        } else {
            self.wrap.clone()
        };
        Ok(Message::new(perf, self.human.clone(), self.target.clone(), datum))
    }

    fn command(&mut self, line: &str, out: &mut impl Write) -> io::Result<Option<End>> {
        let mut words = line.split_whitespace();
        match (words.next(), words.next()) {
            (Some(",quit"), None) => return Ok(Some(End::Quit)),
            (Some(",wrap"), Some(perf)) => match Symbol::new(perf) {
                Ok(perf) => self.wrap = perf,
                Err(e) => eprintln!("{e}"),
            },
            (Some(",wrap"), None) => writeln!(out, "{}", self.wrap)?,
            _ => eprintln!("commands: ,wrap [PERF]  ,quit"),
        }
        Ok(None)
    }

    pub fn run(&mut self, input: impl BufRead, out: &mut impl Write) -> io::Result<End> {
        let interactive = io::stdin().is_terminal();
        let mut pending = String::new();
        let mut lines = input.lines();
        loop {
            if interactive {
                write!(out, "{}", if pending.is_empty() { "> " } else { ". " })?;
                out.flush()?;
            }
            let Some(line) = lines.next().transpose()? else {
                return Ok(End::Quit);
            };
            if pending.is_empty() && line.trim_start().starts_with(',') {
                if let Some(end) = self.command(line.trim(), out)? {
                    return Ok(end);
                }
                continue;
            }
            pending.push_str(&line);
            pending.push('\n');
            let data = match read_all(&pending) {
                Ok(data) => data,
                Err(e) if incomplete(&e.kind) => continue,
                Err(e) => {
                    eprintln!("parse error: {e}");
                    pending.clear();
                    continue;
                }
            };
            pending.clear();
            for datum in data {
                let msg = match self.message_for(datum) {
                    Ok(msg) => msg,
                    Err(e) => {
                        eprintln!("{e}");
                        continue;
                    }
                };
                match self.link.exchange(&msg) {
                    Ok(replies) => {
                        for reply in replies {
                            writeln!(out, "({} {})", reply.performative, reply.content)?;
                        }
                        out.flush()?;
                    }
                    Err(e) => return Ok(End::Lost(e)),
                }
            }
        }
    }

    pub fn save_log(&self, path: &std::path::Path) -> io::Result<()> {
        let text: String = self.link.log().into_iter().map(|l| l + "\n").collect();
        std::fs::write(path, text)
    }
}

