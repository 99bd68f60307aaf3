//! Line-delimited TCP transport. The server owns a society on one thread;
//! each connection is a remote session that first says `(hello <name>)`.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use log::{info, warn};

use super::bus::EndpointKind;
use super::society::Society;
use crate::acl::{decode, encode, Message};
use crate::agent::Mailbox;
use crate::sexpr::{read, SExpr, Symbol};

/// Name the server uses when it answers on its own behalf.
pub const SERVER_NAME: &str = "server";

enum Event {
    Opened(u64, TcpStream),
    Line(u64, String),
    Closed(u64),
}

struct Session {
    name: Option<Symbol>,
    writer: TcpStream,
}

/// A running server. Dropping the handle does not stop it; call
/// [`ServerHandle::shutdown`].
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: JoinHandle<Society>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting, waits for open sessions to finish (at most
    /// `grace`), and returns the society.
    pub fn shutdown(self) -> Society {
        self.stop.store(true, Ordering::SeqCst);
        self.thread.join().expect("server thread panicked")
    }

    /// Blocks until the server stops on its own. It never does unless
    /// `shutdown` is called from elsewhere, so this serves forever.
    pub fn join(self) -> Society {
        self.thread.join().expect("server thread panicked")
    }
}

/// Serves `society` on `addr` (use port 0 for an ephemeral port).
pub fn serve(addr: impl ToSocketAddrs, society: Society) -> io::Result<ServerHandle> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    listener.set_nonblocking(true)?;
    let stop = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    let accept_stop = stop.clone();
    let readers = std::thread::spawn(move || accept_loop(listener, tx, accept_stop));
    let run_stop = stop.clone();
    let thread = std::thread::spawn(move || {
        let society = Server::new(society).run(rx, run_stop);
        let _ = readers.join();
        society
    });
    info!("serving on {local}");
    Ok(ServerHandle { addr: local, stop, thread })
}

fn accept_loop(listener: TcpListener, tx: mpsc::Sender<Event>, stop: Arc<AtomicBool>) {
    let mut next_id = 0;
    let mut readers = Vec::new();
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, peer)) => {
                next_id += 1;
                let id = next_id;
                info!("connection {id} from {peer}");
                let _ = stream.set_nonblocking(false);
                let Ok(writer) = stream.try_clone() else { continue };
                if tx.send(Event::Opened(id, writer)).is_err() {
                    break;
                }
                let tx = tx.clone();
                readers.push(std::thread::spawn(move || {
                    for line in BufReader::new(stream).lines() {
                        let Ok(line) = line else { break };
                        if tx.send(Event::Line(id, line)).is_err() {
                            return;
                        }
                    }
                    let _ = tx.send(Event::Closed(id));
                }));
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => {
                warn!("accept failed: {e}");
                std::thread::sleep(Duration::from_millis(5));
            }
        }
    }
    drop(tx);
    for reader in readers {
        let _ = reader.join();
    }
}

struct Server {
    society: Society,
    sessions: BTreeMap<u64, Session>,
    /// Remote names and their connection, if currently connected.
    remotes: BTreeMap<Symbol, Option<u64>>,
}

/// How long shutdown waits for connected sessions to close.
const SHUTDOWN_GRACE: Duration = Duration::from_secs(10);

impl Server {
    fn new(society: Society) -> Self {
        Server { society, sessions: BTreeMap::new(), remotes: BTreeMap::new() }
    }

    fn run(mut self, rx: mpsc::Receiver<Event>, stop: Arc<AtomicBool>) -> Society {
        let mut stopping_since: Option<Instant> = None;
        loop {
            match rx.recv_timeout(Duration::from_millis(10)) {
                Ok(event) => self.handle(event),
                Err(mpsc::RecvTimeoutError::Disconnected) => break,
                Err(mpsc::RecvTimeoutError::Timeout) => {}
            }
            if stop.load(Ordering::SeqCst) {
                let since = *stopping_since.get_or_insert_with(Instant::now);
                if self.sessions.is_empty() || since.elapsed() > SHUTDOWN_GRACE {
                    break;
                }
            }
        }
        for session in self.sessions.values() {
            let _ = session.writer.shutdown(Shutdown::Both);
        }
        // Events already queued by readers are handled before returning.
        while let Ok(event) = rx.try_recv() {
            if let Event::Line(..) = event {
                self.handle(event);
            }
        }
        self.society
    }

    fn handle(&mut self, event: Event) {
        match event {
            Event::Opened(id, writer) => {
                self.sessions.insert(id, Session { name: None, writer });
            }
            Event::Closed(id) => {
                if let Some(Session { name: Some(name), .. }) = self.sessions.remove(&id) {
                    info!("{name} disconnected; its messages are kept");
                    self.remotes.insert(name, None);
                }
            }
            Event::Line(id, line) => self.line(id, &line),
        }
    }

    fn write(&mut self, id: u64, text: &str) {
        if let Some(session) = self.sessions.get_mut(&id) {
            let mut text = text.to_string();
            if !text.ends_with('\n') {
                text.push('\n');
            }
            if session.writer.write_all(text.as_bytes()).is_err() {
                warn!("write to connection {id} failed");
            }
        }
    }

    fn line(&mut self, id: u64, line: &str) {
        if line.trim().is_empty() {
            return;
        }
        let Some(session) = self.sessions.get(&id) else { return };
        match session.name.clone() {
            None => self.hello(id, line),
            Some(name) => self.message(id, name, line),
        }
    }

    fn hello(&mut self, id: u64, line: &str) {
        let name = match read(line).ok().as_ref().and_then(SExpr::as_list) {
            Some([SExpr::Symbol(head), SExpr::Symbol(name)]) if head == "hello" => name.clone(),
            _ => {
                self.write(id, "(error expected-hello)");
                return;
            }
        };
        let reconnect = matches!(self.remotes.get(&name), Some(None));
        if !reconnect && (self.society.bus().is_registered(&name) || self.remotes.contains_key(&name) || name == SERVER_NAME) {
            self.write(id, "(error duplicate-name)");
            if let Some(session) = self.sessions.remove(&id) {
                let _ = session.writer.shutdown(Shutdown::Both);
            }
            return;
        }
        if !reconnect {
            self.society
                .bus()
                .register(name.clone(), EndpointKind::Remote, Mailbox::default())
                .expect("name was checked");
        }
        self.remotes.insert(name.clone(), Some(id));
        if let Some(session) = self.sessions.get_mut(&id) {
            session.name = Some(name.clone());
        }
        self.write(id, &format!("(welcome {name})"));
        self.flush_remotes();
    }

    fn message(&mut self, id: u64, name: Symbol, line: &str) {
        let reply = |content: &str| format!("(kqmlmsg answer {SERVER_NAME} {name} {content})");
        match decode(line) {
            Err(_) => {
                let text = reply("(error malformed)");
                self.write(id, &text);
            }
            Ok(msg) if msg.sender != name => {
                let text = reply("(error sender-mismatch)");
                self.write(id, &text);
            }
            Ok(msg) => {
                self.society.send_as(msg);
                if let Err(e) = self.society.run_until_quiescent() {
                    warn!("society did not settle: {e}");
                }
                self.flush_remotes();
            }
        }
    }

    fn flush_remotes(&mut self) {
        let connected: Vec<(Symbol, u64)> =
            self.remotes.iter().filter_map(|(n, id)| id.map(|id| (n.clone(), id))).collect();
        for (name, id) in connected {
            let Some(mailbox) = self.society.bus().mailbox(&name) else { continue };
            let pending: Vec<Message> = mailbox.lock().drain(..).collect();
            for msg in pending {
                self.write(id, &encode(&msg));
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PeerError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("server refused the session: {0}")]
    Refused(String),
    #[error("connection closed")]
    Closed,
}

/// Client side of a session.
pub struct TcpPeer {
    name: Symbol,
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl TcpPeer {
    /// Connects and performs the hello handshake.
    pub fn connect(addr: impl ToSocketAddrs, name: Symbol) -> Result<TcpPeer, PeerError> {
        let stream = TcpStream::connect(addr)?;
        let writer = stream.try_clone()?;
        let mut peer = TcpPeer { name: name.clone(), reader: BufReader::new(stream), writer };
        peer.send_line(&format!("(hello {name})"))?;
        let answer = peer.read_line(Some(Duration::from_secs(10)))?.ok_or(PeerError::Closed)?;
        if answer.trim() == format!("(welcome {name})") {
            Ok(peer)
        } else {
            Err(PeerError::Refused(answer.trim().to_string()))
        }
    }

    pub fn name(&self) -> &Symbol {
        &self.name
    }

    pub fn send(&mut self, msg: &Message) -> Result<(), PeerError> {
        self.send_line(&encode(msg))
    }

    pub fn send_line(&mut self, line: &str) -> Result<(), PeerError> {
        let mut line = line.to_string();
        if !line.ends_with('\n') {
            line.push('\n');
        }
        self.writer.write_all(line.as_bytes())?;
        self.writer.flush()?;
        Ok(())
    }

    /// Next line, or `None` when `timeout` elapses first.
    pub fn read_line(&mut self, timeout: Option<Duration>) -> Result<Option<String>, PeerError> {
        self.reader.get_ref().set_read_timeout(timeout)?;
        let mut line = String::new();
        match self.reader.read_line(&mut line) {
            Ok(0) => Err(PeerError::Closed),
            Ok(_) => Ok(Some(line)),
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Next message, or `None` on timeout. Lines that are not messages are
    /// returned as errors.
    pub fn recv(&mut self, timeout: Option<Duration>) -> Result<Option<Message>, PeerError> {
        match self.read_line(timeout)? {
            None => Ok(None),
            Some(line) => decode(&line).map(Some).map_err(|e| PeerError::Refused(format!("{e}: {}", line.trim()))),
        }
    }

    pub fn close(self) {
        let _ = self.writer.shutdown(Shutdown::Both);
    }
}
