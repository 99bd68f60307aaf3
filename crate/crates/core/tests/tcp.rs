use std::time::Duration;

use amb_agents::acl::Message;
use amb_agents::agent::LogEntry;
use amb_agents::read;
use amb_agents::scenarios::{teacher_student, RunOptions};
use amb_agents::sexpr::Symbol;
use amb_agents::transport::{serve, PeerError, Society, TcpPeer};

const WAIT: Option<Duration> = Some(Duration::from_secs(10));

fn s(name: &str) -> Symbol {
    Symbol::new(name).unwrap()
}

fn student_society() -> Society {
    let mut society = Society::new();
    society.spawn("student", &[]).unwrap();
    society
}

#[test]
fn session_answers_like_the_bus() {
    let server = serve("127.0.0.1:0", student_society()).unwrap();
    let mut human = TcpPeer::connect(server.local_addr(), s("human")).unwrap();
    human.send(&Message::build("assertion", "human", "student", read("(define x 2)").unwrap())).unwrap();
    assert_eq!(human.recv(WAIT).unwrap().unwrap().to_string(), "(kqmlmsg ack student human x)");
    human.send_line("(kqmlmsg request human").unwrap();
    assert_eq!(human.read_line(WAIT).unwrap().unwrap(), "(kqmlmsg answer server human (error malformed))\n");
    human.send(&Message::build("request", "someone-else", "student", read("x").unwrap())).unwrap();
    assert_eq!(human.recv(WAIT).unwrap().unwrap().content.to_string(), "(error sender-mismatch)");
    human.send(&Message::build("request", "human", "student", read("x").unwrap())).unwrap();
    assert_eq!(human.recv(WAIT).unwrap().unwrap().to_string(), "(kqmlmsg answer student human 2)");
    human.close();
    server.shutdown();
}

#[test]
fn duplicate_names_are_refused() {
    let server = serve("127.0.0.1:0", student_society()).unwrap();
    let first = TcpPeer::connect(server.local_addr(), s("human")).unwrap();
    match TcpPeer::connect(server.local_addr(), s("human")) {
        Err(PeerError::Refused(line)) => assert_eq!(line, "(error duplicate-name)"),
        other => panic!("expected refusal, got {:?}", other.map(|p| p.name().clone())),
    }
    assert!(matches!(TcpPeer::connect(server.local_addr(), s("student")), Err(PeerError::Refused(_))));
    first.close();
    server.shutdown();
}

#[test]
fn conversations_survive_reconnection() {
    let server = serve("127.0.0.1:0", student_society()).unwrap();
    let mut human = TcpPeer::connect(server.local_addr(), s("human")).unwrap();
    human.send(&Message::build("request", "human", "student", read("(amb 'a 'b)").unwrap())).unwrap();
    assert_eq!(human.recv(WAIT).unwrap().unwrap().content.to_string(), "a");
    human.close();
    std::thread::sleep(Duration::from_millis(50));
    let mut again = loop {
        match TcpPeer::connect(server.local_addr(), s("human")) {
            Ok(peer) => break peer,
            Err(PeerError::Refused(_)) => std::thread::sleep(Duration::from_millis(20)),
            Err(e) => panic!("{e}"),
        }
    };
    again.send(&Message::build("order", "human", "student", read("try-again").unwrap())).unwrap();
    assert_eq!(again.recv(WAIT).unwrap().unwrap().to_string(), "(kqmlmsg answer student human b)");
    again.close();
    server.shutdown();
}

fn log_of(society: &Society, name: &str) -> Vec<LogEntry> {
    society.agent(name).unwrap().log().to_vec()
}

#[test]
fn teacher_student_over_tcp_matches_in_process() {
    let local = teacher_student::run(RunOptions::default()).unwrap();
    let remote = teacher_student::run_over_tcp(RunOptions::default()).unwrap();
    for name in ["student", "a1", "a2"] {
        assert_eq!(log_of(&local.society, name), log_of(&remote.society, name), "{name}");
    }
    let teacher_inbox: Vec<String> = local
        .society
        .deliveries()
        .iter()
        .filter(|d| d.message.receiver == "teacher")
        .map(|d| d.message.to_string())
        .collect();
    let received: Vec<String> = remote.received.iter().map(Message::to_string).collect();
    assert_eq!(received, teacher_inbox);
}
