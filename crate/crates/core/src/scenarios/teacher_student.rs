//! A teacher teaches a student the `broadcast` performative.

use crate::acl::{Message, ACTIVATE_BROADCAST, LEARN_BROADCAST_CODE};
use crate::sexpr::{read, SExpr, Symbol};
use crate::transport::{Scheduler, Society, SocietyError};

use super::transcript::Transcript;
use super::RunOptions;

pub const NAME: &str = "teacher-student";
pub const GOLDEN: &str = include_str!("../../golden/teacher-student.txt");

pub const SQUARE: &str = "(define (square x) (* x x))";
pub const BROADCAST_CONTENT: &str = "(order (square 3))";

fn parse(src: &str) -> SExpr {
    read(src).expect("scenario source parses")
}

/// The teacher's turns, in order.
pub fn script() -> Vec<Message> {
    let t = |perf: &str, content: &str| Message::build(perf, "teacher", "student", parse(content));
    vec![
        t("assertion", SQUARE),
        t("broadcast", BROADCAST_CONTENT),
        t("assertion", LEARN_BROADCAST_CODE),
        t("order", ACTIVATE_BROADCAST),
        t("broadcast", BROADCAST_CONTENT),
    ]
}

fn add_student_side(society: &mut Society) -> Result<(), SocietyError> {
    society.spawn("student", &[])?;
    society.spawn("a1", &[parse(SQUARE)])?;
    society.spawn("a2", &[parse(SQUARE)])?;
    let student = society.agent_mut("student").expect("spawned");
    for partner in ["a1", "a2"] {
        student.get_or_create_conversation(&Symbol::new(partner).expect("valid"));
    }
    Ok(())
}

/// The student and the agents it already talks to, without the teacher, for
/// serving to a remote teacher.
pub fn society_without_teacher(scheduler: Scheduler) -> Result<Society, SocietyError> {
    let mut society = Society::new().with_scheduler(scheduler);
    add_student_side(&mut society)?;
    Ok(society)
}

/// Teacher, student, a1 and a2. The student already has conversations with
/// a1 and a2.
pub fn society(scheduler: Scheduler) -> Result<Society, SocietyError> {
    let mut society = Society::new().with_scheduler(scheduler);
    society.spawn("teacher", &[parse(SQUARE)])?;
    add_student_side(&mut society)?;
    Ok(society)
}

pub struct Run {
    pub society: Society,
    pub transcript: Transcript,
}

/// Sends each teacher turn and lets the society settle before the next.
pub fn run(opts: RunOptions) -> Result<Run, SocietyError> {
    let mut society = society(opts.scheduler)?;
    society.set_limits(opts.limits);
    for msg in script() {
        society.send_as(msg);
        society.run_until_quiescent()?;
    }
    let history = society
        .agent("student")
        .and_then(|s| s.conversation(&Symbol::from_static("teacher")))
        .map_or(0, |c| c.dispatch_history().len());
    let extra = vec![SExpr::list(vec![SExpr::sym("dispatch-history"), SExpr::int(history as i64)])];
    let transcript = Transcript::from_society(NAME, &society, extra);
    Ok(Run { society, transcript })
}

/// Replies the teacher gets for each turn of [`script`].
pub const TEACHER_REPLIES: [usize; 5] = [1, 1, 1, 1, 0];

#[derive(Debug, thiserror::Error)]
pub enum TcpRunError {
    #[error(transparent)]
    Society(#[from] SocietyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Peer(#[from] crate::transport::PeerError),
    #[error("no reply to turn {0}")]
    MissingReply(usize),
}

pub struct TcpRun {
    /// The served society after the session ended.
    pub society: Society,
    /// Messages the remote teacher received, in order.
    pub received: Vec<Message>,
}

/// Runs the script with the teacher connected over TCP. Each turn waits for
/// its replies before the next is sent, which fixes the message order.
pub fn run_over_tcp(opts: RunOptions) -> Result<TcpRun, TcpRunError> {
    let mut society = society_without_teacher(opts.scheduler)?;
    society.set_limits(opts.limits);
    let server = crate::transport::serve("127.0.0.1:0", society)?;
    let mut peer = crate::transport::TcpPeer::connect(server.local_addr(), Symbol::from_static("teacher"))?;
    let mut received = Vec::new();
    for (turn, (msg, replies)) in script().into_iter().zip(TEACHER_REPLIES).enumerate() {
        peer.send(&msg)?;
        for _ in 0..replies {
            let reply = peer.recv(Some(std::time::Duration::from_secs(10)))?;
            received.push(reply.ok_or(TcpRunError::MissingReply(turn + 1))?);
        }
    }
    peer.close();
    Ok(TcpRun { society: server.shutdown(), received })
}
