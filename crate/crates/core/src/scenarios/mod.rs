//! Ready-made agent societies and programs.

pub mod dwelling;
pub mod grid;
pub mod teacher_student;
pub mod ticket;
pub mod transcript;

use thiserror::Error;

pub use transcript::{Divergence, Transcript};

use crate::amb::{Limits, LoadError};
use crate::interp::EvalError;
use crate::sexpr::SExpr;
use crate::transport::{Scheduler, SocietyError};

/// Names accepted by [`run_scenario`].
pub const SCENARIOS: [&str; 4] = ["teacher-student", "ticket", "multiple-dwelling", "grid-selection"];

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub scheduler: Scheduler,
    pub limits: Limits,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Society(#[from] SocietyError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub struct ScenarioOutput {
    pub name: &'static str,
    pub transcript: Transcript,
    pub golden: &'static str,
    /// Human-oriented result lines.
    pub display: Vec<String>,
}

pub const DWELLING_GOLDEN: &str = include_str!("../../golden/multiple-dwelling.txt");

pub fn run_scenario(name: &str, opts: RunOptions) -> Result<ScenarioOutput, ScenarioError> {
    Ok(match name {
        "teacher-student" => {
            let run = teacher_student::run(opts)?;
            let display = run.transcript.messages.clone();
            ScenarioOutput { name: teacher_student::NAME, transcript: run.transcript, golden: teacher_student::GOLDEN, display }
        }
        "ticket" => {
            let run = ticket::run(opts)?;
            let display = run.solutions.iter().map(SExpr::to_string).collect();
            ScenarioOutput { name: ticket::NAME, transcript: run.transcript, golden: ticket::GOLDEN, display }
        }
        "grid-selection" => {
            let run = grid::run(&grid::GridConfig::default(), opts)?;
            let mut display = vec![run.transcript.summary_line()];
            display.extend(run.results.iter().map(|(w, v)| format!("{w} {v}")));
            ScenarioOutput { name: grid::NAME, transcript: run.transcript, golden: grid::GOLDEN, display }
        }
        "multiple-dwelling" => {
            let env = dwelling::dwelling_env()?;
            let solutions = dwelling::all_solutions_with(&env, opts.limits)?;
            let messages: Vec<String> = solutions.iter().map(ToString::to_string).collect();
            let transcript = Transcript {
                scenario: "multiple-dwelling".into(),
                messages: messages.clone(),
                summary: vec![SExpr::list(vec![SExpr::sym("solutions"), SExpr::int(solutions.len() as i64)])],
            };
            ScenarioOutput { name: "multiple-dwelling", transcript, golden: DWELLING_GOLDEN, display: messages }
        }
        other => return Err(ScenarioError::Unknown(other.to_string())),
    })
}
