mod repl;

use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use amb_agents::agent::Agent;
use amb_agents::amb::Limits;
use amb_agents::scenarios::{run_scenario, teacher_student, ticket, RunOptions, SCENARIOS};
use amb_agents::transport::{serve, Scheduler, Society, TcpPeer};
use amb_agents::{read_all, SExpr, Symbol};
use clap::{Args, Parser, Subcommand, ValueEnum};

use repl::{End, InProcess, Link, Remote, Session};

const DEFAULT_ENDPOINT: &str = "127.0.0.1:7878";

#[derive(Parser)]
#[command(name = "amb-agents", version, about = "Agents that interpret messages with a nondeterministic evaluator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scripted scenario and print its result.
    Run {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SCENARIOS))]
        scenario: String,
        #[command(flatten)]
        engine: EngineArgs,
        /// Write the transcript here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Compare the transcript with the shipped golden copy.
        #[arg(long)]
        check: bool,
    },
    /// Talk to an in-process agent.
    Repl {
        #[command(flatten)]
        host: HostArgs,
        #[command(flatten)]
        talk: TalkArgs,
    },
    /// Host agents on a TCP endpoint.
    Serve {
        #[command(flatten)]
        host: HostArgs,
        #[arg(long, env = "AMB_AGENTS_ENDPOINT", default_value = DEFAULT_ENDPOINT)]
        endpoint: String,
    },
    /// Talk to an agent hosted by `serve`.
    Connect {
        #[arg(long, env = "AMB_AGENTS_ENDPOINT", default_value = DEFAULT_ENDPOINT)]
        endpoint: String,
        /// Agent to talk to.
        #[arg(long, default_value = "agent")]
        to: String,
        /// Seconds to wait for the first reply to each message.
        #[arg(long, default_value_t = 5.0)]
        reply_timeout: f64,
        #[command(flatten)]
        talk: TalkArgs,
    },
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, value_enum, default_value_t = SchedulerArg::RoundRobin)]
    scheduler: SchedulerArg,
    /// Backtracks allowed per drive or resume.
    #[arg(long)]
    backtrack_cap: Option<u64>,
}

#[derive(Args)]
struct HostArgs {
    /// Start from a scenario's agents instead of blank ones.
    #[arg(long, value_enum)]
    scenario: Option<HostScenario>,
    /// Agent to spawn; repeatable. The first is the REPL's partner.
    #[arg(long = "agent")]
    agents: Vec<String>,
    /// File of definitions loaded into every spawned agent.
    #[arg(long)]
    seed: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct TalkArgs {
    /// Name the human speaks under.
    #[arg(long, default_value = "human")]
    name: String,
    /// Performative for bare expressions.
    #[arg(long, default_value = "request")]
    wrap: String,
    /// Save the session's messages here on exit.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerArg {
    RoundRobin,
    Free,
}

#[derive(Clone, Copy, ValueEnum)]
enum HostScenario {
    TeacherStudent,
    Ticket,
}

impl EngineArgs {
    fn options(&self) -> RunOptions {
        let scheduler = match self.scheduler {
            SchedulerArg::RoundRobin => Scheduler::RoundRobin,
            SchedulerArg::Free => Scheduler::Free,
        };
        let mut limits = Limits::default();
        if let Some(cap) = self.backtrack_cap {
            limits.max_backtracks = cap;
        }
        RunOptions { scheduler, limits }
    }
}

fn symbol(name: &str) -> Result<Symbol, String> {
    Symbol::new(name).map_err(|e| e.to_string())
}

fn load_seeds(path: Option<&Path>) -> Result<Vec<SExpr>, String> {
    let Some(path) = path else { return Ok(Vec::new()) };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    read_all(&text).map_err(|e| format!("{}: {e}", path.display()))
}

impl HostArgs {
    /// The society to host and the agent a REPL talks to by default.
    fn society(&self) -> Result<(Society, Symbol), String> {
        let opts = self.engine.options();
        let seeds = load_seeds(self.seed.as_deref())?;
        let (mut society, default) = match self.scenario {
            Some(HostScenario::TeacherStudent) => {
                (teacher_student::society_without_teacher(opts.scheduler).map_err(|e| e.to_string())?, "student")
            }
            Some(HostScenario::Ticket) => {
                let mut society = Society::new().with_scheduler(opts.scheduler);
                let seller = Agent::spawn(Symbol::from_static(ticket::SELLER), &ticket::seller_seeds())
                    .map_err(|e| e.to_string())?;
                society.add(seller.with_behavior(Box::new(ticket::TicketBehavior))).map_err(|e| e.to_string())?;
                (society, ticket::SELLER)
            }
            None => (Society::new().with_scheduler(opts.scheduler), "agent"),
        };
        let mut names = self.agents.clone();
        if names.is_empty() && self.scenario.is_none() {
            names.push(default.to_string());
        }
        for name in &names {
            if society.agent(name).is_none() {
                society.spawn(name, &seeds).map_err(|e| e.to_string())?;
            }
        }
        society.set_limits(opts.limits);
        let target = names.first().map(String::as_str).unwrap_or(default);
        Ok((society, symbol(target)?))
    }
}

fn run(scenario: &str, engine: &EngineArgs, transcript: Option<&Path>, check: bool) -> Result<ExitCode, String> {
    let out = run_scenario(scenario, engine.options()).map_err(|e| e.to_string())?;
    for line in &out.display {
        println!("{line}");
    }
    if let Some(path) = transcript {
        std::fs::write(path, out.transcript.render()).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if check {
        if let Err(d) = out.transcript.check(out.golden) {
            eprintln!("{}: transcript diverges from golden: {d}", out.name);
            return Ok(ExitCode::from(1));
        }
        eprintln!("{}: transcript matches golden", out.name);
    }
    Ok(ExitCode::SUCCESS)
}

fn talk<L: Link>(link: L, target: Symbol, args: &TalkArgs) -> Result<ExitCode, String> {
    let mut session = Session { link, human: symbol(&args.name)?, target, wrap: symbol(&args.wrap)? };
    let end = session.run(io::stdin().lock(), &mut io::stdout()).map_err(|e| e.to_string())?;
    if let Some(path) = &args.transcript {
        session.save_log(path).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    match end {
        End::Quit => Ok(ExitCode::SUCCESS),
        End::Lost(reason) => {
            eprintln!("{reason}");
            Ok(ExitCode::from(1))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, engine, transcript, check } => run(scenario, engine, transcript.as_deref(), *check),
        Command::Repl { host, talk: args } => host.society().and_then(|(society, target)| {
            let link = InProcess::new(society, &symbol(&args.name)?)?;
            talk(link, target, args)
        }),
        Command::Serve { host, endpoint } => host.society().and_then(|(society, _)| {
            let server = serve(endpoint.as_str(), society).map_err(|e| format!("{endpoint}: {e}"))?;
            println!("listening on {}", server.local_addr());
            server.join();
            Ok(ExitCode::SUCCESS)
        }),
        Command::Connect { endpoint, to, reply_timeout, talk: args } => (|| {
            let peer = TcpPeer::connect(endpoint.as_str(), symbol(&args.name)?).map_err(|e| format!("{endpoint}: {e}"))?;
            let link = Remote::new(peer, Duration::from_secs_f64(*reply_timeout));
            talk(link, symbol(to)?, args)
        })(),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}
