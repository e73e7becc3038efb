//! `scott`: JSON front end for the Scott analysis library.
//!
//! Results go to stdout as a single JSON document, diagnostics to stderr.
//! Exit status 0 on success, 2 on invalid input or a failed check, 3 when an
//! internal invariant breaks.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use scott_core::cas::{
    search_k_system, strategy_stream_isometry, strategy_to_k_system, system_to_isometry, verify_k_system, KSystem,
};
use scott_core::game::{
    exhaustive_check, metric_rank_upper, replay_game, solve_approx_game, solve_ef_game, GameKind, OpponentMove,
    Strategy, ToleranceSchedule,
};
use scott_core::metric::{min_distance_gap, validate_document};
use scott_core::oracle::{
    brute_scott_rank_pair, enumerate_autoisometries, exists_autoisometry_mapping, DEFAULT_AUTO_CAP, MAX_RANK_BUDGET,
};
use scott_core::{
    build_net_family, compute_bf_table, distinguishing_strategy, parse_metric_space, scott_rank_pair,
    scott_rank_space, Budget, Error, MetricSpace, PointTuple,
};

#[derive(Parser)]
#[command(name = "scott", version, about = "Scott analysis of finite rational metric spaces")]
struct Cli {
    /// Worker threads for the solvers; output does not depend on it.
    #[arg(long, global = true, env = "SCOTT_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpaceArg {
    /// Metric space JSON file.
    #[arg(long)]
    space: PathBuf,
}

#[derive(Args)]
struct PairArgs {
    #[command(flatten)]
    space: SpaceArg,
    /// Left tuple, comma-separated point indices.
    #[arg(long)]
    a: PointTuple,
    /// Right tuple.
    #[arg(long)]
    b: PointTuple,
}

#[derive(Args)]
struct CertArgs {
    #[command(flatten)]
    space: SpaceArg,
    /// Certificate JSON file.
    #[arg(long)]
    cert: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms.
    Validate(SpaceArg),
    /// Scott rank of a pair next to its metric rank upper bound.
    Rank {
        #[command(flatten)]
        pair: PairArgs,
        /// Tolerance schedules, repeatable; defaults to geometric:1/4,1/2 and geometric:1/16,1/2.
        #[arg(long = "f")]
        schedules: Vec<ToleranceSchedule>,
    },
    /// Scott rank of the whole space.
    SpaceRank(SpaceArg),
    /// Back-and-forth table of ranks for tuples up to a given length.
    Table {
        #[command(flatten)]
        space: SpaceArg,
        /// Longest tuple length tracked.
        #[arg(long, default_value_t = 1)]
        p: usize,
    },
    /// Ehrenfeucht–Fraïssé games.
    #[command(subcommand)]
    Ef(EfCommand),
    /// Tolerance-scheduled approximation games.
    #[command(subcommand)]
    Game(GameCommand),
    /// Compact approximation systems.
    #[command(subcommand)]
    Cas(CasCommand),
    /// Autoisometries, or whether one carries `a` to `b`.
    Auto {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long, requires = "b")]
        a: Option<PointTuple>,
        #[arg(long, requires = "a")]
        b: Option<PointTuple>,
        /// Largest space enumerated.
        #[arg(long, default_value_t = DEFAULT_AUTO_CAP)]
        max_points: usize,
    },
    /// Brute-force reference values for a pair.
    Oracle {
        #[command(flatten)]
        pair: PairArgs,
        /// Deepest level the naive recursion may reach.
        #[arg(long, default_value_t = MAX_RANK_BUDGET)]
        cap: u32,
    },
}

#[derive(Subcommand)]
enum EfCommand {
    /// Solve the game and print the winner's strategy.
    Solve {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        alpha: Budget,
        /// Also write the strategy to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Replay a strategy against every opponent line.
    Check(CertArgs),
    /// Play a strategy against one scripted opponent.
    Replay {
        #[command(flatten)]
        cert: CertArgs,
        /// JSON array of opponent replies (integers) or moves.
        #[arg(long)]
        script: PathBuf,
    },
    /// Player 1's strategy witnessing a finite rank.
    Distinguish {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GameCommand {
    Solve {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        alpha: Budget,
        #[arg(long = "f")]
        schedule: ToleranceSchedule,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    Check(CertArgs),
}

#[derive(Subcommand)]
enum CasCommand {
    /// The greedy nested nets.
    Nets {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        depth: usize,
    },
    /// Search for a k-system, or prove none exists.
    Search {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Check a k-system against every clause.
    Verify(CertArgs),
    /// Build a k-system from a Player 2 strategy.
    Extract {
        #[command(flatten)]
        cert: CertArgs,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Read the autoisometry off a k-system past the snap depth.
    Isometry(CertArgs),
    /// Read the autoisometry off a single play against a Player 2 strategy.
    Stream(CertArgs),
}

enum Failure {
    Core(Error),
    /// A check ran and rejected its input; the report is still printed.
    Rejected(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<Value, Failure>;

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn load_space(arg: &SpaceArg) -> Result<MetricSpace, Error> {
    parse_metric_space(&read(&arg.space)?)
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    Ok(serde_json::from_str(&read(path)?)?)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn emit<T: Serialize>(path: &Option<PathBuf>, v: &T) -> Result<(), Error> {
    if let Some(p) = path {
        let body = serde_json::to_string_pretty(v).expect("serializable");
        std::fs::write(p, body + "\n").map_err(|e| io_error(p, e))?;
    }
    Ok(())
}

fn check_report(space: &MetricSpace, strategy: &Strategy, game: GameKind) -> Outcome {
    if strategy.game != game {
        return Err(Error::Precondition(format!("certificate is for the {:?} game", strategy.game)).into());
    }
    let report = exhaustive_check(space, strategy)?;
    let v = to_value(&report);
    if report.sound() {
        Ok(v)
    } else {
        Err(Failure::Rejected(v))
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate(arg) => {
            let report = validate_document(&read(&arg.space)?)?;
            let v = json!({"valid": report.is_valid(), "violations": report.violations});
            if report.is_valid() {
                Ok(json!({"valid": true}))
            } else {
                Err(Failure::Rejected(v))
            }
        }
        Command::Rank { pair, schedules } => {
            let space = load_space(&pair.space)?;
            let family = if schedules.is_empty() { ToleranceSchedule::default_family() } else { schedules };
            let sr = scott_rank_pair(&space, &pair.a, &pair.b)?;
            let r = metric_rank_upper(&space, &pair.a, &pair.b, &family)?;
            Ok(json!({"sr": sr, "r_upper": r, "sr_le_r": sr <= r}))
        }
        Command::SpaceRank(arg) => Ok(to_value(&scott_rank_space(&load_space(&arg)?)?)),
        Command::Table { space, p } => Ok(to_value(&compute_bf_table(&load_space(&space)?, p)?.export())),
        Command::Ef(cmd) => ef(cmd),
        Command::Game(cmd) => game(cmd),
        Command::Cas(cmd) => cas(cmd),
        Command::Auto { space, a, b, max_points } => {
            let space = load_space(&space)?;
            match (a, b) {
                (Some(a), Some(b)) => {
                    Ok(json!({"exists": exists_autoisometry_mapping(&space, &a, &b, max_points)?}))
                }
                _ => Ok(json!({"autoisometries": enumerate_autoisometries(&space, max_points)?})),
            }
        }
        Command::Oracle { pair, cap } => {
            let space = load_space(&pair.space)?;
            let sr = brute_scott_rank_pair(&space, &pair.a, &pair.b, cap)?;
            let auto = exists_autoisometry_mapping(&space, &pair.a, &pair.b, DEFAULT_AUTO_CAP)?;
            Ok(json!({"sr": sr, "autoisometry": auto}))
        }
    }
}

fn ef(cmd: EfCommand) -> Outcome {
    match cmd {
        EfCommand::Solve { pair, alpha, emit: out } => {
            let space = load_space(&pair.space)?;
            let outcome = solve_ef_game(&space, &pair.a, &pair.b, alpha)?;
            emit(&out, &outcome.strategy)?;
            Ok(to_value(&outcome))
        }
        EfCommand::Check(c) => check_report(&load_space(&c.space)?, &load(&c.cert)?, GameKind::Ef),
        EfCommand::Replay { cert, script } => {
            let space = load_space(&cert.space)?;
            let strategy: Strategy = load(&cert.cert)?;
            let script: Vec<OpponentMove> = load(&script)?;
            Ok(to_value(&replay_game(&space, &strategy, &script)?))
        }
        EfCommand::Distinguish { pair, emit: out } => {
            let space = load_space(&pair.space)?;
            let strategy = distinguishing_strategy(&space, &pair.a, &pair.b)?;
            emit(&out, &strategy)?;
            Ok(to_value(&strategy))
        }
    }
}

fn game(cmd: GameCommand) -> Outcome {
    match cmd {
        GameCommand::Solve { pair, alpha, schedule, emit: out } => {
            let space = load_space(&pair.space)?;
            let outcome = solve_approx_game(&space, &pair.a, &pair.b, alpha, schedule)?;
            emit(&out, &outcome.strategy)?;
            Ok(to_value(&outcome))
        }
        GameCommand::Check(c) => check_report(&load_space(&c.space)?, &load(&c.cert)?, GameKind::Approx),
    }
}

fn cas(cmd: CasCommand) -> Outcome {
    match cmd {
        CasCommand::Nets { space, depth } => {
            let space = load_space(&space)?;
            let nets = build_net_family(&space, depth);
            nets.verify(&space)?;
            let gaps = min_distance_gap(&space).ok();
            Ok(json!({"nets": nets, "gaps": gaps}))
        }
        CasCommand::Search { pair, depth, emit: out } => {
            let space = load_space(&pair.space)?;
            let nets = build_net_family(&space, depth);
            let outcome = search_k_system(&space, &pair.a, &pair.b, &nets, depth)?;
            emit(&out, &outcome)?;
            Ok(to_value(&outcome))
        }
        CasCommand::Verify(c) => {
            let space = load_space(&c.space)?;
            let system: KSystem = load(&c.cert)?;
            let violations = verify_k_system(&space, &system.nets, &system)?;
            let v = json!({"valid": violations.is_empty(), "violations": violations});
            if violations.is_empty() {
                Ok(v)
            } else {
                Err(Failure::Rejected(v))
            }
        }
        CasCommand::Extract { cert, depth, emit: out } => {
            let space = load_space(&cert.space)?;
            let strategy: Strategy = load(&cert.cert)?;
            let nets = build_net_family(&space, depth);
            let system = strategy_to_k_system(&space, &nets, &strategy, depth)?;
            emit(&out, &system)?;
            Ok(to_value(&system))
        }
        CasCommand::Isometry(c) => {
            let space = load_space(&c.space)?;
            let system: KSystem = load(&c.cert)?;
            Ok(to_value(&system_to_isometry(&space, &system.nets, &system)?))
        }
        CasCommand::Stream(c) => {
            let space = load_space(&c.space)?;
            Ok(to_value(&strategy_stream_isometry(&space, &load(&c.cert)?)?))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("scott: {e}");
            return ExitCode::from(3);
        }
    }
    let (value, code) = match run(cli.command) {
        Ok(v) => (Some(v), 0),
        Err(Failure::Rejected(v)) => (Some(v), 2),
        Err(Failure::Core(e)) => {
            eprintln!("scott: {e}");
            (None, if e.is_internal() { 3 } else { 2 })
        }
    };
    if let Some(v) = value {
        println!("{}", serde_json::to_string(&v).expect("serializable"));
    }
    ExitCode::from(code)
}
