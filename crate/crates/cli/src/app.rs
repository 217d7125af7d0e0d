use std::fs;
use std::io::Write;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{ArgAction, Args, Parser, Subcommand};
use rtsl_core::def::{compile_definition, GameDefinition};
use rtsl_core::doc::parse_document;
use rtsl_core::sim::SimConfig;
use rtsl_manager::{
    definition_digest, run_match, Endpoint, LocalEndpoint, MatchConfig, MatchResult, Pace, Replay, TcpEndpoint,
};

use crate::bot::{BotScript, ScriptedBot};

#[derive(Debug, Parser)]
#[command(name = "rtsl", version, about = "Validate RTSL games, run matches and verify replays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, compile and cross-check a definition.
    Validate { file: PathBuf },
    /// Run a headless match between two bot scripts.
    Match(MatchArgs),
    /// Re-run a replay file and compare end states.
    Replay {
        file: PathBuf,
        /// Definition to use instead of the one named in the replay.
        #[arg(long)]
        def: Option<PathBuf>,
    },
    /// Wait for two agents over TCP and play a real-time match.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, env = "RTSL_TICK_HZ", default_value_t = 10)]
    pub tick_hz: u32,
    /// Units per second extracted by one gatherer.
    #[arg(long, env = "RTSL_GATHER_RATE", default_value_t = 10.0)]
    pub gather_rate: f64,
    /// Report enemy Health Point in updates.
    #[arg(long, env = "RTSL_HP_IN_ENEMY_TAG", default_value_t = true, action = ArgAction::Set)]
    pub hp_in_enemy_tag: bool,
    /// Roll damage within its range instead of always dealing the maximum.
    #[arg(long)]
    pub random_damage: bool,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        SimConfig {
            tick_hz: self.tick_hz,
            gather_rate: self.gather_rate,
            random_damage: self.random_damage,
            ..SimConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long)]
    pub def: PathBuf,
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub bot1: PathBuf,
    #[arg(long)]
    pub bot2: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6000)]
    pub max_ticks: u64,
    /// Where to write the replay file.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub def: PathBuf,
    #[arg(long)]
    pub map: String,
    #[arg(long, default_value_t = 7878)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6000)]
    pub max_ticks: u64,
    /// Seconds both agents get to declare a faction.
    #[arg(long, default_value_t = 10.0)]
    pub handshake_timeout: f64,
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[command(flatten)]
    pub sim: SimArgs,
}

/// Exit status: 1 for problems with the inputs' content, 2 for the
/// environment (files, sockets).
enum Failure {
    Domain(anyhow::Error),
    Env(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn env(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Env(e.into())
}

fn domain(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Domain(e.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(env)
}

/// Parse and compile, or every diagnostic line.
fn load_definition(path: &Path, source: &str) -> Result<GameDefinition, Vec<String>> {
    let doc = parse_document(source).map_err(|e| {
        let (line, col) = e.span().start();
        vec![format!("{}:{line}:{col}: {}: {e}", path.display(), e.kind())]
    })?;
    compile_definition(&doc).map_err(|e| e.diagnostic_lines())
}

fn compiled(path: &Path, source: &str) -> Result<Arc<GameDefinition>, Failure> {
    load_definition(path, source)
        .map(Arc::new)
        .map_err(|lines| domain(anyhow!("{} does not compile:\n{}", path.display(), lines.join("\n"))))
}

pub fn run(cli: Cli, out: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Validate { file } => validate(&file, out),
        Command::Match(args) => play(&args, out),
        Command::Replay { file, def } => replay(&file, def.as_deref(), out),
        Command::Serve(args) => serve(&args, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            1
        }
        Err(Failure::Env(e)) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn validate(file: &Path, out: &mut dyn Write) -> Outcome {
    let source = read(file)?;
    match load_definition(file, &source) {
        Ok(def) => {
            let _ = writeln!(
                out,
                "ok: {} faction(s), {} map(s)",
                def.factions.len(),
                def.maps.len()
            );
            Ok(())
        }
        Err(lines) => {
            for l in &lines {
                let _ = writeln!(out, "{l}");
            }
            Err(domain(anyhow!("{} diagnostic(s)", lines.len())))
        }
    }
}

fn load_bot(path: &Path) -> Result<ScriptedBot, Failure> {
    let text = read(path)?;
    let script = BotScript::parse(&text).with_context(|| format!("in {}", path.display())).map_err(domain)?;
    Ok(ScriptedBot::new(script))
}

fn report(result: &MatchResult, out: &mut dyn Write) {
    for (player, faction) in &result.players {
        let _ = writeln!(out, "{player}: {}", faction.as_deref().unwrap_or("-"));
    }
    let _ = writeln!(out, "{}", result.gameover());
    let _ = writeln!(out, "{result}");
}

fn save_replay(path: &Path, result: &MatchResult, def_path: &Path, source: &str, out: &mut dyn Write) -> Outcome {
    let Some(replay) = Replay::from_match(result, &def_path.to_string_lossy(), &definition_digest(source)) else {
        let _ = writeln!(out, "no replay: the match never started");
        return Ok(());
    };
    fs::write(path, replay.to_string()).with_context(|| format!("cannot write {}", path.display())).map_err(env)?;
    let _ = writeln!(out, "replay {} digest {}", path.display(), replay.end_digest);
    Ok(())
}

fn play(args: &MatchArgs, out: &mut dyn Write) -> Outcome {
    let source = read(&args.def)?;
    let def = compiled(&args.def, &source)?;
    let a = load_bot(&args.bot1)?;
    let b = load_bot(&args.bot2)?;
    let config = MatchConfig {
        seed: args.seed,
        sim: args.sim.config(),
        time_limit_ticks: args.max_ticks,
        pace: Pace::Lockstep,
        hp_in_enemy: args.sim.hp_in_enemy_tag,
        ..MatchConfig::new(args.map.clone())
    };
    let endpoints: [Box<dyn Endpoint>; 2] = [Box::new(LocalEndpoint::new(a)), Box::new(LocalEndpoint::new(b))];
    let result = run_match(def, endpoints, &config).map_err(domain)?;
    report(&result, out);
    if let Some(path) = &args.replay {
        save_replay(path, &result, &args.def, &source, out)?;
    }
    Ok(())
}

/// The header path as written, or next to the replay file.
fn locate_definition(replay_file: &Path, named: &str) -> PathBuf {
    let named = PathBuf::from(named);
    if named.is_absolute() || named.exists() {
        return named;
    }
    match replay_file.parent() {
        Some(dir) if dir.join(&named).exists() => dir.join(&named),
        _ => named,
    }
}

fn replay(file: &Path, def_override: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let text = read(file)?;
    let replay: Replay = text.parse().with_context(|| format!("in {}", file.display())).map_err(domain)?;
    let def_path = def_override.map(Path::to_path_buf).unwrap_or_else(|| locate_definition(file, &replay.definition));
    let source = read(&def_path)?;
    let def = compiled(&def_path, &source)?;
    let digest = replay.verify(def, &definition_digest(&source)).map_err(domain)?;
    let _ = writeln!(out, "ok: {} records, {} ticks, digest {digest}", replay.records.len(), replay.end_tick);
    Ok(())
}

fn serve(args: &ServeArgs, out: &mut dyn Write) -> Outcome {
    let source = read(&args.def)?;
    let def = compiled(&args.def, &source)?;
    if def.map(&args.map).is_none() {
        return Err(domain(anyhow!("unknown map `{}`", args.map)));
    }
    let listener = TcpListener::bind((args.bind.as_str(), args.port))
        .with_context(|| format!("cannot listen on {}:{}", args.bind, args.port))
        .map_err(env)?;
    let addr = listener.local_addr().map_err(env)?;
    let _ = writeln!(out, "listening on {addr}");
    let _ = out.flush();

    let mut endpoints: Vec<Box<dyn Endpoint>> = Vec::new();
    while endpoints.len() < 2 {
        let (stream, peer) = listener.accept().context("accept failed").map_err(env)?;
        let _ = writeln!(out, "P{} connected from {peer}", endpoints.len() + 1);
        let _ = out.flush();
        endpoints.push(Box::new(TcpEndpoint::new(stream).map_err(env)?));
    }
    let endpoints: [Box<dyn Endpoint>; 2] = endpoints.try_into().map_err(|_| env(anyhow!("need two agents")))?;
    let config = MatchConfig {
        seed: args.seed,
        sim: args.sim.config(),
        time_limit_ticks: args.max_ticks,
        pace: Pace::RealTime,
        handshake_timeout: Duration::from_secs_f64(args.handshake_timeout.max(0.0)),
        hp_in_enemy: args.sim.hp_in_enemy_tag,
        command_budget: None,
        ..MatchConfig::new(args.map.clone())
    };
    let result = run_match(def, endpoints, &config).map_err(domain)?;
    report(&result, out);
    if let Some(path) = &args.replay {
        save_replay(path, &result, &args.def, &source, out)?;
    }
    Ok(())
}
