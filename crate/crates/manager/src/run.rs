//! The match loop: handshake, tick clock, command intake and GAMEOVER.

use std::fmt;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use rtsl_core::def::GameDefinition;
use rtsl_core::sim::{new_game, GameState, SimConfig, SimError};
use thiserror::Error;

use crate::codec::decode_command;
use crate::session::{Session, SessionState};
use crate::transport::Endpoint;
use crate::update::encode_update;
use crate::wire::{ClientMessage, ServerMessage};

/// Lines handled per session per tick before the rest wait for the next
/// tick, so a chatty agent cannot stall the clock.
const LINES_PER_TICK: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pace {
    /// As fast as possible; local agents are stepped once per tick.
    Lockstep,
    /// One tick per `1 / tick_hz` seconds of wall time.
    RealTime,
}

#[derive(Debug, Clone)]
pub struct MatchConfig {
    pub map: String,
    pub seed: u64,
    pub sim: SimConfig,
    pub time_limit_ticks: u64,
    pub pace: Pace,
    pub handshake_timeout: Duration,
    /// Include Health Point in Enemy entries.
    pub hp_in_enemy: bool,
    /// Commands accepted per player per tick; `None` is unlimited.
    pub command_budget: Option<u32>,
}

impl MatchConfig {
    pub fn new(map: impl Into<String>) -> Self {
        Self {
            map: map.into(),
            seed: 0,
            sim: SimConfig::default(),
            time_limit_ticks: 6000,
            pace: Pace::Lockstep,
            handshake_timeout: Duration::from_secs(10),
            hp_in_enemy: true,
            command_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EndReason {
    Elimination,
    TimeLimit,
    Forfeit { player: String, reason: String },
}

#[derive(Debug, Clone)]
pub struct MatchResult {
    /// Winning player id; `None` for a draw.
    pub winner: Option<String>,
    pub reason: EndReason,
    pub end_tick: u64,
    /// `(player, faction)` in seat order; factions that were never
    /// declared are absent.
    pub players: Vec<(String, Option<String>)>,
    /// Final kernel state; `None` if the handshake never completed.
    pub state: Option<GameState>,
    /// Lines sent to each player.
    pub transcripts: Vec<Vec<String>>,
}

impl MatchResult {
    pub fn digest(&self) -> Option<String> {
        self.state.as_ref().map(GameState::digest)
    }

    pub fn gameover(&self) -> ServerMessage {
        ServerMessage::GameOver(self.winner.clone())
    }
}

impl fmt::Display for MatchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.winner {
            Some(w) => write!(f, "winner {w}")?,
            None => f.write_str("draw")?,
        }
        match &self.reason {
            EndReason::Elimination => f.write_str(" by elimination")?,
            EndReason::TimeLimit => f.write_str(" at time limit")?,
            EndReason::Forfeit { player, reason } => write!(f, " by forfeit of {player} ({reason})")?,
        }
        write!(f, " at tick {}", self.end_tick)?;
        if let Some(d) = self.digest() {
            write!(f, " digest {d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

struct Match<'a> {
    def: &'a GameDefinition,
    config: &'a MatchConfig,
    sessions: Vec<Session>,
    state: Option<GameState>,
    /// Commands received this tick, per seat.
    spent_budget: Vec<u32>,
    /// First forfeit, if any.
    forfeit: Option<(usize, String)>,
}

/// Plays one match between two endpoints. Seats are `P1` and `P2` in the
/// order given.
pub fn run_match(
    def: Arc<GameDefinition>,
    endpoints: [Box<dyn Endpoint>; 2],
    config: &MatchConfig,
) -> Result<MatchResult, MatchError> {
    if def.map(&config.map).is_none() {
        return Err(MatchError::UnknownMap(config.map.clone()));
    }
    let [a, b] = endpoints;
    let mut m = Match {
        def: &def,
        config,
        sessions: vec![Session::new("P1", a), Session::new("P2", b)],
        state: None,
        spent_budget: vec![0, 0],
        forfeit: None,
    };

    if let Some(result) = m.handshake(&def)? {
        return Ok(result);
    }

    let tick_len = Duration::from_secs_f64(config.sim.dt());
    let mut next_deadline = Instant::now() + tick_len;
    loop {
        let tick = m.state().tick;
        if tick >= config.time_limit_ticks {
            return Ok(m.finish(None, EndReason::TimeLimit));
        }
        m.spent_budget = vec![0, 0];
        if config.pace == Pace::Lockstep {
            for s in &mut m.sessions {
                s.on_tick(tick);
            }
        }
        m.drain(Duration::ZERO);
        if let Some(result) = m.forfeit_result() {
            return Ok(result);
        }

        m.state_mut().tick();

        let alive: Vec<usize> = m.sessions.iter().map(|s| m.state().entity_count(&s.player)).collect();
        match (alive[0] == 0, alive[1] == 0) {
            (true, true) => return Ok(m.finish(None, EndReason::Elimination)),
            (true, false) => return Ok(m.finish(Some(1), EndReason::Elimination)),
            (false, true) => return Ok(m.finish(Some(0), EndReason::Elimination)),
            _ => {}
        }

        if config.pace == Pace::RealTime {
            // keep answering while the tick runs out
            while Instant::now() < next_deadline {
                let left = next_deadline.saturating_duration_since(Instant::now());
                m.drain(left.min(Duration::from_millis(2)));
                if let Some(result) = m.forfeit_result() {
                    return Ok(result);
                }
            }
            next_deadline += tick_len;
        }
    }
}

impl Match<'_> {
    fn state(&self) -> &GameState {
        self.state.as_ref().expect("match started")
    }

    fn state_mut(&mut self) -> &mut GameState {
        self.state.as_mut().expect("match started")
    }

    /// Returns a finished result if the match cannot start.
    fn handshake(&mut self, def: &Arc<GameDefinition>) -> Result<Option<MatchResult>, MatchError> {
        let deadline = Instant::now() + self.config.handshake_timeout;
        loop {
            let arrived = self.drain(Duration::ZERO);
            if let Some(result) = self.forfeit_result() {
                return Ok(Some(result));
            }
            if self.sessions.iter().all(|s| s.state == SessionState::Ready) {
                break;
            }
            if Instant::now() >= deadline {
                let late: Vec<usize> = (0..2).filter(|&i| self.sessions[i].state != SessionState::Ready).collect();
                for &i in &late {
                    self.sessions[i].send(ServerMessage::Err("HandshakeTimeout".into()));
                    self.sessions[i].state = SessionState::Finished;
                }
                let winner = if late.len() == 1 { Some(1 - late[0]) } else { None };
                let player = self.sessions[late[0]].player.clone();
                return Ok(Some(self.finish(winner, EndReason::Forfeit { player, reason: "HandshakeTimeout".into() })));
            }
            if arrived == 0 {
                thread::sleep(Duration::from_millis(1));
            }
        }

        let seats: Vec<(String, String)> = self
            .sessions
            .iter()
            .map(|s| (s.player.clone(), s.faction.clone().expect("ready")))
            .collect();
        self.state = Some(new_game(def.clone(), &self.config.map, &seats, self.config.seed, self.config.sim.clone())?);
        for i in 0..2 {
            let opponent = seats[1 - i].1.clone();
            let s = &mut self.sessions[i];
            s.send(ServerMessage::Map(self.config.map.clone()));
            s.send(ServerMessage::Opponent(opponent));
            s.send(ServerMessage::Start);
            s.state = SessionState::Playing;
        }
        Ok(None)
    }

    /// Handles every available line, including replies that local agents
    /// produce in response. Returns the number of lines handled.
    fn drain(&mut self, wait: Duration) -> usize {
        let mut handled = 0;
        for i in 0..2 {
            let mut budget = LINES_PER_TICK;
            self.sessions[i].pump(wait);
            while budget > 0 && self.forfeit.is_none() {
                let Some(line) = self.sessions[i].inbound.pop_front() else {
                    if self.sessions[i].pump(Duration::ZERO) == 0 {
                        break;
                    }
                    continue;
                };
                self.handle(i, &line);
                handled += 1;
                budget -= 1;
            }
            if self.forfeit.is_none()
                && self.sessions[i].is_disconnected()
                && self.sessions[i].state != SessionState::Finished
            {
                self.sessions[i].state = SessionState::Finished;
                self.forfeit = Some((i, "Disconnected".into()));
            }
        }
        handled
    }

    fn violation(&mut self, i: usize, line: &str) {
        self.reject_and_forfeit(i, format!("ProtocolViolation({line})"));
    }

    fn reject_and_forfeit(&mut self, i: usize, reason: String) {
        let s = &mut self.sessions[i];
        s.send(ServerMessage::Err(reason.clone()));
        s.state = SessionState::Finished;
        if self.forfeit.is_none() {
            self.forfeit = Some((i, reason));
        }
    }

    fn handle(&mut self, i: usize, line: &str) {
        let state = self.sessions[i].state;
        if state == SessionState::Finished {
            return;
        }
        let Some(msg) = ClientMessage::parse(line) else {
            self.sessions[i].send(ServerMessage::Err(format!("BadMessage({})", line.trim())));
            return;
        };
        match (state, msg) {
            (SessionState::Connected, ClientMessage::Faction(name)) => {
                if self.def.faction(&name).is_some() {
                    let s = &mut self.sessions[i];
                    s.send(ServerMessage::Ok(name.clone()));
                    s.faction = Some(name);
                    s.state = SessionState::Ready;
                } else {
                    self.reject_and_forfeit(i, format!("UnknownFaction({name})"));
                }
            }
            (SessionState::Playing, ClientMessage::Update) => {
                let player = self.sessions[i].player.clone();
                let view = self.state().visible_update(&player).expect("seated player");
                let text = encode_update(&view, self.config.hp_in_enemy);
                self.sessions[i].send_text(&text);
            }
            (SessionState::Playing, ClientMessage::Cmd(text)) => {
                if let Some(limit) = self.config.command_budget {
                    if self.spent_budget[i] >= limit {
                        self.sessions[i].send(ServerMessage::Err("BudgetExceeded".into()));
                        return;
                    }
                }
                self.spent_budget[i] += 1;
                let reply = match decode_command(&text) {
                    Err(e) => ServerMessage::Err(e.to_string()),
                    Ok(cmd) => {
                        let player = self.sessions[i].player.clone();
                        match self.state_mut().submit(&player, cmd) {
                            Ok(()) => ServerMessage::Ok("Accepted".into()),
                            Err(reason) => ServerMessage::Err(reason.to_string()),
                        }
                    }
                };
                self.sessions[i].send(reply);
            }
            _ => self.violation(i, line.trim()),
        }
    }

    fn forfeit_result(&mut self) -> Option<MatchResult> {
        let (i, reason) = self.forfeit.clone()?;
        let player = self.sessions[i].player.clone();
        Some(self.finish(Some(1 - i), EndReason::Forfeit { player, reason }))
    }

    fn finish(&mut self, winner: Option<usize>, reason: EndReason) -> MatchResult {
        let winner = winner.map(|w| self.sessions[w].player.clone());
        let over = ServerMessage::GameOver(winner.clone());
        for s in &mut self.sessions {
            if s.state != SessionState::Finished {
                s.send(over.clone());
                s.state = SessionState::Finished;
            }
        }
        MatchResult {
            winner,
            reason,
            end_tick: self.state.as_ref().map_or(0, |s| s.tick),
            players: self.sessions.iter().map(|s| (s.player.clone(), s.faction.clone())).collect(),
            state: self.state.take(),
            transcripts: self.sessions.iter().map(|s| s.outbound.clone()).collect(),
        }
    }
}
