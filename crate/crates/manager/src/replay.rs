//! Replay files: a header describing the match, then one
//! `tick|player|command` record per submitted command.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use rtsl_core::def::GameDefinition;
use rtsl_core::sim::{new_game, GameState, SimConfig, SimError};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codec::{decode_command, DecodeError};
use crate::run::MatchResult;

pub const MAGIC: &str = "RTSL-REPLAY 1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("DefinitionMismatch: replay was recorded against {expected}, definition is {found}")]
    DefinitionMismatch { expected: String, found: String },
    #[error("DigestMismatch: expected {expected}, got {found}")]
    DigestMismatch { expected: String, found: String },
    #[error("record {index}: {error}")]
    BadCommand { index: usize, error: DecodeError },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayRecord {
    pub tick: u64,
    pub player: String,
    /// Command text exactly as logged.
    pub command: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    /// Where the definition was loaded from, as given on the command line.
    pub definition: String,
    pub definition_digest: String,
    pub seed: u64,
    pub sim: SimConfig,
    pub map: String,
    /// `(player, faction)` in seat order.
    pub players: Vec<(String, String)>,
    pub end_tick: u64,
    pub end_digest: String,
    /// Winner, or `None` for a draw.
    pub winner: Option<String>,
    pub records: Vec<ReplayRecord>,
}

/// SHA-256 of the definition source, lowercase hex.
pub fn definition_digest(source: &str) -> String {
    hex(&Sha256::digest(source.as_bytes()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl Replay {
    /// `None` when the match never started.
    pub fn from_match(result: &MatchResult, definition: &str, definition_digest: &str) -> Option<Self> {
        let state = result.state.as_ref()?;
        Some(Self {
            definition: definition.to_string(),
            definition_digest: definition_digest.to_string(),
            seed: state.seed,
            sim: state.config.clone(),
            map: state.map_name.clone(),
            players: state.players.iter().map(|(p, s)| (p.clone(), s.faction.clone())).collect(),
            end_tick: state.tick,
            end_digest: state.digest(),
            winner: result.winner.clone(),
            records: state
                .command_log
                .iter()
                .map(|c| ReplayRecord { tick: c.tick, player: c.player.clone(), command: c.command.to_string() })
                .collect(),
        })
    }

    /// Re-runs the match, calling `observe` on the initial state and after
    /// every tick.
    pub fn execute(
        &self,
        def: Arc<GameDefinition>,
        mut observe: impl FnMut(&GameState),
    ) -> Result<GameState, ReplayError> {
        let mut state = new_game(def, &self.map, &self.players, self.seed, self.sim.clone())?;
        observe(&state);
        for (index, rec) in self.records.iter().enumerate() {
            while state.tick < rec.tick {
                state.tick();
                observe(&state);
            }
            let cmd = decode_command(&rec.command).map_err(|error| ReplayError::BadCommand { index, error })?;
            let _ = state.submit(&rec.player, cmd);
        }
        while state.tick < self.end_tick {
            state.tick();
            observe(&state);
        }
        Ok(state)
    }

    /// Checks the definition digest, re-runs the match and compares the
    /// end-state digest. Returns the digest on success.
    pub fn verify(&self, def: Arc<GameDefinition>, definition_digest: &str) -> Result<String, ReplayError> {
        if definition_digest != self.definition_digest {
            return Err(ReplayError::DefinitionMismatch {
                expected: self.definition_digest.clone(),
                found: definition_digest.to_string(),
            });
        }
        let found = self.execute(def, |_| {})?.digest();
        if found != self.end_digest {
            return Err(ReplayError::DigestMismatch { expected: self.end_digest.clone(), found });
        }
        Ok(found)
    }
}

impl fmt::Display for Replay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{MAGIC}")?;
        writeln!(f, "definition {}", self.definition)?;
        writeln!(f, "definition-digest {}", self.definition_digest)?;
        writeln!(f, "seed {}", self.seed)?;
        writeln!(f, "tick-hz {}", self.sim.tick_hz)?;
        writeln!(f, "gather-rate {}", self.sim.gather_rate)?;
        writeln!(f, "deposit-range {}", self.sim.deposit_range)?;
        writeln!(f, "random-damage {}", self.sim.random_damage)?;
        writeln!(f, "map {}", self.map)?;
        for (p, faction) in &self.players {
            writeln!(f, "player {p} {faction}")?;
        }
        writeln!(f, "end-tick {}", self.end_tick)?;
        writeln!(f, "end-digest {}", self.end_digest)?;
        writeln!(f, "winner {}", self.winner.as_deref().unwrap_or("draw"))?;
        writeln!(f, "---")?;
        for r in &self.records {
            writeln!(f, "{}|{}|{}", r.tick, r.player, r.command)?;
        }
        Ok(())
    }
}

impl FromStr for Replay {
    type Err = ReplayError;

    fn from_str(text: &str) -> Result<Self, ReplayError> {
        let err = |line: usize, message: &str| ReplayError::Format { line, message: message.to_string() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(err(1, "missing RTSL-REPLAY header")),
        }

        let mut fields: Vec<(usize, String, String)> = Vec::new();
        let mut body = false;
        for (n, line) in lines.by_ref() {
            if line.trim() == "---" {
                body = true;
                break;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(' ').ok_or_else(|| err(n, "expected `key value`"))?;
            fields.push((n, k.to_string(), v.trim().to_string()));
        }
        if !body {
            return Err(err(text.lines().count(), "missing `---` separator"));
        }

        let one = |key: &str| -> Result<(usize, String), ReplayError> {
            let mut found = fields.iter().filter(|(_, k, _)| k == key);
            let (n, _, v) = found.next().ok_or_else(|| err(0, &format!("missing `{key}`")))?;
            if let Some((m, _, _)) = found.next() {
                return Err(err(*m, &format!("duplicate `{key}`")));
            }
            Ok((*n, v.clone()))
        };
        fn parsed<T: FromStr>(key: &str, (n, v): (usize, String)) -> Result<T, ReplayError> {
            v.parse().map_err(|_| ReplayError::Format { line: n, message: format!("bad `{key}` value `{v}`") })
        }

        let players = fields
            .iter()
            .filter(|(_, k, _)| k == "player")
            .map(|(n, _, v)| {
                v.split_once(' ')
                    .map(|(p, f)| (p.to_string(), f.trim().to_string()))
                    .ok_or_else(|| err(*n, "expected `player <id> <faction>`"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let winner = one("winner")?.1;

        let mut records = Vec::new();
        let mut last = 0u64;
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, '|');
            let (Some(t), Some(p), Some(c)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(err(n, "expected `tick|player|command`"));
            };
            let tick: u64 = t.trim().parse().map_err(|_| err(n, "bad tick"))?;
            if tick < last {
                return Err(err(n, "ticks go backwards"));
            }
            last = tick;
            records.push(ReplayRecord { tick, player: p.trim().to_string(), command: c.trim().to_string() });
        }

        let replay = Replay {
            definition: one("definition")?.1,
            definition_digest: one("definition-digest")?.1,
            seed: parsed("seed", one("seed")?)?,
            sim: SimConfig {
                tick_hz: parsed("tick-hz", one("tick-hz")?)?,
                gather_rate: parsed("gather-rate", one("gather-rate")?)?,
                deposit_range: parsed("deposit-range", one("deposit-range")?)?,
                random_damage: parsed("random-damage", one("random-damage")?)?,
            },
            map: one("map")?.1,
            players,
            end_tick: parsed("end-tick", one("end-tick")?)?,
            end_digest: one("end-digest")?.1,
            winner: (winner != "draw").then_some(winner),
            records,
        };
        if replay.records.last().is_some_and(|r| r.tick > replay.end_tick) {
            return Err(err(0, "record after end-tick"));
        }
        Ok(replay)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Replay {
        Replay {
            definition: "games/hills.rtsl".into(),
            definition_digest: definition_digest("x"),
            seed: 42,
            sim: SimConfig { gather_rate: 12.5, ..SimConfig::default() },
            map: "Hills".into(),
            players: vec![("P1".into(), "Human".into()), ("P2".into(), "Orc".into())],
            end_tick: 100,
            end_digest: "ab".into(),
            winner: None,
            records: vec![
                ReplayRecord { tick: 0, player: "P1".into(), command: "Gather(Peasants1, 0.5, 1.5)".into() },
                ReplayRecord { tick: 7, player: "P2".into(), command: "Move(Peon1, 3, 4)".into() },
            ],
        }
    }

    #[test]
    fn text_round_trip() {
        let r = sample();
        let text = r.to_string();
        assert!(text.starts_with("RTSL-REPLAY 1\ndefinition games/hills.rtsl\n"));
        assert!(text.ends_with("---\n0|P1|Gather(Peasants1, 0.5, 1.5)\n7|P2|Move(Peon1, 3, 4)\n"));
        assert_eq!(text.parse::<Replay>().unwrap(), r);
        let mut w = r.clone();
        w.winner = Some("P2".into());
        assert_eq!(w.to_string().parse::<Replay>().unwrap(), w);
    }

    #[test]
    fn digest_is_sha256_hex() {
        assert_eq!(
            definition_digest(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn malformed_files() {
        let good = sample().to_string();
        for bad in [
            String::new(),
            good.replace("RTSL-REPLAY 1", "RTSL-REPLAY 2"),
            good.replace("---\n", ""),
            good.replace("seed 42", "seed x"),
            good.replace("map Hills\n", ""),
            good.replace("seed 42", "seed 42\nseed 43"),
            good.replace("7|P2|", "7|P2"),
            good.replace("7|P2", "0|P2").replace("0|P1", "5|P1"),
            good.replace("7|P2", "101|P2"),
        ] {
            assert!(bad.parse::<Replay>().is_err(), "{bad}");
        }
    }
}
