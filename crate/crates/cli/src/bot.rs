//! Declarative bot scripts.
//!
//! ```text
//! # gathers wood, then answers grunts
//! name lumberjack
//! faction Human
//! 0 Gather(Peasants1, 0.5, 1.5)
//! 40 Train(TownHall1, Peasants)
//! on-visible Grunt Attack(ElvinArcher1, {enemy})
//! poll 5
//! ```

use std::collections::BTreeSet;

use rtsl_core::doc::normalize_key;
use rtsl_manager::{decode_command, decode_update, Agent, DecodeError};
use thiserror::Error;

/// Placeholder replaced by the UniqueID of the enemy that triggered a rule.
pub const ENEMY: &str = "{enemy}";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct BotScriptError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub prototype: String,
    /// Command text containing `{enemy}`.
    pub template: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BotScript {
    pub name: String,
    pub faction: String,
    /// `(at_tick, command text)`, ticks nondecreasing.
    pub steps: Vec<(u64, String)>,
    pub reactions: Vec<Reaction>,
    /// Ticks between UPDATE requests while reactions are present.
    pub poll: u64,
}

impl BotScript {
    pub fn parse(text: &str) -> Result<Self, BotScriptError> {
        let mut name = None;
        let mut faction = None;
        let mut steps: Vec<(u64, String)> = Vec::new();
        let mut reactions = Vec::new();
        let mut poll = 1;
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let err = |message: String| BotScriptError { line: n, message };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) = line.split_once(char::is_whitespace).map_or((line, ""), |(h, r)| (h, r.trim()));
            let check = |text: &str| -> Result<(), BotScriptError> {
                decode_command(text).map(|_| ()).map_err(|e: DecodeError| err(e.to_string()))
            };
            match head {
                "name" if !rest.is_empty() => name = Some(rest.to_string()),
                "faction" if !rest.is_empty() => faction = Some(rest.to_string()),
                "poll" => {
                    poll = rest.parse().ok().filter(|p| *p > 0).ok_or_else(|| err(format!("bad poll `{rest}`")))?;
                }
                "on-visible" => {
                    let (proto, template) =
                        rest.split_once(char::is_whitespace).ok_or_else(|| err("expected `on-visible <Prototype> <command>`".into()))?;
                    let template = template.trim().to_string();
                    if !template.contains(ENEMY) {
                        return Err(err(format!("template lacks {ENEMY}")));
                    }
                    check(&template.replace(ENEMY, "Enemy1"))?;
                    reactions.push(Reaction { prototype: proto.to_string(), template });
                }
                _ => {
                    let tick: u64 = head.parse().map_err(|_| err(format!("unknown directive `{head}`")))?;
                    check(rest)?;
                    if steps.last().is_some_and(|(t, _)| *t > tick) {
                        return Err(err(format!("tick {tick} comes before the previous step")));
                    }
                    steps.push((tick, rest.to_string()));
                }
            }
        }
        let faction = faction.ok_or(BotScriptError { line: 0, message: "no `faction` line".into() })?;
        Ok(Self { name: name.unwrap_or_else(|| "bot".into()), faction, steps, reactions, poll })
    }
}

/// Plays a [`BotScript`].
#[derive(Debug, Clone)]
pub struct ScriptedBot {
    script: BotScript,
    next: usize,
    block: Option<String>,
    /// `(rule index, enemy id)` pairs already answered.
    fired: BTreeSet<(usize, String)>,
}

impl ScriptedBot {
    pub fn new(script: BotScript) -> Self {
        Self { script, next: 0, block: None, fired: BTreeSet::new() }
    }

    pub fn script(&self) -> &BotScript {
        &self.script
    }

    fn react(&mut self, text: &str) -> Vec<String> {
        let Ok((_, doc)) = decode_update(text) else {
            return vec![];
        };
        let Some(enemies) = doc.child_named("Enemy") else {
            return vec![];
        };
        let mut out = Vec::new();
        for e in &enemies.children {
            let Some(id) = e.child_named("UniqueID").and_then(|n| n.text.clone()) else {
                continue;
            };
            for (i, rule) in self.script.reactions.iter().enumerate() {
                if normalize_key(&rule.prototype) == normalize_key(&e.tag) && self.fired.insert((i, id.clone())) {
                    out.push(format!("CMD {}", rule.template.replace(ENEMY, &id)));
                }
            }
        }
        out
    }
}

impl Agent for ScriptedBot {
    fn connect(&mut self) -> Vec<String> {
        vec![format!("FACTION {}", self.script.faction)]
    }

    fn on_tick(&mut self, tick: u64) -> Vec<String> {
        let mut out = Vec::new();
        while let Some((t, cmd)) = self.script.steps.get(self.next) {
            if *t > tick {
                break;
            }
            out.push(format!("CMD {cmd}"));
            self.next += 1;
        }
        if !self.script.reactions.is_empty() && tick % self.script.poll == 0 {
            out.push("UPDATE".into());
        }
        out
    }

    fn on_message(&mut self, line: &str) -> Vec<String> {
        if line.starts_with("UPDATE-BEGIN") {
            self.block = Some(String::new());
        }
        let Some(block) = self.block.as_mut() else {
            return vec![];
        };
        block.push_str(line);
        block.push('\n');
        if line.trim() == "UPDATE-END" {
            let text = self.block.take().unwrap_or_default();
            return self.react(&text);
        }
        vec![]
    }
}
