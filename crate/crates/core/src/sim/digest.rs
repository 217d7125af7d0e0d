use std::fmt::Write;

use rand::RngCore;
use sha2::{Digest, Sha256};

use super::state::GameState;

fn f(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

impl GameState {
    /// A canonical text form of everything that determines the future of the
    /// match, including the command log.
    pub fn canonical_encoding(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(
            out,
            "tick {} hz {} seed {} map {} gather {} range {} random {}",
            self.tick,
            c.tick_hz,
            self.seed,
            self.map_name,
            f(c.gather_rate),
            f(c.deposit_range),
            c.random_damage
        );
        for (id, p) in &self.players {
            let _ = writeln!(out, "player {id} {}", p.faction);
            for (r, a) in &p.bank {
                let _ = writeln!(out, " bank {r} {}", a.0);
            }
            for (r, a) in &p.spent {
                let _ = writeln!(out, " spent {r} {}", a.0);
            }
            for t in &p.techs_done {
                let _ = writeln!(out, " tech {t}");
            }
            for t in &p.researching {
                let _ = writeln!(out, " researching {t}");
            }
        }
        for (id, e) in &self.entities {
            let _ = writeln!(
                out,
                "entity {id} {} {} {} {} {} {} {} {} {:?} {}",
                e.owner,
                e.faction,
                e.proto,
                f(e.pos.x),
                f(e.pos.y),
                f(e.heading.x),
                f(e.heading.y),
                f(e.hp),
                e.action,
                e.complete
            );
            for p in &e.path {
                let _ = writeln!(out, " path {} {}", f(p.x), f(p.y));
            }
            let _ = writeln!(out, " goal {:?}", e.path_goal);
            for (a, t) in &e.cooldowns {
                let _ = writeln!(out, " cooldown {a} {t}");
            }
            if let Some((r, a)) = &e.carrying {
                let _ = writeln!(out, " carrying {r} {}", a.0);
            }
            let _ = writeln!(out, " contained {:?} in {:?}", e.contained, e.container);
            for (a, n) in &e.ability_uses {
                let _ = writeln!(out, " uses {a} {n}");
            }
        }
        for (cell, rc) in &self.cells {
            let _ = write!(out, "cell {cell}");
            for l in &rc.layers {
                let _ = write!(out, " {}", l.label);
                if let Some(c) = &l.condition {
                    let _ = write!(out, "[{}/{}]", c.resource, c.replacement_label);
                }
            }
            for (r, a) in &rc.deposits {
                let _ = write!(out, " {r}={}", a.0);
            }
            out.push('\n');
        }
        for fx in &self.effects {
            let _ = writeln!(
                out,
                "effect {} {} {} {} {:?} {:?} {:?}",
                fx.ability,
                fx.source,
                fx.target,
                fx.created_tick,
                fx.expires_at_tick,
                fx.modifiers,
                fx.saved_cooldowns
            );
        }
        for (k, v) in &self.id_counters {
            let _ = writeln!(out, "counter {k} {v}");
        }
        let _ = writeln!(out, "rng {}", self.rng.clone().next_u64());
        for cmd in &self.command_log {
            let _ = writeln!(
                out,
                "cmd {}|{}|{}|{}",
                cmd.tick, cmd.player, cmd.command, cmd.accepted
            );
        }
        out
    }

    /// SHA-256 of [`GameState::canonical_encoding`], lowercase hex.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical_encoding().as_bytes());
        hash.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}
