//! The fixed-tick simulation kernel.
//!
//! A [`GameState`] is mutated only through [`GameState::submit`] and
//! [`GameState::tick`]. Commands are validated and applied when submitted;
//! their effects play out over the following ticks. Within a tick entities
//! are processed in ascending UniqueID order.

mod amount;
mod combat;
mod command;
mod digest;
mod state;
mod submit;
mod tick;
mod view;

use thiserror::Error;

pub use amount::Amount;
pub use combat::{resolve_damage, terrain_damage_factor};
pub use command::Command;
pub use state::{
    new_game, Action, ActiveEffect, BuildJob, Entity, GameState, LoggedCommand, PlayerState,
    RuntimeCell,
};
pub use view::{CellView, EnemyView, EntityView, UpdateView};

/// Tunables that the rule language does not cover.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub tick_hz: u32,
    /// Units extracted per second by one gatherer.
    pub gather_rate: f64,
    /// Reach for extracting from a deposit and delivering to a warehouse.
    pub deposit_range: f64,
    /// Roll damage uniformly in its range instead of always using the maximum.
    pub random_damage: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            tick_hz: 10,
            gather_rate: 10.0,
            deposit_range: 1.0,
            random_damage: false,
        }
    }
}

impl SimConfig {
    pub fn dt(&self) -> f64 {
        1.0 / self.tick_hz as f64
    }

    /// Seconds to ticks, rounding up.
    pub fn ticks(&self, seconds: f64) -> u64 {
        let t = (seconds * self.tick_hz as f64 - 1e-9).ceil();
        if t <= 0.0 {
            0
        } else {
            t as u64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown faction `{0}`")]
    UnknownFaction(String),
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error("faction `{faction}` has no prototype `{prototype}`")]
    UnknownPrototype { faction: String, prototype: String },
    #[error("tick rate must be at least 1")]
    BadTickRate,
    #[error("duplicate player `{0}`")]
    DuplicatePlayer(String),
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
}

/// Why a command was refused.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RejectReason {
    #[error("UnknownPlayer")]
    UnknownPlayer,
    #[error("NotYourEntity")]
    NotYourEntity,
    #[error("UnknownID")]
    UnknownId,
    #[error("InsufficientResources({})", .0.join(","))]
    InsufficientResources(Vec<String>),
    #[error("MissingBuilding({0})")]
    MissingBuilding(String),
    #[error("MissingTech({0})")]
    MissingTech(String),
    #[error("BadTerrain")]
    BadTerrain,
    #[error("DistanceViolation")]
    DistanceViolation,
    #[error("ContainFull")]
    ContainFull,
    #[error("ArmorClassNotAllowed")]
    ArmorClassNotAllowed,
    #[error("AbilityExhausted")]
    AbilityExhausted,
    #[error("RequireTraitFailed")]
    RequireTraitFailed,
    #[error("NotAnUpgrade")]
    NotAnUpgrade,
    #[error("NotBuildable({0})")]
    NotBuildable(String),
    #[error("UnknownPrototype({0})")]
    UnknownPrototype(String),
    #[error("UnknownAbility({0})")]
    UnknownAbility(String),
    #[error("AlreadyResearched({0})")]
    AlreadyResearched(String),
    #[error("Busy")]
    Busy,
    #[error("CannotMove")]
    CannotMove,
    #[error("CannotAttack")]
    CannotAttack,
    #[error("CannotGather")]
    CannotGather,
    #[error("Unreachable")]
    Unreachable,
    #[error("OutOfBounds")]
    OutOfBounds,
    #[error("NoDeposit")]
    NoDeposit,
    #[error("Contained")]
    Contained,
    #[error("FriendlyTarget")]
    FriendlyTarget,
    #[error("BadArguments")]
    BadArguments,
}

pub type Receipt = Result<(), RejectReason>;
