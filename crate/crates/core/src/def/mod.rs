//! Typed game definitions compiled from document trees.

mod compile;
mod text;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::geometry::Shape;

pub use compile::{compile_definition, compile_definition_with, compile_structure, CompileOptions};
pub use text::{parse_mitigation, parse_number, parse_pair_text, parse_percent, parse_range_text};
pub use validate::{validate_references, Diagnostic, DiagnosticCategory};

pub type ShapeSpec = Shape<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct GameDefinition {
    pub factions: Vec<FactionDef>,
    pub starting_resources: BTreeMap<String, f64>,
    /// At least one; matches pick theirs by name.
    pub maps: Vec<MapDef>,
}

impl GameDefinition {
    pub fn faction(&self, name: &str) -> Option<&FactionDef> {
        self.factions.iter().find(|f| f.name == name)
    }

    pub fn map(&self, name: &str) -> Option<&MapDef> {
        self.maps.iter().find(|m| m.name == name)
    }

    pub fn resource_names(&self) -> impl Iterator<Item = &str> {
        self.starting_resources.keys().map(String::as_str)
    }

    /// Whether any building anywhere must sit on deposits of `resource`
    /// before they can be extracted.
    pub fn requires_preparation(&self, resource: &str) -> bool {
        self.factions
            .iter()
            .flat_map(|f| f.buildings.iter())
            .any(|b| b.purpose.prepare.iter().any(|r| r == resource))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FactionDef {
    pub name: String,
    pub buildings: Vec<PrototypeDef>,
    pub units: Vec<PrototypeDef>,
    pub techs: Vec<TechDef>,
}

impl FactionDef {
    pub fn prototypes(&self) -> impl Iterator<Item = &PrototypeDef> {
        self.buildings.iter().chain(self.units.iter())
    }

    pub fn prototype(&self, name: &str) -> Option<&PrototypeDef> {
        self.prototypes().find(|p| p.name == name)
    }

    pub fn tech(&self, name: &str) -> Option<&TechDef> {
        self.techs.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrototypeKind {
    Unit,
    Building,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeDef {
    pub kind: PrototypeKind,
    pub name: String,
    pub max_health: f64,
    pub build_time_s: f64,
    pub armor: ArmorSpec,
    pub shape: ShapeSpec,
    pub occupy_terrain: BTreeSet<String>,
    /// Terrain crossed while moving, when it differs from `occupy_terrain`.
    pub movement_terrain: Option<BTreeSet<String>>,
    pub vision: f64,
    pub speed: f64,
    pub attacks: Vec<AttackDef>,
    pub require: RequireSpec,
    pub upgrades_to: Vec<String>,
    pub purpose: PurposeSpec,
    /// Resource -> carry capacity.
    pub gather: BTreeMap<String, f64>,
    pub contain: Option<ContainSpec>,
    pub repair: Option<RepairSpec>,
    pub abilities: Vec<AbilityDef>,
    pub weight: Option<f64>,
    pub traits: BTreeMap<String, TraitValue>,
    /// Instance state written inside a listing (UniqueID, Position, ...).
    pub listing: ListingState,
}

impl PrototypeDef {
    pub fn movement_terrain(&self) -> &BTreeSet<String> {
        self.movement_terrain.as_ref().unwrap_or(&self.occupy_terrain)
    }

    pub fn attack(&self, name: &str) -> Option<&AttackDef> {
        self.attacks.iter().find(|a| a.name == name)
    }

    pub fn ability(&self, name: &str) -> Option<&AbilityDef> {
        self.abilities.iter().find(|a| a.name == name)
    }

    pub fn is_building(&self) -> bool {
        self.kind == PrototypeKind::Building
    }
}

/// Runtime fields that a listing may carry alongside the static description.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ListingState {
    pub unique_id: Option<String>,
    pub position: Option<(f64, f64)>,
    pub action: Option<String>,
    pub enemies: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mitigation {
    Flat(f64),
    Percent(f64),
}

impl Mitigation {
    pub fn apply(self, damage: f64) -> f64 {
        match self {
            Mitigation::Flat(f) => damage - f,
            Mitigation::Percent(p) => damage * (1.0 - p / 100.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArmorSpec {
    pub universal: Option<Mitigation>,
    /// Name of the armor piece the universal value came from (`Shield`).
    pub universal_label: Option<String>,
    pub per_attack: BTreeMap<String, Mitigation>,
    /// Armor class such as `Light`, checked by containers.
    pub armor_class: Option<String>,
}

impl ArmorSpec {
    /// Exactly one mitigation applies: the attack-specific one if present.
    pub fn mitigation_for(&self, attack: &str) -> Option<Mitigation> {
        self.per_attack.get(attack).copied().or(self.universal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DamageRange {
    pub min: f64,
    pub max: f64,
}

impl DamageRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DamageSpec {
    pub universal: DamageRange,
    pub per_target: BTreeMap<String, DamageRange>,
}

impl DamageSpec {
    pub fn against(&self, target: &str) -> DamageRange {
        self.per_target.get(target).copied().unwrap_or(self.universal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackDef {
    pub name: String,
    pub range: f64,
    pub damage: DamageSpec,
    pub recharge_s: f64,
    pub shape: ShapeSpec,
    pub target_terrain: BTreeSet<String>,
    pub require: RequireSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DistanceSpec {
    pub greater: Option<f64>,
    pub less: Option<f64>,
}

impl DistanceSpec {
    pub fn admits(&self, d: f64) -> bool {
        self.greater.map_or(true, |g| d >= g) && self.less.map_or(true, |l| d <= l)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RequireSpec {
    pub resources: BTreeMap<String, f64>,
    pub buildings: Vec<String>,
    pub techs: Vec<String>,
    pub target_traits: BTreeMap<String, TraitValue>,
    pub distance: Option<DistanceSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraitValue {
    Bool(bool),
    Number(f64),
}

impl fmt::Display for TraitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraitValue::Bool(true) => f.write_str("True"),
            TraitValue::Bool(false) => f.write_str("False"),
            TraitValue::Number(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    Speed,
    Recharge,
    Vision,
    Range,
    Damage,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Speed,
        Property::Recharge,
        Property::Vision,
        Property::Range,
        Property::Damage,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Change {
    Set(f64),
    AddPercent(f64),
}

impl Change {
    pub fn apply(self, value: f64) -> f64 {
        match self {
            Change::Set(v) => v,
            Change::AddPercent(p) => (value * (1.0 + p / 100.0)).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyModifier {
    pub property: Property,
    pub change: Change,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbilityDef {
    pub name: String,
    pub target_modifiers: Vec<PropertyModifier>,
    pub require: RequireSpec,
    pub time_limit_s: Option<f64>,
    pub use_limit: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PurposeSpec {
    pub process: Vec<String>,
    pub prepare: Vec<String>,
    pub build: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainSpec {
    pub max_weight: f64,
    /// Empty means any armor class may enter.
    pub allowed_armor_classes: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepairRate {
    pub rate_hp_per_s: f64,
    pub range: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairSpec {
    pub rate_hp_per_s: f64,
    pub range: f64,
    pub per_target: BTreeMap<String, RepairRate>,
}

impl RepairSpec {
    /// A per-target entry replaces both rate and range for that target.
    pub fn against(&self, target: &str) -> RepairRate {
        self.per_target.get(target).copied().unwrap_or(RepairRate {
            rate_hp_per_s: self.rate_hp_per_s,
            range: self.range,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TechDef {
    pub name: String,
    pub build_time_s: f64,
    pub require: RequireSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrainCondition {
    pub resource: String,
    pub amount: f64,
    pub replacement_label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrainLayer {
    pub label: String,
    pub condition: Option<TerrainCondition>,
}

impl TerrainLayer {
    pub fn plain(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            condition: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellDef {
    pub layers: Vec<TerrainLayer>,
    pub deposits: BTreeMap<String, f64>,
}

/// Combat and movement adjustments for entities standing on `label`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TerrainRule {
    pub label: String,
    /// Target terrain -> damage percent change when attacking into it.
    pub attack_damage: BTreeMap<String, f64>,
    pub speed_percent: Option<f64>,
    pub vision_percent: Option<f64>,
    pub range_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartEntity {
    pub prototype: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapDef {
    pub name: String,
    pub width: i64,
    pub height: i64,
    pub default_layer: String,
    pub cells: BTreeMap<(i64, i64), CellDef>,
    pub terrain_rules: Vec<TerrainRule>,
    /// Starting entities per player slot.
    pub starts: Vec<Vec<StartEntity>>,
}

impl MapDef {
    /// Declared cell, or the default single-layer cell.
    pub fn cell(&self, x: i64, y: i64) -> CellDef {
        self.cells.get(&(x, y)).cloned().unwrap_or_else(|| CellDef {
            layers: vec![TerrainLayer::plain(self.default_layer.clone())],
            deposits: BTreeMap::new(),
        })
    }

    pub fn rule(&self, label: &str) -> Option<&TerrainRule> {
        self.terrain_rules.iter().find(|r| r.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("{path}: missing {field}")]
    MissingField { path: String, field: String },
    #[error("{path}: bad number `{text}`")]
    BadNumber { path: String, text: String },
    #[error("duplicate name `{name}`")]
    DuplicateName { name: String },
    #[error("{path}: unexpected tag `{tag}`")]
    UnexpectedTag { path: String, tag: String },
    #[error("{path}: {message}")]
    InvalidValue { path: String, message: String },
    #[error("{} unresolved reference(s)", .0.len())]
    References(Vec<Diagnostic>),
}

impl CompileError {
    /// Variant name, e.g. `UnexpectedTag`.
    pub fn kind(&self) -> &'static str {
        match self {
            CompileError::MissingField { .. } => "MissingField",
            CompileError::BadNumber { .. } => "BadNumber",
            CompileError::DuplicateName { .. } => "DuplicateName",
            CompileError::UnexpectedTag { .. } => "UnexpectedTag",
            CompileError::InvalidValue { .. } => "InvalidValue",
            CompileError::References(_) => "References",
        }
    }

    /// One `LEVEL path message` line per problem.
    pub fn diagnostic_lines(&self) -> Vec<String> {
        match self {
            CompileError::References(diags) => diags.iter().map(|d| d.to_string()).collect(),
            CompileError::MissingField { path, field } => {
                vec![format!("ERROR {} missing {field}", path_token(path))]
            }
            CompileError::BadNumber { path, text } => {
                vec![format!("ERROR {} bad number `{text}`", path_token(path))]
            }
            CompileError::DuplicateName { name } => {
                vec![format!("ERROR / duplicate name `{name}`")]
            }
            CompileError::UnexpectedTag { path, tag } => {
                vec![format!("ERROR {} unexpected tag `{tag}`", path_token(path))]
            }
            CompileError::InvalidValue { path, message } => {
                vec![format!("ERROR {} {message}", path_token(path))]
            }
        }
    }
}

/// Paths are written without spaces so a diagnostic line splits into three
/// whitespace-separated fields.
pub(crate) fn path_token(path: &str) -> String {
    if path.is_empty() {
        "/".to_string()
    } else {
        path.replace(' ', "_")
    }
}
