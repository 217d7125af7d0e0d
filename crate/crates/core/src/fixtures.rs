//! The bundled corpus: rule listings, their printed variants with typos,
//! broken mutants, and a complete two-faction game.

use serde::Deserialize;
use thiserror::Error;

use crate::def::{compile_definition, compile_structure, CompileError, CompileOptions, GameDefinition};
use crate::doc::{parse_document, DocNode, ParseError};

macro_rules! sources {
    ($($file:literal,)*) => {
        &[$(($file, include_str!(concat!("../fixtures/", $file))),)*]
    };
}

const SOURCES: &[(&str, &str)] = sources![
    "armor.rtsl",
    "attack.rtsl",
    "attack_raw.rtsl",
    "build.rtsl",
    "contain.rtsl",
    "damage.rtsl",
    "dangling_keep.rtsl",
    "distance.rtsl",
    "elvin_archer.rtsl",
    "elvin_archer_raw.rtsl",
    "enemy.rtsl",
    "faction.rtsl",
    "factions_resources.rtsl",
    "gather.rtsl",
    "grid_cells.rtsl",
    "health_point.rtsl",
    "hills_map.rtsl",
    "limit.rtsl",
    "lockdown.rtsl",
    "lockdown_limt.rtsl",
    "lockdown_raw.rtsl",
    "map_keyword.rtsl",
    "map_keyword_raw.rtsl",
    "modify.rtsl",
    "movement.rtsl",
    "movement_raw.rtsl",
    "paper_game.rtsl",
    "prepare.rtsl",
    "purpose.rtsl",
    "range.rtsl",
    "recharge.rtsl",
    "repair.rtsl",
    "require.rtsl",
    "resource.rtsl",
    "shapes.rtsl",
    "speed.rtsl",
    "terrain_condition.rtsl",
    "town_hall.rtsl",
    "town_hall_raw.rtsl",
    "undeclared_mana.rtsl",
    "upgrade.rtsl",
    "vision.rtsl",
];

const MANIFEST: &str = include_str!("../fixtures/manifest.toml");

/// How much surrounding document a listing needs before it compiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    /// A complete game.
    Game,
    /// Faction list and resources.
    Preamble,
    /// A faction block.
    Faction,
    /// An ability block, compiled inside a unit.
    Ability,
    /// A map block.
    Map,
    /// A keyword example; only parsed.
    Fragment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Ok,
    ParseError,
    CompileError,
    Diagnostics,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    fixture: Vec<Entry>,
}

#[derive(Debug, Deserialize)]
struct Entry {
    id: String,
    file: String,
    kind: FixtureKind,
    expect: Outcome,
    error: Option<String>,
    #[serde(default)]
    diagnostics: Vec<String>,
    description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub id: String,
    pub description: String,
    pub file: String,
    pub kind: FixtureKind,
    pub source: &'static str,
    pub expect: Outcome,
    /// Error variant name for `ParseError` and `CompileError` outcomes.
    pub error: Option<String>,
    /// Diagnostic categories for `Diagnostics` outcomes.
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
}

/// Why a fixture failed to build.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixtureFailure {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

const PREAMBLE: &str = "<Factions>\nHuman\nOrc\n</Factions>\n<Resource>\n<Wood>100</Wood>\n<Gold>100</Gold>\n<Oil>10</Oil>\n<Food>5</Food>\n</Resource>\n";
const BLANK_MAP: &str = "<Map>\n<Name>Blank</Name>\n</Map>\n";

impl Fixture {
    /// The listing inside just enough document to compile on its own;
    /// `None` for fragments.
    pub fn standalone_source(&self) -> Option<String> {
        let s = self.source;
        Some(match self.kind {
            FixtureKind::Game => s.to_string(),
            FixtureKind::Preamble => format!("{s}{BLANK_MAP}"),
            FixtureKind::Faction => format!("{PREAMBLE}{BLANK_MAP}{s}"),
            FixtureKind::Ability => format!(
                "{PREAMBLE}{BLANK_MAP}<Human>\n<Unit>\n<Caster>\n<Health Point>1</Health Point>\n{s}</Caster>\n</Unit>\n</Human>\n"
            ),
            FixtureKind::Map => format!("{PREAMBLE}{s}"),
            FixtureKind::Fragment => return None,
        })
    }

    pub fn parse(&self) -> Result<DocNode, ParseError> {
        parse_document(self.source)
    }

    /// Structural compile of the standalone source. Listings refer to
    /// things defined in other listings, so references are not resolved.
    pub fn compile_structure(&self) -> Option<Result<GameDefinition, FixtureFailure>> {
        let src = self.standalone_source()?;
        Some(
            parse_document(&src)
                .map_err(FixtureFailure::from)
                .and_then(|doc| Ok(compile_structure(&doc, &CompileOptions::default())?)),
        )
    }

    /// Full compile, references included.
    pub fn compile(&self) -> Option<Result<GameDefinition, FixtureFailure>> {
        let src = self.standalone_source()?;
        Some(
            parse_document(&src)
                .map_err(FixtureFailure::from)
                .and_then(|doc| Ok(compile_definition(&doc)?)),
        )
    }
}

/// Every fixture, in manifest order.
pub fn fixtures() -> Vec<Fixture> {
    let manifest: Manifest = toml::from_str(MANIFEST).expect("bundled manifest is valid");
    manifest
        .fixture
        .into_iter()
        .map(|e| {
            let source = SOURCES
                .iter()
                .find(|(f, _)| *f == e.file)
                .map(|(_, s)| *s)
                .unwrap_or_else(|| panic!("manifest names missing file {}", e.file));
            Fixture {
                id: e.id,
                description: e.description,
                file: e.file,
                kind: e.kind,
                source,
                expect: e.expect,
                error: e.error,
                diagnostics: e.diagnostics,
            }
        })
        .collect()
}

pub fn load_fixture(id: &str) -> Result<Fixture, FixtureError> {
    fixtures()
        .into_iter()
        .find(|f| f.id == id)
        .ok_or_else(|| FixtureError::UnknownFixture(id.to_string()))
}

/// The combined two-faction game.
pub fn paper_game() -> GameDefinition {
    match load_fixture("paper-game").expect("bundled").compile() {
        Some(Ok(def)) => def,
        other => panic!("paper-game fixture does not compile: {other:?}"),
    }
}

/// Names of the bundled `.rtsl` files.
pub fn files() -> impl Iterator<Item = (&'static str, &'static str)> {
    SOURCES.iter().copied()
}
