use std::collections::BTreeSet;
use std::fmt;

use super::{path_token, FactionDef, GameDefinition, RequireSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiagnosticCategory {
    UnknownUpgradeTarget,
    UnknownResource,
    UnknownBuilding,
    UnknownTech,
    UnknownBuildProduct,
    UnknownPrototype,
}

impl DiagnosticCategory {
    fn describe(self) -> &'static str {
        match self {
            DiagnosticCategory::UnknownUpgradeTarget => "unknown upgrade target",
            DiagnosticCategory::UnknownResource => "unknown resource",
            DiagnosticCategory::UnknownBuilding => "unknown building",
            DiagnosticCategory::UnknownTech => "unknown tech",
            DiagnosticCategory::UnknownBuildProduct => "unknown build product",
            DiagnosticCategory::UnknownPrototype => "unknown prototype",
        }
    }
}

/// A dangling reference: `path` locates the referring field, `name` is the
/// name that could not be resolved.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub path: String,
    pub name: String,
    pub category: DiagnosticCategory,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ERROR {} {} `{}`",
            path_token(&self.path),
            self.category.describe(),
            self.name
        )
    }
}

struct Checker<'a> {
    resources: BTreeSet<&'a str>,
    out: Vec<Diagnostic>,
}

impl<'a> Checker<'a> {
    fn report(&mut self, path: &str, name: &str, category: DiagnosticCategory) {
        self.out.push(Diagnostic {
            path: path.to_string(),
            name: name.to_string(),
            category,
        });
    }

    fn resource(&mut self, path: &str, name: &str) {
        if !self.resources.contains(name) {
            self.report(path, name, DiagnosticCategory::UnknownResource);
        }
    }

    fn require(&mut self, faction: &FactionDef, path: &str, req: &RequireSpec) {
        let path = format!("{path}/Require");
        for name in req.resources.keys() {
            self.resource(&path, name);
        }
        for name in &req.buildings {
            if !faction.buildings.iter().any(|b| &b.name == name) {
                self.report(&path, name, DiagnosticCategory::UnknownBuilding);
            }
        }
        for name in &req.techs {
            if faction.tech(name).is_none() {
                self.report(&path, name, DiagnosticCategory::UnknownTech);
            }
        }
    }
}

/// Every cross-reference that does not resolve, in a stable order.
pub fn validate_references(def: &GameDefinition) -> Vec<Diagnostic> {
    let mut ck = Checker {
        resources: def.resource_names().collect(),
        out: Vec::new(),
    };

    for faction in &def.factions {
        for tech in &faction.techs {
            ck.require(faction, &format!("{}/{}", faction.name, tech.name), &tech.require);
        }
        for proto in faction.prototypes() {
            let path = format!("{}/{}", faction.name, proto.name);
            ck.require(faction, &path, &proto.require);
            for attack in &proto.attacks {
                ck.require(faction, &format!("{path}/{}", attack.name), &attack.require);
            }
            for ability in &proto.abilities {
                ck.require(faction, &format!("{path}/{}", ability.name), &ability.require);
            }
            for target in &proto.upgrades_to {
                if faction.prototype(target).is_none() {
                    ck.report(
                        &format!("{path}/Upgrade"),
                        target,
                        DiagnosticCategory::UnknownUpgradeTarget,
                    );
                }
            }
            for r in proto.gather.keys() {
                ck.resource(&format!("{path}/Gather"), r);
            }
            for r in &proto.purpose.process {
                ck.resource(&format!("{path}/Process"), r);
            }
            for r in &proto.purpose.prepare {
                ck.resource(&format!("{path}/Prepare"), r);
            }
            for product in &proto.purpose.build {
                if faction.prototype(product).is_none() && faction.tech(product).is_none() {
                    ck.report(
                        &format!("{path}/Build"),
                        product,
                        DiagnosticCategory::UnknownBuildProduct,
                    );
                }
            }
        }
    }

    for map in &def.maps {
        for (&(x, y), cell) in &map.cells {
            for r in cell.deposits.keys() {
                ck.resource(&format!("{}/({x},{y})", map.name), r);
            }
        }
        for (slot, entities) in map.starts.iter().enumerate() {
            for e in entities {
                if !def.factions.iter().any(|f| f.prototype(&e.prototype).is_some()) {
                    ck.report(
                        &format!("{}/Start/{}", map.name, slot + 1),
                        &e.prototype,
                        DiagnosticCategory::UnknownPrototype,
                    );
                }
            }
        }
    }

    ck.out
}
