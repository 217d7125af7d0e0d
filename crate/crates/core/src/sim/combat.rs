use std::collections::BTreeSet;

use crate::def::{AttackDef, PrototypeDef, TerrainRule};

/// Product of every Modify percentage that applies when an attacker standing
/// on `attacker_layers` hits a target on `target_layers`.
pub fn terrain_damage_factor(
    rules: &[TerrainRule],
    attacker_layers: &BTreeSet<String>,
    target_layers: &BTreeSet<String>,
) -> f64 {
    rules
        .iter()
        .filter(|r| attacker_layers.contains(&r.label))
        .flat_map(|r| r.attack_damage.iter())
        .filter(|(label, _)| target_layers.contains(*label))
        .fold(1.0, |acc, (_, p)| acc * (1.0 + p / 100.0))
}

/// Damage of one hit: the maximum of the range for this target, scaled by
/// terrain, reduced by the one armor entry that applies, never below zero.
pub fn resolve_damage(
    attack: &AttackDef,
    attacker_layers: &BTreeSet<String>,
    target: &PrototypeDef,
    target_layers: &BTreeSet<String>,
    rules: &[TerrainRule],
) -> f64 {
    let base = attack.damage.against(&target.name).max;
    mitigate(base, &attack.name, attacker_layers, target, target_layers, rules)
}

pub(crate) fn mitigate(
    base: f64,
    attack: &str,
    attacker_layers: &BTreeSet<String>,
    target: &PrototypeDef,
    target_layers: &BTreeSet<String>,
    rules: &[TerrainRule],
) -> f64 {
    let mut dmg = base * terrain_damage_factor(rules, attacker_layers, target_layers);
    if let Some(m) = target.armor.mitigation_for(attack) {
        dmg = m.apply(dmg);
    }
    dmg.max(0.0)
}
