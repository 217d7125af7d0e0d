use std::collections::{BTreeMap, BTreeSet};

use crate::doc::{classify_tag, normalize_key, parse_coordinate_tag, DocNode, Keyword};
use crate::geometry::Shape;

use super::text::{parse_mitigation, parse_number, parse_pair_text, parse_percent, parse_range_text};
use super::*;

#[derive(Debug, Clone)]
pub struct CompileOptions {
    /// Layer given to cells the map does not declare.
    pub default_layer: String,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            default_layer: "Ground".to_string(),
        }
    }
}

/// Compiles and cross-checks a definition. Dangling references are returned
/// as [`CompileError::References`].
pub fn compile_definition(root: &DocNode) -> Result<GameDefinition, CompileError> {
    compile_definition_with(root, &CompileOptions::default())
}

pub fn compile_definition_with(
    root: &DocNode,
    opts: &CompileOptions,
) -> Result<GameDefinition, CompileError> {
    let def = compile_structure(root, opts)?;
    let diags = validate_references(&def);
    if diags.is_empty() {
        Ok(def)
    } else {
        Err(CompileError::References(diags))
    }
}

/// Structural compilation only; references are not resolved.
pub fn compile_structure(
    root: &DocNode,
    opts: &CompileOptions,
) -> Result<GameDefinition, CompileError> {
    let mut faction_names: Vec<String> = Vec::new();
    let mut saw_faction_list = false;
    let mut starting_resources = BTreeMap::new();
    let mut map_nodes = Vec::new();
    let mut global_rules = Vec::new();
    let mut faction_blocks = Vec::new();

    for child in &root.children {
        match child.keyword() {
            Keyword::Faction => {
                saw_faction_list = true;
                for name in list(child, "Faction")? {
                    if faction_names.contains(&name) {
                        return Err(CompileError::DuplicateName { name });
                    }
                    faction_names.push(name);
                }
            }
            Keyword::Resource => {
                for (name, amount) in resource_amounts(child, "Resource")? {
                    if starting_resources.insert(name.clone(), amount).is_some() {
                        return Err(CompileError::DuplicateName { name });
                    }
                }
            }
            Keyword::Map => map_nodes.push(child),
            Keyword::Terrain => global_rules.extend(terrain_rules(child, "Terrain")?),
            Keyword::GameSpecific(_) if !child.is_empty() => faction_blocks.push(child),
            _ => return Err(unexpected("", child)),
        }
    }

    if map_nodes.is_empty() {
        return Err(missing("", "Map"));
    }
    if !saw_faction_list {
        return Err(missing("", "Faction"));
    }

    let attack_names = collect_attack_names(root);
    let mut factions: Vec<FactionDef> = faction_names
        .iter()
        .map(|name| FactionDef {
            name: name.clone(),
            ..FactionDef::default()
        })
        .collect();
    for block in faction_blocks {
        let key = normalize_key(&block.tag);
        let faction = factions
            .iter_mut()
            .find(|f| normalize_key(&f.name) == key)
            .ok_or_else(|| unexpected("", block))?;
        let path = faction.name.clone();
        compile_faction(block, faction, &path, &attack_names)?;
    }

    let mut maps: Vec<MapDef> = Vec::new();
    for node in map_nodes {
        let map = compile_map(node, opts, &global_rules)?;
        if maps.iter().any(|m| m.name == map.name) {
            return Err(CompileError::DuplicateName { name: map.name });
        }
        maps.push(map);
    }

    Ok(GameDefinition {
        factions,
        starting_resources,
        maps,
    })
}

fn join(path: &str, seg: &str) -> String {
    if path.is_empty() {
        seg.to_string()
    } else {
        format!("{path}/{seg}")
    }
}

fn missing(path: &str, field: &str) -> CompileError {
    CompileError::MissingField {
        path: path.to_string(),
        field: field.to_string(),
    }
}

fn unexpected(path: &str, node: &DocNode) -> CompileError {
    CompileError::UnexpectedTag {
        path: path.to_string(),
        tag: node.tag.clone(),
    }
}

fn invalid(path: &str, message: impl Into<String>) -> CompileError {
    CompileError::InvalidValue {
        path: path.to_string(),
        message: message.into(),
    }
}

fn at(path: &str) -> impl Fn(CompileError) -> CompileError + '_ {
    move |e| match e {
        CompileError::BadNumber { text, .. } => CompileError::BadNumber {
            path: path.to_string(),
            text,
        },
        other => other,
    }
}

/// Scalar payload: the node's text, or a single bare word child.
fn value_text(node: &DocNode) -> Option<&str> {
    if let Some(t) = &node.text {
        return Some(t);
    }
    match node.children.as_slice() {
        [only] if only.is_empty() => Some(&only.tag),
        _ => None,
    }
}

fn number(node: &DocNode, path: &str) -> Result<f64, CompileError> {
    let path = join(path, &node.tag);
    let text = value_text(node).ok_or_else(|| missing(&path, "value"))?;
    parse_number(text).map_err(at(&path))
}

fn non_negative(node: &DocNode, path: &str) -> Result<f64, CompileError> {
    let v = number(node, path)?;
    if v < 0.0 {
        return Err(invalid(&join(path, &node.tag), "must be >= 0"));
    }
    Ok(v)
}

fn positive(node: &DocNode, path: &str) -> Result<f64, CompileError> {
    let v = number(node, path)?;
    if v <= 0.0 {
        return Err(invalid(&join(path, &node.tag), "must be > 0"));
    }
    Ok(v)
}

/// Newline-separated names, or a single name written as text.
fn list(node: &DocNode, path: &str) -> Result<Vec<String>, CompileError> {
    if let Some(t) = &node.text {
        return Ok(vec![t.clone()]);
    }
    node.children
        .iter()
        .map(|c| {
            if c.is_empty() {
                Ok(c.tag.clone())
            } else {
                Err(unexpected(&join(path, &node.tag), c))
            }
        })
        .collect()
}

fn set(node: &DocNode, path: &str) -> Result<BTreeSet<String>, CompileError> {
    Ok(list(node, path)?.into_iter().collect())
}

/// `<Resource><Wood>100</Wood>...</Resource>`; bare names count as zero.
fn resource_amounts(node: &DocNode, path: &str) -> Result<Vec<(String, f64)>, CompileError> {
    let here = join(path, &node.tag);
    if let Some(t) = &node.text {
        return Ok(vec![(t.clone(), 0.0)]);
    }
    node.children
        .iter()
        .map(|c| {
            if c.is_empty() {
                Ok((c.tag.clone(), 0.0))
            } else {
                Ok((c.tag.clone(), non_negative(c, &here)?))
            }
        })
        .collect()
}

/// A list that may be wrapped in a `<Resource>` element.
fn resource_list(node: &DocNode, path: &str) -> Result<Vec<String>, CompileError> {
    let here = join(path, &node.tag);
    match node.children.as_slice() {
        [inner] if inner.keyword() == Keyword::Resource && !inner.is_empty() => list(inner, &here),
        _ => list(node, path),
    }
}

fn collect_attack_names(root: &DocNode) -> BTreeSet<String> {
    root.walk()
        .filter(|n| n.keyword() == Keyword::Attack)
        .flat_map(|n| n.children.iter())
        .filter(|c| !c.is_empty() && !c.keyword().is_reserved())
        .map(|c| c.tag.clone())
        .collect()
}

fn compile_faction(
    block: &DocNode,
    faction: &mut FactionDef,
    path: &str,
    attack_names: &BTreeSet<String>,
) -> Result<(), CompileError> {
    for section in &block.children {
        let here = join(path, &section.tag);
        match section.keyword() {
            Keyword::Building | Keyword::Unit => {
                let kind = if section.keyword() == Keyword::Building {
                    PrototypeKind::Building
                } else {
                    PrototypeKind::Unit
                };
                for node in &section.children {
                    let proto = compile_prototype(node, kind, &here, attack_names)?;
                    if faction.prototype(&proto.name).is_some() || faction.tech(&proto.name).is_some()
                    {
                        return Err(CompileError::DuplicateName { name: proto.name });
                    }
                    match kind {
                        PrototypeKind::Building => faction.buildings.push(proto),
                        PrototypeKind::Unit => faction.units.push(proto),
                    }
                }
            }
            Keyword::Tech => {
                for node in &section.children {
                    let tech = compile_tech(node, &here)?;
                    if faction.prototype(&tech.name).is_some() || faction.tech(&tech.name).is_some() {
                        return Err(CompileError::DuplicateName { name: tech.name });
                    }
                    faction.techs.push(tech);
                }
            }
            _ => return Err(unexpected(path, section)),
        }
    }
    Ok(())
}

fn compile_tech(node: &DocNode, path: &str) -> Result<TechDef, CompileError> {
    let here = join(path, &node.tag);
    let mut tech = TechDef {
        name: node.tag.clone(),
        build_time_s: 0.0,
        require: RequireSpec::default(),
    };
    for c in &node.children {
        match c.keyword() {
            Keyword::BuildingTime => tech.build_time_s = non_negative(c, &here)?,
            Keyword::Require => tech.require = compile_require(c, &here)?,
            _ => return Err(unexpected(&here, c)),
        }
    }
    Ok(tech)
}

fn is_shape_keyword(kw: &Keyword) -> bool {
    matches!(
        kw,
        Keyword::Point
            | Keyword::Square
            | Keyword::Circle
            | Keyword::Rectangle
            | Keyword::FCone
            | Keyword::BCone
    )
}

/// Accepts `<Shape><Square> 2 </Square></Shape>`, `<Shape> Circle </Shape>`
/// with a sibling `<Size>`, and `<Square><Size>5</Size></Square>`.
fn compile_shape<'a>(
    shape: Option<&'a DocNode>,
    size: Option<&'a DocNode>,
    path: &str,
) -> Result<ShapeSpec, CompileError> {
    let Some(shape) = shape else {
        if let Some(size) = size {
            return Err(unexpected(path, size));
        }
        return Ok(Shape::Point);
    };
    let here = join(path, &shape.tag);

    let (kind, size_text): (Keyword, Option<&str>) = if is_shape_keyword(&shape.keyword()) {
        (shape.keyword(), inner_size(shape))
    } else if let Some(name) = value_text(shape) {
        let outer = match size {
            Some(s) => Some(value_text(s).ok_or_else(|| missing(&here, "Size"))?),
            None => None,
        };
        (classify_tag(name), outer)
    } else {
        match shape.children.as_slice() {
            [inner] if is_shape_keyword(&inner.keyword()) => (inner.keyword(), inner_size(inner)),
            _ => return Err(invalid(&here, "expected one shape")),
        }
    };
    let size_text = size_text.or_else(|| size.and_then(value_text));

    let need = |text: Option<&'a str>| -> Result<&'a str, CompileError> {
        text.ok_or_else(|| missing(&here, "Size"))
    };
    let spec = match kind {
        Keyword::Point => Shape::Point,
        Keyword::Square => Shape::Square {
            side: parse_number(need(size_text)?).map_err(at(&here))?,
        },
        Keyword::Circle => Shape::Circle {
            radius: parse_number(need(size_text)?).map_err(at(&here))?,
        },
        Keyword::Rectangle => {
            let (a, b) = parse_pair_text(need(size_text)?).map_err(at(&here))?;
            Shape::Rectangle {
                parallel: a,
                perpendicular: b,
            }
        }
        Keyword::FCone => {
            let (h, b) = parse_pair_text(need(size_text)?).map_err(at(&here))?;
            Shape::FCone { height: h, base: b }
        }
        Keyword::BCone => {
            let (h, b) = parse_pair_text(need(size_text)?).map_err(at(&here))?;
            Shape::BCone { height: h, base: b }
        }
        other => return Err(invalid(&here, format!("unknown shape `{}`", other.canonical()))),
    };
    if spec.dimensions().iter().any(|&d| d <= 0.0) {
        return Err(invalid(&here, "shape dimensions must be > 0"));
    }
    Ok(spec)
}

fn inner_size(node: &DocNode) -> Option<&str> {
    node.text
        .as_deref()
        .or_else(|| node.child(Keyword::Size).and_then(value_text))
}

fn compile_prototype(
    node: &DocNode,
    kind: PrototypeKind,
    path: &str,
    attack_names: &BTreeSet<String>,
) -> Result<PrototypeDef, CompileError> {
    let here = join(path, &node.tag);
    if node.keyword().is_reserved() {
        return Err(unexpected(path, node));
    }
    let mut max_health = None;
    let mut build_time_s = 0.0;
    let mut armor = ArmorSpec::default();
    let mut shape_node = None;
    let mut size_node = None;
    let mut occupy_terrain = BTreeSet::from(["Ground".to_string()]);
    let mut movement_terrain = None;
    let mut movement_speed = None;
    let mut vision = 0.0;
    let mut speed = 0.0;
    let mut attacks = Vec::new();
    let mut require = RequireSpec::default();
    let mut upgrades_to = Vec::new();
    let mut purpose = PurposeSpec::default();
    let mut gather = BTreeMap::new();
    let mut contain = None;
    let mut repair = None;
    let mut abilities = Vec::new();
    let mut weight = None;
    let mut traits = BTreeMap::new();
    let mut listing = ListingState::default();

    for c in &node.children {
        match c.keyword() {
            Keyword::HealthPoint => max_health = Some(positive(c, &here)?),
            Keyword::BuildingTime => build_time_s = non_negative(c, &here)?,
            Keyword::Terrain => occupy_terrain = set(c, &here)?,
            Keyword::Movement => {
                let mpath = join(&here, &c.tag);
                for m in &c.children {
                    match m.keyword() {
                        Keyword::Terrain => movement_terrain = Some(set(m, &mpath)?),
                        Keyword::Speed => movement_speed = Some(non_negative(m, &mpath)?),
                        _ => return Err(unexpected(&mpath, m)),
                    }
                }
            }
            Keyword::Shape => shape_node = Some(c),
            kw if is_shape_keyword(&kw) => shape_node = Some(c),
            Keyword::Size => size_node = Some(c),
            Keyword::Vision => vision = non_negative(c, &here)?,
            Keyword::Speed => speed = non_negative(c, &here)?,
            Keyword::Weight => weight = Some(positive(c, &here)?),
            Keyword::Armor => armor = compile_armor(c, &here, attack_names)?,
            Keyword::Attack => attacks.extend(compile_attacks(c, &here)?),
            Keyword::Require => require = compile_require(c, &here)?,
            Keyword::Upgrade => upgrades_to.extend(list(c, &here)?),
            Keyword::Purpose => compile_purpose(c, &here, &mut purpose)?,
            Keyword::Build => purpose.build.extend(list(c, &here)?),
            Keyword::Process => purpose.process.extend(resource_list(c, &here)?),
            Keyword::Prepare => purpose.prepare.extend(resource_list(c, &here)?),
            Keyword::Gather => {
                let gpath = join(&here, &c.tag);
                for g in &c.children {
                    let text = value_text(g).ok_or_else(|| missing(&gpath, &g.tag))?;
                    let (_, capacity) = parse_range_text(text).map_err(at(&gpath))?;
                    if capacity <= 0.0 {
                        return Err(invalid(&gpath, "carry capacity must be > 0"));
                    }
                    gather.insert(g.tag.clone(), capacity);
                }
            }
            Keyword::Contain => contain = Some(compile_contain(c, &here)?),
            Keyword::Repair => repair = Some(compile_repair(c, &here)?),
            Keyword::UniqueId => listing.unique_id = value_text(c).map(str::to_string),
            Keyword::Position => listing.position = Some(compile_position(c, &here)?),
            Keyword::Action => {
                listing.action = value_text(c)
                    .map(str::to_string)
                    .or_else(|| c.children.first().map(|a| a.tag.clone()))
            }
            Keyword::Enemy => listing.enemies = c.children.iter().map(|e| e.tag.clone()).collect(),
            Keyword::GameSpecific(name) => {
                if c.children.iter().any(|g| !g.is_empty() || g.keyword().is_reserved()) {
                    abilities.push(compile_ability(c, &here)?);
                } else {
                    traits.insert(name, trait_value(c, &here)?);
                }
            }
            _ => return Err(unexpected(&here, c)),
        }
    }

    let max_health = max_health.ok_or_else(|| missing(&here, "Health Point"))?;
    let shape = compile_shape(shape_node, size_node, &here)?;
    if kind == PrototypeKind::Building {
        speed = if movement_terrain.is_some() || movement_speed.is_some() {
            movement_speed.unwrap_or(speed)
        } else {
            0.0
        };
    } else if let Some(s) = movement_speed {
        speed = s;
    }
    for attack in &mut attacks {
        if attack.target_terrain.is_empty() {
            attack.target_terrain = occupy_terrain.clone();
        }
    }
    if occupy_terrain.is_empty() {
        return Err(invalid(&here, "terrain list is empty"));
    }

    Ok(PrototypeDef {
        kind,
        name: node.tag.clone(),
        max_health,
        build_time_s,
        armor,
        shape,
        occupy_terrain,
        movement_terrain,
        vision,
        speed,
        attacks,
        require,
        upgrades_to,
        purpose,
        gather,
        contain,
        repair,
        abilities,
        weight,
        traits,
        listing,
    })
}

fn compile_position(node: &DocNode, path: &str) -> Result<(f64, f64), CompileError> {
    let here = join(path, &node.tag);
    let text = node
        .child(Keyword::XY)
        .and_then(value_text)
        .or_else(|| value_text(node))
        .ok_or_else(|| missing(&here, "X,Y"))?;
    xy_pair(text).map_err(at(&here))
}

fn xy_pair(text: &str) -> Result<(f64, f64), CompileError> {
    let (x, y) = text.split_once(',').ok_or_else(|| CompileError::BadNumber {
        path: String::new(),
        text: text.to_string(),
    })?;
    Ok((parse_number(x)?, parse_number(y)?))
}

fn trait_value(node: &DocNode, path: &str) -> Result<TraitValue, CompileError> {
    let here = join(path, &node.tag);
    let Some(text) = value_text(node) else {
        // a bare flag word
        return Ok(TraitValue::Bool(true));
    };
    match text.to_ascii_lowercase().as_str() {
        "true" => Ok(TraitValue::Bool(true)),
        "false" => Ok(TraitValue::Bool(false)),
        _ => parse_number(text)
            .map(TraitValue::Number)
            .map_err(|_| invalid(&here, format!("trait value `{text}` is not True, False or a number"))),
    }
}

fn compile_armor(
    node: &DocNode,
    path: &str,
    attack_names: &BTreeSet<String>,
) -> Result<ArmorSpec, CompileError> {
    let here = join(path, &node.tag);
    let mut armor = ArmorSpec::default();
    let mut named = Vec::new();

    let take_word = |word: &str, armor: &mut ArmorSpec| -> Result<(), CompileError> {
        match parse_mitigation(word) {
            Ok(m) => {
                if armor.universal.replace(m).is_some() {
                    return Err(invalid(&here, "more than one universal armor value"));
                }
            }
            Err(_) if word.chars().any(|c| c.is_ascii_digit()) => {
                return Err(CompileError::BadNumber {
                    path: here.clone(),
                    text: word.to_string(),
                })
            }
            Err(_) => armor.armor_class = Some(word.to_string()),
        }
        Ok(())
    };

    if let Some(text) = &node.text {
        take_word(text, &mut armor)?;
    }
    for c in &node.children {
        if c.is_empty() {
            take_word(&c.tag, &mut armor)?;
        } else {
            let text = value_text(c).ok_or_else(|| missing(&here, &c.tag))?;
            let m = parse_mitigation(text).map_err(at(&here))?;
            named.push((c.tag.clone(), m));
        }
    }

    if armor.universal.is_some() {
        armor.per_attack.extend(named);
        return Ok(armor);
    }
    let mut items = Vec::new();
    for (name, m) in named {
        if attack_names.contains(&name) {
            armor.per_attack.insert(name, m);
        } else {
            items.push((name, m));
        }
    }
    match items.len() {
        0 => {}
        1 => {
            let (label, m) = items.remove(0);
            armor.universal = Some(m);
            armor.universal_label = Some(label);
        }
        _ => return Err(invalid(&here, "several armor items and no universal value")),
    }
    Ok(armor)
}

fn is_attack_field(kw: &Keyword) -> bool {
    matches!(
        kw,
        Keyword::Range
            | Keyword::Damage
            | Keyword::Recharge
            | Keyword::Shape
            | Keyword::Size
            | Keyword::Terrain
            | Keyword::Require
    ) || is_shape_keyword(kw)
}

fn compile_attacks(node: &DocNode, path: &str) -> Result<Vec<AttackDef>, CompileError> {
    let here = join(path, &node.tag);
    if !node.children.is_empty() && node.children.iter().all(|c| is_attack_field(&c.keyword())) {
        return Ok(vec![compile_attack(node, path)?]);
    }
    let mut out: Vec<AttackDef> = Vec::new();
    for c in &node.children {
        if c.is_empty() || c.keyword().is_reserved() {
            return Err(unexpected(&here, c));
        }
        let attack = compile_attack(c, &here)?;
        if out.iter().any(|a| a.name == attack.name) {
            return Err(CompileError::DuplicateName { name: attack.name });
        }
        out.push(attack);
    }
    Ok(out)
}

fn compile_attack(node: &DocNode, path: &str) -> Result<AttackDef, CompileError> {
    let here = join(path, &node.tag);
    let mut range = None;
    let mut damage = None;
    let mut recharge = None;
    let mut shape_node = None;
    let mut size_node = None;
    let mut target_terrain = BTreeSet::new();
    let mut require = RequireSpec::default();
    for c in &node.children {
        match c.keyword() {
            Keyword::Range => range = Some(non_negative(c, &here)?),
            Keyword::Damage => damage = Some(compile_damage(c, &here)?),
            Keyword::Recharge => recharge = Some(positive(c, &here)?),
            Keyword::Shape => shape_node = Some(c),
            kw if is_shape_keyword(&kw) => shape_node = Some(c),
            Keyword::Size => size_node = Some(c),
            Keyword::Terrain => target_terrain = set(c, &here)?,
            Keyword::Require => require = compile_require(c, &here)?,
            _ => return Err(unexpected(&here, c)),
        }
    }
    Ok(AttackDef {
        name: node.tag.clone(),
        range: range.ok_or_else(|| missing(&here, "Range"))?,
        damage: damage.ok_or_else(|| missing(&here, "Damage"))?,
        recharge_s: recharge.ok_or_else(|| missing(&here, "Recharge"))?,
        shape: compile_shape(shape_node, size_node, &here)?,
        target_terrain,
        require,
    })
}

fn compile_damage(node: &DocNode, path: &str) -> Result<DamageSpec, CompileError> {
    let here = join(path, &node.tag);
    let mut universal = None;
    let mut per_target = BTreeMap::new();
    if let Some(text) = &node.text {
        universal = Some(parse_range_text(text).map_err(at(&here))?);
    }
    for c in &node.children {
        if c.is_empty() {
            if universal.is_some() {
                return Err(invalid(&here, "more than one universal damage range"));
            }
            universal = Some(parse_range_text(&c.tag).map_err(at(&here))?);
        } else {
            let text = value_text(c).ok_or_else(|| missing(&here, &c.tag))?;
            let (min, max) = parse_range_text(text).map_err(at(&here))?;
            per_target.insert(c.tag.clone(), DamageRange::new(min, max));
        }
    }
    let (min, max) = universal.ok_or_else(|| missing(&here, "damage range"))?;
    Ok(DamageSpec {
        universal: DamageRange::new(min, max),
        per_target,
    })
}

fn compile_require(node: &DocNode, path: &str) -> Result<RequireSpec, CompileError> {
    let here = join(path, &node.tag);
    let mut req = RequireSpec::default();
    if let Some(text) = &node.text {
        req.techs.push(text.clone());
    }
    for c in &node.children {
        match c.keyword() {
            Keyword::Resource => {
                for (name, amount) in resource_amounts(c, &here)? {
                    *req.resources.entry(name).or_default() += amount;
                }
            }
            Keyword::Building => req.buildings.extend(list(c, &here)?),
            Keyword::Tech => req.techs.extend(list(c, &here)?),
            Keyword::Enemy => {
                let epath = join(&here, &c.tag);
                for t in &c.children {
                    req.target_traits.insert(t.tag.clone(), trait_value(t, &epath)?);
                }
            }
            Keyword::Distance => {
                let dpath = join(&here, &c.tag);
                let mut d = DistanceSpec::default();
                for b in &c.children {
                    match b.keyword() {
                        Keyword::Less => d.less = Some(non_negative(b, &dpath)?),
                        Keyword::Greater => d.greater = Some(non_negative(b, &dpath)?),
                        _ => return Err(unexpected(&dpath, b)),
                    }
                }
                if let (Some(g), Some(l)) = (d.greater, d.less) {
                    if g >= l {
                        return Err(invalid(&dpath, "Greater must be below Less"));
                    }
                }
                req.distance = Some(d);
            }
            Keyword::GameSpecific(name) if c.is_empty() => req.techs.push(name),
            Keyword::GameSpecific(name) if c.text.is_some() => {
                // a direct cost such as <Mana> 5 </Mana>
                *req.resources.entry(name).or_default() += non_negative(c, &here)?;
            }
            _ => return Err(unexpected(&here, c)),
        }
    }
    Ok(req)
}

fn compile_purpose(
    node: &DocNode,
    path: &str,
    purpose: &mut PurposeSpec,
) -> Result<(), CompileError> {
    let here = join(path, &node.tag);
    for c in &node.children {
        match c.keyword() {
            Keyword::Process => purpose.process.extend(resource_list(c, &here)?),
            Keyword::Prepare => purpose.prepare.extend(resource_list(c, &here)?),
            Keyword::Build => purpose.build.extend(list(c, &here)?),
            _ => return Err(unexpected(&here, c)),
        }
    }
    Ok(())
}

fn compile_contain(node: &DocNode, path: &str) -> Result<ContainSpec, CompileError> {
    let here = join(path, &node.tag);
    let mut max_weight = None;
    let mut allowed = BTreeSet::new();
    for c in &node.children {
        match c.keyword() {
            Keyword::Weight => max_weight = Some(positive(c, &here)?),
            Keyword::Armor => allowed.extend(list(c, &here)?),
            _ => return Err(unexpected(&here, c)),
        }
    }
    Ok(ContainSpec {
        max_weight: max_weight.ok_or_else(|| missing(&here, "Weight"))?,
        allowed_armor_classes: allowed,
    })
}

/// Rate plus optional `<Range>`, written either as text or as a bare number
/// next to the `<Range>` element.
fn rate_and_range(node: &DocNode, path: &str) -> Result<(Option<f64>, Option<f64>), CompileError> {
    let mut rate = node
        .text
        .as_deref()
        .map(|t| parse_number(t).map_err(at(path)))
        .transpose()?;
    let mut range = None;
    for c in &node.children {
        if c.is_empty() && c.keyword() == Keyword::GameSpecific(c.tag.clone()) {
            if let Ok(v) = parse_number(&c.tag) {
                rate = Some(v);
                continue;
            }
        }
        if c.keyword() == Keyword::Range {
            range = Some(non_negative(c, path)?);
        }
    }
    Ok((rate, range))
}

fn compile_repair(node: &DocNode, path: &str) -> Result<RepairSpec, CompileError> {
    let here = join(path, &node.tag);
    let (rate, range) = rate_and_range(node, &here)?;
    let range = range.unwrap_or(1.0);
    let mut per_target = BTreeMap::new();
    for c in &node.children {
        match c.keyword() {
            Keyword::Range => {}
            Keyword::GameSpecific(_) if c.is_empty() && parse_number(&c.tag).is_ok() => {}
            Keyword::GameSpecific(name) if !c.is_empty() => {
                let tpath = join(&here, &c.tag);
                for g in &c.children {
                    let numeric = g.is_empty() && parse_number(&g.tag).is_ok();
                    if !numeric && g.keyword() != Keyword::Range {
                        return Err(unexpected(&tpath, g));
                    }
                }
                let (r, rg) = rate_and_range(c, &tpath)?;
                let r = r.ok_or_else(|| missing(&tpath, "rate"))?;
                if r <= 0.0 {
                    return Err(invalid(&tpath, "repair rate must be > 0"));
                }
                per_target.insert(
                    name,
                    RepairRate {
                        rate_hp_per_s: r,
                        range: rg.unwrap_or(range),
                    },
                );
            }
            _ => return Err(unexpected(&here, c)),
        }
    }
    let rate = rate.ok_or_else(|| missing(&here, "rate"))?;
    if rate <= 0.0 {
        return Err(invalid(&here, "repair rate must be > 0"));
    }
    Ok(RepairSpec {
        rate_hp_per_s: rate,
        range,
        per_target,
    })
}

fn compile_ability(node: &DocNode, path: &str) -> Result<AbilityDef, CompileError> {
    let here = join(path, &node.tag);
    let mut ability = AbilityDef {
        name: node.tag.clone(),
        target_modifiers: Vec::new(),
        require: RequireSpec::default(),
        time_limit_s: None,
        use_limit: None,
    };
    for c in &node.children {
        match c.keyword() {
            Keyword::Enemy => {
                let epath = join(&here, &c.tag);
                for m in &c.children {
                    let property = match m.keyword() {
                        Keyword::Speed => Property::Speed,
                        Keyword::Recharge => Property::Recharge,
                        Keyword::Vision => Property::Vision,
                        Keyword::Range => Property::Range,
                        Keyword::Damage => Property::Damage,
                        _ => return Err(unexpected(&epath, m)),
                    };
                    let mpath = join(&epath, &m.tag);
                    let text = value_text(m).ok_or_else(|| missing(&mpath, "value"))?;
                    let change = match parse_percent(text).map_err(at(&mpath))? {
                        Some(p) => Change::AddPercent(p),
                        None => Change::Set(parse_number(text).map_err(at(&mpath))?),
                    };
                    ability
                        .target_modifiers
                        .push(PropertyModifier { property, change });
                }
            }
            Keyword::Require => ability.require = compile_require(c, &here)?,
            Keyword::TimeLimit => ability.time_limit_s = Some(positive(c, &here)?),
            Keyword::Limit => {
                let v = positive(c, &here)?;
                if v.fract() != 0.0 || v > u32::MAX as f64 {
                    return Err(invalid(&join(&here, &c.tag), "must be an integer"));
                }
                ability.use_limit = Some(v as u32);
            }
            _ => return Err(unexpected(&here, c)),
        }
    }
    Ok(ability)
}

fn terrain_rules(node: &DocNode, path: &str) -> Result<Vec<TerrainRule>, CompileError> {
    let here = join(path, &node.tag);
    let mut rules = Vec::new();
    for label in &node.children {
        let lpath = join(&here, &label.tag);
        let mut rule = TerrainRule {
            label: label.tag.clone(),
            ..TerrainRule::default()
        };
        for modify in &label.children {
            if modify.keyword() != Keyword::Modify {
                return Err(unexpected(&lpath, modify));
            }
            let mpath = join(&lpath, &modify.tag);
            for m in &modify.children {
                let percent = |n: &DocNode, p: &str| -> Result<f64, CompileError> {
                    let p = join(p, &n.tag);
                    let text = value_text(n).ok_or_else(|| missing(&p, "value"))?;
                    parse_percent(text)
                        .map_err(at(&p))?
                        .ok_or_else(|| invalid(&p, "expected a percentage"))
                };
                match m.keyword() {
                    Keyword::Attack => {
                        let apath = join(&mpath, &m.tag);
                        for target in &m.children {
                            let tpath = join(&apath, &target.tag);
                            let dmg = target
                                .child(Keyword::Damage)
                                .ok_or_else(|| missing(&tpath, "Damage"))?;
                            rule.attack_damage
                                .insert(target.tag.clone(), percent(dmg, &tpath)?);
                        }
                    }
                    Keyword::Speed => rule.speed_percent = Some(percent(m, &mpath)?),
                    Keyword::Vision => rule.vision_percent = Some(percent(m, &mpath)?),
                    Keyword::Range => rule.range_percent = Some(percent(m, &mpath)?),
                    _ => return Err(unexpected(&mpath, m)),
                }
            }
        }
        rules.push(rule);
    }
    Ok(rules)
}

fn compile_map(
    node: &DocNode,
    opts: &CompileOptions,
    global_rules: &[TerrainRule],
) -> Result<MapDef, CompileError> {
    let here = node.tag.clone();
    let mut name = None;
    let mut size = None;
    let mut cells = BTreeMap::new();
    let mut rules: Vec<TerrainRule> = global_rules.to_vec();
    let mut starts = Vec::new();

    for c in &node.children {
        match c.keyword() {
            Keyword::Name => name = value_text(c).map(str::to_string),
            Keyword::Size => {
                let spath = join(&here, &c.tag);
                let text = value_text(c).ok_or_else(|| missing(&spath, "value"))?;
                let (w, h) = parse_pair_text(text).map_err(at(&spath))?;
                if w < 1.0 || h < 1.0 || w.fract() != 0.0 || h.fract() != 0.0 {
                    return Err(invalid(&spath, "map size must be whole numbers >= 1"));
                }
                size = Some((w as i64, h as i64));
            }
            Keyword::Terrain => {
                for rule in terrain_rules(c, &here)? {
                    rules.retain(|r| r.label != rule.label);
                    rules.push(rule);
                }
            }
            Keyword::Start => {
                let spath = join(&here, &c.tag);
                for slot in &c.children {
                    let ppath = join(&spath, &slot.tag);
                    let mut entities = Vec::new();
                    for e in &slot.children {
                        let text = value_text(e).ok_or_else(|| missing(&ppath, &e.tag))?;
                        let (x, y) = xy_pair(text).map_err(at(&ppath))?;
                        entities.push(StartEntity {
                            prototype: e.tag.clone(),
                            x,
                            y,
                        });
                    }
                    starts.push(entities);
                }
            }
            Keyword::Coordinate => {
                let (x, y) = parse_coordinate_tag(&c.tag)
                    .ok()
                    .flatten()
                    .ok_or_else(|| invalid(&here, format!("malformed coordinate `{}`", c.tag)))?;
                if x < 0 || y < 0 {
                    return Err(invalid(&here, format!("negative coordinate `{}`", c.tag)));
                }
                let cell = compile_cell(c, &here, opts)?;
                if cells.insert((x, y), cell).is_some() {
                    return Err(CompileError::DuplicateName {
                        name: format!("({x},{y})"),
                    });
                }
            }
            Keyword::GameSpecific(_) if parse_coordinate_tag(&c.tag).is_err() => {
                return Err(invalid(&here, format!("malformed coordinate `{}`", c.tag)));
            }
            _ => return Err(unexpected(&here, c)),
        }
    }

    let name = name.ok_or_else(|| missing(&here, "Name"))?;
    let inferred = cells.keys().fold((1, 1), |(w, h), &(x, y)| {
        (std::cmp::max(w, x + 1), std::cmp::max(h, y + 1))
    });
    let (width, height) = size.unwrap_or(inferred);
    if let Some(&(x, y)) = cells.keys().find(|&&(x, y)| x >= width || y >= height) {
        return Err(invalid(
            &here,
            format!("cell ({x},{y}) lies outside the {width}x{height} map"),
        ));
    }

    Ok(MapDef {
        name,
        width,
        height,
        default_layer: opts.default_layer.clone(),
        cells,
        terrain_rules: rules,
        starts,
    })
}

fn compile_cell(node: &DocNode, path: &str, opts: &CompileOptions) -> Result<CellDef, CompileError> {
    let here = join(path, &node.tag);
    let mut cell = CellDef::default();
    for c in &node.children {
        match c.keyword() {
            Keyword::Terrain => {
                let tpath = join(&here, &c.tag);
                if let Some(text) = &c.text {
                    cell.layers.push(TerrainLayer::plain(text.clone()));
                }
                for layer in &c.children {
                    if layer.is_empty() {
                        cell.layers.push(TerrainLayer::plain(layer.tag.clone()));
                        continue;
                    }
                    let replacement = layer
                        .condition_suffix
                        .clone()
                        .ok_or_else(|| unexpected(&tpath, layer))?;
                    let amount = positive(layer, &tpath)?;
                    *cell.deposits.entry(layer.tag.clone()).or_default() += amount;
                    cell.layers.push(TerrainLayer {
                        label: layer.tag.clone(),
                        condition: Some(TerrainCondition {
                            resource: layer.tag.clone(),
                            amount,
                            replacement_label: replacement,
                        }),
                    });
                }
            }
            Keyword::GameSpecific(name) if c.text.is_some() => {
                *cell.deposits.entry(name).or_default() += non_negative(c, &here)?;
            }
            _ => return Err(unexpected(&here, c)),
        }
    }
    if cell.layers.is_empty() {
        cell.layers.push(TerrainLayer::plain(opts.default_layer.clone()));
    }
    Ok(cell)
}
