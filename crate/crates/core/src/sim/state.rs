use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::def::{
    FactionDef, GameDefinition, MapDef, PrototypeDef, PropertyModifier, Property, TerrainLayer,
    TerrainRule, TraitValue,
};
use crate::geometry::{cells_in_shape, cells_in_vision, distance, find_path_to_any, Cell, OrientedShape, Passability};

use super::{Amount, Command, SimConfig, SimError};

type Position = crate::geometry::Position<f64>;

pub(crate) const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BuildJob {
    /// The entity is itself a building under construction.
    Construct,
    Train,
    Research,
    Upgrade,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Idle,
    Moving {
        dest: Position,
    },
    Attacking {
        target: String,
    },
    Gathering {
        resource: String,
        cell: Cell,
        returning: bool,
    },
    Build {
        product: String,
        job: BuildJob,
        remaining_ticks: u64,
    },
    GameSpecific {
        name: String,
        target: Option<String>,
    },
}

impl Action {
    /// Keyword used for this action in updates.
    pub fn tag(&self) -> &str {
        match self {
            Action::Idle => "Idle",
            Action::Moving { .. } => "Moving",
            Action::Attacking { .. } => "Attacking",
            Action::Gathering { .. } => "Gathering",
            Action::Build { .. } => "Build",
            Action::GameSpecific { name, .. } => name,
        }
    }

    /// Payload shown inside the action tag, if any.
    pub fn detail(&self) -> Option<String> {
        match self {
            Action::Idle => None,
            Action::Moving { dest } => Some(format!("{},{}", dest.x, dest.y)),
            Action::Attacking { target } => Some(target.clone()),
            Action::Gathering { resource, .. } => Some(resource.clone()),
            Action::Build { product, .. } => Some(product.clone()),
            Action::GameSpecific { target, .. } => target.clone(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.detail() {
            Some(d) => write!(f, "{} {d}", self.tag()),
            None => f.write_str(self.tag()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub id: String,
    pub owner: String,
    pub faction: String,
    pub proto: String,
    pub pos: Position,
    /// Direction of the last movement.
    pub heading: Position,
    pub hp: f64,
    pub action: Action,
    /// False while a building is still a foundation.
    pub complete: bool,
    /// Remaining waypoints.
    pub path: Vec<Position>,
    /// Cell the current path leads to, to notice when a chased target moves.
    pub path_goal: Option<Cell>,
    /// Attack name -> tick it last fired.
    pub cooldowns: BTreeMap<String, u64>,
    pub carrying: Option<(String, Amount)>,
    pub contained: Vec<String>,
    pub container: Option<String>,
    pub ability_uses: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveEffect {
    pub ability: String,
    pub source: String,
    pub target: String,
    pub modifiers: Vec<PropertyModifier>,
    pub created_tick: u64,
    pub expires_at_tick: Option<u64>,
    /// Cooldown anchors of the target before the effect took hold.
    pub saved_cooldowns: Option<BTreeMap<String, u64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlayerState {
    pub faction: String,
    pub bank: BTreeMap<String, Amount>,
    pub techs_done: BTreeSet<String>,
    pub researching: BTreeSet<String>,
    /// Resources paid for anything, or lost with a destroyed carrier.
    pub spent: BTreeMap<String, Amount>,
    pub visible_cells: BTreeSet<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeCell {
    pub layers: Vec<TerrainLayer>,
    pub deposits: BTreeMap<String, Amount>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoggedCommand {
    pub tick: u64,
    pub player: String,
    pub command: Command,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct GameState {
    pub def: Arc<GameDefinition>,
    pub map_name: String,
    pub config: SimConfig,
    pub tick: u64,
    pub seed: u64,
    pub players: BTreeMap<String, PlayerState>,
    pub entities: BTreeMap<String, Entity>,
    /// Declared cells only; the rest carry the map's default layer.
    pub cells: BTreeMap<Cell, RuntimeCell>,
    pub effects: Vec<ActiveEffect>,
    pub command_log: Vec<LoggedCommand>,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) id_counters: BTreeMap<String, u64>,
    pub(crate) initial_totals: BTreeMap<String, Amount>,
}

/// Starts a match on `map_name`. Players are `(player id, faction)` pairs;
/// the i-th player receives the map's i-th start slot.
pub fn new_game(
    def: Arc<GameDefinition>,
    map_name: &str,
    players: &[(String, String)],
    seed: u64,
    config: SimConfig,
) -> Result<GameState, SimError> {
    if config.tick_hz == 0 {
        return Err(SimError::BadTickRate);
    }
    let map = def
        .map(map_name)
        .ok_or_else(|| SimError::UnknownMap(map_name.to_string()))?
        .clone();
    let bank: BTreeMap<String, Amount> = def
        .starting_resources
        .iter()
        .map(|(k, &v)| (k.clone(), Amount::from_f64(v)))
        .collect();

    let mut state = GameState {
        def: Arc::clone(&def),
        map_name: map.name.clone(),
        config,
        tick: 0,
        seed,
        players: BTreeMap::new(),
        entities: BTreeMap::new(),
        cells: map
            .cells
            .iter()
            .map(|(&(x, y), c)| {
                let deposits = c
                    .deposits
                    .iter()
                    .map(|(k, &v)| (k.clone(), Amount::from_f64(v)))
                    .collect();
                (
                    Cell::new(x, y),
                    RuntimeCell {
                        layers: c.layers.clone(),
                        deposits,
                    },
                )
            })
            .collect(),
        effects: Vec::new(),
        command_log: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
        id_counters: BTreeMap::new(),
        initial_totals: BTreeMap::new(),
    };

    for (player, faction) in players {
        if def.faction(faction).is_none() {
            return Err(SimError::UnknownFaction(faction.clone()));
        }
        if state.players.contains_key(player) {
            return Err(SimError::DuplicatePlayer(player.clone()));
        }
        state.players.insert(
            player.clone(),
            PlayerState {
                faction: faction.clone(),
                bank: bank.clone(),
                ..PlayerState::default()
            },
        );
    }

    for ((player, faction), slot) in players.iter().zip(map.starts.iter()) {
        for start in slot {
            if def.faction(faction).and_then(|f| f.prototype(&start.prototype)).is_none() {
                return Err(SimError::UnknownPrototype {
                    faction: faction.clone(),
                    prototype: start.prototype.clone(),
                });
            }
            state.spawn(player, &start.prototype, Position::new(start.x, start.y), true);
        }
    }

    state.initial_totals = state.resource_totals();
    state.recompute_vision();
    Ok(state)
}

/// Prototype of an entity, borrowed from the definition rather than the state.
pub(crate) fn proto_of<'d>(def: &'d GameDefinition, e: &Entity) -> &'d PrototypeDef {
    def.faction(&e.faction)
        .and_then(|f| f.prototype(&e.proto))
        .expect("entity prototype exists")
}

/// Passability for one movement-terrain set, with building footprints
/// taking away the labels those buildings occupy.
pub(crate) struct Walk<'a> {
    pub state: &'a GameState,
    pub terrain: &'a BTreeSet<String>,
    pub blocked: BTreeMap<Cell, BTreeSet<String>>,
}

impl Passability for Walk<'_> {
    fn width(&self) -> i64 {
        self.state.map().width
    }

    fn height(&self) -> i64 {
        self.state.map().height
    }

    fn is_passable(&self, cell: Cell) -> bool {
        if !self.in_bounds(cell) {
            return false;
        }
        let taken = self.blocked.get(&cell);
        self.state
            .layer_labels(cell)
            .iter()
            .any(|l| self.terrain.contains(l) && !taken.is_some_and(|t| t.contains(l)))
    }
}

impl GameState {
    pub fn map(&self) -> &MapDef {
        self.def.map(&self.map_name).expect("map exists")
    }

    pub fn faction_of(&self, player: &str) -> Option<&FactionDef> {
        self.players.get(player).and_then(|p| self.def.faction(&p.faction))
    }

    pub fn proto(&self, e: &Entity) -> &PrototypeDef {
        proto_of(&self.def, e)
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        let m = self.map();
        cell.x >= 0 && cell.y >= 0 && cell.x < m.width && cell.y < m.height
    }

    pub fn position_in_bounds(&self, x: f64, y: f64) -> bool {
        x.is_finite() && y.is_finite() && self.in_bounds(Position::new(x, y).cell())
    }

    /// Current terrain labels of a cell.
    pub fn layer_labels(&self, cell: Cell) -> Vec<String> {
        match self.cells.get(&cell) {
            Some(c) => c.layers.iter().map(|l| l.label.clone()).collect(),
            None => vec![self.map().default_layer.clone()],
        }
    }

    pub fn deposit(&self, cell: Cell, resource: &str) -> Amount {
        self.cells
            .get(&cell)
            .and_then(|c| c.deposits.get(resource))
            .copied()
            .unwrap_or_default()
    }

    /// Cells covered by an entity's shape.
    pub fn footprint(&self, e: &Entity) -> BTreeSet<Cell> {
        cells_in_shape(&OrientedShape::unoriented(self.proto(e).shape, e.pos))
    }

    /// Labels taken by building footprints, optionally ignoring one entity.
    pub(crate) fn blocked_labels(&self, except: Option<&str>) -> BTreeMap<Cell, BTreeSet<String>> {
        let mut out: BTreeMap<Cell, BTreeSet<String>> = BTreeMap::new();
        for e in self.entities.values() {
            if e.container.is_some() || Some(e.id.as_str()) == except {
                continue;
            }
            let proto = self.proto(e);
            if !proto.is_building() {
                continue;
            }
            for cell in self.footprint(e) {
                out.entry(cell)
                    .or_default()
                    .extend(proto.occupy_terrain.iter().cloned());
            }
        }
        out
    }

    pub(crate) fn walk_for<'a>(&'a self, e: &Entity, terrain: &'a BTreeSet<String>) -> Walk<'a> {
        Walk {
            state: self,
            terrain,
            blocked: self.blocked_labels(Some(&e.id)),
        }
    }

    /// Layers of the entity's cell that it actually occupies.
    pub fn occupied_layers(&self, e: &Entity) -> BTreeSet<String> {
        let proto = self.proto(e);
        self.layer_labels(e.pos.cell())
            .into_iter()
            .filter(|l| proto.occupy_terrain.contains(l) || proto.movement_terrain().contains(l))
            .collect()
    }

    fn terrain_factor(&self, cell: Cell, field: fn(&TerrainRule) -> Option<f64>) -> f64 {
        let map = self.map();
        self.layer_labels(cell)
            .iter()
            .filter_map(|l| map.rule(l).and_then(field))
            .fold(1.0, |acc, p| acc * (1.0 + p / 100.0))
            .max(0.0)
    }

    /// `base` after every active effect on `id` that changes `property`.
    pub fn modified(&self, id: &str, property: Property, base: f64) -> f64 {
        self.effects
            .iter()
            .filter(|fx| fx.target == id)
            .flat_map(|fx| fx.modifiers.iter())
            .filter(|m| m.property == property)
            .fold(base, |v, m| m.change.apply(v))
    }

    pub fn effective_speed(&self, e: &Entity) -> f64 {
        let base = self.proto(e).speed * self.terrain_factor(e.pos.cell(), |r| r.speed_percent);
        self.modified(&e.id, Property::Speed, base)
    }

    pub fn effective_vision(&self, e: &Entity) -> f64 {
        let base = self.proto(e).vision * self.terrain_factor(e.pos.cell(), |r| r.vision_percent);
        self.modified(&e.id, Property::Vision, base)
    }

    pub fn effective_range(&self, e: &Entity, attack: &str) -> f64 {
        let Some(a) = self.proto(e).attack(attack) else {
            return 0.0;
        };
        let base = a.range * self.terrain_factor(e.pos.cell(), |r| r.range_percent);
        self.modified(&e.id, Property::Range, base)
    }

    pub fn effective_recharge(&self, e: &Entity, attack: &str) -> f64 {
        let base = self.proto(e).attack(attack).map_or(0.0, |a| a.recharge_s);
        self.modified(&e.id, Property::Recharge, base)
    }

    /// Whether the attack may fire at `tick` given its last shot.
    pub fn attack_ready(&self, e: &Entity, attack: &str, tick: u64) -> bool {
        match e.cooldowns.get(attack) {
            None => true,
            Some(&last) => {
                let wait = self.config.ticks(self.effective_recharge(e, attack)).max(1);
                tick.saturating_sub(last) >= wait
            }
        }
    }

    /// Shortest distance from `from` to the entity: its center or any cell
    /// center of its footprint.
    pub fn reach_distance(&self, from: Position, target: &Entity) -> f64 {
        self.footprint(target)
            .into_iter()
            .map(|c| distance(from, c.center()))
            .fold(distance(from, target.pos), f64::min)
    }

    /// Whether `player` currently sees entity `e`.
    pub fn sees(&self, player: &str, e: &Entity) -> bool {
        if e.owner == player {
            return true;
        }
        if e.container.is_some() {
            return false;
        }
        self.entities.values().any(|o| {
            o.owner == player
                && o.container.is_none()
                && distance(o.pos, e.pos) <= self.effective_vision(o) + EPS
        })
    }

    /// Union of the vision discs of a player's entities.
    pub fn vision_union(&self, player: &str) -> BTreeSet<Cell> {
        let mut cells = BTreeSet::new();
        for e in self.entities.values() {
            if e.owner == player && e.container.is_none() {
                cells.extend(cells_in_vision(e.pos, self.effective_vision(e)));
            }
        }
        cells.retain(|&c| self.in_bounds(c));
        cells
    }

    pub(crate) fn recompute_vision(&mut self) {
        let ids: Vec<String> = self.players.keys().cloned().collect();
        for p in ids {
            let cells = self.vision_union(&p);
            self.players.get_mut(&p).expect("player").visible_cells = cells;
        }
    }

    /// Entities (including contained ones) a player still owns.
    pub fn entity_count(&self, player: &str) -> usize {
        self.entities.values().filter(|e| e.owner == player).count()
    }

    pub(crate) fn trait_matches(proto: &PrototypeDef, name: &str, want: &TraitValue) -> bool {
        match proto.traits.get(name) {
            Some(v) => v == want,
            // an absent flag reads as False
            None => *want == TraitValue::Bool(false),
        }
    }

    fn next_id(&mut self, proto: &str) -> String {
        let stem: String = proto.chars().filter(|c| !c.is_whitespace()).collect();
        let n = self.id_counters.entry(stem.clone()).or_insert(0);
        *n += 1;
        format!("{stem}{n}")
    }

    pub(crate) fn spawn(&mut self, owner: &str, proto_name: &str, pos: Position, complete: bool) -> String {
        let faction = self.players[owner].faction.clone();
        let def = Arc::clone(&self.def);
        let proto = def
            .faction(&faction)
            .and_then(|f| f.prototype(proto_name))
            .expect("prototype checked by caller");
        let id = self.next_id(proto_name);
        let ability_uses = proto
            .abilities
            .iter()
            .filter_map(|a| a.use_limit.map(|l| (a.name.clone(), l)))
            .collect();
        self.entities.insert(
            id.clone(),
            Entity {
                id: id.clone(),
                owner: owner.to_string(),
                faction,
                proto: proto_name.to_string(),
                pos,
                heading: Position::new(1.0, 0.0),
                hp: proto.max_health,
                action: Action::Idle,
                complete,
                path: Vec::new(),
                path_goal: None,
                cooldowns: BTreeMap::new(),
                carrying: None,
                contained: Vec::new(),
                container: None,
                ability_uses,
            },
        );
        id
    }

    /// Places a complete entity for `owner` at `(x, y)`, bypassing costs.
    /// Meant for scenario setup; the resource totals are unaffected.
    pub fn place_entity(&mut self, owner: &str, proto: &str, x: f64, y: f64) -> Result<String, SimError> {
        let faction = &self
            .players
            .get(owner)
            .ok_or_else(|| SimError::UnknownPlayer(owner.to_string()))?
            .faction;
        if self.def.faction(faction).and_then(|f| f.prototype(proto)).is_none() {
            return Err(SimError::UnknownPrototype {
                faction: faction.clone(),
                prototype: proto.to_string(),
            });
        }
        let id = self.spawn(owner, proto, Position::new(x, y), true);
        self.recompute_vision();
        Ok(id)
    }

    /// The passable cell nearest to `around` for an entity of `proto`.
    pub(crate) fn free_spot_near(&self, around: Position, proto: &PrototypeDef) -> Position {
        let walk = Walk {
            state: self,
            terrain: &proto.occupy_terrain,
            blocked: self.blocked_labels(None),
        };
        let origin = around.cell();
        for r in 0..=16i64 {
            let mut ring: Vec<Cell> = Vec::new();
            for x in origin.x - r..=origin.x + r {
                for y in origin.y - r..=origin.y + r {
                    if (x - origin.x).abs() == r || (y - origin.y).abs() == r {
                        ring.push(Cell::new(x, y));
                    }
                }
            }
            ring.sort_by(|a, b| {
                distance(around, a.center())
                    .total_cmp(&distance(around, b.center()))
                    .then(a.cmp(b))
            });
            if let Some(c) = ring.into_iter().find(|&c| walk.is_passable(c)) {
                return c.center();
            }
        }
        around
    }

    /// Plans a path for `id` to any passable cell whose center is within
    /// `range` of one of `anchors`. Returns false when there is none.
    pub(crate) fn plan_approach(&mut self, id: &str, anchors: &[Position], range: f64, goal: Cell) -> bool {
        let e = &self.entities[id];
        let proto = self.proto(e);
        let walk = self.walk_for(e, proto.movement_terrain());
        let reach = range.ceil() as i64 + 1;
        let mut goals = BTreeSet::new();
        for a in anchors {
            let c = a.cell();
            for x in c.x - reach..=c.x + reach {
                for y in c.y - reach..=c.y + reach {
                    let cell = Cell::new(x, y);
                    if distance(cell.center(), *a) <= range + EPS && walk.is_passable(cell) {
                        goals.insert(cell);
                    }
                }
            }
        }
        let path = find_path_to_any(&walk, e.pos, &goals);
        let e = self.entities.get_mut(id).expect("entity");
        match path {
            Some(p) if p.cells.len() > 1 => {
                e.path = p.waypoints();
                e.path_goal = Some(goal);
                true
            }
            _ => {
                e.path.clear();
                e.path_goal = None;
                false
            }
        }
    }

    /// Per-resource sum of banks, carried cargo, deposits and spending.
    pub fn resource_totals(&self) -> BTreeMap<String, Amount> {
        let mut totals: BTreeMap<String, Amount> = BTreeMap::new();
        for p in self.players.values() {
            for (r, &a) in p.bank.iter().chain(p.spent.iter()) {
                *totals.entry(r.clone()).or_default() += a;
            }
        }
        for e in self.entities.values() {
            if let Some((r, a)) = &e.carrying {
                *totals.entry(r.clone()).or_default() += *a;
            }
        }
        for c in self.cells.values() {
            for (r, &a) in &c.deposits {
                *totals.entry(r.clone()).or_default() += a;
            }
        }
        totals
    }

    /// Takes the current totals as the conserved baseline, for scenarios
    /// that edit banks or deposits by hand.
    pub fn rebase_totals(&mut self) {
        self.initial_totals = self.resource_totals();
    }

    /// Totals when the match started.
    pub fn initial_totals(&self) -> &BTreeMap<String, Amount> {
        &self.initial_totals
    }
}
