use std::collections::BTreeMap;
use std::sync::Arc;

use crate::def::{Property, PrototypeDef, RequireSpec};
use crate::geometry::{distance, find_path, Cell, OrientedShape, Passability};

use super::state::{proto_of, Action, ActiveEffect, BuildJob, Entity, GameState, LoggedCommand, EPS};
use super::{Amount, Command, Receipt, RejectReason};

type Position = crate::geometry::Position<f64>;

/// Reach for loading a unit into a container.
const LOAD_RANGE: f64 = 1.0;

impl GameState {
    /// Validates a command and, when accepted, applies it; costs are paid
    /// immediately and the work proceeds over the following ticks. Every
    /// submission is logged, accepted or not.
    pub fn submit(&mut self, player: &str, cmd: Command) -> Receipt {
        let result = self.apply(player, &cmd);
        self.command_log.push(LoggedCommand {
            tick: self.tick,
            player: player.to_string(),
            command: cmd,
            accepted: result.is_ok(),
        });
        result
    }

    fn apply(&mut self, player: &str, cmd: &Command) -> Receipt {
        if !self.players.contains_key(player) {
            return Err(RejectReason::UnknownPlayer);
        }
        match cmd {
            Command::Construct { building, x, y } => self.construct(player, building, *x, *y),
            Command::Move { id, x, y } => self.move_to(player, id, *x, *y),
            Command::Train { location, product } => self.train(player, location, product),
            Command::Gather { unit, x, y } => self.gather_at(player, unit, *x, *y),
            Command::Attack { ally, enemy } => self.attack(player, ally, enemy),
            Command::GameAction {
                name,
                allies,
                enemies,
                xs,
                ys,
            } => {
                if xs.len() != ys.len() {
                    return Err(RejectReason::BadArguments);
                }
                match name.to_ascii_lowercase().as_str() {
                    "load" => self.load(player, allies),
                    "unload" => self.unload(player, allies, xs, ys),
                    "repair" => self.repair(player, allies),
                    _ => self.cast(player, name, allies, enemies, xs, ys),
                }
            }
            Command::Update => Ok(()),
        }
    }

    /// An own, uncontained entity.
    fn own(&self, player: &str, id: &str) -> Result<&Entity, RejectReason> {
        let e = self.entities.get(id).ok_or(RejectReason::UnknownId)?;
        if e.owner != player {
            return Err(if self.sees(player, e) {
                RejectReason::NotYourEntity
            } else {
                RejectReason::UnknownId
            });
        }
        if e.container.is_some() {
            return Err(RejectReason::Contained);
        }
        Ok(e)
    }

    /// An enemy entity the player can currently see.
    fn visible_enemy(&self, player: &str, id: &str) -> Result<&Entity, RejectReason> {
        let e = self.entities.get(id).ok_or(RejectReason::UnknownId)?;
        if e.owner == player {
            return Err(RejectReason::FriendlyTarget);
        }
        if !self.sees(player, e) {
            return Err(RejectReason::UnknownId);
        }
        Ok(e)
    }

    fn has_building(&self, player: &str, name: &str) -> bool {
        self.entities
            .values()
            .any(|e| e.owner == player && e.complete && e.proto == name && self.proto(e).is_building())
    }

    /// Checks buildings, techs and resources; returns the bill.
    pub(crate) fn check_require(
        &self,
        player: &str,
        req: &RequireSpec,
    ) -> Result<BTreeMap<String, Amount>, RejectReason> {
        for b in &req.buildings {
            if !self.has_building(player, b) {
                return Err(RejectReason::MissingBuilding(b.clone()));
            }
        }
        let state = &self.players[player];
        for t in &req.techs {
            if !state.techs_done.contains(t) {
                return Err(RejectReason::MissingTech(t.clone()));
            }
        }
        let bill: BTreeMap<String, Amount> = req
            .resources
            .iter()
            .map(|(r, &v)| (r.clone(), Amount::from_f64(v)))
            .collect();
        let short: Vec<String> = bill
            .iter()
            .filter(|(r, &need)| state.bank.get(*r).copied().unwrap_or_default() < need)
            .map(|(r, _)| r.clone())
            .collect();
        if !short.is_empty() {
            return Err(RejectReason::InsufficientResources(short));
        }
        Ok(bill)
    }

    pub(crate) fn pay(&mut self, player: &str, bill: &BTreeMap<String, Amount>) {
        let state = self.players.get_mut(player).expect("player");
        for (r, &a) in bill {
            *state.bank.entry(r.clone()).or_default() -= a;
            *state.spent.entry(r.clone()).or_default() += a;
        }
    }

    fn construct(&mut self, player: &str, building: &str, x: f64, y: f64) -> Receipt {
        let def = Arc::clone(&self.def);
        let proto = def
            .faction(&self.players[player].faction)
            .and_then(|f| f.prototype(building))
            .filter(|p| p.is_building())
            .ok_or_else(|| RejectReason::UnknownPrototype(building.to_string()))?;
        if !self.position_in_bounds(x, y) {
            return Err(RejectReason::OutOfBounds);
        }
        let pos = Position::new(x, y);
        let walk = super::state::Walk {
            state: self,
            terrain: &proto.occupy_terrain,
            blocked: self.blocked_labels(None),
        };
        let cells = crate::geometry::cells_in_shape(&OrientedShape::unoriented(proto.shape, pos));
        if cells.iter().any(|&c| !walk.is_passable(c)) {
            return Err(RejectReason::BadTerrain);
        }
        let bill = self.check_require(player, &proto.require)?;
        self.pay(player, &bill);

        let ticks = self.config.ticks(proto.build_time_s);
        let id = self.spawn(player, building, pos, ticks == 0);
        if ticks > 0 {
            self.entities.get_mut(&id).expect("spawned").action = Action::Build {
                product: building.to_string(),
                job: BuildJob::Construct,
                remaining_ticks: ticks,
            };
        }
        Ok(())
    }

    fn move_to(&mut self, player: &str, id: &str, x: f64, y: f64) -> Receipt {
        let e = self.own(player, id)?;
        let proto = self.proto(e);
        if proto.speed <= 0.0 || !e.complete {
            return Err(RejectReason::CannotMove);
        }
        if !self.position_in_bounds(x, y) {
            return Err(RejectReason::OutOfBounds);
        }
        let dest = Position::new(x, y);
        let walk = self.walk_for(e, proto.movement_terrain());
        if !walk.is_passable(dest.cell()) {
            return Err(RejectReason::BadTerrain);
        }
        let path = find_path(&walk, e.pos, dest).ok_or(RejectReason::Unreachable)?;
        let mut waypoints = path.waypoints();
        match waypoints.last_mut() {
            Some(last) => *last = dest,
            None => waypoints.push(dest),
        }
        let e = self.entities.get_mut(id).expect("entity");
        e.path = waypoints;
        e.path_goal = Some(dest.cell());
        e.action = Action::Moving { dest };
        Ok(())
    }

    fn train(&mut self, player: &str, location: &str, product: &str) -> Receipt {
        let def = Arc::clone(&self.def);
        let e = self.own(player, location)?;
        if !e.complete || e.action != Action::Idle {
            return Err(RejectReason::Busy);
        }
        let proto = proto_of(&def, e);
        let faction = def.faction(&e.faction).expect("faction");

        let (job, seconds, require) = if proto.upgrades_to.iter().any(|u| u == product) {
            let target = faction.prototype(product).ok_or(RejectReason::NotAnUpgrade)?;
            (BuildJob::Upgrade, target.build_time_s, &target.require)
        } else if proto.purpose.build.iter().any(|b| b == product) {
            if let Some(tech) = faction.tech(product) {
                let st = &self.players[player];
                if st.techs_done.contains(product) || st.researching.contains(product) {
                    return Err(RejectReason::AlreadyResearched(product.to_string()));
                }
                (BuildJob::Research, tech.build_time_s, &tech.require)
            } else {
                let p = faction
                    .prototype(product)
                    .ok_or_else(|| RejectReason::NotBuildable(product.to_string()))?;
                (BuildJob::Train, p.build_time_s, &p.require)
            }
        } else {
            return Err(RejectReason::NotBuildable(product.to_string()));
        };

        let bill = self.check_require(player, require)?;
        self.pay(player, &bill);
        if job == BuildJob::Research {
            self.players
                .get_mut(player)
                .expect("player")
                .researching
                .insert(product.to_string());
        }
        let ticks = self.config.ticks(seconds);
        self.entities.get_mut(location).expect("entity").action = Action::Build {
            product: product.to_string(),
            job,
            remaining_ticks: ticks,
        };
        Ok(())
    }

    /// A completed own building that prepares `resource` over `cell`.
    pub(crate) fn prepared(&self, player: &str, resource: &str, cell: Cell) -> bool {
        self.entities.values().any(|b| {
            b.owner == player
                && b.complete
                && b.container.is_none()
                && self.proto(b).purpose.prepare.iter().any(|r| r == resource)
                && self.footprint(b).contains(&cell)
        })
    }

    fn gather_at(&mut self, player: &str, unit: &str, x: f64, y: f64) -> Receipt {
        let e = self.own(player, unit)?;
        let proto = self.proto(e);
        if proto.gather.is_empty() {
            return Err(RejectReason::CannotGather);
        }
        if !self.position_in_bounds(x, y) {
            return Err(RejectReason::OutOfBounds);
        }
        let cell = Position::new(x, y).cell();
        let resource = proto
            .gather
            .keys()
            .find(|r| !self.deposit(cell, r).is_zero())
            .cloned()
            .ok_or(RejectReason::NoDeposit)?;
        if self.def.requires_preparation(&resource) && !self.prepared(player, &resource, cell) {
            return Err(RejectReason::MissingBuilding(resource));
        }
        let returning = e.carrying.as_ref().is_some_and(|(_, a)| !a.is_zero());
        let e = self.entities.get_mut(unit).expect("entity");
        e.path.clear();
        e.path_goal = None;
        e.action = Action::Gathering {
            resource,
            cell,
            returning,
        };
        Ok(())
    }

    fn attack(&mut self, player: &str, ally: &str, enemy: &str) -> Receipt {
        let a = self.own(player, ally)?;
        let proto = self.proto(a);
        if proto.attacks.is_empty() || !a.complete {
            return Err(RejectReason::CannotAttack);
        }
        let t = self.visible_enemy(player, enemy)?;
        let layers = self.occupied_layers(t);
        if !proto
            .attacks
            .iter()
            .any(|atk| atk.target_terrain.iter().any(|l| layers.contains(l)))
        {
            return Err(RejectReason::BadTerrain);
        }
        let e = self.entities.get_mut(ally).expect("entity");
        e.path.clear();
        e.path_goal = None;
        e.action = Action::Attacking {
            target: enemy.to_string(),
        };
        Ok(())
    }

    fn load(&mut self, player: &str, allies: &[String]) -> Receipt {
        let (container_id, units) = allies.split_first().ok_or(RejectReason::BadArguments)?;
        if units.is_empty() {
            return Err(RejectReason::BadArguments);
        }
        let c = self.own(player, container_id)?;
        let spec = self
            .proto(c)
            .contain
            .clone()
            .ok_or_else(|| RejectReason::UnknownAbility("Load".into()))?;
        let mut weight: f64 = c
            .contained
            .iter()
            .map(|id| unit_weight(self.proto(&self.entities[id])))
            .sum();
        for (i, id) in units.iter().enumerate() {
            if id == container_id || units[..i].contains(id) {
                return Err(RejectReason::BadArguments);
            }
            let u = self.own(player, id)?;
            let up = self.proto(u);
            if up.is_building() {
                return Err(RejectReason::BadArguments);
            }
            if self.reach_distance(u.pos, c) > LOAD_RANGE + EPS {
                return Err(RejectReason::DistanceViolation);
            }
            if !spec.allowed_armor_classes.is_empty()
                && !up
                    .armor
                    .armor_class
                    .as_ref()
                    .is_some_and(|a| spec.allowed_armor_classes.contains(a))
            {
                return Err(RejectReason::ArmorClassNotAllowed);
            }
            weight += unit_weight(up);
            if weight > spec.max_weight + EPS {
                return Err(RejectReason::ContainFull);
            }
        }
        for id in units {
            let u = self.entities.get_mut(id).expect("entity");
            u.container = Some(container_id.clone());
            u.action = Action::Idle;
            u.path.clear();
            u.path_goal = None;
            self.entities
                .get_mut(container_id)
                .expect("container")
                .contained
                .push(id.clone());
        }
        Ok(())
    }

    fn unload(&mut self, player: &str, allies: &[String], xs: &[f64], ys: &[f64]) -> Receipt {
        let [container_id, unit_id] = allies else {
            return Err(RejectReason::BadArguments);
        };
        let ([x], [y]) = (xs, ys) else {
            return Err(RejectReason::BadArguments);
        };
        let c = self.own(player, container_id)?;
        if !c.contained.contains(unit_id) {
            return Err(RejectReason::UnknownId);
        }
        if !self.position_in_bounds(*x, *y) {
            return Err(RejectReason::OutOfBounds);
        }
        let pos = Position::new(*x, *y);
        let u = &self.entities[unit_id];
        let walk = self.walk_for(u, self.proto(u).movement_terrain());
        if !walk.is_passable(pos.cell()) {
            return Err(RejectReason::BadTerrain);
        }
        self.entities
            .get_mut(container_id)
            .expect("container")
            .contained
            .retain(|id| id != unit_id);
        let u = self.entities.get_mut(unit_id).expect("unit");
        u.container = None;
        u.pos = pos;
        Ok(())
    }

    fn repair(&mut self, player: &str, allies: &[String]) -> Receipt {
        let [repairer, target] = allies else {
            return Err(RejectReason::BadArguments);
        };
        let r = self.own(player, repairer)?;
        if self.proto(r).repair.is_none() || !r.complete {
            return Err(RejectReason::UnknownAbility("Repair".into()));
        }
        if repairer == target {
            return Err(RejectReason::BadArguments);
        }
        self.own(player, target)?;
        let e = self.entities.get_mut(repairer).expect("entity");
        e.path.clear();
        e.path_goal = None;
        e.action = Action::GameSpecific {
            name: "Repair".into(),
            target: Some(target.clone()),
        };
        Ok(())
    }

    fn cast(
        &mut self,
        player: &str,
        name: &str,
        allies: &[String],
        enemies: &[String],
        xs: &[f64],
        ys: &[f64],
    ) -> Receipt {
        let def = Arc::clone(&self.def);
        let [caster_id] = allies else {
            return Err(RejectReason::BadArguments);
        };
        let caster = self.own(player, caster_id)?;
        let ability = proto_of(&def, caster)
            .ability(name)
            .ok_or_else(|| RejectReason::UnknownAbility(name.to_string()))?;
        if ability.use_limit.is_some() && caster.ability_uses.get(name).copied().unwrap_or(0) == 0 {
            return Err(RejectReason::AbilityExhausted);
        }
        let mut targets = Vec::new();
        for id in enemies {
            let t = self.visible_enemy(player, id)?;
            let tp = proto_of(&def, t);
            for (trait_name, want) in &ability.require.target_traits {
                if !Self::trait_matches(tp, trait_name, want) {
                    return Err(RejectReason::RequireTraitFailed);
                }
            }
            if let Some(d) = &ability.require.distance {
                if !d.admits(distance(caster.pos, t.pos)) {
                    return Err(RejectReason::DistanceViolation);
                }
            }
            targets.push(id.clone());
        }
        if let Some(d) = &ability.require.distance {
            for (&x, &y) in xs.iter().zip(ys) {
                if !d.admits(distance(caster.pos, Position::new(x, y))) {
                    return Err(RejectReason::DistanceViolation);
                }
            }
        }
        let bill = self.check_require(player, &ability.require)?;
        self.pay(player, &bill);

        if let Some(uses) = self
            .entities
            .get_mut(caster_id)
            .expect("caster")
            .ability_uses
            .get_mut(name)
        {
            *uses -= 1;
        }
        let expires = ability
            .time_limit_s
            .map(|s| self.tick + self.config.ticks(s).max(1));
        let touches_recharge = ability
            .target_modifiers
            .iter()
            .any(|m| m.property == Property::Recharge);
        for target in targets {
            let saved = if touches_recharge {
                let t = self.entities.get_mut(&target).expect("target");
                let saved = t.cooldowns.clone();
                // a longer recharge must hold even for attacks never fired yet
                for a in &proto_of(&def, t).attacks {
                    t.cooldowns.insert(a.name.clone(), self.tick);
                }
                Some(saved)
            } else {
                None
            };
            self.effects.push(ActiveEffect {
                ability: name.to_string(),
                source: caster_id.clone(),
                target,
                modifiers: ability.target_modifiers.clone(),
                created_tick: self.tick,
                expires_at_tick: expires,
                saved_cooldowns: saved,
            });
        }
        Ok(())
    }
}

/// Units without a Weight tag weigh one unit.
fn unit_weight(p: &PrototypeDef) -> f64 {
    p.weight.unwrap_or(1.0)
}
