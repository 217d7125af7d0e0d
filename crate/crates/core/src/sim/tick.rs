use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use crate::def::{AttackDef, Property};
use crate::geometry::{cells_in_shape, distance, Cell, OrientedShape, Passability, Shape};

use super::combat::mitigate;
use super::state::{proto_of, Action, BuildJob, GameState, EPS};
use super::Amount;

type Position = crate::geometry::Position<f64>;

impl GameState {
    /// Advances the simulation by one tick of `1 / tick_hz` seconds.
    pub fn tick(&mut self) {
        let now = self.tick;
        self.expire_effects(now);
        self.progress_builds();
        self.move_entities();
        self.gather_phase();
        self.attack_phase(now);
        self.repair_phase();
        self.remove_dead();
        self.terrain_transitions();
        self.tick += 1;
        // effects end on the boundary, so nothing observes them past expiry
        self.expire_effects(self.tick);
        self.recompute_vision();
    }

    pub fn run_ticks(&mut self, n: u64) {
        for _ in 0..n {
            self.tick();
        }
    }

    fn ids(&self) -> Vec<String> {
        self.entities.keys().cloned().collect()
    }

    fn expire_effects(&mut self, now: u64) {
        let (done, keep): (Vec<_>, Vec<_>) = std::mem::take(&mut self.effects)
            .into_iter()
            .partition(|fx| fx.expires_at_tick.is_some_and(|t| t <= now));
        self.effects = keep;
        for fx in done {
            if let (Some(saved), Some(t)) = (fx.saved_cooldowns, self.entities.get_mut(&fx.target)) {
                t.cooldowns = saved;
            }
        }
    }

    fn progress_builds(&mut self) {
        let def = Arc::clone(&self.def);
        for id in self.ids() {
            let Some(e) = self.entities.get_mut(&id) else { continue };
            let Action::Build {
                product,
                job,
                remaining_ticks,
            } = &mut e.action
            else {
                continue;
            };
            if *remaining_ticks > 0 {
                *remaining_ticks -= 1;
            }
            if *remaining_ticks > 0 {
                continue;
            }
            let (product, job) = (product.clone(), *job);
            e.action = Action::Idle;
            let owner = e.owner.clone();
            match job {
                BuildJob::Construct => e.complete = true,
                BuildJob::Research => {
                    let p = self.players.get_mut(&owner).expect("player");
                    p.researching.remove(&product);
                    p.techs_done.insert(product);
                }
                BuildJob::Upgrade => {
                    let old = proto_of(&def, e);
                    let new = def
                        .faction(&e.faction)
                        .and_then(|f| f.prototype(&product))
                        .expect("upgrade target");
                    e.hp = e.hp / old.max_health * new.max_health;
                    e.proto = product;
                    for a in &new.abilities {
                        if let Some(limit) = a.use_limit {
                            e.ability_uses.entry(a.name.clone()).or_insert(limit);
                        }
                    }
                }
                BuildJob::Train => {
                    let at = e.pos;
                    let faction = e.faction.clone();
                    let proto = def
                        .faction(&faction)
                        .and_then(|f| f.prototype(&product))
                        .expect("trained prototype");
                    let spot = self.free_spot_near(at, proto);
                    self.spawn(&owner, &product, spot, true);
                }
            }
        }
    }

    fn move_entities(&mut self) {
        let def = Arc::clone(&self.def);
        let dt = self.config.dt();
        for id in self.ids() {
            let e = &self.entities[&id];
            if e.path.is_empty() || e.container.is_some() {
                continue;
            }
            let mut budget = self.effective_speed(e) * dt;
            let walk = self.walk_for(e, proto_of(&def, e).movement_terrain());
            let mut pos = e.pos;
            let mut heading = e.heading;
            let mut path = e.path.clone();
            let mut blocked = false;
            while budget > 0.0 && !path.is_empty() {
                let next = path[0];
                if next.cell() != pos.cell() && !walk.is_passable(next.cell()) {
                    blocked = true;
                    break;
                }
                let d = distance(pos, next);
                if d > 0.0 {
                    heading = next.sub(pos).scale(1.0 / d);
                }
                if d <= budget {
                    pos = next;
                    budget -= d;
                    path.remove(0);
                } else {
                    pos = pos.add(heading.scale(budget));
                    budget = 0.0;
                }
            }
            let e = self.entities.get_mut(&id).expect("entity");
            e.pos = pos;
            e.heading = heading;
            if blocked {
                path.clear();
                e.path_goal = None;
            }
            e.path = path;
            if e.path.is_empty() && matches!(e.action, Action::Moving { .. }) {
                e.action = Action::Idle;
            }
        }
    }

    fn gather_phase(&mut self) {
        let def = Arc::clone(&self.def);
        let range = self.config.deposit_range;
        let rate = Amount::from_f64(self.config.gather_rate * self.config.dt());
        for id in self.ids() {
            let e = &self.entities[&id];
            let Action::Gathering {
                resource,
                cell,
                returning,
            } = e.action.clone()
            else {
                continue;
            };
            if e.container.is_some() {
                continue;
            }
            let owner = e.owner.clone();
            let cap = Amount::from_f64(proto_of(&def, e).gather.get(&resource).copied().unwrap_or(0.0));
            let carried = match &e.carrying {
                Some((r, a)) if *r == resource => *a,
                Some((_, a)) if !a.is_zero() => {
                    self.set_gathering(&id, &resource, cell, true);
                    if returning {
                        self.deliver(&id, &owner, range, cell);
                    }
                    continue;
                }
                _ => Amount::ZERO,
            };

            if returning {
                self.deliver(&id, &owner, range, cell);
                continue;
            }
            if carried >= cap {
                self.set_gathering(&id, &resource, cell, true);
                continue;
            }
            let left = self.deposit(cell, &resource);
            if left.is_zero() {
                if carried.is_zero() {
                    self.go_idle(&id);
                } else {
                    self.set_gathering(&id, &resource, cell, true);
                }
                continue;
            }
            if def.requires_preparation(&resource) && !self.prepared(&owner, &resource, cell) {
                self.go_idle(&id);
                continue;
            }
            let center: Position = cell.center();
            if distance(e.pos, center) > range + EPS {
                let stale = e.path.is_empty() || e.path_goal != Some(cell);
                if stale && !self.plan_approach(&id, &[center], range, cell) {
                    self.go_idle(&id);
                }
                continue;
            }

            let take = rate.min(cap - carried).min(left);
            let deposit = self
                .cells
                .get_mut(&cell)
                .and_then(|c| c.deposits.get_mut(&resource))
                .expect("deposit checked above");
            *deposit -= take;
            let now_carried = carried + take;
            let exhausted = deposit.is_zero();
            let e = self.entities.get_mut(&id).expect("entity");
            e.path.clear();
            e.carrying = Some((resource.clone(), now_carried));
            if now_carried >= cap || exhausted {
                self.set_gathering(&id, &resource, cell, true);
            }
        }
    }

    fn set_gathering(&mut self, id: &str, resource: &str, cell: Cell, returning: bool) {
        self.entities.get_mut(id).expect("entity").action = Action::Gathering {
            resource: resource.to_string(),
            cell,
            returning,
        };
    }

    fn go_idle(&mut self, id: &str) {
        let e = self.entities.get_mut(id).expect("entity");
        e.action = Action::Idle;
        e.path.clear();
        e.path_goal = None;
    }

    /// Walks cargo to the nearest warehouse and banks it on arrival.
    fn deliver(&mut self, id: &str, owner: &str, range: f64, cell: Cell) {
        let e = &self.entities[id];
        let Some((cargo, amount)) = e.carrying.clone() else {
            let resource = match &e.action {
                Action::Gathering { resource, .. } => resource.clone(),
                _ => return,
            };
            self.set_gathering(id, &resource, cell, false);
            return;
        };
        let warehouses: Vec<&super::Entity> = self
            .entities
            .values()
            .filter(|b| {
                b.owner == owner
                    && b.complete
                    && b.container.is_none()
                    && self.proto(b).purpose.process.iter().any(|r| *r == cargo)
            })
            .collect();
        if warehouses.is_empty() {
            self.go_idle(id);
            return;
        }
        if warehouses
            .iter()
            .any(|b| self.reach_distance(e.pos, b) <= range + EPS)
        {
            let p = self.players.get_mut(owner).expect("player");
            *p.bank.entry(cargo.clone()).or_default() += amount;
            let e = self.entities.get_mut(id).expect("entity");
            e.carrying = None;
            e.path.clear();
            e.path_goal = None;
            let resource = match &e.action {
                Action::Gathering { resource, .. } => resource.clone(),
                _ => cargo,
            };
            if self.deposit(cell, &resource).is_zero() {
                self.go_idle(id);
            } else {
                self.set_gathering(id, &resource, cell, false);
            }
            return;
        }
        let anchors: Vec<Position> = warehouses
            .iter()
            .flat_map(|b| self.footprint(b).into_iter().map(|c| c.center()).chain([b.pos]))
            .collect();
        // any marker cell works; it only has to differ from the deposit goal
        let goal = Cell::new(-1, -1);
        if e.path.is_empty() || e.path_goal != Some(goal) {
            if !self.plan_approach(id, &anchors, range, goal) {
                self.go_idle(id);
            }
        }
    }

    fn attack_phase(&mut self, now: u64) {
        let def = Arc::clone(&self.def);
        let rules = self.map().terrain_rules.clone();
        let mut hits: Vec<(String, f64)> = Vec::new();
        for id in self.ids() {
            let a = &self.entities[&id];
            let Action::Attacking { target } = &a.action else { continue };
            if a.container.is_some() || !a.complete {
                continue;
            }
            let target = target.clone();
            let Some(t) = self.entities.get(&target).filter(|t| t.container.is_none()) else {
                self.go_idle(&id);
                continue;
            };
            let aproto = proto_of(&def, a);
            let tproto = proto_of(&def, t);
            let tlayers = self.occupied_layers(t);
            let dist = distance(a.pos, t.pos);
            let legal: Vec<&AttackDef> = aproto
                .attacks
                .iter()
                .filter(|atk| atk.target_terrain.iter().any(|l| tlayers.contains(l)))
                .filter(|atk| {
                    atk.require
                        .target_traits
                        .iter()
                        .all(|(k, v)| Self::trait_matches(tproto, k, v))
                })
                .collect();
            if legal.is_empty() {
                self.go_idle(&id);
                continue;
            }
            let in_range: Vec<&AttackDef> = legal
                .iter()
                .copied()
                .filter(|atk| dist <= self.effective_range(a, &atk.name) + EPS)
                .filter(|atk| atk.require.distance.map_or(true, |d| d.admits(dist)))
                .collect();
            if in_range.is_empty() {
                let reach = legal
                    .iter()
                    .map(|atk| self.effective_range(a, &atk.name))
                    .fold(0.0, f64::max);
                let goal = t.pos.cell();
                let tpos = t.pos;
                let stale = a.path.is_empty() || a.path_goal != Some(goal);
                if stale && !self.plan_approach(&id, &[tpos], reach, goal) {
                    self.go_idle(&id);
                }
                continue;
            }

            let owner = a.owner.clone();
            let (apos, tpos) = (a.pos, t.pos);
            let alayers: BTreeSet<String> = self.layer_labels(apos.cell()).into_iter().collect();
            let mut fired = Vec::new();
            for atk in in_range {
                if !self.attack_ready(&self.entities[&id], &atk.name, now) {
                    continue;
                }
                let Ok(bill) = self.check_require(&owner, &atk.require) else {
                    continue;
                };
                self.pay(&owner, &bill);
                fired.push(atk.name.clone());

                let victims: Vec<String> = match atk.shape {
                    Shape::Point => vec![target.clone()],
                    spec => {
                        let area = cells_in_shape(&OrientedShape::aimed(spec, apos, tpos));
                        self.entities
                            .values()
                            .filter(|v| v.owner != owner && v.container.is_none())
                            .filter(|v| self.footprint(v).iter().any(|c| area.contains(c)))
                            .filter(|v| {
                                let l = self.occupied_layers(v);
                                atk.target_terrain.iter().any(|x| l.contains(x))
                            })
                            .map(|v| v.id.clone())
                            .collect()
                    }
                };
                for vid in victims {
                    let v = &self.entities[&vid];
                    let vproto = proto_of(&def, v);
                    let range = atk.damage.against(&vproto.name);
                    let rolled = if self.config.random_damage && range.max > range.min {
                        self.rng.gen_range(range.min..=range.max)
                    } else {
                        range.max
                    };
                    let v = &self.entities[&vid];
                    let base = self.modified(&id, Property::Damage, rolled);
                    let vlayers = self.occupied_layers(v);
                    let dmg = mitigate(base, &atk.name, &alayers, vproto, &vlayers, &rules);
                    hits.push((vid, dmg));
                }
            }
            let a = self.entities.get_mut(&id).expect("attacker");
            a.path.clear();
            a.path_goal = None;
            if tpos != apos {
                a.heading = tpos.sub(apos).normalized().unwrap_or(a.heading);
            }
            for name in fired {
                a.cooldowns.insert(name, now);
            }
        }
        for (vid, dmg) in hits {
            if let Some(v) = self.entities.get_mut(&vid) {
                v.hp -= dmg;
            }
        }
    }

    fn repair_phase(&mut self) {
        let def = Arc::clone(&self.def);
        let dt = self.config.dt();
        for id in self.ids() {
            let r = &self.entities[&id];
            let Action::GameSpecific {
                name,
                target: Some(target),
            } = &r.action
            else {
                continue;
            };
            if name != "Repair" || r.container.is_some() {
                continue;
            }
            let target = target.clone();
            let Some(t) = self
                .entities
                .get(&target)
                .filter(|t| t.container.is_none() && t.owner == r.owner)
            else {
                self.go_idle(&id);
                continue;
            };
            let Some(spec) = &proto_of(&def, r).repair else {
                self.go_idle(&id);
                continue;
            };
            let tproto = proto_of(&def, t);
            let rate = spec.against(&tproto.name);
            if self.reach_distance(r.pos, t) > rate.range + EPS {
                let goal = t.pos.cell();
                let anchors: Vec<Position> =
                    self.footprint(t).into_iter().map(|c| c.center()).chain([t.pos]).collect();
                let stale = r.path.is_empty() || r.path_goal != Some(goal);
                if stale && !self.plan_approach(&id, &anchors, rate.range, goal) {
                    self.go_idle(&id);
                }
                continue;
            }
            let max = tproto.max_health;
            let t = self.entities.get_mut(&target).expect("target");
            t.hp = (t.hp + rate.rate_hp_per_s * dt).min(max);
            let full = t.hp >= max;
            let r = self.entities.get_mut(&id).expect("repairer");
            r.path.clear();
            if full {
                self.go_idle(&id);
            }
        }
    }

    /// Entities below zero health leave the game, taking their passengers
    /// and cargo with them.
    fn remove_dead(&mut self) {
        let mut doomed: Vec<String> = self
            .entities
            .values()
            .filter(|e| e.hp < 0.0 && e.container.is_none())
            .map(|e| e.id.clone())
            .collect();
        let mut i = 0;
        while i < doomed.len() {
            let inner = self.entities[&doomed[i]].contained.clone();
            doomed.extend(inner);
            i += 1;
        }
        for id in &doomed {
            let e = self.entities.remove(id).expect("doomed entity");
            if let Some((r, a)) = e.carrying {
                let p = self.players.get_mut(&e.owner).expect("player");
                *p.spent.entry(r).or_default() += a;
            }
        }
        if doomed.is_empty() {
            return;
        }
        self.effects
            .retain(|fx| self.entities.contains_key(&fx.target));
        for e in self.entities.values_mut() {
            e.contained.retain(|c| !doomed.contains(c));
        }
    }

    /// Conditional layers whose deposit is used up turn into their replacement.
    fn terrain_transitions(&mut self) {
        for cell in self.cells.values_mut() {
            for layer in &mut cell.layers {
                let Some(cond) = &layer.condition else { continue };
                if cell
                    .deposits
                    .get(&cond.resource)
                    .map_or(true, |a| a.is_zero())
                {
                    layer.label = cond.replacement_label.clone();
                    layer.condition = None;
                }
            }
        }
    }
}
