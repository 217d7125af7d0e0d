use std::collections::BTreeMap;

use crate::geometry::Cell;

use super::state::{Action, GameState};

/// What one player is allowed to know at a tick.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateView {
    pub player: String,
    pub faction: String,
    pub tick: u64,
    pub bank: BTreeMap<String, f64>,
    /// Sorted by UniqueID.
    pub own: Vec<EntityView>,
    /// Sorted by UniqueID.
    pub enemies: Vec<EnemyView>,
    /// Sorted by coordinate.
    pub cells: Vec<CellView>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityView {
    pub id: String,
    pub proto: String,
    pub building: bool,
    pub x: f64,
    pub y: f64,
    pub hp: f64,
    pub action: Action,
    pub complete: bool,
    pub carrying: Option<(String, f64)>,
    pub container: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnemyView {
    pub id: String,
    pub proto: String,
    pub x: f64,
    pub y: f64,
    pub hp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellView {
    pub cell: Cell,
    pub layers: Vec<String>,
    pub deposits: BTreeMap<String, f64>,
}

impl GameState {
    /// The vision-limited view for `player`; `None` for an unknown player.
    pub fn visible_update(&self, player: &str) -> Option<UpdateView> {
        let state = self.players.get(player)?;
        let own = self
            .entities
            .values()
            .filter(|e| e.owner == player)
            .map(|e| EntityView {
                id: e.id.clone(),
                proto: e.proto.clone(),
                building: self.proto(e).is_building(),
                x: e.pos.x,
                y: e.pos.y,
                hp: e.hp,
                action: e.action.clone(),
                complete: e.complete,
                carrying: e.carrying.as_ref().map(|(r, a)| (r.clone(), a.to_f64())),
                container: e.container.clone(),
            })
            .collect();
        let enemies = self
            .entities
            .values()
            .filter(|e| e.owner != player && self.sees(player, e))
            .map(|e| EnemyView {
                id: e.id.clone(),
                proto: e.proto.clone(),
                x: e.pos.x,
                y: e.pos.y,
                hp: e.hp,
            })
            .collect();
        let cells = self
            .vision_union(player)
            .into_iter()
            .map(|cell| CellView {
                cell,
                layers: self.layer_labels(cell),
                deposits: self
                    .cells
                    .get(&cell)
                    .map(|c| {
                        c.deposits
                            .iter()
                            .filter(|(_, a)| !a.is_zero())
                            .map(|(r, a)| (r.clone(), a.to_f64()))
                            .collect()
                    })
                    .unwrap_or_default(),
            })
            .collect();
        Some(UpdateView {
            player: player.to_string(),
            faction: state.faction.clone(),
            tick: self.tick,
            bank: state.bank.iter().map(|(r, a)| (r.clone(), a.to_f64())).collect(),
            own,
            enemies,
            cells,
        })
    }
}
