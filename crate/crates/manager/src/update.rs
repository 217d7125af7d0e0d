//! UPDATE blocks: a player's view written as rule-language fragments.

use rtsl_core::doc::{parse_document, serialize_document, DocNode, ParseError};
use rtsl_core::sim::{EntityView, UpdateView};
use thiserror::Error;

pub const UPDATE_BEGIN: &str = "UPDATE-BEGIN";
pub const UPDATE_END: &str = "UPDATE-END";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UpdateError {
    #[error("missing UPDATE-BEGIN/UPDATE-END framing")]
    Framing,
    #[error("bad tick `{0}`")]
    BadTick(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn num(v: f64) -> String {
    v.to_string()
}

fn position(x: f64, y: f64) -> DocNode {
    DocNode::with_children("Position", vec![DocNode::with_text("X,Y", format!("{},{}", num(x), num(y)))])
}

fn own_entity(e: &EntityView) -> DocNode {
    let mut node = DocNode::new(e.proto.clone());
    node.push(DocNode::with_text("UniqueID", e.id.clone()));
    node.push(DocNode::with_text("Health Point", num(e.hp)));
    node.push(position(e.x, e.y));
    let action = match e.action.detail() {
        Some(d) => DocNode::with_text(e.action.tag(), d),
        None => DocNode::new(e.action.tag()),
    };
    node.push(DocNode::with_children("Action", vec![action]));
    if !e.complete {
        node.push(DocNode::with_text("Complete", "False"));
    }
    if let Some((r, a)) = &e.carrying {
        node.push(DocNode::with_children("Carrying", vec![DocNode::with_text(r.clone(), num(*a))]));
    }
    if let Some(c) = &e.container {
        node.push(DocNode::with_text("Container", c.clone()));
    }
    node
}

/// The view as a document tree: Resource, Unit, Building, Enemy and Map
/// blocks, each omitted when it would be empty except Resource.
pub fn update_document(view: &UpdateView, hp_in_enemy: bool) -> DocNode {
    let mut root = DocNode::root(vec![]);
    root.push(DocNode::with_children(
        "Resource",
        view.bank.iter().map(|(r, a)| DocNode::with_text(r.clone(), num(*a))).collect(),
    ));

    let mut own: Vec<&EntityView> = view.own.iter().collect();
    own.sort_by(|a, b| a.id.cmp(&b.id));
    for (block, building) in [("Unit", false), ("Building", true)] {
        let items: Vec<DocNode> = own.iter().filter(|e| e.building == building).map(|e| own_entity(e)).collect();
        if !items.is_empty() {
            root.push(DocNode::with_children(block, items));
        }
    }

    let mut enemies: Vec<_> = view.enemies.iter().collect();
    enemies.sort_by(|a, b| a.id.cmp(&b.id));
    if !enemies.is_empty() {
        let items = enemies
            .iter()
            .map(|e| {
                let mut node = DocNode::new(e.proto.clone());
                node.push(DocNode::with_text("UniqueID", e.id.clone()));
                node.push(position(e.x, e.y));
                if hp_in_enemy {
                    node.push(DocNode::with_text("Health Point", num(e.hp)));
                }
                node
            })
            .collect();
        root.push(DocNode::with_children("Enemy", items));
    }

    let mut cells: Vec<_> = view.cells.iter().collect();
    cells.sort_by_key(|c| (c.cell.x, c.cell.y));
    if !cells.is_empty() {
        let items = cells
            .iter()
            .map(|c| {
                let mut node = DocNode::new(format!("({},{})", c.cell.x, c.cell.y));
                node.push(DocNode::with_children(
                    "Terrain",
                    c.layers.iter().map(|l| DocNode::new(l.clone())).collect(),
                ));
                for (r, a) in &c.deposits {
                    node.push(DocNode::with_text(r.clone(), num(*a)));
                }
                node
            })
            .collect();
        root.push(DocNode::with_children("Map", items));
    }
    root
}

/// `UPDATE-BEGIN <tick>`, the serialized view, then `UPDATE-END`. Every
/// line ends in a newline.
pub fn encode_update(view: &UpdateView, hp_in_enemy: bool) -> String {
    format!(
        "{UPDATE_BEGIN} {}\n{}{UPDATE_END}\n",
        view.tick,
        serialize_document(&update_document(view, hp_in_enemy))
    )
}

/// Reads a framed block back into its tick and document.
pub fn decode_update(text: &str) -> Result<(u64, DocNode), UpdateError> {
    let mut lines: Vec<&str> = text.lines().collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    let first = lines.first().ok_or(UpdateError::Framing)?;
    let tick = first.strip_prefix(UPDATE_BEGIN).ok_or(UpdateError::Framing)?.trim();
    let tick = tick.parse().map_err(|_| UpdateError::BadTick(tick.to_string()))?;
    if lines.len() < 2 || lines[lines.len() - 1].trim() != UPDATE_END {
        return Err(UpdateError::Framing);
    }
    let body = lines[1..lines.len() - 1].join("\n");
    Ok((tick, parse_document(&body)?))
}
