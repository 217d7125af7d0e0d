use std::fmt;

/// The seven player actions.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Construct {
        building: String,
        x: f64,
        y: f64,
    },
    Move {
        id: String,
        x: f64,
        y: f64,
    },
    Train {
        location: String,
        product: String,
    },
    Gather {
        unit: String,
        x: f64,
        y: f64,
    },
    Attack {
        ally: String,
        enemy: String,
    },
    GameAction {
        name: String,
        allies: Vec<String>,
        enemies: Vec<String>,
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
    Update,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Construct { .. } => "Construct",
            Command::Move { .. } => "Move",
            Command::Train { .. } => "Train",
            Command::Gather { .. } => "Gather",
            Command::Attack { .. } => "Attack",
            Command::GameAction { .. } => "Action",
            Command::Update => "Update",
        }
    }
}

fn list<T: fmt::Display>(items: &[T]) -> String {
    let parts: Vec<String> = items.iter().map(|i| i.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// The textual command form, e.g. `Construct(Town Hall, 10, 12)`.
impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Construct { building, x, y } => write!(f, "Construct({building}, {x}, {y})"),
            Command::Move { id, x, y } => write!(f, "Move({id}, {x}, {y})"),
            Command::Train { location, product } => write!(f, "Train({location}, {product})"),
            Command::Gather { unit, x, y } => write!(f, "Gather({unit}, {x}, {y})"),
            Command::Attack { ally, enemy } => write!(f, "Attack({ally}, {enemy})"),
            Command::GameAction {
                name,
                allies,
                enemies,
                xs,
                ys,
            } => write!(
                f,
                "Action({name}, {}, {}, {}, {})",
                list(allies),
                list(enemies),
                list(xs),
                list(ys)
            ),
            Command::Update => f.write_str("Update"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_forms() {
        let c = Command::Construct {
            building: "Town Hall".into(),
            x: 10.0,
            y: 12.5,
        };
        assert_eq!(c.to_string(), "Construct(Town Hall, 10, 12.5)");
        let a = Command::GameAction {
            name: "Lockdown".into(),
            allies: vec!["Ghost1".into()],
            enemies: vec!["Tank3".into()],
            xs: vec![],
            ys: vec![],
        };
        assert_eq!(a.to_string(), "Action(Lockdown, [Ghost1], [Tank3], [], [])");
    }
}
