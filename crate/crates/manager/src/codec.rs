//! The textual command forms, e.g. `Move(Archer1, 10, 12)`.

use rtsl_core::sim::Command;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("BadCommandSyntax({0})")]
    BadCommandSyntax(String),
    #[error("WrongArity({0}, {1}, {2})")]
    WrongArity(String, usize, usize),
}

/// Inverse of the command's `Display` form.
pub fn encode_command(cmd: &Command) -> String {
    cmd.to_string()
}

pub fn decode_command(text: &str) -> Result<Command, DecodeError> {
    let bad = || DecodeError::BadCommandSyntax(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let (name, args) = match t.find('(') {
        Some(open) => {
            let inner = t[open + 1..].strip_suffix(')').ok_or_else(bad)?;
            (t[..open].trim(), split_args(inner).ok_or_else(bad)?)
        }
        None => (t, Vec::new()),
    };
    let canonical = ["Construct", "Move", "Train", "Gather", "Attack", "Action", "Update"]
        .into_iter()
        .find(|n| n.eq_ignore_ascii_case(name))
        .ok_or_else(bad)?;
    let want = match canonical {
        "Construct" | "Move" | "Gather" => 3,
        "Train" | "Attack" => 2,
        "Action" => 5,
        _ => 0,
    };
    if args.len() != want {
        return Err(DecodeError::WrongArity(canonical.to_string(), args.len(), want));
    }

    let word = |i: usize| -> Result<String, DecodeError> {
        let a: &str = &args[i];
        if a.is_empty() || a.starts_with('[') {
            Err(bad())
        } else {
            Ok(a.to_string())
        }
    };
    let num = |i: usize| number(&args[i]).ok_or_else(bad);
    let array = |i: usize| -> Result<Vec<String>, DecodeError> {
        let a = args[i].strip_prefix('[').and_then(|a| a.strip_suffix(']')).ok_or_else(bad)?;
        if a.trim().is_empty() {
            return Ok(Vec::new());
        }
        let items: Vec<String> = a.split(',').map(|s| s.trim().to_string()).collect();
        if items.iter().any(|s| s.is_empty()) {
            return Err(bad());
        }
        Ok(items)
    };
    let numbers = |i: usize| -> Result<Vec<f64>, DecodeError> {
        array(i)?.iter().map(|s| number(s).ok_or_else(bad)).collect()
    };

    Ok(match canonical {
        "Construct" => Command::Construct { building: word(0)?, x: num(1)?, y: num(2)? },
        "Move" => Command::Move { id: word(0)?, x: num(1)?, y: num(2)? },
        "Train" => Command::Train { location: word(0)?, product: word(1)? },
        "Gather" => Command::Gather { unit: word(0)?, x: num(1)?, y: num(2)? },
        "Attack" => Command::Attack { ally: word(0)?, enemy: word(1)? },
        "Action" => Command::GameAction {
            name: word(0)?,
            allies: array(1)?,
            enemies: array(2)?,
            xs: numbers(3)?,
            ys: numbers(4)?,
        },
        _ => Command::Update,
    })
}

/// Splits on commas outside brackets. `None` on unbalanced brackets or
/// stray parentheses.
fn split_args(inner: &str) -> Option<Vec<String>> {
    if inner.trim().is_empty() {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in inner.chars() {
        match c {
            '[' => {
                depth += 1;
                if depth > 1 {
                    return None;
                }
                cur.push(c);
            }
            ']' => {
                depth -= 1;
                if depth < 0 {
                    return None;
                }
                cur.push(c);
            }
            '(' | ')' => return None,
            ',' if depth == 0 => out.push(std::mem::take(&mut cur).trim().to_string()),
            _ => cur.push(c),
        }
    }
    if depth != 0 {
        return None;
    }
    out.push(cur.trim().to_string());
    Some(out)
}

fn number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construct() {
        assert_eq!(
            decode_command("Construct(Town Hall, 10, 12)"),
            Ok(Command::Construct { building: "Town Hall".into(), x: 10.0, y: 12.0 })
        );
    }

    #[test]
    fn action_with_arrays() {
        assert_eq!(
            decode_command("Action(Lockdown, [Ghost1], [Tank3], [], [])"),
            Ok(Command::GameAction {
                name: "Lockdown".into(),
                allies: vec!["Ghost1".into()],
                enemies: vec!["Tank3".into()],
                xs: vec![],
                ys: vec![],
            })
        );
        assert_eq!(
            decode_command(" Action ( Unload , [Cart1,Crate2] , [ ] , [ 3.5 ] , [4] ) "),
            Ok(Command::GameAction {
                name: "Unload".into(),
                allies: vec!["Cart1".into(), "Crate2".into()],
                enemies: vec![],
                xs: vec![3.5],
                ys: vec![4.0],
            })
        );
    }

    #[test]
    fn arity() {
        assert_eq!(decode_command("Move(Archer1)"), Err(DecodeError::WrongArity("Move".into(), 1, 3)));
        assert_eq!(decode_command("Update(x)"), Err(DecodeError::WrongArity("Update".into(), 1, 0)));
        assert_eq!(decode_command("attack()"), Err(DecodeError::WrongArity("Attack".into(), 0, 2)));
    }

    #[test]
    fn update_forms() {
        assert_eq!(decode_command("Update"), Ok(Command::Update));
        assert_eq!(decode_command("Update()"), Ok(Command::Update));
    }

    #[test]
    fn malformed() {
        for text in [
            "",
            "   ",
            "Dance(1)",
            "Move(Archer1, x, 3)",
            "Move(Archer1, 1, 3",
            "Move(Archer1, NaN, 3)",
            "Move(Archer1, inf, 3)",
            "Move(, 1, 3)",
            "Move([A], 1, 3)",
            "Action(L, Ghost1, [], [], [])",
            "Action(L, [[Ghost1]], [], [], [])",
            "Action(L, [a,,b], [], [], [])",
            "Action(L, [], [], [x], [1])",
            "Train(Hall1, (Peasant))",
        ] {
            assert!(matches!(decode_command(text), Err(DecodeError::BadCommandSyntax(_))), "{text:?}");
        }
    }

    #[test]
    fn error_text() {
        assert_eq!(DecodeError::WrongArity("Move".into(), 1, 3).to_string(), "WrongArity(Move, 1, 3)");
    }
}
