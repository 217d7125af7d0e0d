//! Line frames exchanged between the manager and an agent.

use std::fmt;

/// Client to server.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClientMessage {
    Faction(String),
    /// Command text, decoded later so syntax errors get their own reply.
    Cmd(String),
    Update,
}

impl ClientMessage {
    /// `None` for anything that is not a recognised frame.
    pub fn parse(line: &str) -> Option<Self> {
        let line = line.trim_end_matches(['\r', '\n']).trim();
        let (head, rest) = match line.split_once(char::is_whitespace) {
            Some((h, r)) => (h, r.trim()),
            None => (line, ""),
        };
        match head {
            "FACTION" if !rest.is_empty() => Some(Self::Faction(rest.to_string())),
            "CMD" if !rest.is_empty() => Some(Self::Cmd(rest.to_string())),
            "UPDATE" if rest.is_empty() => Some(Self::Update),
            _ => None,
        }
    }
}

impl fmt::Display for ClientMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Faction(name) => write!(f, "FACTION {name}"),
            Self::Cmd(text) => write!(f, "CMD {text}"),
            Self::Update => f.write_str("UPDATE"),
        }
    }
}

/// Server to client, except the multi-line UPDATE block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ServerMessage {
    Map(String),
    Opponent(String),
    Start,
    Ok(String),
    Err(String),
    /// Winning player id, or `None` for a draw.
    GameOver(Option<String>),
}

impl ServerMessage {
    pub fn parse(line: &str) -> Option<Self> {
        let line = line.trim_end_matches(['\r', '\n']).trim();
        let (head, rest) = match line.split_once(char::is_whitespace) {
            Some((h, r)) => (h, r.trim()),
            None => (line, ""),
        };
        match head {
            "MAP" => Some(Self::Map(rest.to_string())),
            "OPPONENT" => Some(Self::Opponent(rest.to_string())),
            "START" => Some(Self::Start),
            "OK" => Some(Self::Ok(rest.to_string())),
            "ERR" => Some(Self::Err(rest.to_string())),
            "GAMEOVER" if rest == "draw" => Some(Self::GameOver(None)),
            "GAMEOVER" if !rest.is_empty() => Some(Self::GameOver(Some(rest.to_string()))),
            _ => None,
        }
    }
}

impl fmt::Display for ServerMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Map(name) => write!(f, "MAP {name}"),
            Self::Opponent(faction) => write!(f, "OPPONENT {faction}"),
            Self::Start => f.write_str("START"),
            Self::Ok(receipt) => write!(f, "OK {receipt}"),
            Self::Err(reason) => write!(f, "ERR {reason}"),
            Self::GameOver(Some(winner)) => write!(f, "GAMEOVER {winner}"),
            Self::GameOver(None) => f.write_str("GAMEOVER draw"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_frames() {
        assert_eq!(ClientMessage::parse("FACTION Human\r\n"), Some(ClientMessage::Faction("Human".into())));
        assert_eq!(
            ClientMessage::parse("CMD  Move(A1, 1, 2) "),
            Some(ClientMessage::Cmd("Move(A1, 1, 2)".into()))
        );
        assert_eq!(ClientMessage::parse("UPDATE"), Some(ClientMessage::Update));
        for bad in ["", "FACTION", "CMD", "UPDATE now", "faction Human", "HELLO"] {
            assert_eq!(ClientMessage::parse(bad), None, "{bad:?}");
        }
    }

    #[test]
    fn server_frames_round_trip() {
        for m in [
            ServerMessage::Map("Hills".into()),
            ServerMessage::Opponent("Orc".into()),
            ServerMessage::Start,
            ServerMessage::Ok("Accepted".into()),
            ServerMessage::Err("WrongArity(Move, 1, 3)".into()),
            ServerMessage::GameOver(Some("P2".into())),
            ServerMessage::GameOver(None),
        ] {
            assert_eq!(ServerMessage::parse(&m.to_string()), Some(m));
        }
    }
}
