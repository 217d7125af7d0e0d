use std::collections::VecDeque;
use std::time::Duration;

use crate::transport::Endpoint;
use crate::wire::ServerMessage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    /// Connected, no faction declared yet.
    Connected,
    /// Faction accepted, waiting for START.
    Ready,
    Playing,
    Finished,
}

/// One agent connection.
pub struct Session {
    pub player: String,
    pub faction: Option<String>,
    pub state: SessionState,
    /// Lines received but not yet handled.
    pub inbound: VecDeque<String>,
    /// Every line sent, in order.
    pub outbound: Vec<String>,
    endpoint: Box<dyn Endpoint>,
    disconnected: bool,
}

impl Session {
    pub fn new(player: impl Into<String>, endpoint: Box<dyn Endpoint>) -> Self {
        Self {
            player: player.into(),
            faction: None,
            state: SessionState::Connected,
            inbound: VecDeque::new(),
            outbound: Vec::new(),
            endpoint,
            disconnected: false,
        }
    }

    pub fn is_disconnected(&self) -> bool {
        self.disconnected
    }

    pub fn send_text(&mut self, text: &str) {
        self.outbound.extend(text.lines().map(str::to_string));
        if self.disconnected {
            return;
        }
        if self.endpoint.send(text).is_err() {
            self.disconnected = true;
        }
    }

    pub fn send(&mut self, msg: ServerMessage) {
        self.send_text(&msg.to_string());
    }

    /// Moves every line available within `wait` into the inbound queue.
    /// Returns how many arrived.
    pub fn pump(&mut self, wait: Duration) -> usize {
        if self.disconnected {
            return 0;
        }
        let mut n = 0;
        let mut wait = wait;
        loop {
            match self.endpoint.recv(wait) {
                Ok(Some(line)) => {
                    self.inbound.push_back(line);
                    n += 1;
                    wait = Duration::ZERO;
                }
                Ok(None) => return n,
                Err(_) => {
                    self.disconnected = true;
                    return n;
                }
            }
        }
    }

    pub fn on_tick(&mut self, tick: u64) {
        if !self.disconnected {
            self.endpoint.on_tick(tick);
        }
    }
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("player", &self.player)
            .field("faction", &self.faction)
            .field("state", &self.state)
            .finish_non_exhaustive()
    }
}

