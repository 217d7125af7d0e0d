//! Match management for RTSL games.
//!
//! Agents connect over a line protocol, declare a faction, and then send
//! textual commands and pull vision-limited updates while the manager
//! drives the simulation clock. Finished matches can be written out as
//! replay files and re-verified later.

pub mod codec;
pub mod replay;
pub mod run;
pub mod session;
pub mod transport;
pub mod update;
pub mod wire;

pub use codec::{decode_command, encode_command, DecodeError};
pub use replay::{definition_digest, Replay, ReplayError, ReplayRecord};
pub use run::{run_match, EndReason, MatchConfig, MatchError, MatchResult, Pace};
pub use session::{Session, SessionState};
pub use transport::{channel_pair, run_remote_agent, Agent, ChannelEndpoint, Endpoint, LocalEndpoint, TcpEndpoint};
pub use update::{decode_update, encode_update, update_document, UpdateError};
pub use wire::{ClientMessage, ServerMessage};
