//! The `rtsl` command-line tool: definition checks, headless matches
//! between scripted bots, network play and replay verification.

pub mod app;
pub mod bot;

pub use app::{run, Cli};
pub use bot::{BotScript, BotScriptError, ScriptedBot};
