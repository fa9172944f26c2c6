//! Coordinator process logic.
//!
//! A coordinator process owns one tool, waits on a fixed set of sources
//! (its tool's output and some inbound channels) and reacts to each line.
//! The logic here is written against [`Ports`], so the same code runs over
//! real rendezvous channels and child processes in the `tca` crate and over
//! [`replay::RecordingPorts`] in table-driven tests.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub mod pingpong;
pub mod replay;
pub mod simulator;

/// Why a process handler stopped early.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Halt {
    /// The runtime is shutting down.
    #[error("runtime shut down")]
    Shutdown,
    /// The process's tool closed its output.
    #[error("tool closed its output")]
    ToolEof,
    #[error("{0}")]
    Fault(String),
}

/// Where a line came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    /// The process's own tool.
    Tool,
    /// An inbound channel, by key.
    Channel(&'static str),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Tool => f.write_str("tool"),
            Source::Channel(key) => write!(f, "channel {key}"),
        }
    }
}

/// Everything a coordinator process may do to the outside world.
pub trait Ports {
    /// Rendezvous send on channel `key`.
    fn send(&mut self, key: &str, message: &str) -> Result<(), Halt>;
    /// Blocking receive on channel `key`.
    fn receive(&mut self, key: &str) -> Result<String, Halt>;
    /// Writes one line to the process's tool.
    fn tool_send(&mut self, message: &str) -> Result<(), Halt>;
    /// Blocks for the next line from the process's tool.
    fn tool_receive(&mut self) -> Result<String, Halt>;
    /// Forcefully terminates the process's tool.
    fn kill_tool(&mut self);
    /// Ends the process's event loop after the current handler.
    fn stop(&mut self);
    /// Starts a runtime shutdown. The handler should return the result.
    fn shutdown(&mut self) -> Halt;
    /// A line matched none of the handler's branches.
    fn ignored(&mut self, _source: Source, _line: &str) {}
}

/// One coordinator process.
pub trait Coordinator: Send {
    /// Debug id of the process's tool; also the key for command overrides.
    fn tool_id(&self) -> &'static str;

    /// Runs before the tool starts and returns extra tool arguments.
    fn prepare(&mut self, _ports: &mut dyn Ports) -> Result<Vec<String>, Halt> {
        Ok(Vec::new())
    }

    /// Runs once the tool is up, before the event loop.
    fn started(&mut self, _ports: &mut dyn Ports) -> Result<(), Halt> {
        Ok(())
    }

    /// Sources the event loop waits on, in registration order.
    fn sources(&self) -> Vec<Source>;

    fn handle(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt>;
}

/// `snd-eval(<term>)`
pub fn snd_eval(term: &str) -> String {
    alloc::format!("snd-eval({term})")
}

/// `snd-do(<term>)`
pub fn snd_do(term: &str) -> String {
    alloc::format!("snd-do({term})")
}

/// `snd-ack-event(<term>)`
pub fn snd_ack_event(term: &str) -> String {
    alloc::format!("snd-ack-event({term})")
}
