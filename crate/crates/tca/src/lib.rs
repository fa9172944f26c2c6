//! Tool coordination runtime.
//!
//! Processes run on their own threads and talk over zero-capacity
//! [`Channel`]s. Each process typically owns one external tool, a child
//! process exchanging one message per line on its standard streams
//! ([`ToolHandle`]), and reacts to whatever arrives first from its tool or
//! its inbound channels through a [`Mux`]. A [`Runtime`] runs the
//! processes, can emit a trace line for every exchange, and shuts
//! everything down on request.
//!
//! The coordination logic itself lives in `tca_core::coord`; [`driver`]
//! runs it on top of this crate.

mod channel;
mod error;
mod mux;
mod runtime;
mod sync;
mod tool;

pub mod cli;
pub mod driver;
pub mod stub;

pub use channel::{Channel, EventSource};
pub use error::Error;
pub use mux::{Mux, MuxOutcome, MuxStopper};
pub use runtime::{Failure, MemorySink, Process, RunOutcome, Runtime, DEFAULT_SHUTDOWN_GRACE};
pub use tool::{ToolHandle, ToolState};

pub use tca_core;
