//! Allocation-only building blocks of the tool coordination runtime.
//!
//! Everything in here is pure: message terms and their line framing, the
//! anchored extraction patterns used to destructure tool output, the debug
//! trace line formats, the stub-tool scenario language, and the decision
//! logic of every coordinator process. None of it touches threads, pipes or
//! files; the `tca` crate supplies those and drives the logic defined here
//! through the [`coord::Ports`] trait.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod coord;
pub mod pattern;
pub mod scenario;
pub mod term;
pub mod trace;

pub use pattern::{PatternError, PatternTable};
pub use term::{make_term, Frame, LineDecoder, Message, TermError};
pub use trace::{TraceEvent, TraceKind};
