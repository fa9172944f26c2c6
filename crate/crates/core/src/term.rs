//! Message terms and newline framing.
//!
//! A message is one line of term text such as `snd-event(quit)`. On the
//! wire every message is followed by a single `\n`; nothing else is escaped.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

/// Framing terminator between messages on a tool's standard streams.
pub const FRAME_TERMINATOR: u8 = b'\n';

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("message is empty")]
    Empty,
    #[error("message contains a line terminator: {0:?}")]
    LineBreak(String),
    #[error("term name is empty")]
    EmptyName,
}

/// One line of term text. Never empty, never contains `\n` or `\r`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message(String);

impl Message {
    pub fn new(text: impl Into<String>) -> Result<Self, TermError> {
        let text = text.into();
        if text.is_empty() {
            return Err(TermError::Empty);
        }
        if has_line_break(&text) {
            return Err(TermError::LineBreak(text));
        }
        Ok(Message(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl Deref for Message {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Message {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<&str> for Message {
    type Error = TermError;

    fn try_from(text: &str) -> Result<Self, TermError> {
        Message::new(text)
    }
}

impl TryFrom<String> for Message {
    type Error = TermError;

    fn try_from(text: String) -> Result<Self, TermError> {
        Message::new(text)
    }
}

impl PartialEq<str> for Message {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for Message {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

fn has_line_break(s: &str) -> bool {
    s.contains(['\n', '\r'])
}

/// Renders `name` or `name(a1, a2, ...)`.
///
/// There is no escaping: arguments containing `, ` or parentheses produce
/// text that the greedy extraction patterns may split differently.
pub fn make_term<S: AsRef<str>>(name: &str, args: &[S]) -> Result<Message, TermError> {
    if name.is_empty() {
        return Err(TermError::EmptyName);
    }
    if has_line_break(name) {
        return Err(TermError::LineBreak(name.to_string()));
    }
    let mut out = String::from(name);
    if !args.is_empty() {
        out.push('(');
        for (i, arg) in args.iter().enumerate() {
            let arg = arg.as_ref();
            if has_line_break(arg) {
                return Err(TermError::LineBreak(arg.to_string()));
            }
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(arg);
        }
        out.push(')');
    }
    Ok(Message(out))
}

/// Wire bytes of one message: its text followed by the terminator.
pub fn frame_encode(message: &Message) -> Vec<u8> {
    let mut out = Vec::with_capacity(message.len() + 1);
    out.extend_from_slice(message.as_bytes());
    out.push(FRAME_TERMINATOR);
    out
}

/// One decoded unit of an inbound byte stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    /// A terminated line with the terminator removed. May be empty.
    Line(String),
    /// The stream ended. `truncated` holds an unterminated tail, which is
    /// not delivered as a line.
    End { truncated: Option<String> },
}

/// Incremental newline splitter for a byte stream arriving in chunks.
#[derive(Debug, Default)]
pub struct LineDecoder {
    pending: Vec<u8>,
}

impl LineDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds a chunk and returns every line it completes.
    pub fn push(&mut self, chunk: &[u8]) -> Vec<String> {
        let mut lines = Vec::new();
        for &byte in chunk {
            if byte == FRAME_TERMINATOR {
                let raw = core::mem::take(&mut self.pending);
                lines.push(String::from_utf8_lossy(&raw).into_owned());
            } else {
                self.pending.push(byte);
            }
        }
        lines
    }

    /// Marks end of stream, handing back any unterminated tail.
    pub fn finish(&mut self) -> Frame {
        if self.pending.is_empty() {
            Frame::End { truncated: None }
        } else {
            let raw = core::mem::take(&mut self.pending);
            Frame::End {
                truncated: Some(String::from_utf8_lossy(&raw).into_owned()),
            }
        }
    }
}

/// Decodes a complete stream. The last frame is always [`Frame::End`].
pub fn frame_decode(bytes: &[u8]) -> Vec<Frame> {
    let mut decoder = LineDecoder::new();
    let mut frames: Vec<Frame> = decoder.push(bytes).into_iter().map(Frame::Line).collect();
    frames.push(decoder.finish());
    frames
}
