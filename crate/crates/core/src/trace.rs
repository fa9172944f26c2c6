//! Debug trace records and their exact line formats.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    ChanSend,
    ToolSend,
    ToolReceive,
    ToolKill,
}

/// One traced communication step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraceEvent {
    pub kind: TraceKind,
    pub entity: String,
    pub payload: Option<String>,
}

impl TraceEvent {
    pub fn chan_send(channel: &str, message: &str) -> Self {
        Self::with_payload(TraceKind::ChanSend, channel, message)
    }

    pub fn tool_send(tool: &str, message: &str) -> Self {
        Self::with_payload(TraceKind::ToolSend, tool, message)
    }

    pub fn tool_receive(tool: &str, message: &str) -> Self {
        Self::with_payload(TraceKind::ToolReceive, tool, message)
    }

    pub fn tool_kill(tool: &str) -> Self {
        TraceEvent {
            kind: TraceKind::ToolKill,
            entity: tool.into(),
            payload: None,
        }
    }

    fn with_payload(kind: TraceKind, entity: &str, payload: &str) -> Self {
        TraceEvent {
            kind,
            entity: entity.into(),
            payload: Some(payload.into()),
        }
    }

    /// Parses a rendered line back into an event. Channel and tool ids
    /// containing the separator text are ambiguous and may not round-trip.
    pub fn parse(line: &str) -> Option<Self> {
        let rest = line.strip_prefix("TCA ")?;
        if let Some(chan) = rest.strip_prefix("chan snd ") {
            let (id, msg) = chan.split_once(" : ")?;
            return Some(Self::chan_send(id, msg));
        }
        if let Some(tool) = rest.strip_prefix("tool ") {
            if let Some(id) = tool.strip_suffix(" killed") {
                return Some(Self::tool_kill(id));
            }
        }
        if let Some((id, msg)) = rest.split_once(" send: ") {
            return Some(Self::tool_send(id, msg));
        }
        if let Some((id, msg)) = rest.split_once(" receive: ") {
            return Some(Self::tool_receive(id, msg));
        }
        None
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let payload = self.payload.as_deref().unwrap_or("");
        match self.kind {
            TraceKind::ChanSend => write!(f, "TCA chan snd {} : {}", self.entity, payload),
            TraceKind::ToolSend => write!(f, "TCA {} send: {}", self.entity, payload),
            TraceKind::ToolReceive => write!(f, "TCA {} receive: {}", self.entity, payload),
            TraceKind::ToolKill => write!(f, "TCA tool {} killed", self.entity),
        }
    }
}
