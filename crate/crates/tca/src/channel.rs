//! Named rendezvous channels between processes.

use std::fmt;
use std::sync::Arc;

use tca_core::{Message, TraceEvent};

use crate::sync::{select, ChanCore, Selected};
use crate::{Error, Runtime};

/// A rendezvous channel carrying single-line messages.
///
/// `send` returns only once a receiver has taken the message, so nothing is
/// ever buffered. Any number of processes may send and receive on the same
/// channel; each message goes to exactly one receiver. Clones share the
/// channel.
#[derive(Clone)]
pub struct Channel {
    id: Arc<str>,
    core: Arc<ChanCore<Message>>,
    rt: Runtime,
}

impl fmt::Debug for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Channel").field("id", &self.id).finish()
    }
}

impl Channel {
    pub fn new(rt: &Runtime, id: impl Into<String>) -> Self {
        Channel {
            id: Arc::from(id.into()),
            core: Arc::new(ChanCore::new()),
            rt: rt.clone(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Blocks until a receiver takes `message`.
    ///
    /// The debug trace line is written when the send starts, before the
    /// rendezvous completes.
    pub fn send(&self, message: impl AsRef<str>) -> Result<(), Error> {
        let message = Message::new(message.as_ref())?;
        self.rt
            .trace(&TraceEvent::chan_send(&self.id, message.as_str()));
        self.core
            .send(message, &[self.rt.halt_signal()])
            .map_err(|_| Error::Shutdown)
    }

    /// Blocks until some sender hands over a message.
    pub fn receive(&self) -> Result<Message, Error> {
        match select(&[&*self.core], 0, &[self.rt.halt_signal()]) {
            Selected::Message(_, m) => Ok(m),
            Selected::Closed(_) | Selected::Interrupted => Err(Error::Shutdown),
        }
    }

    /// This channel as a mux source.
    pub fn receive_source(&self) -> EventSource {
        EventSource {
            label: self.id.to_string(),
            core: Arc::clone(&self.core),
            tool: None,
        }
    }
}

/// Something a [`crate::Mux`] can wait on: a channel or a tool's output.
#[derive(Clone)]
pub struct EventSource {
    pub(crate) label: String,
    pub(crate) core: Arc<ChanCore<Message>>,
    /// Set for tool output; receives are traced under this id.
    pub(crate) tool: Option<String>,
}

impl EventSource {
    pub(crate) fn for_tool(id: &str, core: Arc<ChanCore<Message>>) -> Self {
        EventSource {
            label: id.to_string(),
            core,
            tool: Some(id.to_string()),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub(crate) fn same_as(&self, other: &EventSource) -> bool {
        Arc::ptr_eq(&self.core, &other.core)
    }
}

impl fmt::Debug for EventSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EventSource")
            .field("label", &self.label)
            .field("tool", &self.tool)
            .finish()
    }
}
