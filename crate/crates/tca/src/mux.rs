//! Event loop dispatching whichever source is ready to its handler.

use std::fmt;
use std::sync::Arc;

use tca_core::{Message, TraceEvent};

use crate::channel::EventSource;
use crate::sync::{select, ChanCore, Selected, Signal};
use crate::{Error, Runtime};

type Handler<'h> = Box<dyn FnMut(Message) -> Result<(), Error> + 'h>;

struct Entry<'h> {
    source: EventSource,
    handler: Handler<'h>,
}

/// Why [`Mux::run`] returned normally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuxOutcome {
    Stopped,
    Shutdown,
}

/// Cloneable request to end a [`Mux`] loop.
///
/// Stopping takes effect after the handler currently running, if any, and
/// wakes the loop if it is waiting. Stopping before the loop starts makes
/// it return immediately.
#[derive(Clone, Default)]
pub struct MuxStopper(Arc<Signal>);

impl MuxStopper {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stop(&self) {
        self.0.raise();
    }

    pub fn is_stopped(&self) -> bool {
        self.0.is_raised()
    }
}

impl fmt::Debug for MuxStopper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("MuxStopper").field(&self.is_stopped()).finish()
    }
}

/// Waits on several sources at once and runs one handler at a time.
///
/// A handler runs to completion, including any blocking operations it
/// performs, before the next message is taken from any source. Messages
/// are taken only when the loop is ready to dispatch them. When several
/// sources are ready, the scan starts just after the last source served,
/// so none of them can be starved.
pub struct Mux<'h> {
    rt: Runtime,
    entries: Vec<Entry<'h>>,
    stopper: MuxStopper,
    finished: bool,
}

impl<'h> Mux<'h> {
    pub fn new(rt: &Runtime) -> Self {
        Self::with_stopper(rt, MuxStopper::new())
    }

    pub fn with_stopper(rt: &Runtime, stopper: MuxStopper) -> Self {
        Mux {
            rt: rt.clone(),
            entries: Vec::new(),
            stopper,
            finished: false,
        }
    }

    pub fn stopper(&self) -> MuxStopper {
        self.stopper.clone()
    }

    pub fn stop(&self) {
        self.stopper.stop();
    }

    /// Registers a source. Each source may be registered once.
    pub fn add<F>(&mut self, source: EventSource, handler: F) -> Result<(), Error>
    where
        F: FnMut(Message) -> Result<(), Error> + 'h,
    {
        if self.finished {
            return Err(Error::MuxFinished);
        }
        if self.entries.iter().any(|e| e.source.same_as(&source)) {
            return Err(Error::DuplicateSource(source.label));
        }
        self.entries.push(Entry {
            source,
            handler: Box::new(handler),
        });
        Ok(())
    }

    /// Dispatches until stopped or the runtime shuts down.
    ///
    /// A handler error ends the loop and is returned, except
    /// [`Error::Shutdown`], which is reported as [`MuxOutcome::Shutdown`].
    /// A tool source whose output ended yields [`Error::ToolEof`].
    pub fn run(&mut self) -> Result<MuxOutcome, Error> {
        if self.finished {
            return Err(Error::MuxFinished);
        }
        self.finished = true;
        let cores: Vec<Arc<ChanCore<Message>>> = self
            .entries
            .iter()
            .map(|e| Arc::clone(&e.source.core))
            .collect();
        let refs: Vec<&ChanCore<Message>> = cores.iter().map(|c| &**c).collect();
        let stop = Arc::clone(&self.stopper.0);
        let mut start = 0;
        loop {
            if self.rt.is_shutting_down() {
                return Ok(MuxOutcome::Shutdown);
            }
            if stop.is_raised() {
                return Ok(MuxOutcome::Stopped);
            }
            match select(&refs, start, &[self.rt.halt_signal(), &stop]) {
                Selected::Message(index, message) => {
                    let entry = &mut self.entries[index];
                    if let Some(id) = &entry.source.tool {
                        self.rt
                            .trace(&TraceEvent::tool_receive(id, message.as_str()));
                    }
                    start = (index + 1) % refs.len();
                    match (entry.handler)(message) {
                        Ok(()) => {}
                        Err(Error::Shutdown) => return Ok(MuxOutcome::Shutdown),
                        Err(e) => return Err(e),
                    }
                }
                Selected::Closed(index) => {
                    return Err(Error::ToolEof {
                        id: self.entries[index].source.label.clone(),
                    })
                }
                Selected::Interrupted => {}
            }
        }
    }
}
