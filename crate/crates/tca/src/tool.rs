//! Hosting of external tools speaking the line protocol on stdin/stdout.

use std::fmt;
use std::io::{ErrorKind, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, ExitStatus, Stdio};
use std::sync::{Arc, Mutex, Weak};
use std::thread;
use std::time::{Duration, Instant};

use tca_core::term::frame_encode;
use tca_core::{Frame, LineDecoder, Message, TraceEvent};

use crate::channel::EventSource;
use crate::runtime::{lock, Shared};
use crate::sync::{select, ChanCore, SendError, Selected};
use crate::{Error, Runtime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToolState {
    Created,
    Running,
    Killed,
    /// The process ended on its own, or its input pipe broke.
    Exited,
}

impl fmt::Display for ToolState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ToolState::Created => "created",
            ToolState::Running => "running",
            ToolState::Killed => "killed",
            ToolState::Exited => "exited",
        })
    }
}

struct Proc {
    state: ToolState,
    child: Option<Child>,
    pid: Option<u32>,
    status: Option<ExitStatus>,
}

impl Proc {
    /// Records the exit status if the child has ended. True once reaped.
    fn try_reap(&mut self) -> bool {
        let Some(child) = self.child.as_mut() else {
            return true;
        };
        match child.try_wait() {
            Ok(Some(status)) => {
                self.status = Some(status);
                self.child = None;
                if self.state == ToolState::Running {
                    self.state = ToolState::Exited;
                }
                true
            }
            Ok(None) => false,
            Err(_) => {
                self.child = None;
                true
            }
        }
    }
}

pub(crate) struct ToolInner {
    id: String,
    program: PathBuf,
    args: Vec<String>,
    rt: Weak<Shared>,
    proc: Mutex<Proc>,
    stdin: Mutex<Option<ChildStdin>>,
    incoming: Arc<ChanCore<Message>>,
}

impl ToolInner {
    pub(crate) fn is_live(&self) -> bool {
        matches!(
            lock(&self.proc).state,
            ToolState::Created | ToolState::Running
        )
    }

    fn runtime(&self) -> Option<Runtime> {
        Runtime::from_weak(&self.rt)
    }

    fn trace(&self, event: TraceEvent) {
        if let Some(rt) = self.runtime() {
            rt.trace(&event);
        }
    }
}

/// A child process exchanging newline-framed messages with the runtime.
///
/// The tool's standard error is inherited. Its output is read by a
/// background thread and handed over one line at a time through a
/// rendezvous, so the thread reads ahead by at most one line.
#[derive(Clone)]
pub struct ToolHandle(pub(crate) Arc<ToolInner>);

impl fmt::Debug for ToolHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ToolHandle")
            .field("id", &self.0.id)
            .field("state", &self.state())
            .finish()
    }
}

impl ToolHandle {
    /// Creates and registers a tool without starting it.
    pub fn new<I, S>(rt: &Runtime, id: impl Into<String>, program: impl AsRef<Path>, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let inner = Arc::new(ToolInner {
            id: id.into(),
            program: program.as_ref().to_path_buf(),
            args: args.into_iter().map(Into::into).collect(),
            rt: rt.downgrade(),
            proc: Mutex::new(Proc {
                state: ToolState::Created,
                child: None,
                pid: None,
                status: None,
            }),
            stdin: Mutex::new(None),
            incoming: Arc::new(ChanCore::new()),
        });
        rt.register(Arc::clone(&inner));
        ToolHandle(inner)
    }

    pub fn id(&self) -> &str {
        &self.0.id
    }

    pub fn program(&self) -> &Path {
        &self.0.program
    }

    /// Arguments the process is started with.
    pub fn args(&self) -> &[String] {
        &self.0.args
    }

    pub fn state(&self) -> ToolState {
        lock(&self.0.proc).state
    }

    pub fn pid(&self) -> Option<u32> {
        lock(&self.0.proc).pid
    }

    /// Exit status, once the process has been reaped.
    pub fn exit_status(&self) -> Option<ExitStatus> {
        lock(&self.0.proc).status
    }

    pub(crate) fn is_killed(&self) -> bool {
        self.state() == ToolState::Killed
    }

    /// Spawns the process. Fails with [`Error::Shutdown`] once the runtime
    /// is shutting down.
    pub fn start(&self) -> Result<(), Error> {
        let inner = &self.0;
        let mut proc = lock(&inner.proc);
        if proc.state != ToolState::Created {
            return Err(Error::ToolState {
                id: inner.id.clone(),
                op: "start",
                state: proc.state,
            });
        }
        if inner.runtime().map_or(true, |rt| rt.is_shutting_down()) {
            proc.state = ToolState::Exited;
            inner.incoming.close();
            return Err(Error::Shutdown);
        }
        let spawned = Command::new(&inner.program)
            .args(&inner.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn();
        let mut child = match spawned {
            Ok(child) => child,
            Err(source) => {
                proc.state = ToolState::Exited;
                inner.incoming.close();
                return Err(Error::Spawn {
                    id: inner.id.clone(),
                    program: inner.program.display().to_string(),
                    source,
                });
            }
        };
        let stdout = child.stdout.take().expect("piped stdout");
        *lock(&inner.stdin) = child.stdin.take();
        proc.pid = Some(child.id());
        proc.child = Some(child);
        proc.state = ToolState::Running;
        drop(proc);

        let pump = Arc::clone(inner);
        let spawned = thread::Builder::new()
            .name(format!("tool-{}", inner.id))
            .spawn(move || pump_output(pump, stdout));
        if let Err(e) = spawned {
            self.kill();
            return Err(Error::Spawn {
                id: inner.id.clone(),
                program: inner.program.display().to_string(),
                source: e,
            });
        }
        Ok(())
    }

    /// Writes one message line to the tool and flushes it.
    pub fn send(&self, message: impl AsRef<str>) -> Result<(), Error> {
        let inner = &self.0;
        let message = Message::new(message.as_ref())?;
        let state = self.state();
        if state != ToolState::Running {
            return Err(Error::ToolState {
                id: inner.id.clone(),
                op: "send",
                state,
            });
        }
        let mut stdin = lock(&inner.stdin);
        let Some(pipe) = stdin.as_mut() else {
            return Err(Error::ToolState {
                id: inner.id.clone(),
                op: "send",
                state: self.state(),
            });
        };
        let written = pipe
            .write_all(&frame_encode(&message))
            .and_then(|()| pipe.flush());
        if let Err(source) = written {
            *stdin = None;
            drop(stdin);
            let mut proc = lock(&inner.proc);
            if proc.state == ToolState::Running {
                proc.state = ToolState::Exited;
            }
            return Err(Error::ToolWrite {
                id: inner.id.clone(),
                source,
            });
        }
        drop(stdin);
        inner.trace(TraceEvent::tool_send(&inner.id, message.as_str()));
        Ok(())
    }

    /// Blocks for the next line of tool output.
    ///
    /// Once the output has ended, this and every later call return
    /// [`Error::ToolEof`].
    pub fn receive(&self) -> Result<Message, Error> {
        let inner = &self.0;
        let state = self.state();
        if state == ToolState::Created {
            return Err(Error::ToolState {
                id: inner.id.clone(),
                op: "receive",
                state,
            });
        }
        let Some(rt) = inner.runtime() else {
            return Err(Error::Shutdown);
        };
        match select(&[&*inner.incoming], 0, &[rt.halt_signal()]) {
            Selected::Message(_, m) => {
                rt.trace(&TraceEvent::tool_receive(&inner.id, m.as_str()));
                Ok(m)
            }
            Selected::Closed(_) => Err(Error::ToolEof {
                id: inner.id.clone(),
            }),
            Selected::Interrupted => Err(Error::Shutdown),
        }
    }

    /// The tool's output as a mux source.
    pub fn receive_source(&self) -> EventSource {
        EventSource::for_tool(&self.0.id, Arc::clone(&self.0.incoming))
    }

    /// Forcefully terminates and reaps the process.
    ///
    /// The first call moves the tool to `killed` and writes the kill trace
    /// line, whether or not the process was still running; later calls do
    /// nothing.
    pub fn kill(&self) {
        let inner = &self.0;
        let mut proc = lock(&inner.proc);
        if proc.state == ToolState::Killed {
            return;
        }
        proc.state = ToolState::Killed;
        if !proc.try_reap() {
            if let Some(mut child) = proc.child.take() {
                let _ = child.kill();
                if let Ok(status) = child.wait() {
                    proc.status = Some(status);
                }
            }
        }
        drop(proc);
        lock(&inner.stdin).take();
        inner.trace(TraceEvent::tool_kill(&inner.id));
    }

    /// Closes the tool's input so it sees end of file.
    pub(crate) fn close_input(&self) {
        lock(&self.0.stdin).take();
    }

    /// Polls until the process has ended or `deadline` passes.
    pub(crate) fn wait_exit_until(&self, deadline: Instant) {
        loop {
            if lock(&self.0.proc).try_reap() {
                return;
            }
            let now = Instant::now();
            if now >= deadline {
                return;
            }
            thread::sleep(Duration::from_millis(5).min(deadline - now));
        }
    }
}

fn pump_output(inner: Arc<ToolInner>, mut stdout: ChildStdout) {
    let mut decoder = LineDecoder::new();
    let mut buf = [0u8; 4096];
    'read: loop {
        let n = match stdout.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == ErrorKind::Interrupted => continue,
            Err(_) => break,
        };
        for line in decoder.push(&buf[..n]) {
            if !deliver(&inner, line) {
                break 'read;
            }
        }
    }
    if let Frame::End {
        truncated: Some(tail),
    } = decoder.finish()
    {
        eprintln!(
            "tca: tool {}: discarding unterminated output {tail:?}",
            inner.id
        );
    }
    inner.incoming.close();

    let mut pause = Duration::from_millis(1);
    loop {
        {
            let mut proc = lock(&inner.proc);
            if proc.state == ToolState::Killed || proc.try_reap() {
                return;
            }
        }
        thread::sleep(pause);
        pause = (pause * 2).min(Duration::from_millis(50));
    }
}

/// Hands one line to whoever receives next. False once the runtime is gone.
fn deliver(inner: &ToolInner, line: String) -> bool {
    let Some(rt) = inner.runtime() else {
        return false;
    };
    let message = match Message::new(line) {
        Ok(m) => m,
        Err(e) => {
            if rt.debug() {
                eprintln!("tca: tool {}: skipping output line: {e}", inner.id);
            }
            return true;
        }
    };
    match inner.incoming.send(message, &[rt.halt_signal()]) {
        Ok(()) => true,
        Err(SendError::Interrupted) | Err(SendError::Closed(_)) => false,
    }
}
