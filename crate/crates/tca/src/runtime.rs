//! The runtime: process execution, tool registry, tracing and shutdown.

use std::any::Any;
use std::io::{self, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex, MutexGuard, Weak};
use std::thread;
use std::time::{Duration, Instant};

use tca_core::TraceEvent;

use crate::sync::Signal;
use crate::tool::{ToolHandle, ToolInner};
use crate::Error;

/// How long shutdown lets tools exit on their own after closing their input.
pub const DEFAULT_SHUTDOWN_GRACE: Duration = Duration::from_secs(2);

/// How long `run` waits for processes still busy after a shutdown.
const STRAGGLER_WAIT: Duration = Duration::from_secs(5);

pub(crate) fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

pub(crate) struct Shared {
    debug: AtomicBool,
    sink: Mutex<Box<dyn Write + Send>>,
    pub(crate) halt: Signal,
    shutting_down: AtomicBool,
    shutdown_done: (Mutex<bool>, Condvar),
    tools: Mutex<Vec<Arc<ToolInner>>>,
    grace: Mutex<Duration>,
    ran: AtomicBool,
    failures: Mutex<Vec<Failure>>,
}

/// Handle to one runtime instance. Cloning shares the instance.
///
/// A runtime owns the debug trace switch and sink, the set of tools started
/// through it, and the shutdown signal that interrupts every blocked
/// channel operation, tool receive and mux started under it.
#[derive(Clone)]
pub struct Runtime(pub(crate) Arc<Shared>);

/// A named process body for [`Runtime::run`].
pub struct Process {
    name: String,
    body: Box<dyn FnOnce(&Runtime) -> Result<(), Error> + Send>,
}

impl Process {
    pub fn new<F>(name: impl Into<String>, body: F) -> Self
    where
        F: FnOnce(&Runtime) -> Result<(), Error> + Send + 'static,
    {
        Process {
            name: name.into(),
            body: Box::new(body),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// A process that ended with an error outside of shutdown.
#[derive(Debug)]
pub struct Failure {
    pub process: String,
    pub error: Error,
}

#[derive(Debug)]
pub enum RunOutcome {
    /// Every process returned normally.
    Completed,
    /// A process requested shutdown.
    Shutdown,
    /// A process failed; the runtime was shut down on its behalf.
    Aborted(Vec<Failure>),
}

impl Default for Runtime {
    fn default() -> Self {
        Self::new()
    }
}

impl Runtime {
    /// A runtime tracing to standard output, with debug tracing off.
    pub fn new() -> Self {
        Self::with_trace(io::stdout())
    }

    pub fn with_trace(sink: impl Write + Send + 'static) -> Self {
        Runtime(Arc::new(Shared {
            debug: AtomicBool::new(false),
            sink: Mutex::new(Box::new(sink)),
            halt: Signal::new(),
            shutting_down: AtomicBool::new(false),
            shutdown_done: (Mutex::new(false), Condvar::new()),
            tools: Mutex::new(Vec::new()),
            grace: Mutex::new(DEFAULT_SHUTDOWN_GRACE),
            ran: AtomicBool::new(false),
            failures: Mutex::new(Vec::new()),
        }))
    }

    pub(crate) fn from_weak(weak: &Weak<Shared>) -> Option<Self> {
        weak.upgrade().map(Runtime)
    }

    pub(crate) fn downgrade(&self) -> Weak<Shared> {
        Arc::downgrade(&self.0)
    }

    pub fn set_debug(&self, on: bool) {
        self.0.debug.store(on, Ordering::SeqCst);
    }

    pub fn debug(&self) -> bool {
        self.0.debug.load(Ordering::SeqCst)
    }

    pub fn set_shutdown_grace(&self, grace: Duration) {
        *lock(&self.0.grace) = grace;
    }

    /// Writes one trace line if debug tracing is on.
    pub(crate) fn trace(&self, event: &TraceEvent) {
        if !self.debug() {
            return;
        }
        let line = format!("{event}\n");
        let mut sink = lock(&self.0.sink);
        let _ = sink.write_all(line.as_bytes());
        let _ = sink.flush();
    }

    pub(crate) fn halt_signal(&self) -> &Signal {
        &self.0.halt
    }

    pub fn is_shutting_down(&self) -> bool {
        self.0.shutting_down.load(Ordering::SeqCst)
    }

    pub(crate) fn register(&self, tool: Arc<ToolInner>) {
        lock(&self.0.tools).push(tool);
    }

    /// Tools created and neither killed nor exited.
    pub fn tools(&self) -> Vec<ToolHandle> {
        lock(&self.0.tools)
            .iter()
            .filter(|t| t.is_live())
            .map(|t| ToolHandle(Arc::clone(t)))
            .collect()
    }

    /// Every tool ever created through this runtime, in creation order.
    pub fn tool_history(&self) -> Vec<ToolHandle> {
        lock(&self.0.tools)
            .iter()
            .map(|t| ToolHandle(Arc::clone(t)))
            .collect()
    }

    /// Stops everything: interrupts every blocked operation, closes every
    /// tool's input, gives tools the grace period to exit, then kills and
    /// reaps whatever is left. Every tool not already killed gets a kill
    /// trace. Later calls wait for the first one to finish.
    pub fn shutdown(&self) {
        let (done, finished) = &self.0.shutdown_done;
        if self.0.shutting_down.swap(true, Ordering::SeqCst) {
            let mut done = lock(done);
            while !*done {
                done = finished.wait(done).unwrap_or_else(|p| p.into_inner());
            }
            return;
        }
        self.0.halt.raise();
        let tools: Vec<ToolHandle> = self
            .tool_history()
            .into_iter()
            .filter(|t| !t.is_killed())
            .collect();
        for tool in &tools {
            tool.close_input();
        }
        let deadline = Instant::now() + *lock(&self.0.grace);
        for tool in &tools {
            tool.wait_exit_until(deadline);
        }
        for tool in &tools {
            tool.kill();
        }
        *lock(done) = true;
        finished.notify_all();
    }

    fn process_ended(&self, name: &str, result: thread::Result<Result<(), Error>>) {
        let error = match result {
            Ok(Ok(())) => return,
            Ok(Err(e)) => e,
            Err(panic) => Error::Process {
                process: name.to_string(),
                message: panic_message(panic.as_ref()),
            },
        };
        if error.is_shutdown() || self.is_shutting_down() {
            if self.debug() && !error.is_shutdown() {
                eprintln!("tca: {name} ended during shutdown: {error}");
            }
            return;
        }
        eprintln!("tca: process {name} failed: {error}");
        lock(&self.0.failures).push(Failure {
            process: name.to_string(),
            error,
        });
        self.shutdown();
    }

    /// Runs every process on its own thread and waits for the outcome.
    ///
    /// A process that fails shuts the runtime down. After a shutdown,
    /// processes get a bounded time to notice; any still busy after that
    /// are left detached. A runtime runs at most once.
    pub fn run(&self, processes: Vec<Process>) -> Result<RunOutcome, Error> {
        if processes.is_empty() {
            return Err(Error::NoProcesses);
        }
        if self.0.ran.swap(true, Ordering::SeqCst) {
            return Err(Error::AlreadyRan);
        }
        let total = processes.len();
        let finished = Arc::new((Mutex::new(0usize), Condvar::new()));
        let mut handles = Vec::with_capacity(total);
        for Process { name, body } in processes {
            let rt = self.clone();
            let done = Arc::clone(&finished);
            let thread_name = name.clone();
            let spawned = thread::Builder::new().name(thread_name).spawn(move || {
                let result = catch_unwind(AssertUnwindSafe(|| body(&rt)));
                rt.process_ended(&name, result);
                *lock(&done.0) += 1;
                done.1.notify_all();
            });
            match spawned {
                Ok(handle) => handles.push(handle),
                Err(e) => {
                    lock(&self.0.failures).push(Failure {
                        process: "runtime".into(),
                        error: Error::Process {
                            process: "runtime".into(),
                            message: format!("cannot start thread: {e}"),
                        },
                    });
                    self.shutdown();
                    *lock(&finished.0) += 1;
                }
            }
        }

        let mut count = lock(&finished.0);
        let mut straggler_deadline = None;
        while *count < total {
            if self.is_shutting_down() {
                let deadline =
                    *straggler_deadline.get_or_insert_with(|| Instant::now() + STRAGGLER_WAIT);
                let now = Instant::now();
                if now >= deadline {
                    break;
                }
                count = finished
                    .1
                    .wait_timeout(count, deadline - now)
                    .unwrap_or_else(|p| p.into_inner())
                    .0;
            } else {
                count = finished
                    .1
                    .wait_timeout(count, Duration::from_millis(50))
                    .unwrap_or_else(|p| p.into_inner())
                    .0;
            }
        }
        drop(count);
        for handle in handles {
            if handle.is_finished() {
                let _ = handle.join();
            }
        }
        if self.is_shutting_down() {
            // make sure the cleanup finished before reporting
            self.shutdown();
        }

        let failures = std::mem::take(&mut *lock(&self.0.failures));
        Ok(if !failures.is_empty() {
            RunOutcome::Aborted(failures)
        } else if self.is_shutting_down() {
            RunOutcome::Shutdown
        } else {
            RunOutcome::Completed
        })
    }
}

fn panic_message(panic: &(dyn Any + Send)) -> String {
    if let Some(s) = panic.downcast_ref::<&str>() {
        format!("panicked: {s}")
    } else if let Some(s) = panic.downcast_ref::<String>() {
        format!("panicked: {s}")
    } else {
        "panicked".into()
    }
}

/// An in-memory trace sink whose contents can be read back.
#[derive(Debug, Clone, Default)]
pub struct MemorySink(Arc<Mutex<Vec<u8>>>);

impl MemorySink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contents(&self) -> String {
        String::from_utf8_lossy(&lock(&self.0)).into_owned()
    }

    pub fn lines(&self) -> Vec<String> {
        self.contents().lines().map(str::to_string).collect()
    }
}

impl Write for MemorySink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        lock(&self.0).extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}
