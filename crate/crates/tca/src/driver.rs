//! Runs coordinator logic from `tca_core::coord` over live channels and tools.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use tca_core::coord::{pingpong, simulator, Coordinator, Halt, Ports, Source};

use crate::{Channel, Error, Mux, MuxOutcome, MuxStopper, Process, Runtime, ToolHandle};

/// Program and leading arguments used to start one tool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolCommand {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl ToolCommand {
    pub fn new<I, S>(program: impl AsRef<Path>, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ToolCommand {
            program: program.as_ref().to_path_buf(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    /// Splits a command line on whitespace. No quoting is recognised.
    pub fn parse(line: &str) -> Option<Self> {
        let mut words = line.split_whitespace();
        let program = words.next()?;
        Some(ToolCommand::new(program, words))
    }
}

impl fmt::Display for ToolCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.program.display())?;
        for arg in &self.args {
            write!(f, " {arg}")?;
        }
        Ok(())
    }
}

/// The channels of one application, by key.
#[derive(Debug, Clone)]
pub struct Topology {
    channels: BTreeMap<&'static str, Channel>,
}

impl Topology {
    pub fn new(rt: &Runtime, keys: &[&'static str]) -> Self {
        Topology {
            channels: keys.iter().map(|&k| (k, Channel::new(rt, k))).collect(),
        }
    }

    pub fn get(&self, key: &str) -> Result<&Channel, Error> {
        self.channels
            .get(key)
            .ok_or_else(|| Error::UnknownChannel(key.to_string()))
    }
}

fn halt_of(error: Error) -> Halt {
    match error {
        Error::Shutdown => Halt::Shutdown,
        Error::ToolEof { .. } => Halt::ToolEof,
        other => Halt::Fault(other.to_string()),
    }
}

struct LivePorts<'a> {
    rt: &'a Runtime,
    topology: &'a Topology,
    tool_id: &'static str,
    tool: Option<ToolHandle>,
    stopper: MuxStopper,
}

impl LivePorts<'_> {
    fn tool(&self) -> Result<&ToolHandle, Halt> {
        self.tool
            .as_ref()
            .ok_or_else(|| Halt::Fault(format!("tool {} is not started yet", self.tool_id)))
    }
}

impl Ports for LivePorts<'_> {
    fn send(&mut self, key: &str, message: &str) -> Result<(), Halt> {
        let channel = self.topology.get(key).map_err(halt_of)?;
        channel.send(message).map_err(halt_of)
    }

    fn receive(&mut self, key: &str) -> Result<String, Halt> {
        let channel = self.topology.get(key).map_err(halt_of)?;
        channel.receive().map(|m| m.into_string()).map_err(halt_of)
    }

    fn tool_send(&mut self, message: &str) -> Result<(), Halt> {
        self.tool()?.send(message).map_err(halt_of)
    }

    fn tool_receive(&mut self) -> Result<String, Halt> {
        self.tool()?
            .receive()
            .map(|m| m.into_string())
            .map_err(halt_of)
    }

    fn kill_tool(&mut self) {
        if let Some(tool) = &self.tool {
            tool.kill();
        }
    }

    fn stop(&mut self) {
        self.stopper.stop();
    }

    fn shutdown(&mut self) -> Halt {
        self.rt.shutdown();
        Halt::Shutdown
    }

    fn ignored(&mut self, source: Source, line: &str) {
        if self.rt.debug() {
            eprintln!("tca: {}: ignoring `{line}` from {source}", self.tool_id);
        }
    }
}

fn error_of(process: &str, halt: Halt) -> Error {
    match halt {
        Halt::Shutdown => Error::Shutdown,
        Halt::ToolEof => Error::ToolEof {
            id: process.to_string(),
        },
        Halt::Fault(message) => Error::Process {
            process: process.to_string(),
            message,
        },
    }
}

/// Runs one coordinator to completion: prepares it, starts its tool with
/// `command` plus any arguments the coordinator asks for, then dispatches
/// its sources until it stops.
pub fn drive(
    rt: &Runtime,
    mut coordinator: Box<dyn Coordinator>,
    topology: &Topology,
    command: &ToolCommand,
) -> Result<(), Error> {
    let id = coordinator.tool_id();
    let stopper = MuxStopper::new();
    let mut ports = LivePorts {
        rt,
        topology,
        tool_id: id,
        tool: None,
        stopper: stopper.clone(),
    };
    let extra = coordinator
        .prepare(&mut ports)
        .map_err(|h| error_of(id, h))?;
    let tool = ToolHandle::new(
        rt,
        id,
        &command.program,
        command.args.iter().cloned().chain(extra),
    );
    tool.start()?;
    ports.tool = Some(tool.clone());
    coordinator
        .started(&mut ports)
        .map_err(|h| error_of(id, h))?;

    let sources = coordinator.sources();
    let state = RefCell::new((coordinator, ports));
    let mut mux = Mux::with_stopper(rt, stopper);
    for source in sources {
        let events = match source {
            Source::Tool => tool.receive_source(),
            Source::Channel(key) => topology.get(key)?.receive_source(),
        };
        let state = &state;
        mux.add(events, move |message| {
            let mut guard = state.borrow_mut();
            let (coordinator, ports) = &mut *guard;
            coordinator
                .handle(source, message.as_str(), ports)
                .map_err(|h| error_of(id, h))
        })?;
    }
    match mux.run()? {
        MuxOutcome::Stopped => Ok(()),
        MuxOutcome::Shutdown => Err(Error::Shutdown),
    }
}

/// Turns coordinators into runtime processes sharing one topology.
/// `command` supplies each tool's command by tool id.
pub fn processes(
    rt: &Runtime,
    keys: &[&'static str],
    coordinators: Vec<Box<dyn Coordinator>>,
    mut command: impl FnMut(&'static str) -> ToolCommand,
) -> Vec<Process> {
    let topology = Topology::new(rt, keys);
    coordinators
        .into_iter()
        .map(|c| {
            let id = c.tool_id();
            let cmd = command(id);
            let topology = topology.clone();
            Process::new(id, move |rt| drive(rt, c, &topology, &cmd))
        })
        .collect()
}

/// The two ping-pong processes. `command` is called with `comp1` and `comp2`.
pub fn pingpong_processes(rt: &Runtime, command: impl FnMut(&'static str) -> ToolCommand) -> Vec<Process> {
    processes(
        rt,
        &pingpong::CHANNELS,
        vec![Box::new(pingpong::Comp1::new()), Box::new(pingpong::Comp2::new())],
        command,
    )
}

/// The eight simulator processes, called by tool id for their commands.
pub fn simulator_processes(rt: &Runtime, command: impl FnMut(&'static str) -> ToolCommand) -> Vec<Process> {
    processes(rt, &simulator::CHANNELS, simulator::processes(), command)
}
