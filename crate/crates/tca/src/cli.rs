//! The `tca` command line.

use std::collections::BTreeMap;
use std::env;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use tca_core::coord::simulator;

use crate::driver::{pingpong_processes, simulator_processes, ToolCommand};
use crate::stub::{self, StubArgs};
use crate::{Process, RunOutcome, Runtime};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
/// A process failed and the run was aborted.
pub const EXIT_ABORTED: i32 = 3;

/// Environment variable naming the tool directory.
pub const TOOL_PATH_VAR: &str = "TCA_TOOLPATH";
const DEFAULT_TOOL_PATH: &str = "scenarios";

#[derive(Debug, Parser)]
#[command(name = "tca", version, about = "Coordinate line-protocol tools over rendezvous channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the two-tool ping-pong application.
    RunPingpong(RunArgs),
    /// Run the eight-tool simulator application.
    RunSimulator(RunArgs),
    /// Act as a stub tool playing a scenario on stdin/stdout.
    Stub(StubArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Write trace lines for every send, tool exchange and kill.
    #[arg(long)]
    pub debug: bool,
    /// Write trace lines to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub trace_out: Option<PathBuf>,
    /// Tool directory [env: TCA_TOOLPATH] [default: scenarios]
    #[arg(long, value_name = "DIR")]
    pub tool_path: Option<PathBuf>,
    /// Directory of stub scenarios, one `<tool>.tca` per tool
    /// [default: <tool-path>/pingpong or <tool-path>/simulator]
    #[arg(long, value_name = "DIR")]
    pub scenario_dir: Option<PathBuf>,
    /// Run a real tool instead of a stub, e.g. --tool 'gui=wish gui.tcl'.
    /// The command is split on whitespace.
    #[arg(long = "tool", value_name = "NAME=COMMAND", value_parser = parse_override)]
    pub tools: Vec<(String, ToolCommand)>,
}

fn parse_override(s: &str) -> Result<(String, ToolCommand), String> {
    let (name, command) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=COMMAND, got `{s}`"))?;
    let name = name.trim();
    if name.is_empty() {
        return Err("tool name is empty".into());
    }
    let command = ToolCommand::parse(command).ok_or_else(|| format!("no command given for `{name}`"))?;
    Ok((name.to_string(), command))
}

#[derive(Debug, Clone, Copy)]
enum Case {
    Pingpong,
    Simulator,
}

impl Case {
    fn dir(self) -> &'static str {
        match self {
            Case::Pingpong => "pingpong",
            Case::Simulator => "simulator",
        }
    }

    /// User-facing tool names, used for scenario files and overrides.
    fn tools(self) -> &'static [&'static str] {
        match self {
            Case::Pingpong => &["tool1", "tool2"],
            Case::Simulator => &simulator::TOOLS,
        }
    }

    fn tool_name(self, id: &str) -> &str {
        match (self, id) {
            (Case::Pingpong, "comp1") => "tool1",
            (Case::Pingpong, "comp2") => "tool2",
            _ => id,
        }
    }

    fn processes(self, rt: &Runtime, command: impl FnMut(&'static str) -> ToolCommand) -> Vec<Process> {
        match self {
            Case::Pingpong => pingpong_processes(rt, command),
            Case::Simulator => simulator_processes(rt, command),
        }
    }
}

/// The command that runs `exe` as a stub playing `scenario`.
pub fn stub_command(exe: &Path, scenario: &Path) -> ToolCommand {
    ToolCommand::new(
        exe,
        ["stub".to_string(), "--scenario".into(), scenario.display().to_string()],
    )
}

fn run_case(args: &RunArgs, case: Case) -> i32 {
    let tool_path = args
        .tool_path
        .clone()
        .or_else(|| env::var_os(TOOL_PATH_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_TOOL_PATH));
    let scenario_dir = args
        .scenario_dir
        .clone()
        .unwrap_or_else(|| tool_path.join(case.dir()));

    let mut overrides = BTreeMap::new();
    for (name, command) in &args.tools {
        if !case.tools().contains(&name.as_str()) {
            eprintln!(
                "tca: unknown tool `{name}`; expected one of: {}",
                case.tools().join(", ")
            );
            return EXIT_USAGE;
        }
        overrides.insert(name.clone(), command.clone());
    }
    let exe = match env::current_exe() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("tca: cannot locate own executable for stub tools: {e}");
            return EXIT_USAGE;
        }
    };

    let sink: Box<dyn Write + Send> = match &args.trace_out {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(f),
            Err(e) => {
                eprintln!("tca: cannot open trace file {}: {e}", path.display());
                return EXIT_USAGE;
            }
        },
        None => Box::new(io::stdout()),
    };
    let rt = Runtime::with_trace(sink);
    rt.set_debug(args.debug);
    let processes = case.processes(&rt, |id| {
        let name = case.tool_name(id);
        overrides
            .get(name)
            .cloned()
            .unwrap_or_else(|| stub_command(&exe, &scenario_dir.join(format!("{name}.tca"))))
    });
    match rt.run(processes) {
        Ok(RunOutcome::Completed) => {
            rt.shutdown();
            eprintln!("tca: all processes finished");
            EXIT_OK
        }
        Ok(RunOutcome::Shutdown) => {
            eprintln!("tca: shut down");
            EXIT_OK
        }
        Ok(RunOutcome::Aborted(failures)) => {
            eprintln!("tca: aborted after {} failure(s)", failures.len());
            EXIT_ABORTED
        }
        Err(e) => {
            eprintln!("tca: {e}");
            EXIT_USAGE
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match &cli.command {
        Command::RunPingpong(args) => run_case(args, Case::Pingpong),
        Command::RunSimulator(args) => run_case(args, Case::Simulator),
        Command::Stub(args) => stub::main(args),
    }
}
