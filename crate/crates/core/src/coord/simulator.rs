//! Coordination topology of the PSF simulator.
//!
//! Eight processes, each owning one tool, wired together by 24 rendezvous
//! channels named by two-letter keys: the first letter is the sending
//! process, the second the receiver (`g`ui, `k`ernel, `p`rocess,
//! `t`racectrl, `b`reakctrl, `d`isplay, `a`ctionchooser, `f`unction).
//!
//! The gui tool opens six windows and reports their ids; every other tool
//! except the kernel is started with its window id as an argument. The
//! kernel drives the simulation through eval/value round trips, and the
//! action chooser runs the per-step choose/trace/break protocol.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{snd_ack_event, snd_do, snd_eval, Coordinator, Halt, Ports, Source};
use crate::pattern::{PatternTable, REC_EVENT, REC_VALUE};

/// Every channel of the topology. `ad` has no user.
pub const CHANNELS: [&str; 24] = [
    "gf", "gp", "gt", "gb", "gd", "ga", "kf", "kt", "kb", "kp", "ka", "kd", "kg", "ta", "td", "ba",
    "bd", "at", "ab", "ad", "ak", "pk", "dk", "fk",
];

/// Tool ids in the order the processes are launched.
pub const TOOLS: [&str; 8] = [
    "gui",
    "kernel",
    "tracectrl",
    "breakctrl",
    "process",
    "display",
    "actionchooser",
    "function",
];

const WINDOWS: &str = r"^window\((.*),\s*(.*),\s*(.*),\s*(.*),\s*(.*),\s*(.*)\)$";
const WINDOW: &str = r"^window\((.*)\)$";
const START: &str = r"^start\((.*),\s*(.*)\)$";
const ACTION: &str = r"^action\(info\((.*),\s*(.*),\s*(.*),\s*(.*)\)\)$";
const ACTION_SINGLE: &str = r"^action\((.*)\)$";
const BREAK: &str = r"^break\((.*)\)$";
const RANDOM: &str = r"^random\((.*)\)$";

/// The built-ins plus the simulator's application patterns.
pub fn patterns() -> PatternTable {
    let mut table = PatternTable::new();
    for (name, pattern) in [
        ("windows", WINDOWS),
        ("window", WINDOW),
        ("start", START),
        ("action", ACTION),
        ("action-single", ACTION_SINGLE),
        ("break", BREAK),
        ("random", RANDOM),
    ] {
        table.define(name, pattern).expect("simulator pattern is valid");
    }
    table
}

/// All eight processes in launch order.
pub fn processes() -> Vec<Box<dyn Coordinator>> {
    vec![
        Box::new(Gui::new()),
        Box::new(Kernel::new()),
        Box::new(TraceCtrl::new()),
        Box::new(BreakCtrl::new()),
        Box::new(Process::new()),
        Box::new(Display::new()),
        Box::new(ActionChooser::new()),
        Box::new(Function::new()),
    ]
}

fn extract(table: &PatternTable, name: &str, line: &str) -> Option<Vec<String>> {
    table.extract(name, line).expect("pattern is registered")
}

fn extract_one(table: &PatternTable, name: &str, line: &str) -> Option<String> {
    table.extract_one(name, line).expect("pattern is registered")
}

/// Blocks for the `window(<id>)` message that precedes a tool start.
fn receive_window(table: &PatternTable, key: &str, ports: &mut dyn Ports) -> Result<Vec<String>, Halt> {
    let line = ports.receive(key)?;
    match extract_one(table, "window", &line) {
        Some(id) => Ok(vec![id]),
        None => Err(Halt::Fault(format!(
            "expected window(<id>) on channel {key}, got `{line}`"
        ))),
    }
}

/// Kill the tool and leave the event loop.
fn quit(ports: &mut dyn Ports) -> Result<(), Halt> {
    ports.kill_tool();
    ports.stop();
    Ok(())
}

fn ignore(ports: &mut dyn Ports, source: Source, line: &str) -> Result<(), Halt> {
    ports.ignored(source, line);
    Ok(())
}

fn compute_choose_list(ports: &mut dyn Ports) -> Result<(), Halt> {
    ports.tool_send(&snd_eval("compute-choose-list"))
}

pub struct Gui {
    patterns: PatternTable,
}

impl Gui {
    pub fn new() -> Self {
        Gui { patterns: patterns() }
    }
}

impl Default for Gui {
    fn default() -> Self {
        Self::new()
    }
}

impl Coordinator for Gui {
    fn tool_id(&self) -> &'static str {
        "gui"
    }

    fn sources(&self) -> Vec<Source> {
        vec![Source::Tool, Source::Channel("kg")]
    }

    fn handle(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        match source {
            Source::Tool => {
                let Some(event) = extract_one(&self.patterns, REC_EVENT, line) else {
                    return ignore(ports, source, line);
                };
                ports.tool_send(&snd_ack_event(&event))?;
                let Some(ids) = extract(&self.patterns, "windows", &event) else {
                    return ignore(ports, source, line);
                };
                for (key, id) in ["gf", "gp", "gt", "gb", "gd", "ga"].iter().zip(&ids) {
                    ports.send(key, &format!("window({id})"))?;
                }
                Ok(())
            }
            _ if line == "quit" => quit(ports),
            _ => ignore(ports, source, line),
        }
    }
}

pub struct Kernel {
    patterns: PatternTable,
}

impl Kernel {
    pub fn new() -> Self {
        Kernel { patterns: patterns() }
    }

    fn on_value(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        let Some(value) = extract_one(&self.patterns, REC_VALUE, line) else {
            return ignore(ports, source, line);
        };
        if value.starts_with("action-info") {
            ports.send("kt", &value)?;
            ports.send("kb", &value)?;
            ports.tool_send(&snd_eval("get-process-list"))
        } else if value.starts_with("process-list") {
            ports.send("kp", &value)
        } else if value.starts_with("action-choose-list") {
            ports.send("ka", &value)
        } else if value.starts_with("halt") {
            ports.send("ka", &value)?;
            ports.send("kd", &value)
        } else if value.starts_with("process-status") {
            ports.send("kd", &value)
        } else if value.starts_with("quit") {
            Err(ports.shutdown())
        } else {
            ignore(ports, source, line)
        }
    }

    fn on_process(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        if let Some(start) = extract(&self.patterns, "start", line) {
            ports.send("kd", &format!("start({})", start[1]))?;
            ports.tool_send(&snd_do(line))?;
            compute_choose_list(ports)
        } else if line == "reset" {
            ports.tool_send(&snd_do("myreset"))?;
            ports.send("kd", "reset")?;
            ports.send("ka", "reset")?;
            compute_choose_list(ports)
        } else {
            ignore(ports, source, line)
        }
    }

    fn on_chooser(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        if let Some(info) = extract(&self.patterns, "action", line) {
            // the action's display text (third field) is not passed on
            ports.tool_send(&snd_do(&format!("action({}, {}, {})", info[0], info[1], info[3])))?;
            compute_choose_list(ports)
        } else if line.starts_with("save") {
            ports.tool_send(&snd_do(line))
        } else if line.starts_with("goto") {
            ports.tool_send(&snd_do(&format!("my{line}")))?;
            compute_choose_list(ports)
        } else {
            ignore(ports, source, line)
        }
    }
}

impl Default for Kernel {
    fn default() -> Self {
        Self::new()
    }
}

impl Coordinator for Kernel {
    fn tool_id(&self) -> &'static str {
        "kernel"
    }

    fn started(&mut self, ports: &mut dyn Ports) -> Result<(), Halt> {
        ports.tool_send(&snd_eval("get-action-info"))
    }

    fn sources(&self) -> Vec<Source> {
        vec![
            Source::Tool,
            Source::Channel("pk"),
            Source::Channel("ak"),
            Source::Channel("fk"),
        ]
    }

    fn handle(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        match source {
            Source::Tool => self.on_value(source, line, ports),
            Source::Channel("pk") => self.on_process(source, line, ports),
            Source::Channel("ak") => self.on_chooser(source, line, ports),
            Source::Channel(_) if line == "quit" || line == "process-status" => {
                ports.tool_send(&snd_eval(line))
            }
            Source::Channel(_) => ignore(ports, source, line),
        }
    }
}

/// The process-start window.
pub struct Process {
    patterns: PatternTable,
}

impl Process {
    pub fn new() -> Self {
        Process { patterns: patterns() }
    }
}

impl Default for Process {
    fn default() -> Self {
        Self::new()
    }
}

impl Coordinator for Process {
    fn tool_id(&self) -> &'static str {
        "process"
    }

    fn prepare(&mut self, ports: &mut dyn Ports) -> Result<Vec<String>, Halt> {
        receive_window(&self.patterns, "gp", ports)
    }

    fn sources(&self) -> Vec<Source> {
        vec![Source::Channel("kp"), Source::Tool]
    }

    fn handle(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        match source {
            Source::Tool => match extract_one(&self.patterns, REC_EVENT, line) {
                Some(event) if event.starts_with("start") || event == "reset" => {
                    ports.send("pk", &event)?;
                    ports.tool_send(&snd_ack_event(&event))
                }
                _ => ignore(ports, source, line),
            },
            _ if line.starts_with("process-list") => ports.tool_send(&snd_do(line)),
            _ if line == "quit" => quit(ports),
            _ => ignore(ports, source, line),
        }
    }
}

pub struct TraceCtrl {
    patterns: PatternTable,
    action: String,
}

impl TraceCtrl {
    pub fn new() -> Self {
        TraceCtrl {
            patterns: patterns(),
            action: String::new(),
        }
    }
}

impl Default for TraceCtrl {
    fn default() -> Self {
        Self::new()
    }
}

impl Coordinator for TraceCtrl {
    fn tool_id(&self) -> &'static str {
        "tracectrl"
    }

    fn prepare(&mut self, ports: &mut dyn Ports) -> Result<Vec<String>, Halt> {
        receive_window(&self.patterns, "gt", ports)
    }

    fn sources(&self) -> Vec<Source> {
        vec![Source::Channel("kt"), Source::Channel("at"), Source::Tool]
    }

    fn handle(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        match source {
            Source::Channel("kt") if line.starts_with("action-info") => ports.tool_send(&snd_do(line)),
            Source::Channel("kt") if line == "quit" => quit(ports),
            Source::Channel("at") => match extract_one(&self.patterns, "action-single", line) {
                Some(action) => {
                    self.action = action;
                    ports.tool_send(&snd_eval(line))
                }
                None => ignore(ports, source, line),
            },
            Source::Tool => match extract_one(&self.patterns, REC_VALUE, line) {
                Some(value) => {
                    if value == "trace" {
                        ports.send("td", &format!("trace({})", self.action))?;
                    }
                    ports.send("ta", "done")
                }
                None => ignore(ports, source, line),
            },
            _ => ignore(ports, source, line),
        }
    }
}

pub struct BreakCtrl {
    patterns: PatternTable,
    action: String,
}

impl BreakCtrl {
    pub fn new() -> Self {
        BreakCtrl {
            patterns: patterns(),
            action: String::new(),
        }
    }
}

impl Default for BreakCtrl {
    fn default() -> Self {
        Self::new()
    }
}

impl Coordinator for BreakCtrl {
    fn tool_id(&self) -> &'static str {
        "breakctrl"
    }

    fn prepare(&mut self, ports: &mut dyn Ports) -> Result<Vec<String>, Halt> {
        receive_window(&self.patterns, "gb", ports)
    }

    fn sources(&self) -> Vec<Source> {
        vec![Source::Channel("kb"), Source::Channel("ab"), Source::Tool]
    }

    fn handle(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        match source {
            Source::Channel("kb") if line.starts_with("action-info") => ports.tool_send(&snd_do(line)),
            Source::Channel("kb") if line == "quit" => quit(ports),
            Source::Channel("ab") => {
                if let Some(action) = extract_one(&self.patterns, "action-single", line) {
                    self.action = action;
                    ports.tool_send(&snd_eval(line))
                } else if line.starts_with("action-choose-list") {
                    ports.tool_send(&snd_eval(line))
                } else {
                    ignore(ports, source, line)
                }
            }
            Source::Tool => match extract_one(&self.patterns, REC_VALUE, line) {
                Some(value) if value == "break" => {
                    ports.send("bd", &format!("break({})", self.action))?;
                    ports.send("ba", "break")
                }
                Some(_) => ports.send("ba", "nobreak"),
                None => ignore(ports, source, line),
            },
            _ => ignore(ports, source, line),
        }
    }
}

pub struct Display {
    patterns: PatternTable,
}

impl Display {
    pub fn new() -> Self {
        Display { patterns: patterns() }
    }
}

impl Default for Display {
    fn default() -> Self {
        Self::new()
    }
}

impl Coordinator for Display {
    fn tool_id(&self) -> &'static str {
        "display"
    }

    fn prepare(&mut self, ports: &mut dyn Ports) -> Result<Vec<String>, Halt> {
        receive_window(&self.patterns, "gd", ports)
    }

    fn sources(&self) -> Vec<Source> {
        vec![Source::Channel("kd"), Source::Channel("td"), Source::Channel("bd")]
    }

    fn handle(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        match source {
            Source::Channel("kd") if line.starts_with("process-status") => {
                ports.tool_send(&snd_eval(line))?;
                ports.tool_receive().map(drop)
            }
            Source::Channel("kd") if line == "quit" => quit(ports),
            Source::Channel("kd") => ports.tool_send(&snd_do(line)),
            Source::Channel("td") => {
                ports.tool_send(&snd_eval(line))?;
                ports.tool_receive().map(drop)
            }
            Source::Channel("bd") => match extract_one(&self.patterns, "break", line) {
                Some(action) => ports.tool_send(&snd_do(&format!("break-action({action})"))),
                None => ignore(ports, source, line),
            },
            _ => ignore(ports, source, line),
        }
    }
}

pub struct ActionChooser {
    patterns: PatternTable,
    random: bool,
    choose_list: String,
}

impl ActionChooser {
    pub fn new() -> Self {
        ActionChooser {
            patterns: patterns(),
            random: false,
            choose_list: String::new(),
        }
    }

    pub fn random(&self) -> bool {
        self.random
    }

    /// Asks breakctrl whether to break; switches random mode off if so.
    /// Returns breakctrl's answer.
    fn consult_breakctrl(&mut self, term: &str, ports: &mut dyn Ports) -> Result<String, Halt> {
        ports.send("ab", term)?;
        let answer = ports.receive("ba")?;
        if answer == "break" {
            self.random = false;
            ports.tool_send(&snd_do("random-off"))?;
        }
        Ok(answer)
    }

    fn trace(&mut self, action: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        ports.send("at", action)?;
        ports.receive("ta").map(drop)
    }

    fn on_kernel(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        if line.starts_with("action-choose-list") {
            self.choose_list = line.into();
            if self.random {
                self.consult_breakctrl(line, ports)?;
            }
            ports.tool_send(&snd_do(&self.choose_list))
        } else if line == "halt" || line.starts_with("halt(") {
            ports.tool_send(&snd_do("random-off"))?;
            self.random = false;
            ports.tool_send(&snd_do("halt"))
        } else if line == "reset" {
            ports.tool_send(&snd_do("reset"))
        } else if line == "quit" {
            quit(ports)
        } else {
            ignore(ports, source, line)
        }
    }

    fn on_event(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        let Some(event) = extract_one(&self.patterns, REC_EVENT, line) else {
            return ignore(ports, source, line);
        };
        if let Some(mode) = extract_one(&self.patterns, "random", &event) {
            ports.tool_send(&snd_ack_event(&event))?;
            self.random = mode == "on";
            Ok(())
        } else if event.starts_with("save") || event.starts_with("goto") {
            ports.tool_send(&snd_ack_event(&event))?;
            ports.send("ak", &event)
        } else if event.starts_with("action") {
            ports.tool_send(&snd_ack_event(&event))?;
            ports.send("ak", &event)?;
            if self.random {
                if self.consult_breakctrl(&event, ports)? == "nobreak" {
                    self.trace(&event, ports)?;
                }
                Ok(())
            } else {
                self.trace(&event, ports)
            }
        } else {
            ignore(ports, source, line)
        }
    }
}

impl Default for ActionChooser {
    fn default() -> Self {
        Self::new()
    }
}

impl Coordinator for ActionChooser {
    fn tool_id(&self) -> &'static str {
        "actionchooser"
    }

    fn prepare(&mut self, ports: &mut dyn Ports) -> Result<Vec<String>, Halt> {
        receive_window(&self.patterns, "ga", ports)
    }

    fn sources(&self) -> Vec<Source> {
        vec![Source::Channel("ka"), Source::Tool]
    }

    fn handle(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        match source {
            Source::Tool => self.on_event(source, line, ports),
            Source::Channel(_) => self.on_kernel(source, line, ports),
        }
    }
}

/// The function menu: quit and process-status requests.
pub struct Function {
    patterns: PatternTable,
}

impl Function {
    pub fn new() -> Self {
        Function { patterns: patterns() }
    }
}

impl Default for Function {
    fn default() -> Self {
        Self::new()
    }
}

impl Coordinator for Function {
    fn tool_id(&self) -> &'static str {
        "function"
    }

    fn prepare(&mut self, ports: &mut dyn Ports) -> Result<Vec<String>, Halt> {
        receive_window(&self.patterns, "gf", ports)
    }

    fn sources(&self) -> Vec<Source> {
        vec![Source::Tool, Source::Channel("kf")]
    }

    fn handle(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        match source {
            Source::Tool => match extract_one(&self.patterns, REC_EVENT, line) {
                Some(event) if event == "quit" || event == "process-status" => ports.send("fk", &event),
                _ => ignore(ports, source, line),
            },
            _ if line == "quit" => quit(ports),
            _ => ignore(ports, source, line),
        }
    }
}
