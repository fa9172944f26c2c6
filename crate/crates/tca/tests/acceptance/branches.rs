//! Table-driven branch tests for the eight simulator processes.
//!
//! Each row feeds one step (prepare, started, or a single line from one
//! source) to a fresh process, after optional setup steps, and compares the
//! complete list of outbound effects. Every branch of every process is
//! named in `BRANCHES`; the run fails unless each one is exercised by at
//! least one passing row.

use std::collections::BTreeSet;

use tca_core::coord::replay::{Effect, RecordingPorts};
use tca_core::coord::simulator::{ActionChooser, BreakCtrl, Display, Function, Gui, Kernel, Process, TraceCtrl};
use tca_core::coord::{Coordinator, Halt, Ports, Source};

const TOOL: Source = Source::Tool;

fn ch(key: &'static str) -> Source {
    Source::Channel(key)
}

const BRANCHES: &[&str] = &[
    "gui.windows",
    "gui.windows-arity",
    "gui.non-event",
    "gui.kg-quit",
    "gui.kg-other",
    "kernel.startup",
    "kernel.value-action-info",
    "kernel.value-process-list",
    "kernel.value-choose-list",
    "kernel.value-halt",
    "kernel.value-process-status",
    "kernel.value-quit",
    "kernel.value-unmatched",
    "kernel.pk-start",
    "kernel.pk-reset",
    "kernel.pk-unmatched",
    "kernel.ak-action",
    "kernel.ak-save",
    "kernel.ak-goto",
    "kernel.ak-unmatched",
    "kernel.fk-quit",
    "kernel.fk-process-status",
    "kernel.fk-unmatched",
    "process.window",
    "process.kp-process-list",
    "process.kp-quit",
    "process.kp-unmatched",
    "process.event-start",
    "process.event-reset",
    "process.event-unmatched",
    "tracectrl.window",
    "tracectrl.kt-action-info",
    "tracectrl.kt-quit",
    "tracectrl.at-action",
    "tracectrl.value-trace",
    "tracectrl.value-notrace",
    "tracectrl.unmatched",
    "breakctrl.window",
    "breakctrl.kb-action-info",
    "breakctrl.kb-quit",
    "breakctrl.ab-action",
    "breakctrl.ab-choose-list",
    "breakctrl.value-break",
    "breakctrl.value-other",
    "breakctrl.unmatched",
    "display.window",
    "display.kd-process-status",
    "display.kd-quit",
    "display.kd-do",
    "display.td-eval",
    "display.bd-break",
    "display.bd-unmatched",
    "actionchooser.window",
    "actionchooser.ka-list",
    "actionchooser.ka-list-random-nobreak",
    "actionchooser.ka-list-random-break",
    "actionchooser.ka-halt",
    "actionchooser.ka-reset",
    "actionchooser.ka-quit",
    "actionchooser.ka-unmatched",
    "actionchooser.event-random",
    "actionchooser.event-save-goto",
    "actionchooser.event-action",
    "actionchooser.event-action-random-break",
    "actionchooser.event-action-random-nobreak",
    "actionchooser.event-unmatched",
    "function.window",
    "function.event-quit",
    "function.event-process-status",
    "function.event-unmatched",
    "function.kf-quit",
    "function.kf-unmatched",
];

#[derive(Debug, Clone, Copy)]
enum Step {
    Prepare,
    Started,
    Line(Source, &'static str),
}

#[derive(Debug, PartialEq)]
enum Outcome {
    Done,
    Args(Vec<String>),
    Halted(Halt),
    Fault,
}

struct Row {
    branch: &'static str,
    make: fn() -> Box<dyn Coordinator>,
    setup: Vec<Step>,
    step: Step,
    channel_replies: Vec<(&'static str, &'static str)>,
    tool_replies: Vec<&'static str>,
    effects: Vec<Effect>,
    outcome: Outcome,
}

fn row(branch: &'static str, make: fn() -> Box<dyn Coordinator>, step: Step, effects: Vec<Effect>) -> Row {
    Row {
        branch,
        make,
        setup: Vec::new(),
        step,
        channel_replies: Vec::new(),
        tool_replies: Vec::new(),
        effects,
        outcome: Outcome::Done,
    }
}

impl Row {
    fn after(mut self, setup: &[Step]) -> Self {
        self.setup = setup.to_vec();
        self
    }

    fn reply(mut self, key: &'static str, line: &'static str) -> Self {
        self.channel_replies.push((key, line));
        self
    }

    fn tool_reply(mut self, line: &'static str) -> Self {
        self.tool_replies.push(line);
        self
    }

    fn outcome(mut self, outcome: Outcome) -> Self {
        self.outcome = outcome;
        self
    }
}

fn apply(c: &mut dyn Coordinator, step: Step, ports: &mut dyn Ports) -> Outcome {
    let result = match step {
        Step::Prepare => c.prepare(ports).map(Outcome::Args),
        Step::Started => c.started(ports).map(|()| Outcome::Done),
        Step::Line(source, line) => c.handle(source, line, ports).map(|()| Outcome::Done),
    };
    match result {
        Ok(o) => o,
        Err(Halt::Fault(_)) => Outcome::Fault,
        Err(h) => Outcome::Halted(h),
    }
}

fn check(row: &Row) -> Result<(), String> {
    let mut ports = RecordingPorts::new();
    for (key, line) in &row.channel_replies {
        ports.reply_on(key, line);
    }
    for line in &row.tool_replies {
        ports.tool_reply(line);
    }
    let mut c = (row.make)();
    for &s in &row.setup {
        let o = apply(c.as_mut(), s, &mut ports);
        if o != Outcome::Done {
            return Err(format!("setup step {s:?} ended with {o:?}"));
        }
    }
    ports.take_effects();
    let outcome = apply(c.as_mut(), row.step, &mut ports);
    if outcome != row.outcome {
        return Err(format!("outcome {outcome:?}, expected {:?}", row.outcome));
    }
    if ports.effects != row.effects {
        return Err(format!("effects {:?}, expected {:?}", ports.effects, row.effects));
    }
    if !ports.replies_drained() {
        return Err("scripted replies left unconsumed".into());
    }
    Ok(())
}

fn send(key: &str, m: &str) -> Effect {
    Effect::send(key, m)
}

fn tool(m: &str) -> Effect {
    Effect::tool(m)
}

fn ignored(source: Source, line: &str) -> Effect {
    Effect::Ignored(source, line.into())
}

fn window(key: &str) -> Effect {
    Effect::await_on(key)
}

fn gui() -> Box<dyn Coordinator> {
    Box::new(Gui::new())
}
fn kernel() -> Box<dyn Coordinator> {
    Box::new(Kernel::new())
}
fn process() -> Box<dyn Coordinator> {
    Box::new(Process::new())
}
fn tracectrl() -> Box<dyn Coordinator> {
    Box::new(TraceCtrl::new())
}
fn breakctrl() -> Box<dyn Coordinator> {
    Box::new(BreakCtrl::new())
}
fn display() -> Box<dyn Coordinator> {
    Box::new(Display::new())
}
fn chooser() -> Box<dyn Coordinator> {
    Box::new(ActionChooser::new())
}
fn function() -> Box<dyn Coordinator> {
    Box::new(Function::new())
}

fn quit() -> Vec<Effect> {
    vec![Effect::KillTool, Effect::Stop]
}

fn table() -> Vec<Row> {
    use Step::Line;
    let compute = || tool("snd-eval(compute-choose-list)");
    let random_on = Line(TOOL, "snd-event(random(on))");
    let acl = "action-choose-list(L)";
    let act = "action(info(1, 1, s, a))";
    vec![
        // gui
        row("gui.windows", gui, Line(TOOL, "snd-event(window(a, b, c, d, e, f))"), vec![
            tool("snd-ack-event(window(a, b, c, d, e, f))"),
            send("gf", "window(a)"),
            send("gp", "window(b)"),
            send("gt", "window(c)"),
            send("gb", "window(d)"),
            send("gd", "window(e)"),
            send("ga", "window(f)"),
        ]),
        row("gui.windows-arity", gui, Line(TOOL, "snd-event(window(a))"), vec![
            tool("snd-ack-event(window(a))"),
            ignored(TOOL, "snd-event(window(a))"),
        ]),
        row("gui.non-event", gui, Line(TOOL, "snd-value(x)"), vec![ignored(TOOL, "snd-value(x)")]),
        row("gui.kg-quit", gui, Line(ch("kg"), "quit"), quit()),
        row("gui.kg-other", gui, Line(ch("kg"), "reset"), vec![ignored(ch("kg"), "reset")]),
        // kernel
        row("kernel.startup", kernel, Step::Started, vec![tool("snd-eval(get-action-info)")]),
        row("kernel.value-action-info", kernel, Line(TOOL, "snd-value(action-info(X))"), vec![
            send("kt", "action-info(X)"),
            send("kb", "action-info(X)"),
            tool("snd-eval(get-process-list)"),
        ]),
        row("kernel.value-process-list", kernel, Line(TOOL, "snd-value(process-list(L))"), vec![
            send("kp", "process-list(L)"),
        ]),
        row("kernel.value-choose-list", kernel, Line(TOOL, "snd-value(action-choose-list(L))"), vec![
            send("ka", "action-choose-list(L)"),
        ]),
        row("kernel.value-halt", kernel, Line(TOOL, "snd-value(halt(T))"), vec![
            send("ka", "halt(T)"),
            send("kd", "halt(T)"),
        ]),
        row("kernel.value-process-status", kernel, Line(TOOL, "snd-value(process-status(S))"), vec![
            send("kd", "process-status(S)"),
        ]),
        row("kernel.value-quit", kernel, Line(TOOL, "snd-value(quit)"), vec![Effect::Shutdown])
            .outcome(Outcome::Halted(Halt::Shutdown)),
        row("kernel.value-unmatched", kernel, Line(TOOL, "snd-value(other)"), vec![ignored(TOOL, "snd-value(other)")]),
        row("kernel.value-unmatched", kernel, Line(TOOL, "snd-event(x)"), vec![ignored(TOOL, "snd-event(x)")]),
        row("kernel.pk-start", kernel, Line(ch("pk"), "start(2, P)"), vec![
            send("kd", "start(P)"),
            tool("snd-do(start(2, P))"),
            compute(),
        ]),
        row("kernel.pk-reset", kernel, Line(ch("pk"), "reset"), vec![
            tool("snd-do(myreset)"),
            send("kd", "reset"),
            send("ka", "reset"),
            compute(),
        ]),
        row("kernel.pk-unmatched", kernel, Line(ch("pk"), "bogus"), vec![ignored(ch("pk"), "bogus")]),
        row("kernel.ak-action", kernel, Line(ch("ak"), "action(info(1, 2, shown text, a))"), vec![
            tool("snd-do(action(1, 2, a))"),
            compute(),
        ]),
        row("kernel.ak-save", kernel, Line(ch("ak"), "save(3)"), vec![tool("snd-do(save(3))")]),
        row("kernel.ak-goto", kernel, Line(ch("ak"), "goto(3)"), vec![tool("snd-do(mygoto(3))"), compute()]),
        row("kernel.ak-unmatched", kernel, Line(ch("ak"), "random(on)"), vec![ignored(ch("ak"), "random(on)")]),
        row("kernel.fk-quit", kernel, Line(ch("fk"), "quit"), vec![tool("snd-eval(quit)")]),
        row("kernel.fk-process-status", kernel, Line(ch("fk"), "process-status"), vec![
            tool("snd-eval(process-status)"),
        ]),
        row("kernel.fk-unmatched", kernel, Line(ch("fk"), "other"), vec![ignored(ch("fk"), "other")]),
        // process
        row("process.window", process, Step::Prepare, vec![window("gp")])
            .reply("gp", "window(w2)")
            .outcome(Outcome::Args(vec!["w2".into()])),
        row("process.window", process, Step::Prepare, vec![window("gp")])
            .reply("gp", "quit")
            .outcome(Outcome::Fault),
        row("process.kp-process-list", process, Line(ch("kp"), "process-list(L)"), vec![
            tool("snd-do(process-list(L))"),
        ]),
        row("process.kp-quit", process, Line(ch("kp"), "quit"), quit()),
        row("process.kp-unmatched", process, Line(ch("kp"), "other"), vec![ignored(ch("kp"), "other")]),
        row("process.event-start", process, Line(TOOL, "snd-event(start(1, Main))"), vec![
            send("pk", "start(1, Main)"),
            tool("snd-ack-event(start(1, Main))"),
        ]),
        row("process.event-reset", process, Line(TOOL, "snd-event(reset)"), vec![
            send("pk", "reset"),
            tool("snd-ack-event(reset)"),
        ]),
        row("process.event-unmatched", process, Line(TOOL, "snd-event(other)"), vec![
            ignored(TOOL, "snd-event(other)"),
        ]),
        // tracectrl
        row("tracectrl.window", tracectrl, Step::Prepare, vec![window("gt")])
            .reply("gt", "window(w3)")
            .outcome(Outcome::Args(vec!["w3".into()])),
        row("tracectrl.kt-action-info", tracectrl, Line(ch("kt"), "action-info(X)"), vec![
            tool("snd-do(action-info(X))"),
        ]),
        row("tracectrl.kt-quit", tracectrl, Line(ch("kt"), "quit"), quit()),
        row("tracectrl.at-action", tracectrl, Line(ch("at"), "action(a1)"), vec![tool("snd-eval(action(a1))")]),
        row("tracectrl.value-trace", tracectrl, Line(TOOL, "snd-value(trace)"), vec![
            send("td", "trace(a1)"),
            send("ta", "done"),
        ])
        .after(&[Line(ch("at"), "action(a1)")]),
        row("tracectrl.value-notrace", tracectrl, Line(TOOL, "snd-value(notrace)"), vec![send("ta", "done")])
            .after(&[Line(ch("at"), "action(a1)")]),
        row("tracectrl.unmatched", tracectrl, Line(TOOL, "junk"), vec![ignored(TOOL, "junk")]),
        row("tracectrl.unmatched", tracectrl, Line(ch("kt"), "other"), vec![ignored(ch("kt"), "other")]),
        row("tracectrl.unmatched", tracectrl, Line(ch("at"), "other"), vec![ignored(ch("at"), "other")]),
        // breakctrl
        row("breakctrl.window", breakctrl, Step::Prepare, vec![window("gb")])
            .reply("gb", "window(w4)")
            .outcome(Outcome::Args(vec!["w4".into()])),
        row("breakctrl.kb-action-info", breakctrl, Line(ch("kb"), "action-info(X)"), vec![
            tool("snd-do(action-info(X))"),
        ]),
        row("breakctrl.kb-quit", breakctrl, Line(ch("kb"), "quit"), quit()),
        row("breakctrl.ab-action", breakctrl, Line(ch("ab"), "action(a2)"), vec![tool("snd-eval(action(a2))")]),
        row("breakctrl.ab-choose-list", breakctrl, Line(ch("ab"), acl), vec![
            tool("snd-eval(action-choose-list(L))"),
        ]),
        row("breakctrl.value-break", breakctrl, Line(TOOL, "snd-value(break)"), vec![
            send("bd", "break(a2)"),
            send("ba", "break"),
        ])
        .after(&[Line(ch("ab"), "action(a2)")]),
        row("breakctrl.value-other", breakctrl, Line(TOOL, "snd-value(nobreak)"), vec![send("ba", "nobreak")])
            .after(&[Line(ch("ab"), "action(a2)")]),
        row("breakctrl.unmatched", breakctrl, Line(ch("ab"), "other"), vec![ignored(ch("ab"), "other")]),
        row("breakctrl.unmatched", breakctrl, Line(TOOL, "junk"), vec![ignored(TOOL, "junk")]),
        // display
        row("display.window", display, Step::Prepare, vec![window("gd")])
            .reply("gd", "window(w5)")
            .outcome(Outcome::Args(vec!["w5".into()])),
        row("display.kd-process-status", display, Line(ch("kd"), "process-status(S)"), vec![
            tool("snd-eval(process-status(S))"),
            Effect::AwaitTool,
        ])
        .tool_reply("snd-value(done)"),
        row("display.kd-quit", display, Line(ch("kd"), "quit"), quit()),
        row("display.kd-do", display, Line(ch("kd"), "start(P)"), vec![tool("snd-do(start(P))")]),
        row("display.kd-do", display, Line(ch("kd"), "halt(T)"), vec![tool("snd-do(halt(T))")]),
        row("display.td-eval", display, Line(ch("td"), "trace(a1)"), vec![
            tool("snd-eval(trace(a1))"),
            Effect::AwaitTool,
        ])
        .tool_reply("snd-value(done)"),
        row("display.bd-break", display, Line(ch("bd"), "break(a2)"), vec![tool("snd-do(break-action(a2))")]),
        row("display.bd-unmatched", display, Line(ch("bd"), "break"), vec![ignored(ch("bd"), "break")]),
        // actionchooser
        row("actionchooser.window", chooser, Step::Prepare, vec![window("ga")])
            .reply("ga", "window(w6)")
            .outcome(Outcome::Args(vec!["w6".into()])),
        row("actionchooser.ka-list", chooser, Line(ch("ka"), acl), vec![tool("snd-do(action-choose-list(L))")]),
        row("actionchooser.ka-list-random-nobreak", chooser, Line(ch("ka"), acl), vec![
            send("ab", acl),
            Effect::await_on("ba"),
            tool("snd-do(action-choose-list(L))"),
        ])
        .after(&[random_on])
        .reply("ba", "nobreak"),
        row("actionchooser.ka-list-random-break", chooser, Line(ch("ka"), acl), vec![
            send("ab", acl),
            Effect::await_on("ba"),
            tool("snd-do(random-off)"),
            tool("snd-do(action-choose-list(L))"),
        ])
        .after(&[random_on])
        .reply("ba", "break"),
        // the break above switched random mode off
        row("actionchooser.ka-list-random-break", chooser, Line(ch("ka"), acl), vec![
            tool("snd-do(action-choose-list(L))"),
        ])
        .after(&[random_on, Line(ch("ka"), acl)])
        .reply("ba", "break"),
        row("actionchooser.ka-halt", chooser, Line(ch("ka"), "halt"), vec![
            tool("snd-do(random-off)"),
            tool("snd-do(halt)"),
        ]),
        row("actionchooser.ka-halt", chooser, Line(ch("ka"), "halt(T)"), vec![
            tool("snd-do(random-off)"),
            tool("snd-do(halt)"),
        ]),
        // halt switches random mode off too
        row("actionchooser.ka-halt", chooser, Line(ch("ka"), acl), vec![tool("snd-do(action-choose-list(L))")])
            .after(&[random_on, Line(ch("ka"), "halt")]),
        row("actionchooser.ka-reset", chooser, Line(ch("ka"), "reset"), vec![tool("snd-do(reset)")]),
        row("actionchooser.ka-quit", chooser, Line(ch("ka"), "quit"), quit()),
        row("actionchooser.ka-unmatched", chooser, Line(ch("ka"), "other"), vec![ignored(ch("ka"), "other")]),
        row("actionchooser.event-random", chooser, random_on, vec![tool("snd-ack-event(random(on))")]),
        row("actionchooser.event-random", chooser, Line(TOOL, "snd-event(random(off))"), vec![
            tool("snd-ack-event(random(off))"),
        ]),
        row("actionchooser.event-random", chooser, Line(ch("ka"), acl), vec![tool("snd-do(action-choose-list(L))")])
            .after(&[random_on, Line(TOOL, "snd-event(random(off))")]),
        row("actionchooser.event-save-goto", chooser, Line(TOOL, "snd-event(save(1))"), vec![
            tool("snd-ack-event(save(1))"),
            send("ak", "save(1)"),
        ]),
        row("actionchooser.event-save-goto", chooser, Line(TOOL, "snd-event(goto(2))"), vec![
            tool("snd-ack-event(goto(2))"),
            send("ak", "goto(2)"),
        ]),
        row("actionchooser.event-action", chooser, Line(TOOL, "snd-event(action(info(1, 1, s, a)))"), vec![
            tool("snd-ack-event(action(info(1, 1, s, a)))"),
            send("ak", act),
            send("at", act),
            Effect::await_on("ta"),
        ])
        .reply("ta", "done"),
        row("actionchooser.event-action-random-break", chooser, Line(TOOL, "snd-event(action(info(1, 1, s, a)))"), vec![
            tool("snd-ack-event(action(info(1, 1, s, a)))"),
            send("ak", act),
            send("ab", act),
            Effect::await_on("ba"),
            tool("snd-do(random-off)"),
        ])
        .after(&[random_on])
        .reply("ba", "break"),
        row("actionchooser.event-action-random-nobreak", chooser, Line(TOOL, "snd-event(action(info(1, 1, s, a)))"), vec![
            tool("snd-ack-event(action(info(1, 1, s, a)))"),
            send("ak", act),
            send("ab", act),
            Effect::await_on("ba"),
            send("at", act),
            Effect::await_on("ta"),
        ])
        .after(&[random_on])
        .reply("ba", "nobreak")
        .reply("ta", "done"),
        row("actionchooser.event-unmatched", chooser, Line(TOOL, "snd-event(other)"), vec![
            ignored(TOOL, "snd-event(other)"),
        ]),
        row("actionchooser.event-unmatched", chooser, Line(TOOL, "junk"), vec![ignored(TOOL, "junk")]),
        // function
        row("function.window", function, Step::Prepare, vec![window("gf")])
            .reply("gf", "window(w1)")
            .outcome(Outcome::Args(vec!["w1".into()])),
        row("function.event-quit", function, Line(TOOL, "snd-event(quit)"), vec![send("fk", "quit")]),
        row("function.event-process-status", function, Line(TOOL, "snd-event(process-status)"), vec![
            send("fk", "process-status"),
        ]),
        row("function.event-unmatched", function, Line(TOOL, "snd-event(other)"), vec![
            ignored(TOOL, "snd-event(other)"),
        ]),
        row("function.kf-quit", function, Line(ch("kf"), "quit"), quit()),
        row("function.kf-unmatched", function, Line(ch("kf"), "other"), vec![ignored(ch("kf"), "other")]),
    ]
}

pub fn run_table() -> Result<String, String> {
    let rows = table();
    let mut failures = Vec::new();
    let mut covered = BTreeSet::new();
    for r in &rows {
        if !BRANCHES.contains(&r.branch) {
            failures.push(format!("{}: not a declared branch", r.branch));
            continue;
        }
        match check(r) {
            Ok(()) => {
                covered.insert(r.branch);
            }
            Err(e) => failures.push(format!("{} ({:?}): {e}", r.branch, r.step)),
        }
    }
    let missing: Vec<&str> = BRANCHES.iter().copied().filter(|b| !covered.contains(b)).collect();
    println!("branch coverage: {}/{} branches, {} rows", covered.len(), BRANCHES.len(), rows.len());
    for b in BRANCHES {
        println!("  {} {b}", if covered.contains(b) { "covered" } else { "MISSING" });
    }
    if !failures.is_empty() || !missing.is_empty() {
        return Err(format!("failures: {failures:#?}; uncovered: {missing:?}"));
    }
    Ok(format!("{}/{} branches covered by {} rows", covered.len(), BRANCHES.len(), rows.len()))
}
