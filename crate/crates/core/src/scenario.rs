//! Stub-tool scenarios.
//!
//! A scenario scripts what a stand-in tool writes in reply to what it
//! reads. The format is line oriented:
//!
//! ```text
//! # tool1 of the ping-pong example
//! mode script
//! start send snd-event(message)
//! on ^snd-ack-event\(message\)$ send snd-event(quit)
//! on ^quit$ exit
//! ```
//!
//! `start` rules fire once when the stub starts; `on <pattern>` rules fire
//! on an input line matching the anchored pattern. A rule carries zero or
//! more actions: `send <line>` (repeatable, also on indented continuation
//! lines) and `exit`. Send lines may use `$0`..`$9` for the rule's captures
//! and `$ARG1`, `$ARG2`, ... for the stub's trailing command-line
//! arguments; patterns may use `$ARGn` too, substituted literally.
//!
//! In `script` mode rules are consumed strictly in order and any input
//! line that does not match the next rule is a conformance violation. In
//! `reactive` mode each input line fires the first matching rule and
//! unmatched lines are ignored.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use regex::Regex;

use crate::pattern::{captures, compile_anchored, is_anchored};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Script,
    Reactive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Trigger {
    Start,
    On(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Send(String),
    Exit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub trigger: Trigger,
    pub actions: Vec<Action>,
    /// 1-based source line of the rule's trigger.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StubScenario {
    pub mode: Mode,
    pub rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ScenarioError {
    pub line: usize,
    pub kind: ScenarioErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioErrorKind {
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
    #[error("mode must be declared once, before any rule")]
    MisplacedMode,
    #[error("`send` needs a non-empty line")]
    EmptySend,
    #[error("pattern `{0}` is not anchored with `^` and `$`")]
    Unanchored(String),
    #[error("invalid pattern `{0}`: {1}")]
    InvalidPattern(String, String),
    #[error("`start` rules must come before `on` rules in script mode")]
    LateStart,
    #[error("`start` needs at least one action")]
    EmptyStart,
    #[error("action with no rule to attach to")]
    OrphanAction,
    #[error("action after `exit`")]
    ActionAfterExit,
    #[error("`{0}` is not an action; expected `send <line>` or `exit`")]
    BadAction(String),
    #[error("scenario uses $ARG{0} but the stub got {1} argument(s)")]
    MissingArgument(usize, usize),
    #[error("stub argument {0:?} contains a line break")]
    ArgumentLineBreak(String),
}

fn err(line: usize, kind: ScenarioErrorKind) -> ScenarioError {
    ScenarioError { line, kind }
}

impl StubScenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut scenario = StubScenario::default();
        let mut mode_seen = false;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, rest) = split_word(line);
            match word {
                "mode" => {
                    if mode_seen || !scenario.rules.is_empty() {
                        return Err(err(lineno, ScenarioErrorKind::MisplacedMode));
                    }
                    scenario.mode = match rest {
                        "script" => Mode::Script,
                        "reactive" => Mode::Reactive,
                        other => {
                            return Err(err(lineno, ScenarioErrorKind::UnknownMode(other.to_owned())))
                        }
                    };
                    mode_seen = true;
                }
                "start" => {
                    let actions = parse_inline_actions(rest, lineno)?;
                    if actions.is_empty() {
                        return Err(err(lineno, ScenarioErrorKind::EmptyStart));
                    }
                    scenario.rules.push(Rule {
                        trigger: Trigger::Start,
                        actions,
                        line: lineno,
                    });
                }
                "on" => {
                    let (pattern, tail) = split_pattern(rest);
                    if !is_anchored(pattern) {
                        return Err(err(lineno, ScenarioErrorKind::Unanchored(pattern.to_owned())));
                    }
                    let actions = parse_inline_actions(tail, lineno)?;
                    scenario.rules.push(Rule {
                        trigger: Trigger::On(pattern.to_owned()),
                        actions,
                        line: lineno,
                    });
                }
                "send" | "exit" => {
                    let action = parse_action(line, lineno)?;
                    let rule = scenario
                        .rules
                        .last_mut()
                        .ok_or_else(|| err(lineno, ScenarioErrorKind::OrphanAction))?;
                    if rule.actions.last() == Some(&Action::Exit) {
                        return Err(err(lineno, ScenarioErrorKind::ActionAfterExit));
                    }
                    rule.actions.push(action);
                }
                other => {
                    return Err(err(lineno, ScenarioErrorKind::UnknownDirective(other.to_owned())))
                }
            }
        }
        if scenario.mode == Mode::Script {
            let mut seen_on = false;
            for rule in &scenario.rules {
                match rule.trigger {
                    Trigger::On(_) => seen_on = true,
                    Trigger::Start if seen_on => {
                        return Err(err(rule.line, ScenarioErrorKind::LateStart))
                    }
                    Trigger::Start => {}
                }
            }
        }
        Ok(scenario)
    }
}

fn split_word(line: &str) -> (&str, &str) {
    match line.split_once(char::is_whitespace) {
        Some((word, rest)) => (word, rest.trim_start()),
        None => (line, ""),
    }
}

/// Splits `rest` after the pattern's closing `$`: the first unescaped `$`
/// followed by whitespace or end of line.
fn split_pattern(rest: &str) -> (&str, &str) {
    let bytes = rest.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b != b'$' {
            continue;
        }
        let escapes = bytes[..i].iter().rev().take_while(|c| **c == b'\\').count();
        if escapes % 2 == 1 {
            continue;
        }
        let end = i + 1;
        if end == bytes.len() || bytes[end].is_ascii_whitespace() {
            return (&rest[..end], rest[end..].trim_start());
        }
    }
    match rest.split_once(char::is_whitespace) {
        Some((p, tail)) => (p, tail.trim_start()),
        None => (rest, ""),
    }
}

fn parse_inline_actions(text: &str, lineno: usize) -> Result<Vec<Action>, ScenarioError> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    Ok(alloc::vec![parse_action(text, lineno)?])
}

fn parse_action(text: &str, lineno: usize) -> Result<Action, ScenarioError> {
    let (word, rest) = split_word(text);
    match word {
        "send" if rest.is_empty() => Err(err(lineno, ScenarioErrorKind::EmptySend)),
        "send" => Ok(Action::Send(rest.to_owned())),
        "exit" if rest.is_empty() => Ok(Action::Exit),
        _ => Err(err(lineno, ScenarioErrorKind::BadAction(text.to_owned()))),
    }
}

/// How a stub run ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StubExit {
    Success,
    Violation(String),
}

impl StubExit {
    /// Process exit status: 0 on success, 2 on a conformance violation.
    pub fn code(&self) -> i32 {
        match self {
            StubExit::Success => 0,
            StubExit::Violation(_) => 2,
        }
    }
}

impl fmt::Display for StubExit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StubExit::Success => f.write_str("success"),
            StubExit::Violation(why) => write!(f, "conformance violation: {why}"),
        }
    }
}

/// Lines to write, then possibly an exit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Step {
    pub output: Vec<String>,
    pub exit: Option<StubExit>,
}

#[derive(Debug)]
struct CompiledRule {
    matcher: Option<(Regex, String)>,
    actions: Vec<Action>,
}

/// Executes a scenario one input line at a time.
#[derive(Debug)]
pub struct StubMachine {
    mode: Mode,
    rules: Vec<CompiledRule>,
    cursor: usize,
    args: Vec<String>,
}

impl StubMachine {
    pub fn new(scenario: &StubScenario, args: &[String]) -> Result<Self, ScenarioError> {
        if let Some(bad) = args.iter().find(|a| a.contains(['\n', '\r'])) {
            return Err(err(0, ScenarioErrorKind::ArgumentLineBreak(bad.clone())));
        }
        let mut rules = Vec::with_capacity(scenario.rules.len());
        for rule in &scenario.rules {
            let matcher = match &rule.trigger {
                Trigger::Start => None,
                Trigger::On(src) => {
                    let expanded = expand_args(src, args, true).map_err(|k| err(rule.line, k))?;
                    let regex = compile_anchored(&expanded).map_err(|e| {
                        err(
                            rule.line,
                            ScenarioErrorKind::InvalidPattern(src.clone(), format!("{e}")),
                        )
                    })?;
                    Some((regex, expanded))
                }
            };
            for action in &rule.actions {
                if let Action::Send(tpl) = action {
                    expand_args(tpl, args, false).map_err(|k| err(rule.line, k))?;
                }
            }
            rules.push(CompiledRule {
                matcher,
                actions: rule.actions.clone(),
            });
        }
        Ok(StubMachine {
            mode: scenario.mode,
            rules,
            cursor: 0,
            args: args.to_vec(),
        })
    }

    /// Fires the `start` rules.
    pub fn start(&mut self) -> Step {
        let mut step = Step::default();
        match self.mode {
            Mode::Script => {
                while self.cursor < self.rules.len() && self.rules[self.cursor].matcher.is_none() {
                    let idx = self.cursor;
                    self.cursor += 1;
                    if self.fire(idx, &[], &mut step) {
                        break;
                    }
                }
            }
            Mode::Reactive => {
                for idx in 0..self.rules.len() {
                    if self.rules[idx].matcher.is_none() && self.fire(idx, &[], &mut step) {
                        break;
                    }
                }
            }
        }
        step
    }

    pub fn input(&mut self, line: &str) -> Step {
        let mut step = Step::default();
        match self.mode {
            Mode::Script => {
                let Some(rule) = self.rules.get(self.cursor) else {
                    step.exit = Some(StubExit::Violation(format!(
                        "unexpected line after end of script: `{line}`"
                    )));
                    return step;
                };
                let (regex, src) = rule.matcher.as_ref().expect("start rules precede on rules");
                match whole_captures(regex, line) {
                    Some(caps) => {
                        let idx = self.cursor;
                        self.cursor += 1;
                        self.fire(idx, &caps, &mut step);
                    }
                    None => {
                        step.exit = Some(StubExit::Violation(format!(
                            "expected a line matching `{src}`, got `{line}`"
                        )));
                    }
                }
            }
            Mode::Reactive => {
                let hit = self.rules.iter().enumerate().find_map(|(idx, rule)| {
                    let (regex, _) = rule.matcher.as_ref()?;
                    whole_captures(regex, line).map(|caps| (idx, caps))
                });
                if let Some((idx, caps)) = hit {
                    self.fire(idx, &caps, &mut step);
                }
            }
        }
        step
    }

    /// Verdict when standard input closes.
    pub fn end_of_input(&self) -> StubExit {
        match (self.mode, self.rules.get(self.cursor)) {
            (Mode::Script, Some(rule)) => {
                let expected = rule.matcher.as_ref().map(|(_, s)| s.as_str()).unwrap_or("start");
                StubExit::Violation(format!("end of input while expecting `{expected}`"))
            }
            _ => StubExit::Success,
        }
    }

    /// True once a script-mode stub has consumed every rule.
    pub fn is_exhausted(&self) -> bool {
        self.mode == Mode::Script && self.cursor >= self.rules.len()
    }

    /// Runs the actions of rule `idx`; returns true when it exits.
    fn fire(&self, idx: usize, caps: &[String], step: &mut Step) -> bool {
        for action in &self.rules[idx].actions {
            match action {
                Action::Send(tpl) => {
                    let line = expand_args(tpl, &self.args, false).expect("checked at construction");
                    step.output.push(expand_captures(&line, caps));
                }
                Action::Exit => {
                    step.exit = Some(StubExit::Success);
                    return true;
                }
            }
        }
        false
    }
}

/// Whole match followed by the capture groups, so `$0` is the full line.
fn whole_captures(regex: &Regex, line: &str) -> Option<Vec<String>> {
    let groups = captures(regex, line)?;
    let mut all = Vec::with_capacity(groups.len() + 1);
    all.push(line.to_owned());
    all.extend(groups);
    Some(all)
}

fn expand_args(template: &str, args: &[String], escape: bool) -> Result<String, ScenarioErrorKind> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(pos) = rest.find("$ARG") {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 4..];
        let digits = after.bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            out.push_str("$ARG");
            rest = after;
            continue;
        }
        let n: usize = after[..digits].parse().unwrap_or(0);
        let value = n
            .checked_sub(1)
            .and_then(|i| args.get(i))
            .ok_or(ScenarioErrorKind::MissingArgument(n, args.len()))?;
        if escape {
            out.push_str(&regex::escape(value));
        } else {
            out.push_str(value);
        }
        rest = &after[digits..];
    }
    out.push_str(rest);
    Ok(out)
}

fn expand_captures(template: &str, caps: &[String]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut chars = template.char_indices().peekable();
    while let Some((_, c)) = chars.next() {
        if c == '$' {
            if let Some(&(_, d)) = chars.peek() {
                if let Some(n) = d.to_digit(10) {
                    chars.next();
                    if let Some(cap) = caps.get(n as usize) {
                        out.push_str(cap);
                    }
                    continue;
                }
            }
        }
        out.push(c);
    }
    out
}
