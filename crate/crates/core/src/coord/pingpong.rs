//! The two-tool ping-pong application.
//!
//! Tool 1 raises either a `message` event, which is relayed to tool 2 as
//! an eval and acknowledged once tool 2 has answered, or a `quit` event,
//! which shuts the whole application down.

use alloc::vec;
use alloc::vec::Vec;

use super::{snd_ack_event, snd_eval, Coordinator, Halt, Ports, Source};
use crate::pattern::{PatternTable, REC_EVENT, REC_VALUE};

/// Channel carrying relayed events from comp1 to comp2.
pub const TO_COMP2: &str = "12";
/// Channel carrying acknowledgements from comp2 back to comp1.
pub const TO_COMP1: &str = "21";

pub const CHANNELS: [&str; 2] = [TO_COMP2, TO_COMP1];

/// Owner of tool 1.
#[derive(Debug, Default)]
pub struct Comp1 {
    patterns: PatternTable,
}

impl Comp1 {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Coordinator for Comp1 {
    fn tool_id(&self) -> &'static str {
        "comp1"
    }

    fn sources(&self) -> Vec<Source> {
        vec![Source::Tool]
    }

    fn handle(&mut self, source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        let Some(event) = self.patterns.extract_one(REC_EVENT, line).expect("built-in") else {
            ports.ignored(source, line);
            return Ok(());
        };
        if event == "quit" {
            ports.tool_send("quit")?;
            return Err(ports.shutdown());
        }
        ports.send(TO_COMP2, &event)?;
        ports.receive(TO_COMP1)?;
        ports.tool_send(&snd_ack_event(&event))
    }
}

/// Owner of tool 2.
#[derive(Debug, Default)]
pub struct Comp2 {
    patterns: PatternTable,
}

impl Comp2 {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Coordinator for Comp2 {
    fn tool_id(&self) -> &'static str {
        "comp2"
    }

    fn sources(&self) -> Vec<Source> {
        vec![Source::Channel(TO_COMP2)]
    }

    fn handle(&mut self, _source: Source, line: &str, ports: &mut dyn Ports) -> Result<(), Halt> {
        if line == "quit" {
            ports.kill_tool();
            ports.stop();
            return Ok(());
        }
        ports.tool_send(&snd_eval(line))?;
        let reply = ports.tool_receive()?;
        if self.patterns.extract(REC_VALUE, &reply).expect("built-in").is_some() {
            ports.send(TO_COMP1, "ack")
        } else {
            ports.ignored(Source::Tool, &reply);
            Ok(())
        }
    }
}
