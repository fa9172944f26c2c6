//! A [`Ports`] implementation that records effects and serves scripted
//! replies, for driving one handler call at a time in tests.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Halt, Ports, Source};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Effect {
    Send(String, String),
    /// A blocking receive on a channel.
    Await(String),
    ToolSend(String),
    /// A blocking receive from the tool.
    AwaitTool,
    KillTool,
    Stop,
    Shutdown,
    Ignored(Source, String),
}

impl Effect {
    pub fn send(key: &str, message: &str) -> Self {
        Effect::Send(key.into(), message.into())
    }

    pub fn tool(message: &str) -> Self {
        Effect::ToolSend(message.into())
    }

    pub fn await_on(key: &str) -> Self {
        Effect::Await(key.into())
    }
}

#[derive(Debug, Default)]
pub struct RecordingPorts {
    pub effects: Vec<Effect>,
    channel_replies: BTreeMap<String, VecDeque<String>>,
    tool_replies: VecDeque<String>,
    /// Fails the next `send` on this key with the given halt.
    pub fail_send: Option<(String, Halt)>,
}

impl RecordingPorts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Queues a line the next `receive(key)` will return.
    pub fn reply_on(&mut self, key: &str, message: &str) -> &mut Self {
        self.channel_replies
            .entry(key.to_string())
            .or_default()
            .push_back(message.into());
        self
    }

    /// Queues a line the next `tool_receive` will return.
    pub fn tool_reply(&mut self, message: &str) -> &mut Self {
        self.tool_replies.push_back(message.into());
        self
    }

    pub fn take_effects(&mut self) -> Vec<Effect> {
        core::mem::take(&mut self.effects)
    }

    /// True when every scripted reply was consumed.
    pub fn replies_drained(&self) -> bool {
        self.tool_replies.is_empty() && self.channel_replies.values().all(VecDeque::is_empty)
    }
}

impl Ports for RecordingPorts {
    fn send(&mut self, key: &str, message: &str) -> Result<(), Halt> {
        if let Some((fail_key, halt)) = &self.fail_send {
            if fail_key == key {
                let halt = halt.clone();
                self.fail_send = None;
                return Err(halt);
            }
        }
        self.effects.push(Effect::send(key, message));
        Ok(())
    }

    fn receive(&mut self, key: &str) -> Result<String, Halt> {
        self.effects.push(Effect::await_on(key));
        self.channel_replies
            .get_mut(key)
            .and_then(VecDeque::pop_front)
            .ok_or_else(|| Halt::Fault(format!("no scripted reply on channel {key}")))
    }

    fn tool_send(&mut self, message: &str) -> Result<(), Halt> {
        self.effects.push(Effect::tool(message));
        Ok(())
    }

    fn tool_receive(&mut self) -> Result<String, Halt> {
        self.effects.push(Effect::AwaitTool);
        self.tool_replies
            .pop_front()
            .ok_or_else(|| Halt::Fault("no scripted tool reply".into()))
    }

    fn kill_tool(&mut self) {
        self.effects.push(Effect::KillTool);
    }

    fn stop(&mut self) {
        self.effects.push(Effect::Stop);
    }

    fn shutdown(&mut self) -> Halt {
        self.effects.push(Effect::Shutdown);
        Halt::Shutdown
    }

    fn ignored(&mut self, source: Source, line: &str) {
        self.effects.push(Effect::Ignored(source, line.into()));
    }
}
