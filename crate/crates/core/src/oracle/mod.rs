//! Scripted agents. They see only what any agent sees: the task brief,
//! command output and chat, and they act only through commands and chat.
//! Static game rules (recipes) count as prior knowledge.

mod construction;
mod cooking;
mod crafting;

use crate::command::{Command, Value};
use crate::conversation::BOT_TAG;
use crate::episode::{AgentEndpoint, EchoEndpoint, EndpointError, Event, IdleEndpoint, TaskBrief};
use crate::task::TaskType;
use crate::world::Inventory;
use std::collections::VecDeque;

const ALREADY: &str = "You are already in conversation with";

#[derive(Debug, Clone, PartialEq)]
enum Op {
    Cmd(String),
    /// Plain text, relayed to the current conversation partner.
    Plain(String),
    Say { to: String, text: String },
    /// Say nothing for this many polls.
    Wait(u32),
}

/// Queue of things to say, shared by every policy.
#[derive(Debug, Default)]
struct Out {
    queue: VecDeque<Op>,
    last_cmd: Option<String>,
}

impl Out {
    fn cmd(&mut self, name: &str, args: Vec<Value>) {
        self.queue.push_back(Op::Cmd(Command::new(name, args).to_string()));
    }

    fn cmd_front(&mut self, text: String) {
        self.queue.push_front(Op::Cmd(text));
    }

    fn say(&mut self, to: &str, text: impl Into<String>) {
        self.queue.push_back(Op::Say { to: to.to_string(), text: text.into() });
    }

    fn wait(&mut self, polls: u32) {
        self.queue.push_back(Op::Wait(polls));
    }

    fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    fn clear(&mut self) {
        self.queue.clear();
    }

    /// Drop the next queued command if it is a `name` command.
    fn skip_next(&mut self, name: &str) {
        if let Some(Op::Cmd(c)) = self.queue.front() {
            if c.starts_with(&format!("!{name}")) {
                self.queue.pop_front();
            }
        }
    }
}

fn s(v: &str) -> Value {
    Value::Str(v.to_string())
}

fn n(v: u32) -> Value {
    Value::Num(v as f64)
}

trait Policy {
    fn start(&mut self, out: &mut Out);
    fn on_result(&mut self, command: &str, ok: bool, text: &str, out: &mut Out);
    fn on_chat(&mut self, from: &str, body: &str, out: &mut Out);
    /// Called when nothing is queued.
    fn idle(&mut self, out: &mut Out);
}

/// Items listed by the inventory query.
fn parse_inventory(text: &str) -> Inventory {
    let mut inv = Inventory::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("- ") {
            if let Some((item, count)) = rest.split_once(": ") {
                if let Ok(c) = count.trim().parse::<u32>() {
                    inv.add(item.trim(), c);
                }
            }
        }
    }
    inv
}

/// The oracle endpoint. The policy is picked from the brief.
#[derive(Default)]
pub struct OracleAgent {
    inbox: Vec<Event>,
    out: Out,
    policy: Option<Box<dyn Policy + Send>>,
    said: Option<String>,
}

impl OracleAgent {
    pub fn new() -> Self {
        Self::default()
    }

    fn digest(&mut self) {
        let said = self.said.take();
        let Some(policy) = self.policy.as_mut() else { return };
        for ev in std::mem::take(&mut self.inbox) {
            match ev {
                Event::CommandResult { text, .. } if text.starts_with(ALREADY) && said.is_some() => {
                    self.out.queue.push_front(Op::Plain(said.clone().unwrap()));
                }
                Event::CommandResult { command, ok, text } => policy.on_result(&command, ok, &text, &mut self.out),
                Event::Chat { from, text } => {
                    let body = text.split_once(BOT_TAG).map(|(_, b)| b).unwrap_or(&text);
                    policy.on_chat(&from, body, &mut self.out);
                }
                Event::System { .. } => {}
            }
        }
    }
}

impl AgentEndpoint for OracleAgent {
    fn kind(&self) -> &str {
        "oracle"
    }

    fn brief(&mut self, brief: &TaskBrief) -> Result<(), EndpointError> {
        let mut policy: Box<dyn Policy + Send> = match brief.task_type {
            TaskType::Cooking => Box::new(cooking::Cooking::new(brief)),
            TaskType::Crafting | TaskType::Techtree => Box::new(crafting::Crafting::new(brief)),
            TaskType::Construction => Box::new(construction::Construction::new(brief)),
        };
        policy.start(&mut self.out);
        self.policy = Some(policy);
        Ok(())
    }

    fn deliver(&mut self, _tick: u64, event: &Event) -> Result<(), EndpointError> {
        self.inbox.push(event.clone());
        Ok(())
    }

    fn poll(&mut self, _tick: u64) -> Result<String, EndpointError> {
        self.digest();
        if self.out.is_empty() {
            if let Some(p) = self.policy.as_mut() {
                p.idle(&mut self.out);
            }
        }
        let text = match self.out.queue.pop_front() {
            None => String::new(),
            Some(Op::Cmd(c)) => {
                self.out.last_cmd = Some(c.clone());
                c
            }
            Some(Op::Plain(t)) => t,
            Some(Op::Say { to, text }) => {
                self.said = Some(text.clone());
                Command::new("startConversation", vec![s(&to), s(&text)]).to_string()
            }
            Some(Op::Wait(k)) => {
                if k > 1 {
                    self.out.queue.push_front(Op::Wait(k - 1));
                }
                String::new()
            }
        };
        Ok(text)
    }
}

/// In-process endpoints by name: `oracle`, `idle` or `echo`.
pub fn endpoint_by_kind(kind: &str) -> Option<Box<dyn AgentEndpoint + Send>> {
    match kind {
        "oracle" => Some(Box::new(OracleAgent::new())),
        "idle" => Some(Box::new(IdleEndpoint)),
        "echo" => Some(Box::new(EchoEndpoint::default())),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_text_round_trips() {
        let mut inv = Inventory::new();
        inv.add("stick", 2);
        inv.add("cobblestone", 3);
        assert_eq!(parse_inventory(&inv.render()), inv);
        assert!(parse_inventory("\nINVENTORY: Nothing\n").is_empty());
    }
}
