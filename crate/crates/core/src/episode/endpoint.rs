//! What the runner tells agents and how it asks them for text.

use crate::command::{registry, render_command_docs};
use crate::task::{TargetItem, TaskSpec, TaskType};
use crate::world::{Capabilities, Inventory};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

/// Everything an agent learns at the start of an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskBrief {
    pub agent: String,
    pub task_name: String,
    pub task_type: TaskType,
    /// Goal text as this agent sees it, recipe steps included when allowed.
    pub goal: String,
    pub inventory_note: String,
    pub command_docs: String,
    pub agents: Vec<String>,
    pub targets: Vec<TargetItem>,
    pub hells_kitchen: bool,
    /// Hell's Kitchen target indices this agent must end up holding.
    #[serde(default)]
    pub assigned: Vec<usize>,
    pub plan_access: bool,
    pub initial_inventory: Inventory,
    pub capabilities: Capabilities,
    pub timeout_seconds: u64,
}

impl TaskBrief {
    pub fn new(task: &TaskSpec, agent: &str) -> Self {
        TaskBrief {
            agent: agent.to_string(),
            task_name: task.task_name.clone(),
            task_type: task.task_type,
            goal: task.goal_for(agent),
            inventory_note: task.inventory_note(agent),
            command_docs: render_command_docs(registry()),
            agents: task.agent_names.clone(),
            targets: task.target_items.clone(),
            hells_kitchen: task.hells_kitchen,
            assigned: task.assignments.get(agent).cloned().unwrap_or_default(),
            plan_access: task.has_plan_access(agent),
            initial_inventory: task.initial_inventories.get(agent).cloned().unwrap_or_default(),
            capabilities: task.capabilities_for(agent),
            timeout_seconds: task.timeout_seconds,
        }
    }

    pub fn others(&self) -> Vec<String> {
        self.agents.iter().filter(|a| **a != self.agent).cloned().collect()
    }

    /// The opening system message of this agent's context.
    pub fn system_prompt(&self) -> String {
        let others = self.others().join(", ");
        format!(
            "You are {}, a bot in a shared world with {others}. Act through commands and talk to the other bots to finish the task.\n\
             YOUR CURRENT ASSIGNED GOAL: \"{}\"\n{}\n\n{}",
            self.agent, self.goal, self.inventory_note, self.command_docs
        )
    }
}

/// Something delivered to an agent between polls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Event {
    /// Output of the agent's own command.
    CommandResult { command: String, ok: bool, text: String },
    /// Conversation notices and other control text.
    System { text: String },
    /// Chat from another bot, already rendered with the sender prefix.
    Chat { from: String, text: String },
}

impl Event {
    pub fn role(&self) -> Role {
        match self {
            Event::Chat { .. } => Role::User,
            _ => Role::System,
        }
    }

    pub fn content(&self) -> &str {
        match self {
            Event::CommandResult { text, .. } | Event::System { text } | Event::Chat { text, .. } => text,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndpointError {
    #[error("agent {0} disconnected")]
    Disconnected(String),
    #[error("agent {agent} broke the protocol: {detail}")]
    Protocol { agent: String, detail: String },
    #[error("agent {0} did not answer in time")]
    Timeout(String),
}

/// One participant in an episode. The runner calls `brief` once, then
/// interleaves `deliver` and `poll`, then calls `end`.
pub trait AgentEndpoint {
    fn kind(&self) -> &str;
    fn brief(&mut self, brief: &TaskBrief) -> Result<(), EndpointError>;
    fn deliver(&mut self, tick: u64, event: &Event) -> Result<(), EndpointError>;
    /// Next message; empty text means the agent has nothing to say.
    fn poll(&mut self, tick: u64) -> Result<String, EndpointError>;
    fn end(&mut self, _reason: &str, _score: f64) {}
}

/// Never says anything.
#[derive(Debug, Default)]
pub struct IdleEndpoint;

impl AgentEndpoint for IdleEndpoint {
    fn kind(&self) -> &str {
        "idle"
    }
    fn brief(&mut self, _: &TaskBrief) -> Result<(), EndpointError> {
        Ok(())
    }
    fn deliver(&mut self, _: u64, _: &Event) -> Result<(), EndpointError> {
        Ok(())
    }
    fn poll(&mut self, _: u64) -> Result<String, EndpointError> {
        Ok(String::new())
    }
}

/// Replays fixed responses. Each entry is said at the first poll at or
/// after its tick.
#[derive(Debug, Default)]
pub struct ScriptedEndpoint {
    lines: VecDeque<(u64, String)>,
    exact: bool,
}

impl ScriptedEndpoint {
    pub fn new<I, S>(lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedEndpoint { lines: lines.into_iter().map(|s| (0, s.into())).collect(), exact: false }
    }

    /// Responses that must land on exactly the recorded ticks.
    pub fn at_ticks(lines: Vec<(u64, String)>) -> Self {
        ScriptedEndpoint { lines: lines.into(), exact: true }
    }
}

impl AgentEndpoint for ScriptedEndpoint {
    fn kind(&self) -> &str {
        "scripted"
    }
    fn brief(&mut self, _: &TaskBrief) -> Result<(), EndpointError> {
        Ok(())
    }
    fn deliver(&mut self, _: u64, _: &Event) -> Result<(), EndpointError> {
        Ok(())
    }
    fn poll(&mut self, tick: u64) -> Result<String, EndpointError> {
        match self.lines.front() {
            Some((t, _)) if (self.exact && *t == tick) || (!self.exact && *t <= tick) => Ok(self.lines.pop_front().unwrap().1),
            _ => Ok(String::new()),
        }
    }
}

/// Echoes the last chat it received back as plain text, once.
#[derive(Debug, Default)]
pub struct EchoEndpoint {
    last: Option<String>,
}

impl AgentEndpoint for EchoEndpoint {
    fn kind(&self) -> &str {
        "echo"
    }
    fn brief(&mut self, _: &TaskBrief) -> Result<(), EndpointError> {
        Ok(())
    }
    fn deliver(&mut self, _: u64, event: &Event) -> Result<(), EndpointError> {
        if let Event::Chat { text, .. } = event {
            self.last = Some(text.split_once(": ").map(|(_, b)| b).unwrap_or(text).replace(crate::conversation::BOT_TAG, ""));
        }
        Ok(())
    }
    fn poll(&mut self, _: u64) -> Result<String, EndpointError> {
        Ok(self.last.take().unwrap_or_default())
    }
}
