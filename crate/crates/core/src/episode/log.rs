//! JSONL episode records and transition reconstruction.

use super::endpoint::{Message, Role};
use crate::evaluator::Score;
use crate::task::TaskSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    Completed,
    Timeout,
    AgentError,
}

impl EndReason {
    pub fn as_str(self) -> &'static str {
        match self {
            EndReason::Completed => "completed",
            EndReason::Timeout => "timeout",
            EndReason::AgentError => "agent_error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandStatus {
    Ok,
    Error,
    Pending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Record {
    Header {
        task: Box<TaskSpec>,
        seed: u64,
        agents: Vec<String>,
        endpoints: Vec<String>,
        max_ticks: u64,
    },
    /// One entry of an agent's context, in order.
    Message { tick: u64, agent: String, role: Role, content: String },
    Command { tick: u64, agent: String, command: String, status: CommandStatus },
    Chat { tick: u64, from: String, to: String, kind: crate::conversation::DeliveryKind, text: String },
    /// Written when the score changes, and once more at the end.
    Score { tick: u64, value: f64 },
    End { tick: u64, reason: EndReason, score: Score, detail: Option<String> },
}

/// One assistant turn with everything the agent had seen before it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub agent: String,
    pub tick: u64,
    pub context: Vec<Message>,
    pub response: String,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("log has no header")]
    NoHeader,
    #[error("log has no end record")]
    NoEnd,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub records: Vec<Record>,
}

impl EpisodeLog {
    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LogError> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(line).map_err(|source| LogError::Json { line: i + 1, source })?);
        }
        Ok(EpisodeLog { records })
    }

    pub fn save(&self, path: &Path) -> Result<(), LogError> {
        std::fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LogError> {
        Self::from_jsonl(&std::fs::read_to_string(path)?)
    }

    pub fn task(&self) -> Result<&TaskSpec, LogError> {
        match self.records.first() {
            Some(Record::Header { task, .. }) => Ok(task),
            _ => Err(LogError::NoHeader),
        }
    }

    pub fn seed(&self) -> Result<u64, LogError> {
        match self.records.first() {
            Some(Record::Header { seed, .. }) => Ok(*seed),
            _ => Err(LogError::NoHeader),
        }
    }

    pub fn end(&self) -> Result<(u64, EndReason, &Score), LogError> {
        self.records
            .iter()
            .rev()
            .find_map(|r| match r {
                Record::End { tick, reason, score, .. } => Some((*tick, *reason, score)),
                _ => None,
            })
            .ok_or(LogError::NoEnd)
    }

    pub fn final_score(&self) -> Result<f64, LogError> {
        Ok(self.end()?.2.value)
    }

    /// Per-agent context, rebuilt from the message records.
    pub fn histories(&self) -> BTreeMap<String, Vec<Message>> {
        let mut out: BTreeMap<String, Vec<Message>> = BTreeMap::new();
        for r in &self.records {
            if let Record::Message { agent, role, content, .. } = r {
                out.entry(agent.clone()).or_default().push(Message { role: *role, content: content.clone() });
            }
        }
        out
    }

    /// Every assistant turn paired with its full prior context, in log order.
    pub fn transitions(&self) -> Vec<Transition> {
        let mut seen: BTreeMap<&str, Vec<Message>> = BTreeMap::new();
        let mut out = Vec::new();
        for r in &self.records {
            if let Record::Message { tick, agent, role, content } = r {
                let h = seen.entry(agent).or_default();
                if *role == Role::Assistant {
                    out.push(Transition { agent: agent.clone(), tick: *tick, context: h.clone(), response: content.clone() });
                }
                h.push(Message { role: *role, content: content.clone() });
            }
        }
        out
    }

    /// Assistant turns per agent with their ticks, for replay.
    pub fn responses(&self) -> BTreeMap<String, Vec<(u64, String)>> {
        let mut out: BTreeMap<String, Vec<(u64, String)>> = BTreeMap::new();
        for r in &self.records {
            if let Record::Message { tick, agent, role: Role::Assistant, content } = r {
                out.entry(agent.clone()).or_default().push((*tick, content.clone()));
            }
        }
        out
    }

    pub fn commands(&self) -> impl Iterator<Item = (u64, &str, &str)> {
        self.records.iter().filter_map(|r| match r {
            Record::Command { tick, agent, command, .. } => Some((*tick, agent.as_str(), command.as_str())),
            _ => None,
        })
    }

    pub fn chats(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| matches!(r, Record::Chat { .. }))
    }
}
