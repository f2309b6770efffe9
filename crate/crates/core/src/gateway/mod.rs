//! Newline-delimited JSON protocol for agents running outside the process.
//!
//! Every frame is one JSON object on one line with an `id`, the
//! `episode_id`, the `agent` name and a `kind`. Ids strictly increase in
//! each direction of a connection. See docs/PROTOCOL.md.

mod client;
mod remote;

pub use client::{run_echo_agent, Client};
pub use remote::{bind, serve, Connection, GatewayOptions, RemoteEndpoint};

use crate::episode::{Event, RunError, TaskBrief};
use serde::{Deserialize, Serialize};
use std::time::Duration;
use thiserror::Error;

pub const PROTOCOL_VERSION: u32 = 1;

/// Wall-clock wait for one poll reply.
pub const DEFAULT_POLL_TIMEOUT: Duration = Duration::from_millis(100);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub id: u64,
    #[serde(default)]
    pub episode_id: String,
    #[serde(default)]
    pub agent: String,
    #[serde(flatten)]
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Body {
    /// Sent by the client first, answered by the server. A client may ask
    /// for a particular agent by filling in `agent`.
    Hello { version: u32 },
    TaskBrief { system_prompt: String, brief: TaskBrief },
    Poll { tick: u64 },
    /// The only frame a client sends after its hello, once per poll.
    AgentText { reply_to: u64, text: String },
    SystemText { tick: u64, text: String },
    ChatDelivery { tick: u64, from: String, text: String },
    CommandResult { tick: u64, command: String, ok: bool, text: String },
    EpisodeEnd { reason: String, score: f64 },
}

impl Body {
    pub fn kind(&self) -> &'static str {
        match self {
            Body::Hello { .. } => "hello",
            Body::TaskBrief { .. } => "task_brief",
            Body::Poll { .. } => "poll",
            Body::AgentText { .. } => "agent_text",
            Body::SystemText { .. } => "system_text",
            Body::ChatDelivery { .. } => "chat_delivery",
            Body::CommandResult { .. } => "command_result",
            Body::EpisodeEnd { .. } => "episode_end",
        }
    }

    pub fn from_event(tick: u64, event: &Event) -> Body {
        match event {
            Event::CommandResult { command, ok, text } => {
                Body::CommandResult { tick, command: command.clone(), ok: *ok, text: text.clone() }
            }
            Event::System { text } => Body::SystemText { tick, text: text.clone() },
            Event::Chat { from, text } => Body::ChatDelivery { tick, from: from.clone(), text: text.clone() },
        }
    }
}

impl Frame {
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("frame serializes");
        s.push('\n');
        s
    }

    pub fn parse(line: &str) -> Result<Frame, String> {
        serde_json::from_str(line.trim_end()).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("timed out waiting for agents to connect ({missing} missing)")]
    AcceptTimeout { missing: usize },
    #[error(transparent)]
    Run(#[from] RunError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_round_trip_with_flat_kind() {
        let f = Frame {
            id: 3,
            episode_id: "e".into(),
            agent: "Andy_0".into(),
            body: Body::ChatDelivery { tick: 4, from: "Jill_0".into(), text: "hi".into() },
        };
        let line = f.to_line();
        assert!(line.ends_with('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["kind"], "chat_delivery");
        assert_eq!(v["from"], "Jill_0");
        assert_eq!(Frame::parse(&line).unwrap(), f);
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(Frame::parse("{\"id\":1,\"kind\":\"dance\"}").is_err());
        assert!(Frame::parse("not json").is_err());
        assert!(Frame::parse("{\"kind\":\"poll\",\"tick\":1}").is_err());
    }
}
