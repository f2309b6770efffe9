//! Pairwise agent conversations with busy-aware throttling.
//!
//! Each unordered pair has at most one session at a time, and every agent
//! belongs to at most one open session. Chat is queued per session and
//! released by [`Conversations::pump`]; control notices skip the queue.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

/// Minimum ticks between deliveries when one side is busy.
pub const SLOW_INTERVAL: u64 = 30;
/// Minimum ticks between deliveries when both sides are idle.
pub const MIN_INTERVAL: u64 = 10;

pub const BOT_TAG: &str = "(FROM OTHER BOT)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Paused,
    Slowed,
    Ended,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub seq: u64,
    pub from: String,
    pub to: String,
    pub body: String,
    pub enqueued_tick: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub pair: (String, String),
    pub status: SessionStatus,
    pub queue: VecDeque<Envelope>,
    pub last_delivery_tick: Option<u64>,
}

impl Session {
    pub fn involves(&self, agent: &str) -> bool {
        self.pair.0 == agent || self.pair.1 == agent
    }

    pub fn is_open(&self) -> bool {
        self.status != SessionStatus::Ended
    }

    fn other(&self, agent: &str) -> &str {
        if self.pair.0 == agent {
            &self.pair.1
        } else {
            &self.pair.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryKind {
    Chat,
    Notice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub tick: u64,
    pub from: String,
    pub to: String,
    pub kind: DeliveryKind,
    /// Sequence number of the chat envelope; notices carry none.
    pub seq: Option<u64>,
    /// Text exactly as the receiver sees it.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConversationError {
    #[error("{0} is not a known agent.")]
    UnknownAgent(String),
    #[error("You cannot start a conversation with yourself.")]
    SelfConversation,
    #[error("You are not in conversation with {0}.")]
    NoSuchConversation(String),
}

/// What the initiator sees after a start request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StartOutcome {
    Started,
    AlreadyConversing(String),
}

impl StartOutcome {
    pub fn notice(&self) -> Option<&str> {
        match self {
            StartOutcome::Started => None,
            StartOutcome::AlreadyConversing(n) => Some(n),
        }
    }
}

pub fn strip_tags(body: &str) -> String {
    body.replace(BOT_TAG, "")
}

pub fn render_chat(from: &str, body: &str) -> String {
    format!("{from}: {BOT_TAG}{}", strip_tags(body))
}

pub fn already_conversing_notice(partner: &str) -> String {
    format!("You are already in conversation with {partner}. Don't use this command to talk to them.")
}

pub fn ended_notice(by: &str, final_message: Option<&str>) -> String {
    match final_message {
        Some(msg) => format!("Conversation with {by} ended with message: {msg}"),
        None => format!("Conversation with {by} ended."),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversations {
    agents: Vec<String>,
    sessions: Vec<Session>,
    notices: Vec<Delivery>,
    next_seq: u64,
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl Conversations {
    pub fn new<I, S>(agents: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { agents: agents.into_iter().map(Into::into).collect(), ..Self::default() }
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    /// Current open partner of `agent`, if any.
    pub fn partner_of(&self, agent: &str) -> Option<&str> {
        self.sessions.iter().find(|s| s.is_open() && s.involves(agent)).map(|s| s.other(agent))
    }

    fn open_index(&self, a: &str, b: &str) -> Option<usize> {
        let pair = ordered(a, b);
        self.sessions.iter().position(|s| s.is_open() && s.pair == pair)
    }

    fn notify(&mut self, tick: u64, from: &str, to: &str, text: String) {
        self.notices.push(Delivery {
            tick,
            from: from.to_string(),
            to: to.to_string(),
            kind: DeliveryKind::Notice,
            seq: None,
            text,
        });
    }

    fn close(&mut self, idx: usize, by: &str, tick: u64, final_message: Option<&str>) {
        self.sessions[idx].status = SessionStatus::Ended;
        let other = self.sessions[idx].other(by).to_string();
        self.notify(tick, by, &other, ended_notice(by, final_message));
    }

    fn enqueue(&mut self, idx: usize, from: &str, body: &str, tick: u64) {
        let to = self.sessions[idx].other(from).to_string();
        let seq = self.next_seq;
        self.next_seq += 1;
        self.sessions[idx].queue.push_back(Envelope {
            seq,
            from: from.to_string(),
            to,
            body: body.to_string(),
            enqueued_tick: tick,
        });
    }

    pub fn start(&mut self, a: &str, b: &str, first_message: &str, tick: u64) -> Result<StartOutcome, ConversationError> {
        if a == b {
            return Err(ConversationError::SelfConversation);
        }
        for who in [a, b] {
            if !self.agents.iter().any(|n| n == who) {
                return Err(ConversationError::UnknownAgent(who.to_string()));
            }
        }
        if self.open_index(a, b).is_some() {
            return Ok(StartOutcome::AlreadyConversing(already_conversing_notice(b)));
        }
        // switching partners closes the old sessions on both sides
        if let Some(idx) = self.sessions.iter().position(|s| s.is_open() && s.involves(a)) {
            self.close(idx, a, tick, None);
        }
        if let Some(idx) = self.sessions.iter().position(|s| s.is_open() && s.involves(b)) {
            self.close(idx, b, tick, None);
        }
        // undelivered chat from an earlier session of this pair goes first
        let pair = ordered(a, b);
        let mut queue = VecDeque::new();
        let mut last_delivery_tick = None;
        for old in self.sessions.iter_mut().filter(|s| s.pair == pair) {
            queue.extend(old.queue.drain(..));
            last_delivery_tick = last_delivery_tick.max(old.last_delivery_tick);
        }
        self.sessions.push(Session { pair, status: SessionStatus::Active, queue, last_delivery_tick });
        let idx = self.sessions.len() - 1;
        if !first_message.trim().is_empty() {
            self.enqueue(idx, a, first_message, tick);
        }
        Ok(StartOutcome::Started)
    }

    pub fn end(&mut self, a: &str, b: &str, final_message: Option<&str>, tick: u64) -> Result<(), ConversationError> {
        let idx = self.open_index(a, b).ok_or_else(|| ConversationError::NoSuchConversation(b.to_string()))?;
        let msg = final_message.filter(|m| !m.trim().is_empty());
        self.close(idx, a, tick, msg);
        Ok(())
    }

    /// Queue chat from `from` to its current partner. Returns false when
    /// `from` is not conversing or the text is blank.
    pub fn send(&mut self, from: &str, body: &str, tick: u64) -> bool {
        if body.trim().is_empty() {
            return false;
        }
        match self.sessions.iter().position(|s| s.is_open() && s.involves(from)) {
            Some(idx) => {
                self.enqueue(idx, from, body, tick);
                true
            }
            None => false,
        }
    }

    /// Release what is due at `tick`: all pending notices, then at most one
    /// chat per session subject to the pause and interval rules.
    pub fn pump<F>(&mut self, tick: u64, busy: F) -> Vec<Delivery>
    where
        F: Fn(&str) -> bool,
    {
        let mut out = std::mem::take(&mut self.notices);
        for s in &mut self.sessions {
            let (ba, bb) = (busy(&s.pair.0), busy(&s.pair.1));
            let (status, interval) = match (ba, bb) {
                (true, true) => (SessionStatus::Paused, None),
                (true, false) | (false, true) => (SessionStatus::Slowed, Some(SLOW_INTERVAL)),
                (false, false) => (SessionStatus::Active, Some(MIN_INTERVAL)),
            };
            if s.is_open() {
                s.status = status;
            }
            let Some(interval) = interval else { continue };
            if s.queue.is_empty() {
                continue;
            }
            let due = s.last_delivery_tick.map(|t| tick >= t + interval).unwrap_or(true);
            if !due {
                continue;
            }
            let env = s.queue.pop_front().unwrap();
            s.last_delivery_tick = Some(tick);
            out.push(Delivery {
                tick,
                text: render_chat(&env.from, &env.body),
                from: env.from,
                to: env.to,
                kind: DeliveryKind::Chat,
                seq: Some(env.seq),
            });
        }
        out
    }

    pub fn pending(&self) -> usize {
        self.sessions.iter().map(|s| s.queue.len()).sum::<usize>() + self.notices.len()
    }
}
