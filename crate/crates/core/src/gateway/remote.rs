//! Server side: connections, the remote endpoint and the TCP entry point.

use super::{Body, Frame, GatewayError, DEFAULT_POLL_TIMEOUT, PROTOCOL_VERSION};
use crate::episode::{run_episode, AgentEndpoint, EndpointError, Endpoints, EpisodeConfig, EpisodeLog, Event, TaskBrief};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

enum Incoming {
    Frame(Frame),
    Bad(String),
    Closed,
}

/// One client stream. A reader thread parses lines into a queue so reads
/// can time out whatever the stream type.
pub struct Connection {
    rx: Receiver<Incoming>,
    writer: Box<dyn Write + Send>,
    next_id: u64,
    last_seen: Option<u64>,
}

impl Connection {
    pub fn new<R: Read + Send + 'static, W: Write + Send + 'static>(reader: R, writer: W) -> Self {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let Ok(line) = line else { break };
                if line.trim().is_empty() {
                    continue;
                }
                let msg = match Frame::parse(&line) {
                    Ok(f) => Incoming::Frame(f),
                    Err(e) => Incoming::Bad(e),
                };
                let stop = matches!(msg, Incoming::Bad(_));
                if tx.send(msg).is_err() || stop {
                    return;
                }
            }
            let _ = tx.send(Incoming::Closed);
        });
        Connection { rx, writer: Box::new(writer), next_id: 1, last_seen: None }
    }

    pub fn tcp(stream: TcpStream) -> std::io::Result<Self> {
        stream.set_nodelay(true)?;
        let reader = stream.try_clone()?;
        Ok(Self::new(reader, stream))
    }

    /// Sends a frame and returns its id.
    pub fn send(&mut self, episode_id: &str, agent: &str, body: Body) -> std::io::Result<u64> {
        let id = self.next_id;
        self.next_id += 1;
        let f = Frame { id, episode_id: episode_id.to_string(), agent: agent.to_string(), body };
        self.writer.write_all(f.to_line().as_bytes())?;
        self.writer.flush()?;
        Ok(id)
    }

    /// Next client frame. Errors carry a protocol complaint, or None on
    /// timeout or a closed stream.
    pub fn recv(&mut self, timeout: Duration) -> Result<Frame, RecvFailure> {
        let msg = match self.rx.recv_timeout(timeout) {
            Ok(m) => m,
            Err(RecvTimeoutError::Timeout) => return Err(RecvFailure::Timeout),
            Err(RecvTimeoutError::Disconnected) => return Err(RecvFailure::Closed),
        };
        match msg {
            Incoming::Frame(f) => {
                if self.last_seen.is_some_and(|prev| f.id <= prev) {
                    return Err(RecvFailure::Violation(format!("frame id {} does not increase", f.id)));
                }
                self.last_seen = Some(f.id);
                Ok(f)
            }
            Incoming::Bad(e) => Err(RecvFailure::Violation(format!("malformed frame: {e}"))),
            Incoming::Closed => Err(RecvFailure::Closed),
        }
    }

    /// Reads the client's hello. Returns the agent it asked for, if any.
    pub fn read_hello(&mut self, timeout: Duration) -> Result<Option<String>, RecvFailure> {
        let f = self.recv(timeout)?;
        match f.body {
            Body::Hello { version } if version == PROTOCOL_VERSION => {
                Ok(Some(f.agent).filter(|a| !a.is_empty()))
            }
            Body::Hello { version } => Err(RecvFailure::Violation(format!(
                "protocol version {version} is not supported (server speaks {PROTOCOL_VERSION})"
            ))),
            other => Err(RecvFailure::Violation(format!("expected hello, got {}", other.kind()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecvFailure {
    Timeout,
    Closed,
    Violation(String),
}

/// An agent on the other end of a connection.
pub struct RemoteEndpoint {
    agent: String,
    episode_id: String,
    conn: Connection,
    timeout: Duration,
    dead: Option<EndpointError>,
}

impl RemoteEndpoint {
    /// Answers the client's hello and takes over the connection.
    pub fn accept(mut conn: Connection, agent: &str, episode_id: &str, timeout: Duration) -> std::io::Result<Self> {
        conn.send(episode_id, agent, Body::Hello { version: PROTOCOL_VERSION })?;
        Ok(RemoteEndpoint { agent: agent.to_string(), episode_id: episode_id.to_string(), conn, timeout, dead: None })
    }

    fn fail(&mut self, e: EndpointError) -> EndpointError {
        self.dead.get_or_insert(e.clone());
        e
    }

    fn send(&mut self, body: Body) -> Result<u64, EndpointError> {
        if let Some(e) = &self.dead {
            return Err(e.clone());
        }
        match self.conn.send(&self.episode_id, &self.agent, body) {
            Ok(id) => Ok(id),
            Err(_) => Err(self.fail(EndpointError::Disconnected(self.agent.clone()))),
        }
    }

    fn violation(&mut self, detail: String) -> EndpointError {
        self.fail(EndpointError::Protocol { agent: self.agent.clone(), detail })
    }
}

impl AgentEndpoint for RemoteEndpoint {
    fn kind(&self) -> &str {
        "remote"
    }

    fn brief(&mut self, brief: &TaskBrief) -> Result<(), EndpointError> {
        self.send(Body::TaskBrief { system_prompt: brief.system_prompt(), brief: brief.clone() })?;
        Ok(())
    }

    fn deliver(&mut self, tick: u64, event: &Event) -> Result<(), EndpointError> {
        self.send(Body::from_event(tick, event))?;
        Ok(())
    }

    fn poll(&mut self, tick: u64) -> Result<String, EndpointError> {
        let id = self.send(Body::Poll { tick })?;
        match self.conn.recv(self.timeout) {
            Ok(Frame { body: Body::AgentText { reply_to, text }, .. }) if reply_to == id => Ok(text),
            Ok(Frame { body: Body::AgentText { reply_to, .. }, .. }) => {
                Err(self.violation(format!("agent_text answers poll {reply_to}, expected {id}")))
            }
            Ok(f) => Err(self.violation(format!("unexpected {} from client", f.body.kind()))),
            Err(RecvFailure::Timeout) => Err(self.fail(EndpointError::Timeout(self.agent.clone()))),
            Err(RecvFailure::Closed) => Err(self.fail(EndpointError::Disconnected(self.agent.clone()))),
            Err(RecvFailure::Violation(d)) => Err(self.violation(d)),
        }
    }

    fn end(&mut self, reason: &str, score: f64) {
        let _ = self.conn.send(&self.episode_id, &self.agent, Body::EpisodeEnd { reason: reason.to_string(), score });
    }
}

#[derive(Debug, Clone)]
pub struct GatewayOptions {
    pub poll_timeout: Duration,
    /// How long to wait for every remote agent to connect and say hello.
    pub accept_timeout: Duration,
}

impl Default for GatewayOptions {
    fn default() -> Self {
        GatewayOptions { poll_timeout: DEFAULT_POLL_TIMEOUT, accept_timeout: Duration::from_secs(60) }
    }
}

pub fn bind(addr: &str) -> Result<TcpListener, GatewayError> {
    TcpListener::bind(addr).map_err(|source| GatewayError::Bind { addr: addr.to_string(), source })
}

/// Runs one episode. Agents in `local` run in process; every other agent
/// of the task is filled by the next client that connects, or by the
/// client that asked for it by name.
pub fn serve<'a>(
    listener: &TcpListener,
    cfg: &EpisodeConfig,
    mut local: Endpoints<'a>,
    opts: &GatewayOptions,
) -> Result<EpisodeLog, GatewayError> {
    let episode_id = format!("{}-{}", cfg.task.task_name, cfg.seed);
    let mut waiting: Vec<String> = cfg.task.agent_names.iter().filter(|a| !local.contains_key(*a)).cloned().collect();
    let mut remote: BTreeMap<String, RemoteEndpoint> = BTreeMap::new();
    let deadline = Instant::now() + opts.accept_timeout;
    listener.set_nonblocking(true)?;
    while !waiting.is_empty() {
        let stream = match listener.accept() {
            Ok((s, _)) => s,
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                if Instant::now() >= deadline {
                    listener.set_nonblocking(false)?;
                    return Err(GatewayError::AcceptTimeout { missing: waiting.len() });
                }
                thread::sleep(Duration::from_millis(5));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        stream.set_nonblocking(false)?;
        let mut conn = Connection::tcp(stream)?;
        let left = deadline.saturating_duration_since(Instant::now()).max(Duration::from_millis(1));
        // a bad handshake only loses that connection; the episode has not started
        let Ok(asked) = conn.read_hello(left) else { continue };
        let slot = match asked {
            Some(name) => match waiting.iter().position(|w| *w == name) {
                Some(i) => i,
                None => continue,
            },
            None => 0,
        };
        let agent = waiting.remove(slot);
        let ep = RemoteEndpoint::accept(conn, &agent, &episode_id, opts.poll_timeout)?;
        remote.insert(agent, ep);
    }
    listener.set_nonblocking(false)?;
    for (name, ep) in remote {
        local.insert(name, Box::new(ep));
    }
    Ok(run_episode(cfg, &mut local)?)
}
