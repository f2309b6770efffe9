//! A small blocking client, enough for tests and the echo agent.

use super::{Body, Frame, PROTOCOL_VERSION};
use crate::episode::TaskBrief;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    next_id: u64,
    pub agent: String,
    pub episode_id: String,
    pub system_prompt: String,
    pub brief: TaskBrief,
}

impl Client {
    /// Connects, says hello and waits for the task brief.
    pub fn connect(addr: impl ToSocketAddrs, agent: Option<&str>) -> io::Result<Client> {
        let writer = TcpStream::connect(addr)?;
        writer.set_nodelay(true)?;
        let reader = BufReader::new(writer.try_clone()?);
        let mut partial = (reader, writer, 1u64);
        let hello = Frame {
            id: 0,
            episode_id: String::new(),
            agent: agent.unwrap_or_default().to_string(),
            body: Body::Hello { version: PROTOCOL_VERSION },
        };
        send_raw(&mut partial.1, &mut partial.2, hello)?;
        let reply = read_raw(&mut partial.0)?.ok_or_else(|| bad("server closed during handshake"))?;
        let Body::Hello { version } = reply.body else { return Err(bad(format!("expected hello, got {}", reply.body.kind()))) };
        if version != PROTOCOL_VERSION {
            return Err(bad(format!("server speaks version {version}")));
        }
        let brief = read_raw(&mut partial.0)?.ok_or_else(|| bad("server closed before the brief"))?;
        let Body::TaskBrief { system_prompt, brief } = brief.body else {
            return Err(bad(format!("expected task_brief, got {}", brief.body.kind())));
        };
        let (reader, writer, next_id) = partial;
        Ok(Client { reader, writer, next_id, agent: reply.agent, episode_id: reply.episode_id, system_prompt, brief })
    }

    /// Next frame from the server, None once the stream closes.
    pub fn next(&mut self) -> io::Result<Option<Frame>> {
        read_raw(&mut self.reader)
    }

    pub fn reply(&mut self, poll_id: u64, text: &str) -> io::Result<()> {
        let f = Frame {
            id: 0,
            episode_id: self.episode_id.clone(),
            agent: self.agent.clone(),
            body: Body::AgentText { reply_to: poll_id, text: text.to_string() },
        };
        send_raw(&mut self.writer, &mut self.next_id, f)
    }
}

fn send_raw(w: &mut TcpStream, next_id: &mut u64, mut f: Frame) -> io::Result<()> {
    f.id = *next_id;
    *next_id += 1;
    w.write_all(f.to_line().as_bytes())?;
    w.flush()
}

fn read_raw(r: &mut BufReader<TcpStream>) -> io::Result<Option<Frame>> {
    let mut line = String::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        if !line.trim().is_empty() {
            return Frame::parse(&line).map(Some).map_err(bad);
        }
    }
}

/// Plays one episode, repeating the last chat message it heard back once.
/// Returns the end reason and score.
pub fn run_echo_agent(mut client: Client) -> io::Result<(String, f64)> {
    let mut pending: Option<String> = None;
    while let Some(f) = client.next()? {
        match f.body {
            Body::ChatDelivery { text, .. } => {
                let body = text.split_once(crate::conversation::BOT_TAG).map(|(_, b)| b.to_string()).unwrap_or(text);
                pending = Some(body);
            }
            Body::Poll { .. } => {
                let text = pending.take().unwrap_or_default();
                client.reply(f.id, &text)?;
            }
            Body::EpisodeEnd { reason, score } => return Ok((reason, score)),
            _ => {}
        }
    }
    Err(io::Error::new(io::ErrorKind::UnexpectedEof, "server closed before episode_end"))
}
