//! Line transports: in-process agents, channels and TCP.

use std::collections::VecDeque;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::Duration;

/// One side of a line-oriented connection.
pub trait Endpoint: Send {
    fn send(&mut self, line: &str) -> io::Result<()>;

    /// The next line, waiting at most `wait`. `Ok(None)` when nothing
    /// arrived in time; an error once the peer is gone.
    fn recv(&mut self, wait: Duration) -> io::Result<Option<String>>;

    /// Called by a lockstep match loop before it reads the lines of a tick.
    fn on_tick(&mut self, _tick: u64) {}
}

/// A synchronous agent driven directly by the match loop.
pub trait Agent: Send {
    /// Lines sent right after connecting.
    fn connect(&mut self) -> Vec<String>;
    /// Lines sent at the start of a tick, once the match has started.
    fn on_tick(&mut self, tick: u64) -> Vec<String>;
    /// Lines sent in response to a server line.
    fn on_message(&mut self, line: &str) -> Vec<String>;
}

/// In-process transport for an [`Agent`]. Everything happens on the
/// caller's thread, so a match between local agents is fully deterministic.
pub struct LocalEndpoint<A> {
    agent: A,
    outbox: VecDeque<String>,
    started: bool,
}

impl<A: Agent> LocalEndpoint<A> {
    pub fn new(mut agent: A) -> Self {
        let outbox = agent.connect().into();
        Self { agent, outbox, started: false }
    }

    pub fn agent(&self) -> &A {
        &self.agent
    }
}

impl<A: Agent> Endpoint for LocalEndpoint<A> {
    fn send(&mut self, line: &str) -> io::Result<()> {
        for l in line.lines() {
            if l == "START" {
                self.started = true;
            }
            let replies = self.agent.on_message(l);
            self.outbox.extend(replies);
        }
        Ok(())
    }

    fn recv(&mut self, _wait: Duration) -> io::Result<Option<String>> {
        Ok(self.outbox.pop_front())
    }

    fn on_tick(&mut self, tick: u64) {
        if self.started {
            let lines = self.agent.on_tick(tick);
            self.outbox.extend(lines);
        }
    }
}

/// One end of an in-process channel pair.
pub struct ChannelEndpoint {
    tx: Sender<String>,
    rx: Receiver<String>,
}

/// Two connected channel endpoints.
pub fn channel_pair() -> (ChannelEndpoint, ChannelEndpoint) {
    let (a_tx, a_rx) = mpsc::channel();
    let (b_tx, b_rx) = mpsc::channel();
    (ChannelEndpoint { tx: a_tx, rx: b_rx }, ChannelEndpoint { tx: b_tx, rx: a_rx })
}

fn disconnected() -> io::Error {
    io::Error::new(io::ErrorKind::UnexpectedEof, "peer disconnected")
}

fn recv_from(rx: &Receiver<String>, wait: Duration) -> io::Result<Option<String>> {
    match rx.recv_timeout(wait) {
        Ok(line) => Ok(Some(line)),
        Err(RecvTimeoutError::Timeout) => Ok(None),
        Err(RecvTimeoutError::Disconnected) => Err(disconnected()),
    }
}

impl Endpoint for ChannelEndpoint {
    fn send(&mut self, line: &str) -> io::Result<()> {
        for l in line.lines() {
            self.tx.send(l.to_string()).map_err(|_| disconnected())?;
        }
        Ok(())
    }

    fn recv(&mut self, wait: Duration) -> io::Result<Option<String>> {
        recv_from(&self.rx, wait)
    }
}

/// A TCP connection. A reader thread feeds incoming lines into a queue so
/// the owner never blocks on the socket.
pub struct TcpEndpoint {
    writer: TcpStream,
    rx: Receiver<String>,
}

impl TcpEndpoint {
    pub fn new(stream: TcpStream) -> io::Result<Self> {
        let reader = BufReader::new(stream.try_clone()?);
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in reader.lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { writer: stream, rx })
    }

    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        Self::new(TcpStream::connect(addr)?)
    }
}

impl Endpoint for TcpEndpoint {
    fn send(&mut self, line: &str) -> io::Result<()> {
        let mut text = line.to_string();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        self.writer.write_all(text.as_bytes())?;
        self.writer.flush()
    }

    fn recv(&mut self, wait: Duration) -> io::Result<Option<String>> {
        recv_from(&self.rx, wait).map(|l| l.map(|l| l.trim_end_matches('\r').to_string()))
    }
}

/// Drives an [`Agent`] over a remote endpoint until GAMEOVER or
/// disconnection. Ticks are learned by polling UPDATE; the agent sees each
/// tick once, in order. Returns the GAMEOVER line, if one arrived.
pub fn run_remote_agent<A: Agent>(agent: &mut A, endpoint: &mut dyn Endpoint, poll: Duration) -> io::Result<Option<String>> {
    let mut out: VecDeque<String> = agent.connect().into();
    let mut started = false;
    let mut next_tick = 0u64;
    let mut awaiting_update = false;
    let mut block: Option<String> = None;
    loop {
        while let Some(line) = out.pop_front() {
            endpoint.send(&line)?;
        }
        if started && !awaiting_update {
            endpoint.send("UPDATE")?;
            awaiting_update = true;
        }
        let Some(line) = endpoint.recv(poll)? else { continue };
        if let Some(b) = block.as_mut() {
            b.push_str(&line);
            b.push('\n');
            if line.trim() == crate::update::UPDATE_END {
                let text = block.take().unwrap_or_default();
                awaiting_update = false;
                if let Ok((tick, _)) = crate::update::decode_update(&text) {
                    while next_tick <= tick {
                        out.extend(agent.on_tick(next_tick));
                        next_tick += 1;
                    }
                }
                for l in text.lines() {
                    out.extend(agent.on_message(l));
                }
            }
            continue;
        }
        if line.starts_with(crate::update::UPDATE_BEGIN) {
            block = Some(format!("{line}\n"));
            continue;
        }
        if line == "START" {
            started = true;
        }
        out.extend(agent.on_message(&line));
        if line.starts_with("GAMEOVER") {
            return Ok(Some(line));
        }
        if line.starts_with("ERR ProtocolViolation") {
            return Ok(None);
        }
    }
}
