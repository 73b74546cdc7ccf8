use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    User,
    /// Holder of the common randomness.
    Dealer,
    /// Database owner; pushes shards to the servers.
    Owner,
    /// Server `n` (0-based).
    Server(usize),
}

impl Endpoint {
    pub fn role(self) -> &'static str {
        match self {
            Endpoint::User => "user",
            Endpoint::Dealer => "dealer",
            Endpoint::Owner => "owner",
            Endpoint::Server(_) => "server",
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Server(n) => write!(f, "server{}", n + 1),
            other => f.write_str(other.role()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub from: Endpoint,
    pub to: Endpoint,
    pub frame: Vec<u8>,
}

pub trait Transport {
    fn send(&mut self, envelope: Envelope) -> Result<()>;
    fn recv(&mut self, at: Endpoint) -> Option<Envelope>;
}

/// In-memory transport with one queue per endpoint.
#[derive(Debug, Default)]
pub struct Loopback {
    queues: BTreeMap<Endpoint, VecDeque<Envelope>>,
    down: BTreeSet<usize>,
    lifo: bool,
}

impl Loopback {
    pub fn new() -> Self {
        Self::default()
    }

    /// Delivers newest-first, so later rounds reach servers before earlier ones.
    pub fn reversed() -> Self {
        Loopback { lifo: true, ..Self::default() }
    }

    /// Makes server `n` unreachable.
    pub fn take_down(&mut self, n: usize) {
        self.down.insert(n);
    }

    pub fn pending(&self) -> usize {
        self.queues.values().map(VecDeque::len).sum()
    }
}

impl Transport for Loopback {
    fn send(&mut self, envelope: Envelope) -> Result<()> {
        if let Endpoint::Server(n) = envelope.to {
            if self.down.contains(&n) {
                return Err(Error::TransportFailure(format!("server {} is unreachable", n + 1)));
            }
        }
        self.queues.entry(envelope.to).or_default().push_back(envelope);
        Ok(())
    }

    fn recv(&mut self, at: Endpoint) -> Option<Envelope> {
        let q = self.queues.get_mut(&at)?;
        if self.lifo {
            q.pop_back()
        } else {
            q.pop_front()
        }
    }
}
