//! Session transcripts and their line-oriented text form.
//!
//! ```text
//! # spir-transcript v1 n=2 m=1 t=1 k=2 q=3 want=1 seed=7 database=seeded points=1,2 phi=1,1 psi=1,1
//! owner->server    1    STORE    0e00000001010300...
//! user->server    1    QUERY    1600000003010300...
//! server->user    1    ANSWER    1200000004010300...
//! # decoded 2
//! ```
//!
//! Every message line is `direction TAB node TAB kind TAB hex(frame)`,
//! where `node` is the 1-based server on the other end.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use super::transport::{Endpoint, Envelope};
use super::wire::{decode_message, peek_count, peek_kind, Kind};
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::scheme::{ParamsSpec, SchemeParams};

const MAGIC: &str = "# spir-transcript v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatabaseSource {
    /// Drawn from the session seed; the transcript alone replays the session.
    Seeded,
    /// Supplied by the caller.
    External,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionHeader {
    pub spec: ParamsSpec,
    /// Desired file, 0-based.
    pub want: usize,
    pub seed: u64,
    pub database: DatabaseSource,
}

impl SessionHeader {
    pub fn new(params: &SchemeParams, want: usize, seed: u64, database: DatabaseSource) -> Self {
        let vals = |v: &[Fe]| Some(v.iter().map(|e| e.value() as u64).collect());
        let spec = ParamsSpec {
            n: params.servers(),
            m: params.storage_dim(),
            t: params.collusion(),
            files: params.files(),
            modulus: params.field().modulus(),
            points: vals(params.storage_code().points()),
            phi: vals(params.storage_code().multipliers()),
            psi: vals(params.query_code().multipliers()),
            allow_single_file: params.files() == 1,
        };
        SessionHeader { spec, want, seed, database }
    }

    pub fn params(&self) -> Result<SchemeParams> {
        self.spec.build()
    }
}

/// One frame as it crossed the transport.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoggedMessage(pub Envelope);

impl LoggedMessage {
    pub fn kind(&self) -> Option<Kind> {
        peek_kind(&self.0.frame)
    }

    pub fn to_user(&self) -> bool {
        self.0.to == Endpoint::User
    }

    pub fn payload_len(&self) -> usize {
        peek_count(&self.0.frame)
    }

    pub fn from(&self) -> Endpoint {
        self.0.from
    }

    pub fn to(&self) -> Endpoint {
        self.0.to
    }

    pub fn frame(&self) -> &[u8] {
        &self.0.frame
    }

    /// The server on either end, 0-based.
    pub fn server(&self) -> Option<usize> {
        match (self.0.from, self.0.to) {
            (Endpoint::Server(n), _) | (_, Endpoint::Server(n)) => Some(n),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub messages: usize,
    pub bytes_to_servers: usize,
    pub bytes_to_user: usize,
    pub symbols_downloaded: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    header: SessionHeader,
    messages: Vec<LoggedMessage>,
    decoded: Option<Vec<Fe>>,
}

impl Transcript {
    pub fn new(header: SessionHeader) -> Self {
        Transcript { header, messages: Vec::new(), decoded: None }
    }

    pub(crate) fn record(&mut self, envelope: Envelope) {
        self.messages.push(LoggedMessage(envelope));
    }

    pub(crate) fn set_decoded(&mut self, file: Vec<Fe>) {
        self.decoded = Some(file);
    }

    pub fn header(&self) -> &SessionHeader {
        &self.header
    }

    pub fn messages(&self) -> &[LoggedMessage] {
        &self.messages
    }

    pub fn decoded(&self) -> Option<&[Fe]> {
        self.decoded.as_deref()
    }

    /// Messages delivered to `at`, in send order.
    pub fn inbound(&self, at: Endpoint) -> impl Iterator<Item = &LoggedMessage> {
        self.messages.iter().filter(move |m| m.to() == at)
    }

    pub fn counters(&self) -> Counters {
        let mut c = Counters { messages: self.messages.len(), ..Counters::default() };
        for m in &self.messages {
            match m.to() {
                Endpoint::User => {
                    c.bytes_to_user += m.frame().len();
                    if m.kind() == Some(Kind::Answer) {
                        c.symbols_downloaded += m.payload_len();
                    }
                }
                Endpoint::Server(_) => c.bytes_to_servers += m.frame().len(),
                _ => {}
            }
        }
        c
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let join = |v: &Option<Vec<u64>>| {
            v.as_ref().map(|v| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")).unwrap_or_default()
        };
        let mut out = format!(
            "{MAGIC} n={} m={} t={} k={} q={} want={} seed={} database={} points={} phi={} psi={}\n",
            h.spec.n,
            h.spec.m,
            h.spec.t,
            h.spec.files,
            h.spec.modulus,
            h.want + 1,
            h.seed,
            match h.database {
                DatabaseSource::Seeded => "seeded",
                DatabaseSource::External => "external",
            },
            join(&h.spec.points),
            join(&h.spec.phi),
            join(&h.spec.psi),
        );
        for m in &self.messages {
            let kind = m.kind().map_or("?", Kind::name);
            let node = m.server().map_or(0, |n| n + 1);
            let _ = writeln!(out, "{}->{}\t{node}\t{kind}\t{}", m.from().role(), m.to().role(), hex::encode(m.frame()));
        }
        if let Some(file) = &self.decoded {
            let vals: Vec<String> = file.iter().map(Fe::to_string).collect();
            let _ = writeln!(out, "# decoded {}", vals.join(","));
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_text().as_bytes())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let bad = |what: String| Error::MalformedFrame(format!("transcript: {what}"));
        let first = lines.next().ok_or_else(|| bad("empty".into()))?.map_err(|e| bad(e.to_string()))?;
        let header = parse_header(&first).ok_or_else(|| bad(format!("bad header `{first}`")))?;
        let params = header.params()?;
        let mut t = Transcript::new(header);
        for line in lines {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# decoded") {
                let file = rest
                    .trim()
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        let v: u32 = s.parse().map_err(|_| bad(format!("bad symbol `{s}`")))?;
                        params.field().canonical(v)
                    })
                    .collect::<Result<Vec<_>>>()?;
                t.set_decoded(file);
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [direction, node, kind, frame] = cols[..] else {
                return Err(bad(format!("expected 4 columns in `{line}`")));
            };
            let node: usize = node.parse().map_err(|_| bad(format!("bad node `{node}`")))?;
            let (from, to) = direction.split_once("->").ok_or_else(|| bad(format!("bad direction `{direction}`")))?;
            let endpoint = |role: &str| -> Result<Endpoint> {
                Ok(match role {
                    "user" => Endpoint::User,
                    "dealer" => Endpoint::Dealer,
                    "owner" => Endpoint::Owner,
                    "server" if node >= 1 => Endpoint::Server(node - 1),
                    _ => return Err(bad(format!("bad endpoint `{role}`"))),
                })
            };
            let frame = hex::decode(frame).map_err(|e| bad(e.to_string()))?;
            let msg = decode_message(&frame)?;
            if Kind::from_name(kind) != Some(msg.kind) {
                return Err(bad(format!("kind column `{kind}` disagrees with frame")));
            }
            t.record(Envelope { from: endpoint(from)?, to: endpoint(to)?, frame });
        }
        Ok(t)
    }
}

fn parse_header(line: &str) -> Option<SessionHeader> {
    let rest = line.strip_prefix(MAGIC)?;
    let mut spec = ParamsSpec::default();
    let (mut want, mut seed, mut database) = (None, None, DatabaseSource::External);
    let list = |v: &str| -> Option<Option<Vec<u64>>> {
        if v.is_empty() {
            return Some(None);
        }
        v.split(',').map(|x| x.parse().ok()).collect::<Option<Vec<u64>>>().map(Some)
    };
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=')?;
        match k {
            "n" => spec.n = v.parse().ok()?,
            "m" => spec.m = v.parse().ok()?,
            "t" => spec.t = v.parse().ok()?,
            "k" => spec.files = v.parse().ok()?,
            "q" => spec.modulus = v.parse().ok()?,
            "want" => want = v.parse::<usize>().ok()?.checked_sub(1),
            "seed" => seed = v.parse().ok(),
            "database" => {
                database = match v {
                    "seeded" => DatabaseSource::Seeded,
                    "external" => DatabaseSource::External,
                    _ => return None,
                }
            }
            "points" => spec.points = list(v)?,
            "phi" => spec.phi = list(v)?,
            "psi" => spec.psi = list(v)?,
            _ => return None,
        }
    }
    spec.allow_single_file = spec.files == 1;
    Some(SessionHeader { spec, want: want?, seed: seed?, database })
}
