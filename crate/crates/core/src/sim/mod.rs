//! Message-passing execution of the protocol.
//!
//! The owner pushes shards, a trusted dealer hands every server the same
//! common randomness `S` (never the user), and the user sends all `M`
//! rounds of queries at once; queries are non-adaptive so servers may see
//! rounds in any order. Every frame crosses a [`Transport`] and is
//! recorded in the session [`Transcript`].

mod node;
mod transcript;
mod transport;
mod wire;

pub use node::{dealer_distribute, store_message, ServerNode, ServerState, UserClient};
pub use transcript::{Counters, DatabaseSource, LoggedMessage, SessionHeader, Transcript};
pub use transport::{Endpoint, Envelope, Loopback, Transport};
pub use wire::{
    decode_message, encode_message, peek_count, peek_kind, Kind, WireMessage, HEADER_LEN, PROTOCOL_VERSION,
};

use crate::error::{Error, Result};
use crate::field::Fe;
use crate::rng;
use crate::scheme::{encode_storage, Database, QueryPlan, SchemeParams};

/// The database a seeded session draws when none is supplied.
pub fn seeded_database(params: &SchemeParams, seed: u64) -> Database {
    Database::random(params, &mut rng::stream(seed, rng::DATABASE_STREAM))
}

struct Recorder<'a, T: Transport> {
    transport: &'a mut T,
    transcript: Transcript,
}

impl<T: Transport> Recorder<'_, T> {
    fn send(&mut self, from: Endpoint, to: Endpoint, msg: &WireMessage) -> Result<()> {
        let envelope = Envelope { from, to, frame: encode_message(msg)? };
        self.transport.send(envelope.clone())?;
        self.transcript.record(envelope);
        Ok(())
    }
}

/// Runs one retrieval of file `want` (0-based) over `transport`.
pub fn run_session<T: Transport>(
    params: &SchemeParams,
    db: &Database,
    want: usize,
    seed: u64,
    transport: &mut T,
) -> Result<Transcript> {
    let header = SessionHeader::new(params, want, seed, DatabaseSource::External);
    execute(params, db, header, transport)
}

/// Like [`run_session`] with the database drawn from `seed`.
pub fn run_seeded_session<T: Transport>(
    params: &SchemeParams,
    want: usize,
    seed: u64,
    transport: &mut T,
) -> Result<Transcript> {
    let db = seeded_database(params, seed);
    let header = SessionHeader::new(params, want, seed, DatabaseSource::Seeded);
    execute(params, &db, header, transport)
}

/// Re-executes a seeded-database transcript on a fresh loopback transport.
pub fn replay(transcript: &Transcript) -> Result<Transcript> {
    let h = transcript.header();
    if h.database != DatabaseSource::Seeded {
        return Err(Error::IncompleteTranscript("database was supplied externally".into()));
    }
    run_seeded_session(&h.params()?, h.want, h.seed, &mut Loopback::new())
}

fn execute<T: Transport>(
    params: &SchemeParams,
    db: &Database,
    header: SessionHeader,
    transport: &mut T,
) -> Result<Transcript> {
    params.check_file(header.want)?;
    let seed = header.seed;
    let mut rec = Recorder { transport, transcript: Transcript::new(header.clone()) };
    let storage = encode_storage(params, db)?;
    let mut servers: Vec<ServerNode> = (0..params.servers()).map(|n| ServerNode::new(params, n)).collect();

    for n in 0..params.servers() {
        rec.send(Endpoint::Owner, Endpoint::Server(n), &store_message(params, n, &storage.shard(n)))?;
    }
    let (_, rand_msgs) = dealer_distribute(params, seed);
    for (n, msg) in rand_msgs.iter().enumerate() {
        rec.send(Endpoint::Dealer, Endpoint::Server(n), msg)?;
    }
    let plan = QueryPlan::from_seed(params, header.want, seed)?;
    let mut user = UserClient::new(params, plan);
    for (n, msg) in user.queries() {
        rec.send(Endpoint::User, Endpoint::Server(n), &msg)?;
    }

    loop {
        let mut progressed = false;
        for server in servers.iter_mut() {
            let at = Endpoint::Server(server.id());
            while let Some(env) = rec.transport.recv(at) {
                progressed = true;
                for reply in server.handle(env.from, decode_message(&env.frame)?)? {
                    rec.send(at, Endpoint::User, &reply)?;
                }
            }
        }
        while let Some(env) = rec.transport.recv(Endpoint::User) {
            progressed = true;
            user.handle(env.from, decode_message(&env.frame)?)?;
        }
        if !progressed {
            break;
        }
    }
    let file = user.finish()?;
    rec.transcript.set_decoded(file);
    Ok(rec.transcript)
}

/// Retrieves a file stored as `B` independent blocks, one session each with
/// fresh common randomness. Returns the concatenated file and transcripts.
pub fn retrieve_blocks(
    params: &SchemeParams,
    blocks: &[Database],
    want: usize,
    seed: u64,
) -> Result<(Vec<Fe>, Vec<Transcript>)> {
    let mut file = Vec::with_capacity(blocks.len() * params.file_len());
    let mut transcripts = Vec::with_capacity(blocks.len());
    for (b, db) in blocks.iter().enumerate() {
        let t = run_session(params, db, want, rng::block_seed(seed, b as u64), &mut Loopback::new())?;
        file.extend_from_slice(t.decoded().expect("session decoded"));
        transcripts.push(t);
    }
    Ok((file, transcripts))
}

/// Checks the routing invariants of a transcript: servers only hear from
/// the owner, dealer and user, every frame is addressed to its recipient,
/// and the user never receives RAND frames.
pub fn check_isolation(transcript: &Transcript) -> std::result::Result<(), String> {
    for m in transcript.messages() {
        let msg = decode_message(m.frame()).map_err(|e| e.to_string())?;
        match m.to() {
            Endpoint::Server(n) => {
                if msg.node as usize != n + 1 {
                    return Err(format!("server {} received a frame for node {}", n + 1, msg.node));
                }
                let ok = matches!(
                    (m.from(), msg.kind),
                    (Endpoint::Owner, Kind::Store) | (Endpoint::Dealer, Kind::Rand) | (Endpoint::User, Kind::Query)
                );
                if !ok {
                    return Err(format!("server {} received {} from {}", n + 1, msg.kind, m.from()));
                }
            }
            Endpoint::User => {
                if msg.kind != Kind::Answer || !matches!(m.from(), Endpoint::Server(_)) {
                    return Err(format!("user received {} from {}", msg.kind, m.from()));
                }
            }
            other => return Err(format!("unexpected recipient {other}")),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn micro_session() {
        let p = SchemeParams::new(2, 1, 1, 2, 3).unwrap();
        let f = p.field();
        let db = Database::from_files(&p, &[vec![f.elem(2)], vec![f.elem(1)]]).unwrap();
        let t = run_session(&p, &db, 0, 7, &mut Loopback::new()).unwrap();
        assert_eq!(t.decoded(), Some(&[f.elem(2)][..]));
        let queries = t.messages().iter().filter(|m| m.kind() == Some(Kind::Query)).count();
        assert_eq!(queries, 2);
        assert_eq!(t.counters().symbols_downloaded, 2);
        check_isolation(&t).unwrap();
    }

    #[test]
    fn unreachable_server() {
        let p = SchemeParams::new(4, 2, 2, 2, 5).unwrap();
        let mut tr = Loopback::new();
        tr.take_down(2);
        assert!(matches!(run_seeded_session(&p, 0, 1, &mut tr), Err(Error::TransportFailure(_))));
    }

    #[test]
    fn out_of_order_delivery_still_decodes() {
        let p = SchemeParams::new(6, 3, 1, 2, 0).unwrap();
        for want in 0..2 {
            let db = seeded_database(&p, 4);
            let t = run_session(&p, &db, want, 4, &mut Loopback::reversed()).unwrap();
            assert_eq!(t.decoded().unwrap(), db.file(&p, want));
        }
    }

    #[test]
    fn dealer_sends_identical_payloads() {
        let p = SchemeParams::new(4, 2, 2, 2, 5).unwrap();
        let (s, msgs) = dealer_distribute(&p, 9);
        assert_eq!(s.matrix().entries().len(), 6);
        assert_eq!(msgs.len(), 4);
        assert!(msgs.iter().all(|m| m.payload == msgs[0].payload && m.kind == Kind::Rand));
        assert_eq!(dealer_distribute(&p, 9).0, s);
    }

    #[test]
    fn server_rejects_protocol_violations() {
        let p = SchemeParams::new(2, 1, 1, 2, 3).unwrap();
        let mut server = ServerNode::new(&p, 0);
        let q = WireMessage { kind: Kind::Query, modulus: 3, node: 1, round: 1, payload: vec![0, 0] };
        // buffered until setup completes
        assert!(server.handle(Endpoint::User, q.clone()).unwrap().is_empty());
        assert!(server.handle(Endpoint::User, WireMessage { node: 2, ..q.clone() }).is_err());
        assert!(server.handle(Endpoint::Owner, WireMessage { kind: Kind::Rand, ..q.clone() }).is_err());
        let store = WireMessage { kind: Kind::Store, modulus: 3, node: 1, round: 0, payload: vec![1, 2] };
        server.handle(Endpoint::Owner, store).unwrap();
        let rand = WireMessage { kind: Kind::Rand, modulus: 3, node: 1, round: 0, payload: vec![1] };
        let out = server.handle(Endpoint::Dealer, rand).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].payload, vec![1]);
        assert_eq!(server.state(), ServerState::Ready);
        assert!(server.handle(Endpoint::User, q).is_err(), "second query for the same round");
    }

    #[test]
    fn transcript_text_roundtrip() {
        let p = SchemeParams::new(4, 2, 2, 2, 5).unwrap();
        let t = run_seeded_session(&p, 1, 42, &mut Loopback::new()).unwrap();
        let text = t.to_text();
        assert!(text.starts_with("# spir-transcript v1 n=4 m=2 t=2 k=2 q=5 want=2 seed=42"));
        let back = Transcript::read_from(text.as_bytes()).unwrap();
        assert_eq!(back, t);
        assert_eq!(replay(&back).unwrap(), t);
    }

    #[test]
    fn multi_block_file() {
        let p = SchemeParams::new(5, 2, 1, 3, 0).unwrap();
        let blocks: Vec<Database> = (0..4).map(|b| seeded_database(&p, 100 + b)).collect();
        let (file, transcripts) = retrieve_blocks(&p, &blocks, 2, 8).unwrap();
        let expect: Vec<Fe> = blocks.iter().flat_map(|db| db.file(&p, 2)).collect();
        assert_eq!(file, expect);
        let rands: Vec<Vec<u8>> = transcripts
            .iter()
            .map(|t| t.messages().iter().find(|m| m.kind() == Some(Kind::Rand)).unwrap().frame().to_vec())
            .collect();
        assert!(rands.windows(2).any(|w| w[0] != w[1]), "fresh S per block");
    }
}
