//! Party state machines: servers, the randomness dealer and the user.

use super::transport::Endpoint;
use super::wire::{Kind, WireMessage};
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::scheme::{decode, node_answer, Answers, CommonRandomness, QueryPlan, SchemeParams};

fn to_payload(v: &[Fe]) -> Vec<u32> {
    v.iter().map(|e| e.value()).collect()
}

fn from_payload(params: &SchemeParams, msg: &WireMessage) -> Result<Vec<Fe>> {
    if msg.modulus != params.field().modulus() {
        return Err(Error::MalformedFrame(format!(
            "modulus {} does not match session modulus {}",
            msg.modulus,
            params.field().modulus()
        )));
    }
    msg.payload.iter().map(|&v| params.field().canonical(v)).collect()
}

fn message(params: &SchemeParams, kind: Kind, node: usize, round: usize, payload: &[Fe]) -> WireMessage {
    WireMessage {
        kind,
        modulus: params.field().modulus(),
        node: (node + 1) as u16,
        round: round as u16,
        payload: to_payload(payload),
    }
}

/// STORE frame carrying node `n`'s shard.
pub fn store_message(params: &SchemeParams, node: usize, shard: &[Fe]) -> WireMessage {
    message(params, Kind::Store, node, 0, shard)
}

/// Draws `S` and addresses an identical RAND frame to every server.
pub fn dealer_distribute(params: &SchemeParams, seed: u64) -> (CommonRandomness, Vec<WireMessage>) {
    let s = CommonRandomness::from_seed(params, seed);
    let msgs = (0..params.servers()).map(|n| message(params, Kind::Rand, n, 0, s.matrix().entries())).collect();
    (s, msgs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ServerState {
    AwaitingSetup,
    Ready,
}

/// One storage server. Holds its shard and precomputed per-round masks;
/// answers each round's query once.
#[derive(Clone, Debug)]
pub struct ServerNode {
    params: SchemeParams,
    id: usize,
    shard: Option<Vec<Fe>>,
    common: Option<CommonRandomness>,
    masks: Vec<Fe>,
    answered: Vec<bool>,
    pending: Vec<WireMessage>,
}

impl ServerNode {
    pub fn new(params: &SchemeParams, id: usize) -> Self {
        ServerNode {
            params: params.clone(),
            id,
            shard: None,
            common: None,
            masks: Vec::new(),
            answered: vec![false; params.rounds()],
            pending: Vec::new(),
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn state(&self) -> ServerState {
        if self.shard.is_some() && self.common.is_some() {
            ServerState::Ready
        } else {
            ServerState::AwaitingSetup
        }
    }

    pub fn masks(&self) -> &[Fe] {
        &self.masks
    }

    pub fn answered(&self, round: usize) -> bool {
        self.answered[round]
    }

    fn fail(&self, what: impl std::fmt::Display) -> Error {
        Error::TransportFailure(format!("server {}: {what}", self.id + 1))
    }

    /// Processes one inbound message; returns ANSWER frames for the user.
    pub fn handle(&mut self, from: Endpoint, msg: WireMessage) -> Result<Vec<WireMessage>> {
        if msg.node as usize != self.id + 1 {
            return Err(self.fail(format_args!("received a frame addressed to node {}", msg.node)));
        }
        let p = &self.params;
        match (msg.kind, from) {
            (Kind::Store, Endpoint::Owner) => {
                let shard = from_payload(p, &msg)?;
                if shard.len() != p.query_len() {
                    return Err(self.fail("shard has the wrong length"));
                }
                self.shard = Some(shard);
            }
            (Kind::Rand, Endpoint::Dealer) => {
                let s = from_payload(p, &msg)?;
                let matrix = crate::field::FieldMatrix::from_elems(p.field(), p.rounds(), p.mask_len(), s)?;
                let common = CommonRandomness::new(p, matrix)?;
                self.masks = (0..p.rounds()).map(|r| common.node_mask(p, self.id, r)).collect();
                self.common = Some(common);
            }
            (Kind::Query, Endpoint::User) => {
                self.pending.push(msg);
            }
            (kind, from) => return Err(self.fail(format_args!("unexpected {kind} from {from}"))),
        }
        self.flush()
    }

    fn flush(&mut self) -> Result<Vec<WireMessage>> {
        if self.state() != ServerState::Ready {
            return Ok(Vec::new());
        }
        let p = self.params.clone();
        let shard = self.shard.as_ref().expect("ready");
        let common = self.common.as_ref().expect("ready");
        let mut out = Vec::new();
        for msg in std::mem::take(&mut self.pending) {
            let round = msg.round as usize;
            if round == 0 || round > p.rounds() {
                return Err(self.fail(format_args!("round {round} out of range")));
            }
            if self.answered[round - 1] {
                return Err(self.fail(format_args!("round {round} queried twice")));
            }
            let query = from_payload(&p, &msg)?;
            let a = node_answer(&p, self.id, &query, shard, common.round(round - 1))?;
            self.answered[round - 1] = true;
            out.push(message(&p, Kind::Answer, self.id, round, &[a]));
        }
        Ok(out)
    }
}

/// The retrieving user: sends all rounds up front, collects answers, decodes.
#[derive(Clone, Debug)]
pub struct UserClient {
    params: SchemeParams,
    plan: QueryPlan,
    answers: Vec<Vec<Option<Fe>>>,
}

impl UserClient {
    pub fn new(params: &SchemeParams, plan: QueryPlan) -> Self {
        UserClient { params: params.clone(), answers: vec![vec![None; params.servers()]; params.rounds()], plan }
    }

    pub fn plan(&self) -> &QueryPlan {
        &self.plan
    }

    /// `(node, frame)` pairs for every round, round-major.
    pub fn queries(&self) -> Vec<(usize, WireMessage)> {
        let p = &self.params;
        (0..p.rounds())
            .flat_map(|r| (0..p.servers()).map(move |n| (r, n)))
            .map(|(r, n)| (n, message(p, Kind::Query, n, r + 1, self.plan.query(r, n))))
            .collect()
    }

    pub fn handle(&mut self, from: Endpoint, msg: WireMessage) -> Result<()> {
        let Endpoint::Server(n) = from else {
            return Err(Error::TransportFailure(format!("user received a frame from {from}")));
        };
        if msg.kind != Kind::Answer || msg.node as usize != n + 1 {
            return Err(Error::TransportFailure(format!("user received {} from {from}", msg.kind)));
        }
        let round = msg.round as usize;
        if round == 0 || round > self.params.rounds() {
            return Err(Error::TransportFailure(format!("answer for round {round}")));
        }
        let v = from_payload(&self.params, &msg)?;
        let [a] = v[..] else {
            return Err(Error::MalformedFrame("an answer carries exactly one symbol".into()));
        };
        self.answers[round - 1][n] = Some(a);
        Ok(())
    }

    pub fn missing(&self) -> usize {
        self.answers.iter().flatten().filter(|a| a.is_none()).count()
    }

    pub fn finish(&self) -> Result<Vec<Fe>> {
        if self.missing() > 0 {
            return Err(Error::DecodeFailure(format!("{} answers missing", self.missing())));
        }
        let values = self.answers.iter().map(|r| r.iter().map(|a| a.unwrap()).collect()).collect();
        let answers = Answers::new(&self.params, values)?;
        decode(&self.params, &self.plan, &answers).map_err(|e| Error::DecodeFailure(e.to_string()))
    }
}
