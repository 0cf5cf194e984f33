//! Slot-level synchronization simulator.
//!
//! Every node starts holding its own block. Each time slot one node
//! broadcasts one packet to all of its neighbours. With probability `pe` the
//! transmission is lost (by default for every receiver at once, see
//! [`LossModel`]); otherwise each neighbour classifies the packet and peels or
//! stores whatever it can. The run ends when every node holds every
//! block or the slot budget is exhausted.
//!
//! The cyclic schemes visit nodes in ascending id order. A node whose best
//! packet helps nobody is skipped without consuming a slot. Node selection
//! gives every slot to the best-scoring node instead.
//!
//! `op_count` is a relative complexity measure, not a FLOP count:
//!
//! - one per payload byte XORed while encoding or decoding,
//! - one per set-membership test while building pools and classifying,
//! - `|subset| * m_n` per subset evaluated during block selection.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::IdSet;
use crate::coding::{
    self, BlockId, BlockStore, Classification, KnowledgeSet, Packet, DEFAULT_PAYLOAD_LEN,
};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::selection::{self, DbsResult};
use crate::topology::{NodeId, Topology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Uncoded TDMA with single-block selection.
    #[serde(rename = "U_DBS")]
    UDbs,
    /// XOR-coded TDMA with block-subset selection.
    #[serde(rename = "C_DBS")]
    CDbs,
    /// XOR coding with block selection and per-slot node selection.
    #[serde(rename = "C_DBS_NS")]
    CDbsNs,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::UDbs, Scheme::CDbs, Scheme::CDbsNs];

    /// Name used in CSV output.
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::UDbs => "U_DBS",
            Scheme::CDbs => "C_DBS",
            Scheme::CDbsNs => "C_DBS_NS",
        }
    }

    /// Name used on the command line.
    pub fn flag_name(self) -> &'static str {
        match self {
            Scheme::UDbs => "u-dbs",
            Scheme::CDbs => "c-dbs",
            Scheme::CDbsNs => "c-dbs-ns",
        }
    }

    pub fn is_cyclic(self) -> bool {
        !matches!(self, Scheme::CDbsNs)
    }

    pub fn is_coded(self) -> bool {
        !matches!(self, Scheme::UDbs)
    }

    pub(crate) fn stream_tag(self) -> u64 {
        match self {
            Scheme::UDbs => 1,
            Scheme::CDbs => 2,
            Scheme::CDbsNs => 3,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| s.eq_ignore_ascii_case(sc.flag_name()) || s.eq_ignore_ascii_case(sc.tag()))
            .ok_or_else(|| {
                Error::param(
                    "scheme",
                    format!("unknown scheme `{s}` (u-dbs, c-dbs, c-dbs-ns)"),
                )
            })
    }
}

/// How packet loss is drawn for one broadcast.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossModel {
    /// One draw per broadcast: with probability `pe` every receiver loses it.
    #[default]
    PerBroadcast,
    /// Each receiver independently loses the packet with probability `pe`.
    PerReceiver,
}

impl FromStr for LossModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "per_receiver" => Ok(LossModel::PerReceiver),
            "per_broadcast" => Ok(LossModel::PerBroadcast),
            _ => Err(Error::param(
                "loss",
                format!("unknown loss model `{s}` (per-receiver, per-broadcast)"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub scheme: Scheme,
    /// Per-hop packet error rate.
    pub pe: f64,
    pub loss: LossModel,
    pub payload_len: usize,
    pub max_slots: u32,
    pub seed: u64,
}

impl SimConfig {
    /// Default payload length and a slot budget of `10 * n^2`.
    pub fn new(scheme: Scheme, n: usize, pe: f64, seed: u64) -> Self {
        SimConfig {
            scheme,
            pe,
            loss: LossModel::PerBroadcast,
            payload_len: DEFAULT_PAYLOAD_LEN,
            max_slots: default_max_slots(n),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.pe) {
            return Err(Error::param(
                "pe",
                format!("must lie in [0, 1], got {}", self.pe),
            ));
        }
        if self.max_slots == 0 {
            return Err(Error::param("max_slots", "must be at least 1"));
        }
        Ok(())
    }
}

pub fn default_max_slots(n: usize) -> u32 {
    (10 * n * n) as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Lost,
    AlreadyKnown,
    Decoded(BlockId),
    Undecodable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotEvent {
    /// 1-based slot number.
    pub slot: u32,
    pub tx: NodeId,
    pub components: IdSet,
    /// Neighbours the transmitter expected to help.
    pub beta: usize,
    /// One entry per neighbour of `tx`, ascending.
    pub outcomes: Vec<(NodeId, Outcome)>,
}

#[derive(Serialize, Deserialize)]
struct TraceOutcome {
    rx: usize,
    result: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    block: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct TraceLine {
    slot: u32,
    tx: usize,
    components: Vec<usize>,
    beta: usize,
    outcomes: Vec<TraceOutcome>,
}

impl SlotEvent {
    /// One JSON object: `{"slot", "tx", "components", "beta", "outcomes": [{"rx", "result", "block"?}]}`.
    pub fn to_json_line(&self) -> String {
        let line = TraceLine {
            slot: self.slot,
            tx: self.tx.0,
            components: self.components.to_vec(),
            beta: self.beta,
            outcomes: self
                .outcomes
                .iter()
                .map(|&(rx, o)| {
                    let (result, block) = match o {
                        Outcome::Lost => ("lost", None),
                        Outcome::AlreadyKnown => ("already_known", None),
                        Outcome::Decoded(b) => ("decoded", Some(b.0)),
                        Outcome::Undecodable => ("undecodable", None),
                    };
                    TraceOutcome {
                        rx: rx.0,
                        result: result.to_owned(),
                        block,
                    }
                })
                .collect(),
        };
        serde_json::to_string(&line).expect("trace line serializes")
    }

    pub fn from_json_line(s: &str) -> Result<Self> {
        let line: TraceLine = serde_json::from_str(s)?;
        let outcomes = line
            .outcomes
            .into_iter()
            .map(|o| {
                let outcome = match (o.result.as_str(), o.block) {
                    ("lost", _) => Outcome::Lost,
                    ("already_known", _) => Outcome::AlreadyKnown,
                    ("undecodable", _) => Outcome::Undecodable,
                    ("decoded", Some(b)) => Outcome::Decoded(BlockId(b)),
                    (other, _) => {
                        return Err(Error::param(
                            "result",
                            format!("bad trace outcome `{other}`"),
                        ))
                    }
                };
                Ok((NodeId(o.rx), outcome))
            })
            .collect::<Result<_>>()?;
        Ok(SlotEvent {
            slot: line.slot,
            tx: NodeId(line.tx),
            components: line.components.into_iter().collect(),
            beta: line.beta,
            outcomes,
        })
    }
}

/// Writes one JSON line per event.
pub fn write_trace<W: Write>(events: &[SlotEvent], mut w: W) -> std::io::Result<()> {
    for e in events {
        writeln!(w, "{}", e.to_json_line())?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub slots: u32,
    pub converged: bool,
    pub events: Vec<SlotEvent>,
    pub op_count: u64,
    /// TDMA turns passed over because the node could help nobody. Always 0
    /// under node selection.
    pub skipped_turns: u32,
    pub final_knowledge: Vec<KnowledgeSet>,
}

/// Mutable state of one run.
pub struct Simulation<'a> {
    topology: &'a Topology,
    store: &'a BlockStore,
    cfg: SimConfig,
    knowledge: Vec<KnowledgeSet>,
    universe: IdSet,
    cursor: usize,
    ops: u64,
    events: Vec<SlotEvent>,
    rng: Stream,
}

impl<'a> Simulation<'a> {
    /// Initial state: every node holds only its own block.
    pub fn new(topology: &'a Topology, cfg: SimConfig, store: &'a BlockStore) -> Result<Self> {
        cfg.validate()?;
        if !topology.is_connected() {
            return Err(Error::Disconnected);
        }
        let n = topology.node_count();
        if store.len() != n {
            return Err(Error::param(
                "store",
                format!("need one block per node ({n}), store has {}", store.len()),
            ));
        }
        if store.payload_len() != cfg.payload_len {
            return Err(Error::PayloadLength {
                expected: cfg.payload_len,
                actual: store.payload_len(),
            });
        }
        Ok(Simulation {
            topology,
            store,
            cfg,
            knowledge: topology.nodes().map(KnowledgeSet::new).collect(),
            universe: IdSet::full(n),
            cursor: 0,
            ops: 0,
            events: Vec::new(),
            rng: rng::stream(cfg.seed, &[]),
        })
    }

    pub fn knowledge(&self) -> &[KnowledgeSet] {
        &self.knowledge
    }

    pub fn events(&self) -> &[SlotEvent] {
        &self.events
    }

    pub fn slots(&self) -> u32 {
        self.events.len() as u32
    }

    pub fn op_count(&self) -> u64 {
        self.ops
    }

    pub fn is_synchronized(&self) -> bool {
        self.knowledge.iter().all(|k| k.held() == self.universe)
    }

    /// Next TDMA turn. Returns `None` (a skip, no slot consumed) when the
    /// current node can help no neighbour.
    pub fn step_cyclic(&mut self) -> Result<Option<SlotEvent>> {
        if !self.cfg.scheme.is_cyclic() {
            return Err(Error::Contract(format!(
                "{} has no TDMA cycle",
                self.cfg.scheme
            )));
        }
        let tx = NodeId(self.cursor);
        self.cursor = (self.cursor + 1) % self.topology.node_count();
        let choice = match self.cfg.scheme {
            Scheme::UDbs => selection::dbs_single(tx, &self.knowledge, self.topology),
            _ => selection::dbs(tx, &self.knowledge, self.topology),
        };
        self.ops += choice.ops;
        if choice.beta == 0 {
            return Ok(None);
        }
        self.transmit(tx, &choice).map(Some)
    }

    /// Gives the slot to the node-selection winner.
    pub fn step_ns(&mut self) -> Result<SlotEvent> {
        if self.is_synchronized() {
            return Err(Error::Contract(
                "step requested after synchronization".into(),
            ));
        }
        let sel = selection::ns(&self.knowledge, self.topology);
        self.ops += sel.ops;
        let choice = *sel.winner();
        if choice.beta == 0 {
            return Err(Error::Contract("no node can help any neighbour".into()));
        }
        self.transmit(sel.chosen_node, &choice)
    }

    fn transmit(&mut self, tx: NodeId, choice: &DbsResult) -> Result<SlotEvent> {
        let packet = coding::encode(choice.chosen, self.store)?;
        self.ops += (self.store.payload_len() * choice.chosen.len()) as u64;
        let outcomes = self.apply_broadcast(tx, &packet)?;
        let event = SlotEvent {
            slot: self.slots() + 1,
            tx,
            components: choice.chosen,
            beta: choice.beta,
            outcomes,
        };
        self.events.push(event.clone());
        Ok(event)
    }

    /// Delivers `packet` from `tx` to each neighbour, with independent loss.
    /// Updates knowledge sets in place; does not consume a slot by itself.
    pub fn apply_broadcast(
        &mut self,
        tx: NodeId,
        packet: &Packet,
    ) -> Result<Vec<(NodeId, Outcome)>> {
        let mut outcomes = Vec::with_capacity(self.topology.degree(tx));
        let all_lost = match self.cfg.loss {
            LossModel::PerBroadcast => self.rng.gen::<f64>() < self.cfg.pe,
            LossModel::PerReceiver => false,
        };
        for rx in self.topology.neighbors(tx) {
            let lost = match self.cfg.loss {
                LossModel::PerReceiver => self.rng.gen::<f64>() < self.cfg.pe,
                LossModel::PerBroadcast => all_lost,
            };
            if lost {
                outcomes.push((NodeId(rx), Outcome::Lost));
                continue;
            }
            let k = &mut self.knowledge[rx];
            self.ops += packet.components().len() as u64;
            let outcome = match coding::classify(packet, k) {
                Classification::AlreadyKnown => Outcome::AlreadyKnown,
                Classification::Undecodable(_) => Outcome::Undecodable,
                Classification::Decodable(_) => {
                    self.ops += (self.store.payload_len()
                        * packet.components().intersection(k.held()).len())
                        as u64;
                    let (block, payload) = coding::decode(packet, k, self.store)?;
                    if payload != self.store.payload(block)? {
                        return Err(Error::CorruptDecode {
                            block: block.0,
                            node: rx,
                        });
                    }
                    k.insert(block);
                    Outcome::Decoded(block)
                }
            };
            outcomes.push((NodeId(rx), outcome));
        }
        Ok(outcomes)
    }

    pub fn run_to_end(mut self) -> Result<SimResult> {
        let n = self.topology.node_count();
        let mut idle_turns = 0;
        let mut skipped_turns = 0;
        while !self.is_synchronized() && self.slots() < self.cfg.max_slots {
            if self.cfg.scheme.is_cyclic() {
                match self.step_cyclic()? {
                    Some(_) => idle_turns = 0,
                    None => {
                        idle_turns += 1;
                        skipped_turns += 1;
                        if idle_turns >= n {
                            break;
                        }
                    }
                }
            } else {
                self.step_ns()?;
            }
        }
        Ok(SimResult {
            slots: self.slots(),
            converged: self.is_synchronized(),
            events: self.events,
            op_count: self.ops,
            skipped_turns,
            final_knowledge: self.knowledge,
        })
    }
}

/// Runs one synchronization from the initial state to completion or the slot
/// budget.
pub fn run(t: &Topology, cfg: SimConfig, store: &BlockStore) -> Result<SimResult> {
    Simulation::new(t, cfg, store)?.run_to_end()
}

const SEEDED_STORE_STREAM: u64 = 0x636c_6973;

/// Like [`run`], with random payloads drawn from `cfg.seed`.
pub fn run_seeded(t: &Topology, cfg: SimConfig) -> Result<SimResult> {
    let store = BlockStore::random(
        t.node_count(),
        cfg.payload_len,
        &mut rng::stream(cfg.seed, &[SEEDED_STORE_STREAM]),
    )?;
    run(t, cfg, &store)
}
