//! Blocks, knowledge sets and the XOR packet codec.
//!
//! A packet is the bitwise XOR of a set of block payloads together with the
//! set of component identifiers. A receiver can peel it exactly when it
//! already holds every component but one: XORing the known payloads back out
//! leaves the missing block. With two or more unknown components nothing can
//! be recovered and the packet is dropped.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::IdSet;
use crate::error::{Error, Result};
use crate::topology::NodeId;

pub const DEFAULT_PAYLOAD_LEN: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub usize);

impl BlockId {
    pub const fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Original payloads, all of one length. Block `i` is the block acquired by
/// node `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStore {
    payload_len: usize,
    payloads: Vec<Vec<u8>>,
}

impl BlockStore {
    pub fn new(payloads: Vec<Vec<u8>>) -> Result<Self> {
        let payload_len = payloads.first().map_or(0, Vec::len);
        if payloads.len() > IdSet::CAPACITY {
            return Err(Error::param(
                "payloads",
                format!("at most {} blocks", IdSet::CAPACITY),
            ));
        }
        if let Some(bad) = payloads.iter().find(|p| p.len() != payload_len) {
            return Err(Error::PayloadLength {
                expected: payload_len,
                actual: bad.len(),
            });
        }
        Ok(BlockStore {
            payload_len,
            payloads,
        })
    }

    /// `count` blocks of uniformly random bytes.
    pub fn random<R: Rng + ?Sized>(count: usize, payload_len: usize, rng: &mut R) -> Result<Self> {
        let payloads = (0..count)
            .map(|_| {
                let mut p = vec![0u8; payload_len];
                rng.fill(p.as_mut_slice());
                p
            })
            .collect();
        Self::new(payloads)
    }

    pub fn len(&self) -> usize {
        self.payloads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payloads.is_empty()
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn payload(&self, b: BlockId) -> Result<&[u8]> {
        self.payloads
            .get(b.0)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownBlock {
                block: b.0,
                len: self.payloads.len(),
            })
    }

    fn check(&self, blocks: IdSet) -> Result<()> {
        match blocks.iter().find(|&b| b >= self.payloads.len()) {
            Some(block) => Err(Error::UnknownBlock {
                block,
                len: self.payloads.len(),
            }),
            None => Ok(()),
        }
    }
}

/// The blocks a node currently holds. Only ever grows, and always contains
/// the owner's own block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KnowledgeSet {
    owner: NodeId,
    held: IdSet,
}

impl KnowledgeSet {
    pub fn new(owner: NodeId) -> Self {
        KnowledgeSet {
            owner,
            held: IdSet::singleton(owner.0),
        }
    }

    /// A knowledge set holding `held` plus the owner's block.
    pub fn with_blocks(owner: NodeId, held: IdSet) -> Self {
        let mut k = Self::new(owner);
        k.held = k.held.union(held);
        k
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn held(&self) -> IdSet {
        self.held
    }

    /// `d_n`.
    pub fn count(&self) -> usize {
        self.held.len()
    }

    pub fn contains(&self, b: BlockId) -> bool {
        self.held.contains(b.0)
    }

    /// Blocks out of `universe` that this node lacks.
    pub fn missing(&self, universe: IdSet) -> IdSet {
        universe.difference(self.held)
    }

    pub fn insert(&mut self, b: BlockId) -> bool {
        self.held.insert(b.0)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Packet {
    components: IdSet,
    payload: Vec<u8>,
}

impl Packet {
    pub fn components(&self) -> IdSet {
        self.components
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn is_coded(&self) -> bool {
        self.components.len() > 1
    }
}

impl fmt::Debug for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Packet")
            .field("components", &self.components)
            .field("payload_len", &self.payload.len())
            .finish()
    }
}

fn xor_into(acc: &mut [u8], src: &[u8]) {
    for (a, s) in acc.iter_mut().zip(src) {
        *a ^= s;
    }
}

/// XORs the payloads of `blocks` into one packet. A singleton yields the raw
/// block.
pub fn encode(blocks: IdSet, store: &BlockStore) -> Result<Packet> {
    if blocks.is_empty() {
        return Err(Error::param(
            "blocks",
            "a packet needs at least one component",
        ));
    }
    store.check(blocks)?;
    let mut payload = vec![0u8; store.payload_len];
    for b in blocks {
        xor_into(&mut payload, &store.payloads[b]);
    }
    Ok(Packet {
        components: blocks,
        payload,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    AlreadyKnown,
    Decodable(BlockId),
    Undecodable(usize),
}

/// What `k` can do with `packet`, from the count of unknown components.
pub fn classify(packet: &Packet, k: &KnowledgeSet) -> Classification {
    let unknown = k.missing(packet.components);
    match unknown.len() {
        0 => Classification::AlreadyKnown,
        1 => Classification::Decodable(BlockId(unknown.first().expect("one unknown"))),
        u => Classification::Undecodable(u),
    }
}

/// Peels the single unknown component out of `packet` by XORing every known
/// component's payload back out. The caller records the block in `k`.
pub fn decode(packet: &Packet, k: &KnowledgeSet, store: &BlockStore) -> Result<(BlockId, Vec<u8>)> {
    let missing = match classify(packet, k) {
        Classification::Decodable(b) => b,
        other => {
            return Err(Error::NotDecodable(format!(
                "components {:?} against held {:?}: {other:?}",
                packet.components, k.held
            )))
        }
    };
    store.check(packet.components)?;
    let mut payload = packet.payload.clone();
    for b in packet.components.intersection(k.held) {
        xor_into(&mut payload, &store.payloads[b]);
    }
    Ok((missing, payload))
}
