//! Fast all-to-all data synchronization for topology-controlled wireless
//! ad hoc networks.
//!
//! Every node starts with one data block and all nodes must end up holding
//! every block. Transmissions are one-hop broadcasts, one per time slot.
//! Three schemes are provided:
//!
//! - [`Scheme::UDbs`]: uncoded TDMA, each turn broadcasts the single block
//!   that is new to the most neighbours.
//! - [`Scheme::CDbs`]: TDMA with XOR network coding; each turn broadcasts
//!   the XOR of the block subset that the most neighbours can decode.
//! - [`Scheme::CDbsNs`]: XOR coding plus node selection; every slot goes to
//!   the node whose best packet helps the largest fraction of its
//!   neighbourhood.
//!
//! Receivers peel an XOR packet when they already hold all but one of its
//! components; anything else is dropped.
//!
//! The [`experiment`] module runs Monte Carlo sweeps over random geometric
//! topologies and reports mean slot usage, mean relative gain, and an
//! operation-count complexity proxy, bucketed by average degree.

pub mod bits;
pub mod cli;
pub mod coding;
pub mod error;
pub mod experiment;
pub mod rng;
pub mod selection;
pub mod sim;
pub mod stats;
pub mod topology;

pub use bits::IdSet;
pub use coding::{
    classify, decode, encode, BlockId, BlockStore, Classification, KnowledgeSet, Packet,
};
pub use error::{Error, Result};
pub use experiment::{
    compute_gd, compute_sd, run_sweep, ExperimentRecord, SweepConfig, SweepReport,
};
pub use selection::{candidate_pool, dbs, dbs_single, ns, DbsResult, NsResult};
pub use sim::{
    run, run_seeded, LossModel, Outcome, Scheme, SimConfig, SimResult, Simulation, SlotEvent,
};
pub use topology::{NodeId, Topology, MAX_NODES};
