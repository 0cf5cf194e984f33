//! Data block selection (which blocks a transmitter XORs together) and node
//! selection (which node gets the slot).
//!
//! A neighbour `j` is helped by a packet with component set `S` when exactly
//! one block of `S` is missing at `j`: it can peel that block and it is new.
//! `beta` counts helped neighbours. Block selection maximizes `beta` over
//! subsets of the candidate pool; node selection maximizes `beta_i / m_i`.
//!
//! Both read every node's knowledge set directly.

use std::cmp::Ordering;

use num_rational::Ratio;
use serde::Serialize;

use crate::bits::IdSet;
use crate::coding::KnowledgeSet;
use crate::topology::{NodeId, Topology};

/// Pools larger than this use the greedy search instead of full enumeration.
pub const DEFAULT_SEARCH_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DbsResult {
    /// Blocks to XOR together. Empty iff `beta == 0`.
    pub chosen: IdSet,
    pub beta: usize,
    /// Neighbours that can decode something new from `chosen`.
    pub helped: IdSet,
    /// Operation-count cost of producing this result.
    #[serde(skip)]
    pub ops: u64,
}

impl DbsResult {
    fn none(ops: u64) -> Self {
        DbsResult {
            chosen: IdSet::empty(),
            beta: 0,
            helped: IdSet::empty(),
            ops,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NsResult {
    pub chosen_node: NodeId,
    /// `beta / m` of the chosen node.
    pub score: Ratio<u64>,
    /// Per-node block selection and score, indexed by node.
    pub per_node: Vec<(DbsResult, Ratio<u64>)>,
    pub ops: u64,
}

impl NsResult {
    pub fn winner(&self) -> &DbsResult {
        &self.per_node[self.chosen_node.0].0
    }
}

/// Held sets of `n`'s neighbours, in ascending node order.
fn neighbor_holdings(n: NodeId, knowledge: &[KnowledgeSet], t: &Topology) -> Vec<(usize, IdSet)> {
    t.neighbors(n)
        .iter()
        .map(|j| (j, knowledge[j].held()))
        .collect()
}

/// Union over neighbours of the blocks `n` holds that the neighbour lacks.
pub fn candidate_pool(n: NodeId, knowledge: &[KnowledgeSet], t: &Topology) -> IdSet {
    let own = knowledge[n.0].held();
    t.neighbors(n).iter().fold(IdSet::empty(), |acc, j| {
        acc.union(own.difference(knowledge[j].held()))
    })
}

fn pool_cost(n: NodeId, knowledge: &[KnowledgeSet], t: &Topology) -> u64 {
    (t.degree(n) * knowledge[n.0].count()) as u64
}

/// Neighbours with exactly one unknown component in `chosen`.
fn helped_by(chosen: IdSet, neighbors: &[(usize, IdSet)]) -> IdSet {
    neighbors
        .iter()
        .filter(|(_, held)| chosen.difference(*held).len() == 1)
        .map(|&(j, _)| j)
        .collect()
}

/// `true` if `a` should replace the incumbent `b`: larger beta, then fewer
/// blocks, then the lexicographically smaller block sequence.
fn better(a_beta: usize, a: IdSet, b_beta: usize, b: IdSet) -> bool {
    match a_beta.cmp(&b_beta) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => match a.len().cmp(&b.len()) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => a.lex_cmp(b).is_lt(),
        },
    }
}

fn search<I: Iterator<Item = IdSet>>(
    candidates: I,
    neighbors: &[(usize, IdSet)],
    ops: &mut u64,
) -> (IdSet, usize) {
    let m = neighbors.len() as u64;
    let mut best = (IdSet::empty(), 0usize);
    for s in candidates {
        *ops += s.len() as u64 * m;
        let beta = neighbors
            .iter()
            .filter(|(_, held)| s.difference(*held).len() == 1)
            .count();
        if better(beta, s, best.1, best.0) {
            best = (s, beta);
        }
    }
    best
}

fn finish(chosen: IdSet, neighbors: &[(usize, IdSet)], ops: u64) -> DbsResult {
    if chosen.is_empty() {
        return DbsResult::none(ops);
    }
    let helped = helped_by(chosen, neighbors);
    DbsResult {
        chosen,
        beta: helped.len(),
        helped,
        ops,
    }
}

/// Block subset of `n`'s candidate pool that the most neighbours can decode
/// and learn from. Exhaustive for pools up to [`DEFAULT_SEARCH_CAP`].
pub fn dbs(n: NodeId, knowledge: &[KnowledgeSet], t: &Topology) -> DbsResult {
    dbs_with_cap(n, knowledge, t, DEFAULT_SEARCH_CAP)
}

pub fn dbs_with_cap(
    n: NodeId,
    knowledge: &[KnowledgeSet],
    t: &Topology,
    search_cap: usize,
) -> DbsResult {
    let pool = candidate_pool(n, knowledge, t);
    let mut ops = pool_cost(n, knowledge, t);
    if pool.is_empty() {
        return DbsResult::none(ops);
    }
    let neighbors = neighbor_holdings(n, knowledge, t);
    let chosen = if pool.len() <= search_cap {
        search(pool.subsets(), &neighbors, &mut ops).0
    } else {
        greedy(pool, &neighbors, &mut ops)
    };
    finish(chosen, &neighbors, ops)
}

/// Grow the chosen set one block at a time by the block with the largest
/// resulting beta (ties to the smallest id) until no block improves it.
fn greedy(pool: IdSet, neighbors: &[(usize, IdSet)], ops: &mut u64) -> IdSet {
    let mut chosen = IdSet::empty();
    let mut beta = 0;
    loop {
        let candidates = pool
            .difference(chosen)
            .iter()
            .map(|b| chosen.union(IdSet::singleton(b)));
        let (next, next_beta) = search(candidates, neighbors, ops);
        if next_beta <= beta {
            return chosen;
        }
        chosen = next;
        beta = next_beta;
    }
}

/// Best single block: the block new to the most neighbours. Same tie rule as
/// [`dbs`].
pub fn dbs_single(n: NodeId, knowledge: &[KnowledgeSet], t: &Topology) -> DbsResult {
    let pool = candidate_pool(n, knowledge, t);
    let mut ops = pool_cost(n, knowledge, t);
    if pool.is_empty() {
        return DbsResult::none(ops);
    }
    let neighbors = neighbor_holdings(n, knowledge, t);
    let singles = pool.iter().map(IdSet::singleton);
    let (chosen, _) = search(singles, &neighbors, &mut ops);
    finish(chosen, &neighbors, ops)
}

/// Node whose best packet helps the largest fraction of its neighbours.
/// Ties go to the larger beta, then the smaller node id.
pub fn ns(knowledge: &[KnowledgeSet], t: &Topology) -> NsResult {
    let per_node: Vec<(DbsResult, Ratio<u64>)> = t
        .nodes()
        .map(|i| {
            let r = dbs(i, knowledge, t);
            let m = t.degree(i) as u64;
            let score = if m == 0 {
                Ratio::from_integer(0)
            } else {
                Ratio::new(r.beta as u64, m)
            };
            (r, score)
        })
        .collect();
    let ops = per_node.iter().map(|(r, _)| r.ops).sum();
    let mut best = 0usize;
    for (i, (r, score)) in per_node.iter().enumerate().skip(1) {
        let (br, bs) = &per_node[best];
        if score > bs || (score == bs && r.beta > br.beta) {
            best = i;
        }
    }
    NsResult {
        chosen_node: NodeId(best),
        score: per_node[best].1,
        per_node,
        ops,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[usize]) -> IdSet {
        ids.iter().copied().collect()
    }

    fn initial(n: usize) -> Vec<KnowledgeSet> {
        (0..n).map(|i| KnowledgeSet::new(NodeId(i))).collect()
    }

    fn state(held: &[&[usize]]) -> Vec<KnowledgeSet> {
        held.iter()
            .enumerate()
            .map(|(i, h)| KnowledgeSet::with_blocks(NodeId(i), set(h)))
            .collect()
    }

    /// node 1 holds everything, node 0 holds {p0, p1}, node 2 holds {p1, p2}
    fn late_path_state() -> Vec<KnowledgeSet> {
        state(&[&[0, 1], &[0, 1, 2], &[1, 2]])
    }

    #[test]
    fn pool_of_path_center_initially() {
        let t = Topology::path(3).unwrap();
        assert_eq!(candidate_pool(NodeId(1), &initial(3), &t), set(&[1]));
    }

    #[test]
    fn pool_empty_when_neighbors_hold_superset() {
        let t = Topology::path(3).unwrap();
        let k = state(&[&[0, 1], &[1], &[1, 2]]);
        assert!(candidate_pool(NodeId(1), &k, &t).is_empty());
        let r = dbs(NodeId(1), &k, &t);
        assert_eq!((r.beta, r.chosen), (0, IdSet::empty()));
        assert_eq!(dbs_single(NodeId(1), &k, &t).beta, 0);
    }

    #[test]
    fn pool_in_complete_graph_after_first_broadcast() {
        // node 0's first broadcast reached node 1 only
        let t = Topology::complete(5).unwrap();
        let mut k = initial(5);
        k[1].insert(crate::coding::BlockId(0));
        assert_eq!(candidate_pool(NodeId(1), &k, &t), set(&[0, 1]));
        let r = dbs(NodeId(1), &k, &t);
        assert_eq!((r.chosen, r.beta), (set(&[1]), 4));
        let neighbors = neighbor_holdings(NodeId(1), &k, &t);
        assert_eq!(helped_by(set(&[0, 1]), &neighbors), set(&[0]));
    }

    #[test]
    fn pool_in_complete_graph_after_lossless_broadcast() {
        let t = Topology::complete(5).unwrap();
        let mut k = initial(5);
        for kj in &mut k[1..] {
            kj.insert(crate::coding::BlockId(0));
        }
        assert_eq!(candidate_pool(NodeId(1), &k, &t), set(&[1]));
        assert_eq!(dbs(NodeId(1), &k, &t).beta, 4);
    }

    #[test]
    fn dbs_codes_both_ends_of_path() {
        let t = Topology::path(3).unwrap();
        let r = dbs(NodeId(1), &late_path_state(), &t);
        assert_eq!(r.chosen, set(&[0, 2]));
        assert_eq!(r.beta, 2);
        assert_eq!(r.helped, set(&[0, 2]));
    }

    #[test]
    fn dbs_single_breaks_ties_lexicographically() {
        let t = Topology::path(3).unwrap();
        let r = dbs_single(NodeId(1), &late_path_state(), &t);
        assert_eq!((r.chosen, r.beta), (set(&[0]), 1));
        let r0 = dbs_single(NodeId(1), &initial(3), &t);
        assert_eq!((r0.chosen, r0.beta), (set(&[1]), 2));
    }

    #[test]
    fn ns_on_initial_path_picks_center() {
        let t = Topology::path(3).unwrap();
        let r = ns(&initial(3), &t);
        assert_eq!(r.chosen_node, NodeId(1));
        assert_eq!(r.score, Ratio::from_integer(1));
        let scores: Vec<_> = r.per_node.iter().map(|(_, s)| *s).collect();
        assert_eq!(scores, vec![Ratio::from_integer(1); 3]);
    }

    #[test]
    fn ns_when_synchronized_returns_node_zero() {
        let t = Topology::path(3).unwrap();
        let k = state(&[&[0, 1, 2], &[0, 1, 2], &[0, 1, 2]]);
        let r = ns(&k, &t);
        assert_eq!(r.chosen_node, NodeId(0));
        assert_eq!(r.score, Ratio::from_integer(0));
    }

    #[test]
    fn ns_picks_informed_star_center() {
        let t = Topology::star(5).unwrap();
        let mut k = initial(5);
        k[0] = KnowledgeSet::with_blocks(NodeId(0), IdSet::full(5));
        let r = ns(&k, &t);
        assert_eq!(r.chosen_node, NodeId(0));
        assert_eq!(r.score, Ratio::from_integer(1));
    }

    #[test]
    fn greedy_fallback_matches_exhaustive_on_simple_case() {
        let t = Topology::path(3).unwrap();
        let k = late_path_state();
        let g = dbs_with_cap(NodeId(1), &k, &t, 0);
        assert_eq!((g.chosen, g.beta), (set(&[0, 2]), 2));
    }

    #[test]
    fn cost_counts_every_evaluated_subset() {
        let t = Topology::path(3).unwrap();
        let k = late_path_state();
        // pool {p0, p2}; pool cost m*d = 2*3; subsets 1+1+2 blocks * m=2
        assert_eq!(dbs(NodeId(1), &k, &t).ops, 6 + 8);
        assert_eq!(dbs_single(NodeId(1), &k, &t).ops, 6 + 4);
    }
}
