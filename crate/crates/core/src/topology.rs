//! Network topologies: random geometric generation, fixture construction,
//! connectivity and degree queries.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::IdSet;
use crate::error::{Error, Result};

/// Largest supported network size. Neighbour and knowledge sets are single
/// 64-bit words.
pub const MAX_NODES: usize = IdSet::CAPACITY;

/// Rejections allowed per requested connected sample.
pub const DEFAULT_MAX_REJECTIONS: u32 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An undirected simple graph over `n` nodes.
///
/// Immutable after construction. `connected` is computed once; generated
/// topologies are always connected, fixtures built with
/// [`Topology::from_edges`] may not be.
#[derive(Clone, PartialEq)]
pub struct Topology {
    adjacency: Vec<IdSet>,
    positions: Vec<[f64; 2]>,
    edge_count: usize,
    connected: bool,
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::param("n", format!("need at least 2 nodes, got {n}")));
    }
    if n > MAX_NODES {
        return Err(Error::param(
            "n",
            format!("at most {MAX_NODES} nodes supported, got {n}"),
        ));
    }
    Ok(())
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius <= std::f64::consts::SQRT_2) {
        return Err(Error::param(
            "radius",
            format!("must lie in (0, sqrt 2], got {radius}"),
        ));
    }
    Ok(())
}

impl Topology {
    fn from_adjacency(adjacency: Vec<IdSet>, positions: Vec<[f64; 2]>) -> Self {
        let edge_count = adjacency.iter().map(|a| a.len()).sum::<usize>() / 2;
        let connected = reachable_from_zero(&adjacency).len() == adjacency.len();
        Topology {
            adjacency,
            positions,
            edge_count,
            connected,
        }
    }

    /// Builds a topology from an explicit edge list. Duplicates and reversed
    /// pairs collapse to one undirected edge. Connectivity is recorded but not
    /// required.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        check_n(n)?;
        let mut adjacency = vec![IdSet::empty(); n];
        for &(u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adjacency[u].insert(v);
            adjacency[v].insert(u);
        }
        Ok(Self::from_adjacency(adjacency, Vec::new()))
    }

    /// Unit-disk graph over the given points: an edge joins every pair at
    /// Euclidean distance `<= radius`.
    pub fn from_positions(positions: Vec<[f64; 2]>, radius: f64) -> Result<Self> {
        check_n(positions.len())?;
        check_radius(radius)?;
        let n = positions.len();
        let r2 = radius * radius;
        let mut adjacency = vec![IdSet::empty(); n];
        for u in 0..n {
            for v in (u + 1)..n {
                let dx = positions[u][0] - positions[v][0];
                let dy = positions[u][1] - positions[v][1];
                if dx * dx + dy * dy <= r2 {
                    adjacency[u].insert(v);
                    adjacency[v].insert(u);
                }
            }
        }
        Ok(Self::from_adjacency(adjacency, positions))
    }

    /// Draws `n` points uniformly in the unit square and joins pairs within
    /// `radius`. Returns `Ok(None)` when the draw is disconnected; the caller
    /// resamples.
    pub fn generate_geometric<R: Rng + ?Sized>(
        n: usize,
        radius: f64,
        rng: &mut R,
    ) -> Result<Option<Self>> {
        check_n(n)?;
        check_radius(radius)?;
        let positions: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let t = Self::from_positions(positions, radius)?;
        Ok(t.connected.then_some(t))
    }

    /// Rejection-samples until a connected draw appears, giving up after
    /// `max_rejections` disconnected draws.
    pub fn sample_connected<R: Rng + ?Sized>(
        n: usize,
        radius: f64,
        max_rejections: u32,
        rng: &mut R,
    ) -> Result<Self> {
        for _ in 0..=max_rejections {
            if let Some(t) = Self::generate_geometric(n, radius, rng)? {
                return Ok(t);
            }
        }
        Err(Error::RejectionCapExceeded {
            n,
            radius,
            attempts: max_rejections,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId)
    }

    pub fn neighbors(&self, n: NodeId) -> IdSet {
        self.adjacency[n.0]
    }

    /// `m_n`: the number of neighbours of `n`.
    pub fn degree(&self, n: NodeId) -> usize {
        self.adjacency[n.0].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u.0].contains(v.0)
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// `2|E| / N`, exact.
    pub fn average_degree(&self) -> Ratio<u64> {
        Ratio::new(2 * self.edge_count as u64, self.node_count() as u64)
    }

    pub fn average_degree_f64(&self) -> f64 {
        2.0 * self.edge_count as f64 / self.node_count() as f64
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (u, adj) in self.adjacency.iter().enumerate() {
            out.extend(adj.iter().filter(|&v| v > u).map(|v| (u, v)));
        }
        out
    }

    pub fn to_file(&self) -> TopologyFile {
        TopologyFile {
            n: self.node_count(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            positions: self.positions.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("topology serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: TopologyFile = serde_json::from_str(s)?;
        file.into_topology()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: TopologyFile = serde_json::from_str(&s).map_err(|e| Error::Parse {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        file.into_topology()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        Self::from_edges(n, &edges)
    }

    /// Star centred on node 0.
    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
        Self::from_edges(n, &edges)
    }
}

impl fmt::Debug for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Topology")
            .field("n", &self.node_count())
            .field("edges", &self.edges())
            .field("connected", &self.connected)
            .finish()
    }
}

fn reachable_from_zero(adjacency: &[IdSet]) -> IdSet {
    let mut seen = IdSet::singleton(0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for v in adjacency[u].difference(seen) {
            seen.insert(v);
            queue.push_back(v);
        }
    }
    seen
}

/// On-disk topology: `{"n": .., "edges": [[u, v], ..], "positions": [[x, y], ..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub positions: Vec<[f64; 2]>,
}

impl TopologyFile {
    pub fn into_topology(self) -> Result<Topology> {
        let edges: Vec<_> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut t = Topology::from_edges(self.n, &edges)?;
        if !self.positions.is_empty() {
            if self.positions.len() != self.n {
                return Err(Error::param(
                    "positions",
                    format!(
                        "expected {} coordinates, got {}",
                        self.n,
                        self.positions.len()
                    ),
                ));
            }
            t.positions = self.positions;
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn full_radius_gives_complete_graph() {
        let mut r = rng::stream(7, &[]);
        let t = Topology::generate_geometric(5, std::f64::consts::SQRT_2, &mut r)
            .unwrap()
            .unwrap();
        assert_eq!(t.edge_count(), 10);
        assert_eq!(t.average_degree(), Ratio::from_integer(4));
    }

    #[test]
    fn collinear_points_form_a_path() {
        let t = Topology::from_positions(vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]], 0.6).unwrap();
        assert_eq!(t.edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(t.average_degree(), Ratio::new(4, 3));
        assert!(t.is_connected());
    }

    #[test]
    fn from_edges_dedups_and_symmetrizes() {
        let t = Topology::from_edges(3, &[(0, 1), (1, 0), (2, 1), (1, 2)]).unwrap();
        assert_eq!(t.edges(), vec![(0, 1), (1, 2)]);
        assert!(t.has_edge(NodeId(1), NodeId(0)));
        assert!(t.is_connected());
    }

    #[test]
    fn from_edges_flags_disconnected() {
        let t = Topology::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(!t.is_connected());
    }

    #[test]
    fn from_edges_errors() {
        assert!(matches!(
            Topology::from_edges(2, &[(0, 0)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            Topology::from_edges(3, &[(0, 3)]),
            Err(Error::NodeOutOfRange { node: 3, n: 3 })
        ));
        assert!(matches!(
            Topology::from_edges(1, &[]),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            Topology::from_edges(65, &[]),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn invalid_radius_is_a_parameter_error() {
        let mut r = rng::stream(1, &[]);
        for radius in [0.0, -1.0, 1.5, f64::NAN] {
            assert!(matches!(
                Topology::generate_geometric(5, radius, &mut r),
                Err(Error::InvalidParameter { name: "radius", .. })
            ));
        }
    }

    #[test]
    fn degree_queries() {
        let star = Topology::star(5).unwrap();
        assert_eq!(star.average_degree(), Ratio::new(8, 5));
        assert_eq!(star.degree(NodeId(0)), 4);
        assert_eq!(star.degree(NodeId(3)), 1);
        assert_eq!(
            Topology::complete(11).unwrap().average_degree(),
            Ratio::from_integer(10)
        );
        assert!(Topology::complete(11).unwrap().is_connected());
        assert_eq!(
            Topology::path(3).unwrap().average_degree(),
            Ratio::new(4, 3)
        );
    }

    #[test]
    fn json_roundtrip_keeps_field_names() {
        let t = Topology::from_positions(vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]], 0.6).unwrap();
        let json = t.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["edges"], serde_json::json!([[0, 1], [1, 2]]));
        assert_eq!(v["positions"][1], serde_json::json!([0.5, 0.0]));
        assert_eq!(Topology::from_json(&json).unwrap(), t);
    }

    #[test]
    fn rejection_cap_is_reported() {
        let mut r = rng::stream(3, &[]);
        let err = Topology::sample_connected(30, 0.01, 5, &mut r).unwrap_err();
        assert!(matches!(
            err,
            Error::RejectionCapExceeded { attempts: 5, .. }
        ));
    }
}
