//! Social networks and treatment assignments.
//!
//! Node ids are dense integers `0..n`. Edges are stored once, as `(u, v)` with
//! `u < v`, sorted; per-node neighbor lists are derived from them.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Edge orientation does not matter;
    /// self-loops, duplicates and out-of-range endpoints are rejected.
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::Validation("graph must have at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::Validation(format!("edge ({u},{v}) has an endpoint outside [0, {num_nodes})")));
            }
            if u == v {
                return Err(Error::Validation(format!("self-loop ({u},{v})")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::Validation(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(Self::from_canonical(num_nodes, set))
    }

    fn from_canonical(num_nodes: usize, set: BTreeSet<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(u, v) in &set {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph { num_nodes, edges: set.into_iter().collect(), adjacency }
    }

    /// `n` nodes and no edges.
    pub fn empty(num_nodes: usize) -> Result<Self> {
        Self::new(num_nodes, std::iter::empty())
    }

    /// Cycle `0 - 1 - ... - (n-1) - 0`.
    pub fn cycle(num_nodes: usize) -> Result<Self> {
        if num_nodes < 3 {
            return Err(Error::InvalidParameter("a cycle needs at least 3 nodes".into()));
        }
        Self::new(num_nodes, (0..num_nodes).map(|i| (i, (i + 1) % num_nodes)))
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edges `(u, v)`, `u < v`, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub(crate) fn check_node(&self, i: usize) -> Result<()> {
        if i < self.num_nodes {
            Ok(())
        } else {
            Err(Error::NodeIndex { index: i, num_nodes: self.num_nodes })
        }
    }

    /// Writes the `n <num_nodes>` header followed by one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.num_nodes);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the edge-list text format. Blank lines and `#` comments are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut num_nodes = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ctx = |message: String| Error::Parse { context: format!("edge list line {}", lineno + 1), message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match num_nodes {
                None => {
                    if fields.len() != 2 || fields[0] != "n" {
                        return Err(ctx(format!("expected header `n <num_nodes>`, found `{line}`")));
                    }
                    let n = fields[1].parse::<usize>().map_err(|e| ctx(format!("node count `{}`: {e}", fields[1])))?;
                    num_nodes = Some(n);
                }
                Some(_) => {
                    if fields.len() != 2 {
                        return Err(ctx(format!("expected `u v`, found `{line}`")));
                    }
                    let parse = |s: &str| s.parse::<usize>().map_err(|e| ctx(format!("node id `{s}`: {e}")));
                    edges.push((parse(fields[0])?, parse(fields[1])?));
                }
            }
        }
        let n = num_nodes.ok_or_else(|| Error::Parse {
            context: "edge list".into(),
            message: "missing `n <num_nodes>` header".into(),
        })?;
        Graph::new(n, edges)
    }
}

/// Watts-Strogatz small-world graph.
///
/// Starts from a ring lattice where every node links to its `k/2` nearest
/// neighbors on each side, then visits each lattice edge `(u, u+j)` (for
/// `j = 1..=k/2`, `u = 0..n`) and with probability `p_rewire` moves its far
/// endpoint to a node drawn uniformly among those that would not create a
/// self-loop or duplicate edge. The edge count stays `n*k/2`.
pub fn watts_strogatz<R: Rng + ?Sized>(n: usize, k: usize, p_rewire: f64, rng: &mut R) -> Result<Graph> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("ring degree k={k} must be even and at least 2")));
    }
    if n <= k {
        return Err(Error::InvalidParameter(format!("node count n={n} must exceed k={k}")));
    }
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(Error::InvalidParameter(format!("rewiring probability {p_rewire} not in [0,1]")));
    }

    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }

    let mut candidates = Vec::with_capacity(n);
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if !adj[u].contains(&v) || rng.random::<f64>() >= p_rewire {
                continue;
            }
            candidates.clear();
            candidates.extend((0..n).filter(|&w| w != u && !adj[u].contains(&w)));
            if let Some(&w) = candidates.choose(rng) {
                adj[u].remove(&v);
                adj[v].remove(&u);
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
    }

    let set =
        adj.iter().enumerate().flat_map(|(u, nb)| nb.iter().filter(move |&&v| u < v).map(move |&v| (u, v))).collect();
    Ok(Graph::from_canonical(n, set))
}

/// Treatment vector: `0` puts a node in group A (control), `1` in group B.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Assignment(Vec<u8>);

impl Assignment {
    pub fn new(z: Vec<u8>) -> Result<Self> {
        if let Some(pos) = z.iter().position(|&v| v > 1) {
            return Err(Error::Validation(format!("assignment entry {pos} is {}, expected 0 or 1", z[pos])));
        }
        Ok(Assignment(z))
    }

    /// Every node in the same group (`0` = all A, `1` = all B).
    pub fn uniform(n: usize, group: u8) -> Self {
        Assignment(vec![group.min(1); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn group(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn is_treated(&self, i: usize) -> bool {
        self.0[i] == 1
    }

    pub fn num_treated(&self) -> usize {
        self.0.iter().filter(|&&v| v == 1).count()
    }

    /// Entries with groups swapped (A <-> B).
    pub fn flipped(&self) -> Self {
        Assignment(self.0.iter().map(|&v| 1 - v).collect())
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

impl TryFrom<Vec<u8>> for Assignment {
    type Error = Error;
    fn try_from(z: Vec<u8>) -> Result<Self> {
        Assignment::new(z)
    }
}

impl From<Assignment> for Vec<u8> {
    fn from(a: Assignment) -> Self {
        a.0
    }
}

/// Independent Bernoulli(`p`) treatment for each of `n` nodes.
pub fn bernoulli_assignment<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Assignment> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("treatment proportion {p} not in [0,1]")));
    }
    Ok(Assignment((0..n).map(|_| u8::from(rng.random::<f64>() < p)).collect()))
}
