//! The sampled network graph at one time step.

use std::collections::{BTreeMap, VecDeque};
use std::io::{self, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::mobility::Kinematics;
use crate::radio::{self, FailureParams, LinkState, RadioParams};

/// Undirected, loop-free graph over `n` nodes with per-edge capacity, node
/// status and connected-component ids.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologySnapshot {
    n: usize,
    step: u64,
    adjacency: Vec<bool>,
    capacity: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
    operational: Vec<bool>,
    cluster_id: Vec<usize>,
    /// Transient state of every in-range operational pair, `i < j`.
    links: BTreeMap<(usize, usize), LinkState>,
}

fn pair(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl TopologySnapshot {
    fn empty(n: usize, step: u64, operational: Vec<bool>) -> Self {
        TopologySnapshot {
            n,
            step,
            adjacency: vec![false; n * n],
            capacity: vec![0.0; n * n],
            neighbors: vec![Vec::new(); n],
            operational,
            cluster_id: vec![0; n],
            links: BTreeMap::new(),
        }
    }

    /// Builds a snapshot from explicit edges. Self-loops and duplicates are
    /// ignored, as are edges touching a non-operational node.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], operational: Option<Vec<bool>>) -> Result<Self> {
        let operational = operational.unwrap_or_else(|| vec![true; n]);
        if operational.len() != n {
            return Err(Error::InvalidConfig("operational mask length differs from n".into()));
        }
        let mut s = Self::empty(n, 0, operational);
        for &(i, j) in edges {
            if i >= n {
                return Err(Error::UnknownNode(i));
            }
            if j >= n {
                return Err(Error::UnknownNode(j));
            }
            if i != j && s.operational[i] && s.operational[j] {
                s.set_edge(i, j, f64::INFINITY);
            }
        }
        s.finish();
        Ok(s)
    }

    /// Samples the graph for one step. Every in-range pair of working nodes is
    /// run through the transient link process, carrying its state over from
    /// `prev`; pairs out of range or touching a failed node get no edge and
    /// lose their history.
    #[allow(clippy::too_many_arguments)]
    pub fn build<R: Rng + ?Sized>(
        nodes: &[Kinematics],
        operational: &[bool],
        rp: &RadioParams,
        fp: &FailureParams,
        delta_t: f64,
        prev: Option<&TopologySnapshot>,
        step: u64,
        rng: &mut R,
    ) -> Self {
        let n = nodes.len();
        let mut s = Self::empty(n, step, operational.to_vec());
        for i in 0..n {
            if !operational[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !operational[j] {
                    continue;
                }
                let d = nodes[i].distance_to(&nodes[j]);
                let capacity = radio::capacity_at(d, rp);
                if capacity < rp.capacity_threshold_bps {
                    continue;
                }
                let history = prev.and_then(|p| p.links.get(&(i, j)).copied());
                let u_revive = rng.random::<f64>();
                let u_fail = rng.random::<f64>();
                let state = radio::transient_transition(history, fp, delta_t, u_revive, u_fail);
                s.links.insert((i, j), state);
                if state == LinkState::Up {
                    s.set_edge(i, j, capacity);
                }
            }
        }
        s.finish();
        s
    }

    pub fn at_step(mut self, step: u64) -> Self {
        self.step = step;
        self
    }

    fn set_edge(&mut self, i: usize, j: usize, capacity: f64) {
        let n = self.n;
        if !self.adjacency[i * n + j] {
            self.adjacency[i * n + j] = true;
            self.adjacency[j * n + i] = true;
            self.neighbors[i].push(j);
            self.neighbors[j].push(i);
        }
        self.capacity[i * n + j] = capacity;
        self.capacity[j * n + i] = capacity;
    }

    fn finish(&mut self) {
        for list in &mut self.neighbors {
            list.sort_unstable();
        }
        self.assign_clusters();
    }

    /// Labels connected components by BFS from each unvisited node in
    /// ascending id order, so ids follow the lowest member of each component.
    pub fn assign_clusters(&mut self) {
        const UNSET: usize = usize::MAX;
        let mut ids = vec![UNSET; self.n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if ids[start] != UNSET {
                continue;
            }
            ids[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &w in &self.neighbors[u] {
                    if ids[w] == UNSET {
                        ids[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        self.cluster_id = ids;
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn neighbors(&self, v: usize) -> Result<&[usize]> {
        self.neighbors
            .get(v)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownNode(v))
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adjacency[i * self.n + j]
    }

    pub fn capacity(&self, i: usize, j: usize) -> f64 {
        if self.is_adjacent(i, j) {
            self.capacity[i * self.n + j]
        } else {
            0.0
        }
    }

    pub fn is_operational(&self, v: usize) -> bool {
        self.operational[v]
    }

    pub fn cluster_of(&self, v: usize) -> usize {
        self.cluster_id[v]
    }

    pub fn cluster_ids(&self) -> &[usize] {
        &self.cluster_id
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_id.iter().max().map_or(0, |m| m + 1)
    }

    pub fn link_state(&self, i: usize, j: usize) -> Option<LinkState> {
        self.links.get(&pair(i, j)).copied()
    }

    /// Edges as `(i, j, capacity)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors[i]
                .iter()
                .filter(move |&&j| j > i)
                .map(move |&j| (i, j, self.capacity[i * self.n + j]))
        })
    }

    /// Writes one `step i j capacity_bps` line per edge.
    pub fn write_edge_list<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (i, j, c) in self.edges() {
            writeln!(out, "{} {} {} {}", self.step, i, j, c)?;
        }
        Ok(())
    }
}
