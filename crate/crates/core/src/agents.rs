//! Travel agents (TAs) and the per-node stationary agents (SAs) that admit,
//! kill and spawn them.
//!
//! A TA picks its next hop with four rules, tried in order against the
//! neighbours of its current node:
//!
//! 1. an unvisited neighbour adjacent to at least two nodes the agent has
//!    already visited;
//! 2. any unvisited neighbour;
//! 3. a visited neighbour that has unvisited neighbours of its own, least
//!    recently visited first;
//! 4. the least recently visited neighbour.
//!
//! Ties fall to the lowest node id. "Recency" is the step at which this agent
//! last visited the node (its RSN).

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;

use crate::error::{Error, Result};
use crate::topology::TopologySnapshot;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentStatus {
    /// Still touring.
    Active,
    /// Visited every node and reported back to its owner.
    Completed,
    /// Found nothing left to visit in its cluster for too long and stopped.
    GaveUp,
    /// Terminated by an SA for exceeding the tolerated incoming frequency.
    Killed,
    /// Its host node failed underneath it.
    Lost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentPolicy {
    /// Migration attempts toward one target before a one-step back-off.
    pub retry_budget: u32,
    /// Window, in steps, over which an SA counts incoming agents.
    pub fr_window: u64,
    /// Consecutive steps an agent may sit in a fully visited cluster before
    /// it gives up.
    pub wait_steps: u64,
}

impl Default for AgentPolicy {
    fn default() -> Self {
        AgentPolicy {
            retry_budget: 3,
            fr_window: 1,
            wait_steps: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TravelAgent {
    pub id: usize,
    pub owner: NodeId,
    pub location: NodeId,
    visited: Vec<bool>,
    visited_count: usize,
    rsn: Vec<Option<u64>>,
    pub sp_collected: BTreeSet<NodeId>,
    /// Software reliability.
    pub r_i: f64,
    pub status: AgentStatus,
    pub retries_remaining: u32,
    retry_target: Option<NodeId>,
    /// Skip the next step (retry budget exhausted).
    pub backing_off: bool,
    /// Consecutive steps spent in a cluster with nothing left to visit.
    pub stranded_for: u64,
}

impl TravelAgent {
    /// A fresh agent at its owner, which counts as its first visit.
    pub fn new(id: usize, owner: NodeId, n: usize, step: u64, r_i: f64, retry_budget: u32) -> Self {
        let mut visited = vec![false; n];
        let mut rsn = vec![None; n];
        visited[owner] = true;
        rsn[owner] = Some(step);
        TravelAgent {
            id,
            owner,
            location: owner,
            visited,
            visited_count: 1,
            rsn,
            sp_collected: BTreeSet::new(),
            r_i,
            status: AgentStatus::Active,
            retries_remaining: retry_budget,
            retry_target: None,
            backing_off: false,
            stranded_for: 0,
        }
    }

    pub fn alive(&self) -> bool {
        !matches!(self.status, AgentStatus::Killed | AgentStatus::Lost)
    }

    pub fn is_active(&self) -> bool {
        self.status == AgentStatus::Active
    }

    pub fn has_visited(&self, v: NodeId) -> bool {
        self.visited[v]
    }

    pub fn visited_count(&self) -> usize {
        self.visited_count
    }

    pub fn visited(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.visited.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i)
    }

    pub fn rsn(&self, v: NodeId) -> Option<u64> {
        self.rsn[v]
    }

    pub fn node_count(&self) -> usize {
        self.visited.len()
    }

    pub fn has_visited_all(&self) -> bool {
        self.visited_count == self.visited.len()
    }

    /// Marks `v` visited at `step`, updating its RSN.
    pub fn mark_visit(&mut self, v: NodeId, step: u64) {
        if !self.visited[v] {
            self.visited[v] = true;
            self.visited_count += 1;
        }
        self.rsn[v] = Some(step);
    }

    /// True when no node sharing the agent's cluster is still unvisited.
    pub fn cluster_exhausted(&self, s: &TopologySnapshot) -> bool {
        let here = s.cluster_of(self.location);
        !s.cluster_ids()
            .iter()
            .enumerate()
            .any(|(v, &c)| c == here && !self.visited[v])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteRule {
    CommonNeighbor,
    Unvisited,
    FrontierRevisit,
    LeastRecent,
}

/// Next hop for `a` and the rule that selected it, or `None` when the agent's
/// node has no neighbours.
pub fn choose_next_with_rule(a: &TravelAgent, s: &TopologySnapshot) -> Option<(NodeId, RouteRule)> {
    let nbrs = s.neighbors(a.location).ok()?;
    if nbrs.is_empty() {
        return None;
    }
    // neighbour lists are sorted, so the first match is the lowest id
    let common = nbrs.iter().copied().find(|&u| {
        !a.visited[u]
            && s.neighbors(u)
                .map(|nu| nu.iter().filter(|&&w| a.visited[w]).count() >= 2)
                .unwrap_or(false)
    });
    if let Some(u) = common {
        return Some((u, RouteRule::CommonNeighbor));
    }
    if let Some(u) = nbrs.iter().copied().find(|&u| !a.visited[u]) {
        return Some((u, RouteRule::Unvisited));
    }
    let recency = |w: NodeId| (a.rsn[w].unwrap_or(0), w);
    let frontier = nbrs
        .iter()
        .copied()
        .filter(|&w| {
            s.neighbors(w)
                .map(|nw| nw.iter().any(|&x| !a.visited[x]))
                .unwrap_or(false)
        })
        .min_by_key(|&w| recency(w));
    if let Some(w) = frontier {
        return Some((w, RouteRule::FrontierRevisit));
    }
    nbrs.iter()
        .copied()
        .min_by_key(|&w| recency(w))
        .map(|w| (w, RouteRule::LeastRecent))
}

pub fn choose_next(a: &TravelAgent, s: &TopologySnapshot) -> Option<NodeId> {
    choose_next_with_rule(a, s).map(|(v, _)| v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Migration {
    Moved,
    Blocked,
}

/// Tries one hop. Succeeds with probability `p_t`; a blocked agent stays put
/// and spends one retry, backing off for a step once the budget runs out.
pub fn attempt_migration<R: Rng + ?Sized>(
    a: &mut TravelAgent,
    target: NodeId,
    s: &TopologySnapshot,
    p_t: f64,
    policy: &AgentPolicy,
    step: u64,
    rng: &mut R,
) -> Result<Migration> {
    if !s.is_adjacent(a.location, target) {
        return Err(Error::StaleRoute {
            from: a.location,
            target,
        });
    }
    if a.retry_target != Some(target) {
        a.retry_target = Some(target);
        a.retries_remaining = policy.retry_budget;
    }
    if rng.random::<f64>() < p_t {
        a.location = target;
        a.mark_visit(target, step);
        a.retry_target = None;
        a.retries_remaining = policy.retry_budget;
        Ok(Migration::Moved)
    } else {
        a.retries_remaining = a.retries_remaining.saturating_sub(1);
        if a.retries_remaining == 0 {
            a.backing_off = true;
            a.retries_remaining = policy.retry_budget;
        }
        Ok(Migration::Blocked)
    }
}

/// Service knowledge and incoming-agent bookkeeping held by a node's SA.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeServiceLedger {
    pub node: NodeId,
    pub is_provider: bool,
    pub known_providers: BTreeSet<NodeId>,
    window: u64,
    arrivals: VecDeque<u64>,
}

impl NodeServiceLedger {
    pub fn new(node: NodeId, is_provider: bool, window: u64) -> Self {
        let mut known_providers = BTreeSet::new();
        if is_provider {
            known_providers.insert(node);
        }
        NodeServiceLedger {
            node,
            is_provider,
            known_providers,
            window: window.max(1),
            arrivals: VecDeque::new(),
        }
    }

    /// Drops arrivals that fell out of the counting window as of `step`.
    pub fn begin_step(&mut self, step: u64) {
        while let Some(&first) = self.arrivals.front() {
            if first + self.window <= step {
                self.arrivals.pop_front();
            } else {
                break;
            }
        }
    }

    /// Agents that arrived within the current window.
    pub fn incoming_count(&self) -> usize {
        self.arrivals.len()
    }

    /// Two-way knowledge exchange between an agent and this node, without
    /// counting an arrival.
    pub fn exchange(&mut self, a: &mut TravelAgent) {
        if self.is_provider {
            a.sp_collected.insert(self.node);
        }
        a.sp_collected.extend(self.known_providers.iter().copied());
        self.known_providers.extend(a.sp_collected.iter().copied());
    }
}

/// An agent arrives at `ledger`'s node: counts the arrival and swaps service
/// knowledge.
pub fn record_visit(a: &mut TravelAgent, ledger: &mut NodeServiceLedger, step: u64) {
    debug_assert_eq!(a.location, ledger.node);
    ledger.begin_step(step);
    ledger.arrivals.push_back(step);
    ledger.exchange(a);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Admit,
    Kill,
}

/// Kills the arriving agent when the node's incoming count, this arrival
/// included, exceeds `max_fr`.
pub fn sa_admit(ledger: &NodeServiceLedger, a: &mut TravelAgent, max_fr: usize) -> Admission {
    if ledger.incoming_count() > max_fr {
        a.status = AgentStatus::Killed;
        Admission::Kill
    } else {
        Admission::Admit
    }
}

/// Spawns a fresh agent at the ledger's node when its service picture is
/// still incomplete.
pub fn sa_spawn(
    ledger: &NodeServiceLedger,
    sp_total: usize,
    next_id: usize,
    n: usize,
    step: u64,
    r_i: f64,
    retry_budget: u32,
) -> Option<TravelAgent> {
    (ledger.known_providers.len() < sp_total)
        .then(|| TravelAgent::new(next_id, ledger.node, n, step, r_i, retry_budget))
}
