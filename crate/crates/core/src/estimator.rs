//! Episode simulation and Monte Carlo aggregation of MAS and service-discovery
//! reliability.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agents::{
    self, AgentStatus, Admission, Migration, NodeServiceLedger, TravelAgent,
};
use crate::config::{KilledPolicy, ReliabilityMode, ScenarioConfig};
use crate::error::{Error, Result};
use crate::mobility::{self, GroupMap, Kinematics};
use crate::radio;
use crate::topology::TopologySnapshot;

/// Task route reliability of one agent that visited `visited` of `nodes` nodes.
pub fn agent_task_reliability(visited: usize, nodes: usize, mode: ReliabilityMode) -> Result<f64> {
    if nodes == 0 || visited > nodes {
        return Err(Error::VisitedExceedsNodes { visited, nodes });
    }
    Ok(match mode {
        ReliabilityMode::Fractional => visited as f64 / nodes as f64,
        ReliabilityMode::AllOrNothing => {
            if visited == nodes {
                1.0
            } else {
                0.0
            }
        }
    })
}

/// Mean of `λ_i·r_i` over the agents of one episode.
pub fn episode_lambda(results: &[(f64, f64)]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::NoAgents);
    }
    let sum: f64 = results.iter().map(|(lambda, r)| lambda * r).sum();
    Ok(sum / results.len() as f64)
}

/// Mean reliability over the agents currently in the system; 0 for an empty system.
pub fn mas_reliability(agent_reliabilities: &[f64]) -> f64 {
    if agent_reliabilities.is_empty() {
        return 0.0;
    }
    agent_reliabilities.iter().sum::<f64>() / agent_reliabilities.len() as f64
}

/// Fraction of service providers a node knows about.
pub fn node_instantaneous_reliability(known: usize, sp_total: usize) -> Result<f64> {
    if sp_total == 0 {
        return Err(Error::NoProviders);
    }
    Ok(known.min(sp_total) as f64 / sp_total as f64)
}

/// Time average of an instantaneous reliability series.
pub fn service_reliability(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(series.iter().sum::<f64>() / series.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSummary {
    pub id: usize,
    pub owner: usize,
    pub visited: usize,
    pub status: AgentStatus,
    pub lambda: f64,
    pub r_i: f64,
    /// Step at which the agent was created.
    pub born: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// `(λ_i, r_i)` for every agent that enters the episode average.
    pub lambda_per_agent: Vec<(f64, f64)>,
    pub lambda_t: f64,
    pub r_mas_series: Vec<f64>,
    /// `node_r_series[v][t]`
    pub node_r_series: Vec<Vec<f64>>,
    pub r_service_per_node: Vec<f64>,
    pub m_series: Vec<usize>,
    pub step_count: usize,
    pub agents: Vec<AgentSummary>,
    pub providers: Vec<usize>,
    pub kills: usize,
    pub spawned: usize,
}

impl EpisodeResult {
    pub fn final_m(&self) -> usize {
        self.m_series.last().copied().unwrap_or(0)
    }
}

/// Pins parts of an episode's random setup, for scenarios that need a known
/// layout.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeSetup {
    pub positions: Option<Vec<(f64, f64)>>,
    pub owners: Option<Vec<usize>>,
    pub providers: Option<Vec<usize>>,
    /// Fixed edge list replacing the radio-derived graph at every step. Listed
    /// links are always up; node failures still remove their edges.
    pub edges: Option<Vec<(usize, usize)>>,
}

// independent random streams of one episode
const STREAM_SETUP: u64 = 0;
const STREAM_MOBILITY: u64 = 1;
const STREAM_LINKS: u64 = 2;
const STREAM_MIGRATION: u64 = 3;
const STREAM_LIFETIMES: u64 = 4;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn run_episode(cfg: &ScenarioConfig, seed: u64) -> Result<EpisodeResult> {
    run_episode_with(cfg, seed, &EpisodeSetup::default(), |_| {})
}

/// Runs one episode, handing every snapshot to `observe` as it is built.
pub fn run_episode_with<F>(cfg: &ScenarioConfig, seed: u64, setup: &EpisodeSetup, mut observe: F) -> Result<EpisodeResult>
where
    F: FnMut(&TopologySnapshot),
{
    cfg.validate()?;
    let n = cfg.n_nodes;
    let dt = cfg.mobility.delta_t;
    let policy = &cfg.agents;
    let fp = &cfg.failure;

    let mut setup_rng = stream(seed, STREAM_SETUP);
    let mut mobility_rng = stream(seed, STREAM_MOBILITY);
    let mut link_rng = stream(seed, STREAM_LINKS);
    let mut migration_rng = stream(seed, STREAM_MIGRATION);
    let mut lifetime_rng = stream(seed, STREAM_LIFETIMES);

    let providers: Vec<usize> = match &setup.providers {
        Some(p) => p.clone(),
        None => {
            let mut p = index::sample(&mut setup_rng, n, cfg.sp_total).into_vec();
            p.sort_unstable();
            p
        }
    };
    let owners: Vec<usize> = match &setup.owners {
        Some(o) => o.clone(),
        None => (0..cfg.m_agents).map(|_| setup_rng.random_range(0..n)).collect(),
    };
    if let Some(bad) = providers.iter().chain(&owners).find(|&&v| v >= n) {
        return Err(Error::UnknownNode(*bad));
    }
    let groups = GroupMap::round_robin(n, cfg.mobility.group_size);
    let mut nodes: Vec<Kinematics> = match &setup.positions {
        Some(pos) if pos.len() == n => pos.iter().map(|&(x, y)| Kinematics::at(x, y)).collect(),
        Some(_) => return Err(Error::InvalidConfig("explicit positions must cover every node".into())),
        None => mobility::initial_kinematics(n, &cfg.mobility, &groups, &mut mobility_rng),
    };
    let lifetimes: Vec<f64> = (0..n)
        .map(|_| radio::sample_node_lifetime(fp, &mut lifetime_rng))
        .collect();
    let r_i = radio::agent_software_reliability(fp, cfg.duration_s());

    let mut ledgers: Vec<NodeServiceLedger> = (0..n)
        .map(|v| NodeServiceLedger::new(v, providers.contains(&v), policy.fr_window))
        .collect();
    let mut pool: Vec<TravelAgent> = Vec::with_capacity(owners.len());
    let mut born: Vec<u64> = Vec::with_capacity(owners.len());
    for (id, &owner) in owners.iter().enumerate() {
        let mut a = TravelAgent::new(id, owner, n, 0, r_i, policy.retry_budget);
        ledgers[owner].exchange(&mut a);
        if a.has_visited_all() {
            a.status = AgentStatus::Completed;
        }
        pool.push(a);
        born.push(0);
    }

    let budget = cfg.step_budget();
    let mut prev: Option<TopologySnapshot> = None;
    let mut r_mas_series = Vec::new();
    let mut node_r_series = vec![Vec::new(); n];
    let mut m_series = Vec::new();
    let mut kills = 0;
    let mut spawned = 0;

    for step in 0..budget {
        let t = step as f64 * dt;
        if step > 0 {
            mobility::advance_all(&mut nodes, &groups, &cfg.mobility, &mut mobility_rng);
        }
        let operational: Vec<bool> = lifetimes.iter().map(|&life| life > t).collect();
        let snapshot = match &setup.edges {
            Some(edges) => TopologySnapshot::from_edges(n, edges, Some(operational.clone()))?.at_step(step),
            None => TopologySnapshot::build(
                &nodes,
                &operational,
                &cfg.radio,
                fp,
                dt,
                prev.as_ref(),
                step,
                &mut link_rng,
            ),
        };
        observe(&snapshot);
        for ledger in &mut ledgers {
            ledger.begin_step(step);
        }

        let existing = pool.len();
        for idx in 0..existing {
            let a = &mut pool[idx];
            if !a.is_active() {
                continue;
            }
            if !operational[a.location] {
                a.status = AgentStatus::Lost;
                continue;
            }
            if a.backing_off {
                a.backing_off = false;
                continue;
            }
            if a.cluster_exhausted(&snapshot) {
                a.stranded_for += 1;
                if a.stranded_for > policy.wait_steps {
                    a.status = AgentStatus::GaveUp;
                }
                continue;
            }
            a.stranded_for = 0;
            let Some(target) = agents::choose_next(a, &snapshot) else {
                continue;
            };
            let moved = agents::attempt_migration(
                a,
                target,
                &snapshot,
                fp.p_t_migration,
                policy,
                step,
                &mut migration_rng,
            )?;
            if moved == Migration::Blocked {
                continue;
            }
            agents::record_visit(a, &mut ledgers[target], step);
            if agents::sa_admit(&ledgers[target], a, cfg.max_fr) == Admission::Kill {
                kills += 1;
                continue;
            }
            if a.has_visited_all() {
                a.status = AgentStatus::Completed;
                let owner = a.owner;
                ledgers[owner].exchange(a);
                let next_id = pool.len();
                if let Some(mut child) =
                    agents::sa_spawn(&ledgers[owner], cfg.sp_total, next_id, n, step, r_i, policy.retry_budget)
                {
                    ledgers[owner].exchange(&mut child);
                    pool.push(child);
                    born.push(step);
                    spawned += 1;
                }
            }
        }

        let present: Vec<f64> = pool
            .iter()
            .filter(|a| a.alive())
            .map(|a| {
                agent_task_reliability(a.visited_count(), n, cfg.reliability_mode).unwrap_or(0.0) * a.r_i
            })
            .collect();
        m_series.push(present.len());
        r_mas_series.push(mas_reliability(&present));
        for (v, ledger) in ledgers.iter().enumerate() {
            let r = if cfg.sp_total == 0 {
                1.0
            } else {
                node_instantaneous_reliability(ledger.known_providers.len(), cfg.sp_total)?
            };
            node_r_series[v].push(r);
        }

        prev = Some(snapshot);
        if !pool.iter().any(TravelAgent::is_active) {
            break;
        }
    }

    let summaries: Vec<AgentSummary> = pool
        .iter()
        .zip(&born)
        .map(|(a, &b)| AgentSummary {
            id: a.id,
            owner: a.owner,
            visited: a.visited_count(),
            status: a.status,
            lambda: agent_task_reliability(a.visited_count(), n, cfg.reliability_mode).unwrap_or(0.0),
            r_i: a.r_i,
            born: b,
        })
        .collect();
    let lambda_per_agent: Vec<(f64, f64)> = summaries
        .iter()
        .filter(|a| cfg.killed_policy == KilledPolicy::Frozen || a.status != AgentStatus::Killed)
        .map(|a| (a.lambda, a.r_i))
        .collect();
    let lambda_t = episode_lambda(&lambda_per_agent).unwrap_or(0.0);
    let r_service_per_node = node_r_series
        .iter()
        .map(|s| service_reliability(s))
        .collect::<Result<Vec<_>>>()?;

    Ok(EpisodeResult {
        lambda_per_agent,
        lambda_t,
        r_mas_series,
        node_r_series,
        r_service_per_node,
        step_count: m_series.len(),
        m_series,
        agents: summaries,
        providers,
        kills,
        spawned,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub lambda_t: f64,
    pub r_service_observer: f64,
    pub final_m: usize,
    pub step_count: usize,
    pub kills: usize,
    pub agents_total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityReport {
    /// Monte Carlo mean of the per-episode `λ`.
    pub mean_lambda: f64,
    /// Sample standard deviation over episodes (0 for a single episode).
    pub std_lambda: f64,
    pub mean_r_service: f64,
    pub mean_final_m: f64,
    pub per_episode: Vec<EpisodeSummary>,
    pub q: usize,
    pub config_echo: ScenarioConfig,
}

fn summarize(cfg: &ScenarioConfig, seed: u64, ep: &EpisodeResult) -> EpisodeSummary {
    EpisodeSummary {
        seed,
        lambda_t: ep.lambda_t,
        r_service_observer: ep.r_service_per_node[cfg.observer()],
        final_m: ep.final_m(),
        step_count: ep.step_count,
        kills: ep.kills,
        agents_total: ep.agents.len(),
    }
}

/// Runs `cfg.q_runs` episodes seeded `base_seed + q`. Episodes run on the
/// current rayon pool; results are aggregated in episode order, so the report
/// does not depend on the thread count.
pub fn monte_carlo(cfg: &ScenarioConfig, base_seed: u64) -> Result<ReliabilityReport> {
    cfg.validate()?;
    let per_episode = (0..cfg.q_runs as u64)
        .into_par_iter()
        .map(|q| {
            let seed = base_seed.wrapping_add(q);
            run_episode(cfg, seed).map(|ep| summarize(cfg, seed, &ep))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(cfg, per_episode))
}

pub fn aggregate(cfg: &ScenarioConfig, per_episode: Vec<EpisodeSummary>) -> ReliabilityReport {
    let q = per_episode.len();
    let qf = q as f64;
    let mean = |f: &dyn Fn(&EpisodeSummary) -> f64| per_episode.iter().map(f).sum::<f64>() / qf;
    let mean_lambda = mean(&|e| e.lambda_t);
    let std_lambda = if q > 1 {
        let ss: f64 = per_episode.iter().map(|e| (e.lambda_t - mean_lambda).powi(2)).sum();
        (ss / (qf - 1.0)).sqrt()
    } else {
        0.0
    };
    ReliabilityReport {
        mean_lambda,
        std_lambda,
        mean_r_service: mean(&|e| e.r_service_observer),
        mean_final_m: mean(&|e| e.final_m as f64),
        q,
        per_episode,
        config_echo: cfg.clone(),
    }
}
