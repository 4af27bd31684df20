//! Scenario configuration and its `key = value` text format.
//!
//! ```text
//! # comments run to end of line
//! n_nodes = 40
//! mobility.model = RPGM
//! radio.bandwidth_hz = 1e6
//! ```
//!
//! Omitted keys keep their defaults; unknown keys are rejected.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::agents::AgentPolicy;
use crate::error::{Error, Result};
use crate::mobility::MobilityParams;
use crate::radio::{FailureParams, RadioParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReliabilityMode {
    /// An agent that visits `n` of `N` nodes scores `n/N`.
    Fractional,
    /// Only a complete tour scores; anything less is 0.
    AllOrNothing,
}

impl fmt::Display for ReliabilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReliabilityMode::Fractional => "fractional",
            ReliabilityMode::AllOrNothing => "all_or_nothing",
        })
    }
}

impl FromStr for ReliabilityMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fractional" => Ok(ReliabilityMode::Fractional),
            "all_or_nothing" => Ok(ReliabilityMode::AllOrNothing),
            _ => Err(format!("unknown reliability mode `{s}` (expected fractional or all_or_nothing)")),
        }
    }
}

/// How agents killed by an SA enter the episode average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KilledPolicy {
    /// Killed agents keep the task reliability they had reached.
    Frozen,
    /// Killed agents are left out of the average.
    Excluded,
}

impl fmt::Display for KilledPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KilledPolicy::Frozen => "frozen",
            KilledPolicy::Excluded => "excluded",
        })
    }
}

impl FromStr for KilledPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "frozen" => Ok(KilledPolicy::Frozen),
            "excluded" => Ok(KilledPolicy::Excluded),
            _ => Err(format!("unknown killed-agent policy `{s}` (expected frozen or excluded)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_nodes: usize,
    pub m_agents: usize,
    pub q_runs: usize,
    pub sp_total: usize,
    pub max_fr: usize,
    /// Simulated time per episode, minutes.
    pub duration_min: f64,
    pub mobility: MobilityParams,
    pub radio: RadioParams,
    pub failure: FailureParams,
    pub agents: AgentPolicy,
    /// Node whose service-discovery reliability is reported; `None` means the
    /// highest node id.
    pub observer_node: Option<usize>,
    pub reliability_mode: ReliabilityMode,
    pub killed_policy: KilledPolicy,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_nodes: 25,
            m_agents: 25,
            q_runs: 200,
            sp_total: 2,
            max_fr: 20,
            duration_min: 750.0,
            mobility: MobilityParams::default(),
            radio: RadioParams::default(),
            failure: FailureParams::default(),
            agents: AgentPolicy::default(),
            observer_node: None,
            reliability_mode: ReliabilityMode::Fractional,
            killed_policy: KilledPolicy::Frozen,
            seed: 1,
        }
    }
}

/// Every recognised key, in serialization order.
pub const KEYS: &[&str] = &[
    "n_nodes",
    "m_agents",
    "q_runs",
    "sp_total",
    "max_fr",
    "lfp",
    "duration",
    "observer_node",
    "reliability_mode",
    "killed_agents",
    "seed",
    "mobility.model",
    "mobility.v_max",
    "mobility.pause_time",
    "mobility.a_max",
    "mobility.sdr",
    "mobility.adr",
    "mobility.phi_max",
    "mobility.group_size",
    "mobility.srmm_epoch_mean",
    "mobility.area_width",
    "mobility.area_height",
    "mobility.delta_t",
    "radio.p_t_watts",
    "radio.g_t",
    "radio.g_r",
    "radio.h_t",
    "radio.h_r",
    "radio.noise_watts",
    "radio.bandwidth_hz",
    "radio.capacity_threshold_bps",
    "failure.link_revival_rate",
    "failure.node_weibull_shape",
    "failure.node_weibull_scale",
    "failure.agent_weibull_shape",
    "failure.agent_weibull_scale",
    "failure.p_t_migration",
    "agents.retry_budget",
    "agents.fr_window",
    "agents.wait_steps",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}`: cannot parse `{value}` as a number"))
}

impl ScenarioConfig {
    /// Episode horizon, s.
    pub fn duration_s(&self) -> f64 {
        self.duration_min * 60.0
    }

    /// Number of simulation steps in one episode.
    pub fn step_budget(&self) -> u64 {
        (self.duration_s() / self.mobility.delta_t).ceil().max(1.0) as u64
    }

    pub fn observer(&self) -> usize {
        self.observer_node.unwrap_or(self.n_nodes.saturating_sub(1))
    }

    /// Sets one field by key. Values are checked for syntax only; call
    /// [`ScenarioConfig::validate`] afterwards for ranges.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let m = &mut self.mobility;
        let r = &mut self.radio;
        let f = &mut self.failure;
        match key {
            "n_nodes" => self.n_nodes = parse_num(key, value)?,
            "m_agents" => self.m_agents = parse_num(key, value)?,
            "q_runs" => self.q_runs = parse_num(key, value)?,
            "sp_total" => self.sp_total = parse_num(key, value)?,
            "max_fr" => self.max_fr = parse_num(key, value)?,
            "lfp" => f.lfp = parse_num(key, value)?,
            "duration" => self.duration_min = parse_num(key, value)?,
            "observer_node" => {
                self.observer_node = if value == "auto" {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "reliability_mode" => self.reliability_mode = value.parse()?,
            "killed_agents" => self.killed_policy = value.parse()?,
            "seed" => self.seed = parse_num(key, value)?,
            "mobility.model" => m.model = value.parse()?,
            "mobility.v_max" => m.v_max = parse_num(key, value)?,
            "mobility.pause_time" => m.pause_time = parse_num(key, value)?,
            "mobility.a_max" => m.a_max = parse_num(key, value)?,
            "mobility.sdr" => m.sdr = parse_num(key, value)?,
            "mobility.adr" => m.adr = parse_num(key, value)?,
            "mobility.phi_max" => m.phi_max = parse_num(key, value)?,
            "mobility.group_size" => m.group_size = parse_num(key, value)?,
            "mobility.srmm_epoch_mean" => m.srmm_epoch_mean = parse_num(key, value)?,
            "mobility.area_width" => m.area_width = parse_num(key, value)?,
            "mobility.area_height" => m.area_height = parse_num(key, value)?,
            "mobility.delta_t" => m.delta_t = parse_num(key, value)?,
            "radio.p_t_watts" => r.p_t_watts = parse_num(key, value)?,
            "radio.g_t" => r.g_t = parse_num(key, value)?,
            "radio.g_r" => r.g_r = parse_num(key, value)?,
            "radio.h_t" => r.h_t = parse_num(key, value)?,
            "radio.h_r" => r.h_r = parse_num(key, value)?,
            "radio.noise_watts" => r.noise_watts = parse_num(key, value)?,
            "radio.bandwidth_hz" => r.bandwidth_hz = parse_num(key, value)?,
            "radio.capacity_threshold_bps" => r.capacity_threshold_bps = parse_num(key, value)?,
            "failure.link_revival_rate" => f.link_revival_rate = parse_num(key, value)?,
            "failure.node_weibull_shape" => f.node_weibull_shape = parse_num(key, value)?,
            "failure.node_weibull_scale" => f.node_weibull_scale = parse_num(key, value)?,
            "failure.agent_weibull_shape" => f.agent_weibull_shape = parse_num(key, value)?,
            "failure.agent_weibull_scale" => f.agent_weibull_scale = parse_num(key, value)?,
            "failure.p_t_migration" => f.p_t_migration = parse_num(key, value)?,
            "agents.retry_budget" => self.agents.retry_budget = parse_num(key, value)?,
            "agents.fr_window" => self.agents.fr_window = parse_num(key, value)?,
            "agents.wait_steps" => self.agents.wait_steps = parse_num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Current value of a key, rendered so that [`ScenarioConfig::set`] reads
    /// it back unchanged.
    pub fn get(&self, key: &str) -> Option<String> {
        let m = &self.mobility;
        let r = &self.radio;
        let f = &self.failure;
        let s = match key {
            "n_nodes" => self.n_nodes.to_string(),
            "m_agents" => self.m_agents.to_string(),
            "q_runs" => self.q_runs.to_string(),
            "sp_total" => self.sp_total.to_string(),
            "max_fr" => self.max_fr.to_string(),
            "lfp" => f.lfp.to_string(),
            "duration" => self.duration_min.to_string(),
            "observer_node" => self.observer_node.map_or("auto".to_string(), |v| v.to_string()),
            "reliability_mode" => self.reliability_mode.to_string(),
            "killed_agents" => self.killed_policy.to_string(),
            "seed" => self.seed.to_string(),
            "mobility.model" => m.model.to_string(),
            "mobility.v_max" => m.v_max.to_string(),
            "mobility.pause_time" => m.pause_time.to_string(),
            "mobility.a_max" => m.a_max.to_string(),
            "mobility.sdr" => m.sdr.to_string(),
            "mobility.adr" => m.adr.to_string(),
            "mobility.phi_max" => m.phi_max.to_string(),
            "mobility.group_size" => m.group_size.to_string(),
            "mobility.srmm_epoch_mean" => m.srmm_epoch_mean.to_string(),
            "mobility.area_width" => m.area_width.to_string(),
            "mobility.area_height" => m.area_height.to_string(),
            "mobility.delta_t" => m.delta_t.to_string(),
            "radio.p_t_watts" => r.p_t_watts.to_string(),
            "radio.g_t" => r.g_t.to_string(),
            "radio.g_r" => r.g_r.to_string(),
            "radio.h_t" => r.h_t.to_string(),
            "radio.h_r" => r.h_r.to_string(),
            "radio.noise_watts" => r.noise_watts.to_string(),
            "radio.bandwidth_hz" => r.bandwidth_hz.to_string(),
            "radio.capacity_threshold_bps" => r.capacity_threshold_bps.to_string(),
            "failure.link_revival_rate" => f.link_revival_rate.to_string(),
            "failure.node_weibull_shape" => f.node_weibull_shape.to_string(),
            "failure.node_weibull_scale" => f.node_weibull_scale.to_string(),
            "failure.agent_weibull_shape" => f.agent_weibull_shape.to_string(),
            "failure.agent_weibull_scale" => f.agent_weibull_scale.to_string(),
            "failure.p_t_migration" => f.p_t_migration.to_string(),
            "agents.retry_budget" => self.agents.retry_budget.to_string(),
            "agents.fr_window" => self.agents.fr_window.to_string(),
            "agents.wait_steps" => self.agents.wait_steps.to_string(),
            _ => return None,
        };
        Some(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, v) in [
            ("n_nodes", self.n_nodes),
            ("m_agents", self.m_agents),
            ("q_runs", self.q_runs),
            ("max_fr", self.max_fr),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.sp_total > self.n_nodes {
            return bad(format!(
                "sp_total ({}) cannot exceed n_nodes ({})",
                self.sp_total, self.n_nodes
            ));
        }
        if !(self.duration_min > 0.0 && self.duration_min.is_finite()) {
            return bad("duration must be positive".into());
        }
        if self.observer() >= self.n_nodes {
            return bad(format!("observer_node {} is not a node", self.observer()));
        }
        if self.agents.fr_window == 0 {
            return bad("agents.fr_window must be at least 1".into());
        }
        self.mobility.validate()?;
        self.radio.validate()?;
        self.failure.validate()?;
        Ok(())
    }

    /// Renders every key. `parse_config` of the output yields `self`.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = self.get(key).expect("every listed key is readable");
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}

/// Splits one line into `(key, value)`, or `None` for blank/comment lines.
fn split_line(raw: &str) -> std::result::Result<Option<(&str, &str)>, String> {
    let line = raw.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return Ok(None);
    }
    let (key, value) = line
        .split_once('=')
        .ok_or_else(|| format!("expected `key = value`, found `{line}`"))?;
    let (key, value) = (key.trim(), value.trim());
    if key.is_empty() {
        return Err("missing key before `=`".into());
    }
    if value.is_empty() {
        return Err(format!("missing value for `{key}`"));
    }
    Ok(Some((key, value)))
}

/// Applies `key = value` lines on top of `base`, reporting the first error with
/// its 1-based line number. Duplicate keys: the last one wins.
pub fn apply_text(base: ScenarioConfig, text: &str) -> Result<ScenarioConfig> {
    let mut cfg = base;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let parsed = split_line(raw).map_err(|msg| Error::Parse { line, msg })?;
        if let Some((key, value)) = parsed {
            cfg.set(key, value).map_err(|msg| Error::Parse { line, msg })?;
            // pin range errors to the line that introduced them
            if let Err(Error::InvalidConfig(msg)) = cfg.validate_field(key) {
                return Err(Error::Parse { line, msg });
            }
            last_line = line;
        }
    }
    cfg.validate().map_err(|e| match e {
        Error::InvalidConfig(msg) => Error::Parse {
            line: last_line.max(1),
            msg,
        },
        other => other,
    })?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    apply_text(ScenarioConfig::default(), text)
}

impl ScenarioConfig {
    /// Range checks that depend on a single key only.
    fn validate_field(&self, key: &str) -> Result<()> {
        let err = |msg: &str| Err(Error::InvalidConfig(format!("`{key}` {msg}")));
        let f = &self.failure;
        let m = &self.mobility;
        match key {
            "lfp" if !(0.0..=1.0).contains(&f.lfp) => err("must lie in [0, 1]"),
            "failure.p_t_migration" if !(0.0..=1.0).contains(&f.p_t_migration) => err("must lie in [0, 1]"),
            "mobility.sdr" if !(m.sdr > 0.0 && m.sdr < 1.0) => err("must lie strictly between 0 and 1"),
            "mobility.adr" if !(m.adr > 0.0 && m.adr < 1.0) => err("must lie strictly between 0 and 1"),
            "n_nodes" | "m_agents" | "q_runs" | "max_fr" | "agents.fr_window" if self.get(key).as_deref() == Some("0") => {
                err("must be at least 1")
            }
            _ => Ok(()),
        }
    }
}
