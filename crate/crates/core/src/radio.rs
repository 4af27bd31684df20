//! Radio link model: two-ray ground received power, Shannon capacity, transient
//! link failure with Poisson revival, and Weibull node/agent failure.

use rand::Rng;
use rand_distr::{Distribution, Weibull};

use crate::error::{Error, Result};

/// Default simulated horizon (750 min) that the Weibull scale defaults are tied to.
pub const DEFAULT_HORIZON_S: f64 = 750.0 * 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RadioParams {
    pub p_t_watts: f64,
    pub g_t: f64,
    pub g_r: f64,
    /// Antenna heights, m.
    pub h_t: f64,
    pub h_r: f64,
    pub noise_watts: f64,
    pub bandwidth_hz: f64,
    /// Minimum capacity for a usable link, bit/s.
    pub capacity_threshold_bps: f64,
}

impl Default for RadioParams {
    /// 100 mW at 1.5 m antennas over 1 MHz. The noise floor gives SNR = 1 at
    /// 300 m; the 175 kbit/s threshold stretches usable range to about 500 m.
    fn default() -> Self {
        RadioParams {
            p_t_watts: 0.1,
            g_t: 1.0,
            g_r: 1.0,
            h_t: 1.5,
            h_r: 1.5,
            noise_watts: 6.25e-11,
            bandwidth_hz: 1e6,
            capacity_threshold_bps: 1.75e5,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_t_watts", self.p_t_watts),
            ("g_t", self.g_t),
            ("g_r", self.g_r),
            ("h_t", self.h_t),
            ("h_r", self.h_r),
            ("noise_watts", self.noise_watts),
            ("bandwidth_hz", self.bandwidth_hz),
            ("capacity_threshold_bps", self.capacity_threshold_bps),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidConfig(format!("radio.{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureParams {
    /// Per-step probability that a working in-range link transiently fails.
    pub lfp: f64,
    /// Revival intensity of a transiently failed link, 1/s.
    pub link_revival_rate: f64,
    pub node_weibull_shape: f64,
    /// s
    pub node_weibull_scale: f64,
    pub agent_weibull_shape: f64,
    /// s
    pub agent_weibull_scale: f64,
    /// Per-attempt migration success probability.
    pub p_t_migration: f64,
}

impl Default for FailureParams {
    fn default() -> Self {
        FailureParams {
            lfp: 0.2,
            link_revival_rate: 0.1,
            node_weibull_shape: 1.5,
            node_weibull_scale: 10.0 * DEFAULT_HORIZON_S,
            agent_weibull_shape: 1.0,
            agent_weibull_scale: 20.0 * DEFAULT_HORIZON_S,
            p_t_migration: 0.9,
        }
    }
}

impl FailureParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(0.0..=1.0).contains(&self.lfp) {
            return bad("lfp must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.p_t_migration) {
            return bad("failure.p_t_migration must lie in [0, 1]");
        }
        if !(self.link_revival_rate >= 0.0) {
            return bad("failure.link_revival_rate must be non-negative");
        }
        for (name, v) in [
            ("node_weibull_shape", self.node_weibull_shape),
            ("node_weibull_scale", self.node_weibull_scale),
            ("agent_weibull_shape", self.agent_weibull_shape),
            ("agent_weibull_scale", self.agent_weibull_scale),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidConfig(format!("failure.{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Two-ray ground approximation `P_t·G_t·G_r·(h_t·h_r)² / d⁴`.
pub fn received_power(d: f64, rp: &RadioParams) -> Result<f64> {
    if d <= 0.0 {
        return Err(Error::CoincidentNodes);
    }
    let hh = rp.h_t * rp.h_r;
    Ok(rp.p_t_watts * rp.g_t * rp.g_r * hh * hh / d.powi(4))
}

/// Shannon capacity `B·log₂(1 + P_r/N)`. Zero power means a failed link.
pub fn link_capacity(p_r: f64, rp: &RadioParams) -> f64 {
    if p_r <= 0.0 {
        return 0.0;
    }
    rp.bandwidth_hz * (p_r / rp.noise_watts).ln_1p() / std::f64::consts::LN_2
}

/// Capacity of a link at distance `d`; coincident nodes get infinite capacity.
pub fn capacity_at(d: f64, rp: &RadioParams) -> f64 {
    match received_power(d, rp) {
        Ok(p) => link_capacity(p, rp),
        Err(_) => f64::INFINITY,
    }
}

/// Whether the radio alone supports a link at distance `d`.
pub fn in_range(d: f64, rp: &RadioParams) -> bool {
    capacity_at(d, rp) >= rp.capacity_threshold_bps
}

/// Largest distance at which [`in_range`] holds, in closed form.
pub fn cutoff_distance(rp: &RadioParams) -> f64 {
    let snr = (rp.capacity_threshold_bps / rp.bandwidth_hz).exp2() - 1.0;
    let hh = rp.h_t * rp.h_r;
    (rp.p_t_watts * rp.g_t * rp.g_r * hh * hh / (snr * rp.noise_watts)).powf(0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkState {
    Up,
    Down,
}

/// Probability that a transiently failed link revives within one step.
pub fn revival_probability(fp: &FailureParams, delta_t: f64) -> f64 {
    1.0 - (-fp.link_revival_rate * delta_t).exp()
}

/// One step of the transient process for an in-range link, driven by two
/// uniforms so callers can share random numbers across scenarios.
///
/// A down link first revives with probability `1 − exp(−rate·Δt)`; any link
/// that is up at that point then fails with probability `lfp`. A link with no
/// history counts as up.
pub fn transient_transition(
    prev: Option<LinkState>,
    fp: &FailureParams,
    delta_t: f64,
    u_revive: f64,
    u_fail: f64,
) -> LinkState {
    let candidate = match prev {
        None | Some(LinkState::Up) => true,
        Some(LinkState::Down) => u_revive < revival_probability(fp, delta_t),
    };
    if candidate && u_fail >= fp.lfp {
        LinkState::Up
    } else {
        LinkState::Down
    }
}

/// Link state for a pair at distance `d`. Capacity below threshold forces the
/// link down regardless of its history.
pub fn link_up<R: Rng + ?Sized>(
    d: f64,
    rp: &RadioParams,
    fp: &FailureParams,
    prev: Option<LinkState>,
    delta_t: f64,
    rng: &mut R,
) -> LinkState {
    if !in_range(d, rp) {
        return LinkState::Down;
    }
    let u_revive = rng.random::<f64>();
    let u_fail = rng.random::<f64>();
    transient_transition(prev, fp, delta_t, u_revive, u_fail)
}

pub fn weibull_survival(t: f64, shape: f64, scale: f64) -> f64 {
    (-(t / scale).powf(shape)).exp()
}

pub fn sample_node_lifetime<R: Rng + ?Sized>(fp: &FailureParams, rng: &mut R) -> f64 {
    if fp.node_weibull_scale.is_infinite() {
        return f64::INFINITY;
    }
    Weibull::new(fp.node_weibull_scale, fp.node_weibull_shape)
        .expect("weibull parameters validated positive")
        .sample(rng)
}

/// Draws a node lifetime and reports whether the node still works at `t`.
pub fn sample_node_operational<R: Rng + ?Sized>(t: f64, fp: &FailureParams, rng: &mut R) -> bool {
    sample_node_lifetime(fp, rng) > t
}

/// Software reliability of an agent over a horizon of `horizon_s` seconds.
pub fn agent_software_reliability(fp: &FailureParams, horizon_s: f64) -> f64 {
    weibull_survival(horizon_s, fp.agent_weibull_shape, fp.agent_weibull_scale).clamp(0.0, 1.0)
}
