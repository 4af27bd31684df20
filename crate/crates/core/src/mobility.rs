//! Node kinematics under the random waypoint (RWMM), smooth random (SRMM) and
//! reference point group (RPGM) mobility models.
//!
//! Every model integrates position with the same dead-reckoning update,
//! `x += Δt·v·cos φ`, `y += Δt·v·sin φ`; SRMM adds the `½·a·Δt²` term.
//! Positions are kept inside the rectangular area by mirror reflection.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};

/// Heading change limit for SRMM, rad/s.
pub const SRMM_MAX_TURN_RATE: f64 = 0.2;

/// Radius of the disk around its leader in which an RPGM follower starts, m.
pub const GROUP_SPREAD: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MobilityModel {
    Rwmm,
    Srmm,
    Rpgm,
    /// Nodes never move. Used for sanity scenarios with a fixed topology.
    Static,
}

impl fmt::Display for MobilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MobilityModel::Rwmm => "RWMM",
            MobilityModel::Srmm => "SRMM",
            MobilityModel::Rpgm => "RPGM",
            MobilityModel::Static => "STATIC",
        })
    }
}

impl FromStr for MobilityModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "RWMM" => Ok(MobilityModel::Rwmm),
            "SRMM" => Ok(MobilityModel::Srmm),
            "RPGM" => Ok(MobilityModel::Rpgm),
            "STATIC" => Ok(MobilityModel::Static),
            _ => Err(format!("unknown mobility model `{s}` (expected RWMM, SRMM, RPGM or STATIC)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityParams {
    pub model: MobilityModel,
    /// m/s
    pub v_max: f64,
    /// RWMM pause at each waypoint, s.
    pub pause_time: f64,
    /// SRMM acceleration bound, m/s².
    pub a_max: f64,
    /// RPGM speed deviation ratio, in (0, 1).
    pub sdr: f64,
    /// RPGM angle deviation ratio, in (0, 1).
    pub adr: f64,
    /// RPGM heading deviation bound, rad.
    pub phi_max: f64,
    /// Nodes per RPGM group; groups are formed round-robin.
    pub group_size: usize,
    /// Mean interval between SRMM target-speed changes, s.
    pub srmm_epoch_mean: f64,
    pub area_width: f64,
    pub area_height: f64,
    /// Step duration, s.
    pub delta_t: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        MobilityParams {
            model: MobilityModel::Srmm,
            v_max: 2.0,
            pause_time: 30.0,
            a_max: 0.5,
            sdr: 0.2,
            adr: 0.2,
            phi_max: PI,
            group_size: 5,
            srmm_epoch_mean: 60.0,
            area_width: 1000.0,
            area_height: 1000.0,
            delta_t: 1.0,
        }
    }
}

impl MobilityParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("mobility: {msg}")));
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return bad("v_max must be positive");
        }
        if !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            return bad("delta_t must be positive");
        }
        if !(self.area_width > 0.0 && self.area_height > 0.0) {
            return bad("area dimensions must be positive");
        }
        if !(self.sdr > 0.0 && self.sdr < 1.0) || !(self.adr > 0.0 && self.adr < 1.0) {
            return bad("sdr and adr must lie strictly between 0 and 1");
        }
        if !(self.pause_time >= 0.0) || !(self.a_max >= 0.0) || !(self.phi_max >= 0.0) {
            return bad("pause_time, a_max and phi_max must be non-negative");
        }
        if self.group_size == 0 {
            return bad("group_size must be at least 1");
        }
        if !(self.srmm_epoch_mean > 0.0) {
            return bad("srmm_epoch_mean must be positive");
        }
        Ok(())
    }
}

/// Maps every node to the leader of its RPGM group. Leaders map to themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupMap {
    leader_of: Vec<usize>,
}

impl GroupMap {
    /// `ceil(n / group_size)` groups; node `i` joins group `i % groups`, whose
    /// leader is node `i % groups`.
    pub fn round_robin(n: usize, group_size: usize) -> Self {
        let groups = n.div_ceil(group_size.max(1)).max(1);
        GroupMap {
            leader_of: (0..n).map(|i| i % groups).collect(),
        }
    }

    pub fn from_leaders(leader_of: Vec<usize>) -> Result<Self> {
        let n = leader_of.len();
        for (node, &leader) in leader_of.iter().enumerate() {
            if leader >= n {
                return Err(Error::InvalidConfig(format!(
                    "group map: node {node} references missing leader {leader}"
                )));
            }
            if leader_of[leader] != leader {
                return Err(Error::InvalidConfig(format!(
                    "group map: leader {leader} of node {node} is itself a follower"
                )));
            }
        }
        Ok(GroupMap { leader_of })
    }

    pub fn leader(&self, node: usize) -> usize {
        self.leader_of[node]
    }

    pub fn is_leader(&self, node: usize) -> bool {
        self.leader_of[node] == node
    }

    pub fn len(&self) -> usize {
        self.leader_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leader_of.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub x: f64,
    pub y: f64,
    /// Speed, m/s.
    pub v: f64,
    /// Heading, rad.
    pub phi: f64,
    /// Acceleration along the heading, m/s².
    pub a: f64,
    pub waypoint: Option<(f64, f64)>,
    pub pause_remaining: f64,
    /// SRMM speed the node is accelerating toward.
    pub target_v: f64,
    /// SRMM heading the node is turning toward.
    pub target_phi: f64,
    /// Time until the next SRMM target draw, s.
    pub epoch_remaining: f64,
}

impl Kinematics {
    /// A motionless node at `(x, y)` with no pending waypoint or SRMM epoch.
    pub fn at(x: f64, y: f64) -> Self {
        Kinematics {
            x,
            y,
            v: 0.0,
            phi: 0.0,
            a: 0.0,
            waypoint: None,
            pause_remaining: 0.0,
            target_v: 0.0,
            target_phi: 0.0,
            epoch_remaining: f64::INFINITY,
        }
    }

    pub fn with_velocity(mut self, v: f64, phi: f64) -> Self {
        self.v = v;
        self.phi = phi;
        self.target_v = v;
        self.target_phi = phi;
        self
    }

    pub fn with_acceleration(mut self, a: f64) -> Self {
        self.a = a;
        self.target_v = if a > 0.0 {
            f64::INFINITY
        } else if a < 0.0 {
            f64::NEG_INFINITY
        } else {
            self.v
        };
        self
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn distance_to(&self, other: &Kinematics) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Velocity vector `(v·cos φ, v·sin φ)`.
    pub fn velocity(&self) -> (f64, f64) {
        (self.v * self.phi.cos(), self.v * self.phi.sin())
    }
}

/// Mirrors one coordinate into `[0, extent]`. Returns the folded value and
/// whether the direction of travel along this axis was reversed.
fn fold(c: f64, extent: f64) -> (f64, bool) {
    if (0.0..=extent).contains(&c) {
        return (c, false);
    }
    let m = c.rem_euclid(2.0 * extent);
    if m > extent {
        (2.0 * extent - m, true)
    } else {
        (m, false)
    }
}

/// Reflects a position back into the area, adjusting the heading so that the
/// velocity component normal to each violated edge is negated.
pub fn apply_boundary(x: f64, y: f64, phi: f64, p: &MobilityParams) -> (f64, f64, f64) {
    let (x, flip_x) = fold(x, p.area_width);
    let (y, flip_y) = fold(y, p.area_height);
    let mut phi = phi;
    if flip_x {
        phi = PI - phi;
    }
    if flip_y {
        phi = -phi;
    }
    if flip_x || flip_y {
        phi = phi.rem_euclid(TAU);
    }
    (x, y, phi)
}

fn reflect(k: &mut Kinematics, p: &MobilityParams) {
    let before = k.phi;
    let (x, y, phi) = apply_boundary(k.x, k.y, k.phi, p);
    k.x = x;
    k.y = y;
    if phi != before {
        k.phi = phi;
        k.target_phi = phi;
    }
}

/// Draws the next RWMM leg: a uniform waypoint and a speed in `(0.1·v_max, v_max]`.
fn next_leg<R: Rng + ?Sized>(k: &mut Kinematics, p: &MobilityParams, rng: &mut R) {
    let wx = rng.random::<f64>() * p.area_width;
    let wy = rng.random::<f64>() * p.area_height;
    // random() is in [0, 1); flip it to (0, 1] so v_max itself is reachable
    let u = 1.0 - rng.random::<f64>();
    k.v = p.v_max * (0.1 + 0.9 * u);
    k.phi = (wy - k.y).atan2(wx - k.x);
    k.waypoint = Some((wx, wy));
    k.pause_remaining = 0.0;
}

pub fn step_rwmm<R: Rng + ?Sized>(k: &Kinematics, p: &MobilityParams, rng: &mut R) -> Kinematics {
    let mut k = k.clone();
    let dt = p.delta_t;
    if k.pause_remaining > 0.0 {
        k.pause_remaining = (k.pause_remaining - dt).max(0.0);
        if k.pause_remaining == 0.0 {
            next_leg(&mut k, p, rng);
        }
        return k;
    }
    if let Some((wx, wy)) = k.waypoint {
        let (dx, dy) = (wx - k.x, wy - k.y);
        if dx.hypot(dy) <= k.v * dt {
            k.x = wx;
            k.y = wy;
            k.v = 0.0;
            k.waypoint = None;
            k.pause_remaining = p.pause_time;
            if p.pause_time <= 0.0 {
                next_leg(&mut k, p, rng);
            }
            return k;
        }
        k.phi = dy.atan2(dx);
    }
    k.x += dt * k.v * k.phi.cos();
    k.y += dt * k.v * k.phi.sin();
    reflect(&mut k, p);
    k
}

fn turn_toward(phi: f64, target: f64, max_turn: f64) -> f64 {
    // signed shortest angular difference in (-π, π]
    let mut diff = (target - phi).rem_euclid(TAU);
    if diff > PI {
        diff -= TAU;
    }
    if diff.abs() <= max_turn {
        target
    } else {
        phi + max_turn.copysign(diff)
    }
}

pub fn step_srmm<R: Rng + ?Sized>(k: &Kinematics, p: &MobilityParams, rng: &mut R) -> Kinematics {
    let mut k = k.clone();
    let dt = p.delta_t;
    let (c, s) = (k.phi.cos(), k.phi.sin());
    k.x += dt * k.v * c + 0.5 * k.a * c * dt * dt;
    k.y += dt * k.v * s + 0.5 * k.a * s * dt * dt;

    let mut v = (k.v + k.a * dt).clamp(0.0, p.v_max);
    if (k.a > 0.0 && v >= k.target_v) || (k.a < 0.0 && v <= k.target_v) {
        v = k.target_v.clamp(0.0, p.v_max);
        k.a = 0.0;
    }
    k.v = v;
    if k.phi != k.target_phi {
        k.phi = turn_toward(k.phi, k.target_phi, SRMM_MAX_TURN_RATE * dt).rem_euclid(TAU);
    }
    reflect(&mut k, p);

    k.epoch_remaining -= dt;
    if k.epoch_remaining <= 0.0 {
        let target_v = rng.random::<f64>() * p.v_max;
        let target_phi = rng.random::<f64>() * TAU;
        let magnitude = (1.0 - rng.random::<f64>()) * p.a_max;
        k.target_v = target_v;
        k.target_phi = target_phi;
        k.a = if target_v > k.v {
            magnitude
        } else if target_v < k.v {
            -magnitude
        } else {
            0.0
        };
        k.epoch_remaining += draw_epoch(p, rng);
    }
    k
}

fn draw_epoch<R: Rng + ?Sized>(p: &MobilityParams, rng: &mut R) -> f64 {
    Exp::new(1.0 / p.srmm_epoch_mean)
        .expect("epoch mean validated positive")
        .sample(rng)
}

/// Follower velocity from its leader's, given deviation draws `u1, u2 ∈ [-1, 1]`.
pub fn rpgm_velocity(leader: &Kinematics, p: &MobilityParams, u1: f64, u2: f64) -> (f64, f64) {
    let v = (leader.v + u1 * p.sdr * p.v_max).max(0.0);
    let phi = leader.phi + u2 * p.adr * p.phi_max;
    (v, phi)
}

/// Advances an RPGM follower. `leader` must already hold its state for this step.
pub fn step_rpgm<R: Rng + ?Sized>(
    k: &Kinematics,
    leader: &Kinematics,
    p: &MobilityParams,
    rng: &mut R,
) -> Kinematics {
    let u1 = rng.random_range(-1.0..=1.0);
    let u2 = rng.random_range(-1.0..=1.0);
    step_rpgm_with(k, leader, p, u1, u2)
}

pub fn step_rpgm_with(k: &Kinematics, leader: &Kinematics, p: &MobilityParams, u1: f64, u2: f64) -> Kinematics {
    let mut k = k.clone();
    let (v, phi) = rpgm_velocity(leader, p, u1, u2);
    k.v = v;
    k.phi = phi;
    k.target_v = v;
    k.target_phi = phi;
    k.x += p.delta_t * v * phi.cos();
    k.y += p.delta_t * v * phi.sin();
    reflect(&mut k, p);
    k
}

/// Places `n` nodes and primes the model-specific state (waypoints, SRMM epochs,
/// group positions).
pub fn initial_kinematics<R: Rng + ?Sized>(
    n: usize,
    p: &MobilityParams,
    groups: &GroupMap,
    rng: &mut R,
) -> Vec<Kinematics> {
    let mut nodes: Vec<Kinematics> = (0..n)
        .map(|_| {
            let x = rng.random::<f64>() * p.area_width;
            let y = rng.random::<f64>() * p.area_height;
            Kinematics::at(x, y)
        })
        .collect();
    match p.model {
        MobilityModel::Static => {}
        MobilityModel::Rwmm => nodes.iter_mut().for_each(|k| next_leg(k, p, rng)),
        MobilityModel::Srmm => {
            for k in &mut nodes {
                let v = rng.random::<f64>() * p.v_max;
                let phi = rng.random::<f64>() * TAU;
                *k = Kinematics::at(k.x, k.y).with_velocity(v, phi);
                k.epoch_remaining = draw_epoch(p, rng);
            }
        }
        MobilityModel::Rpgm => {
            for i in 0..n {
                if groups.is_leader(i) {
                    next_leg(&mut nodes[i], p, rng);
                }
            }
            for i in 0..n {
                if groups.is_leader(i) {
                    continue;
                }
                let leader = nodes[groups.leader(i)].clone();
                let r = GROUP_SPREAD * rng.random::<f64>().sqrt();
                let theta = rng.random::<f64>() * TAU;
                let x = (leader.x + r * theta.cos()).clamp(0.0, p.area_width);
                let y = (leader.y + r * theta.sin()).clamp(0.0, p.area_height);
                nodes[i] = Kinematics::at(x, y).with_velocity(leader.v, leader.phi);
            }
        }
    }
    nodes
}

/// Advances every node by one step. RPGM leaders move first (under RWMM) so
/// followers read their leader's updated velocity.
pub fn advance_all<R: Rng + ?Sized>(
    nodes: &mut [Kinematics],
    groups: &GroupMap,
    p: &MobilityParams,
    rng: &mut R,
) {
    match p.model {
        MobilityModel::Static => {}
        MobilityModel::Rwmm => {
            for k in nodes.iter_mut() {
                *k = step_rwmm(k, p, rng);
            }
        }
        MobilityModel::Srmm => {
            for k in nodes.iter_mut() {
                *k = step_srmm(k, p, rng);
            }
        }
        MobilityModel::Rpgm => {
            for i in 0..nodes.len() {
                if groups.is_leader(i) {
                    nodes[i] = step_rwmm(&nodes[i], p, rng);
                }
            }
            for i in 0..nodes.len() {
                if !groups.is_leader(i) {
                    let leader = nodes[groups.leader(i)].clone();
                    nodes[i] = step_rpgm(&nodes[i], &leader, p, rng);
                }
            }
        }
    }
}
