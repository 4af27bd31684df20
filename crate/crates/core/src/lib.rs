//! Monte Carlo estimation of how reliably a population of mobile agents
//! discovers services in a mobile ad-hoc network.
//!
//! Each episode moves nodes under a mobility model, samples the radio graph
//! (two-ray power, Shannon capacity, transient link failure), and lets travel
//! agents tour the graph. An agent's task reliability is the fraction of nodes
//! it reached, weighted by its software reliability; [`monte_carlo`] averages
//! that over independently seeded episodes.

pub mod agents;
pub mod config;
pub mod error;
pub mod estimator;
pub mod mobility;
pub mod radio;
pub mod topology;

pub use agents::{AgentPolicy, AgentStatus, NodeServiceLedger, RouteRule, TravelAgent};
pub use config::{parse_config, KilledPolicy, ReliabilityMode, ScenarioConfig};
pub use error::{Error, Result};
pub use estimator::{
    monte_carlo, run_episode, run_episode_with, EpisodeResult, EpisodeSetup, EpisodeSummary,
    ReliabilityReport,
};
pub use mobility::{Kinematics, MobilityModel, MobilityParams};
pub use radio::{FailureParams, LinkState, RadioParams};
pub use topology::TopologySnapshot;
