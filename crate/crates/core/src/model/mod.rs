//! Network graph, stochastic state space, rate-power and utility models,
//! and scenario configuration.

pub mod file;
pub mod rate;
pub mod scenario;
pub mod state;
pub mod topology;
pub mod utility;

pub use rate::{PowerTable, RatePowerModel, RateReport, UnitPowerTwoState, verify_rate_properties};
pub use scenario::{
    build_fig2_scenario, build_fig2_regime_scenario, fig2_family, AdmissionSet, OffsetVariant,
    Params, RegimeChange, Scenario,
};
pub use state::{ChannelCond, JointState, StateSpace};
pub use topology::{Layout, Link, LinkId, NodeId, Topology};
pub use utility::{ScaledLogUtility, UtilityModel};
