//! Two-stage stochastic vehicle routing with recourse.
//!
//! The crate covers the full approximation pipeline (sampling reduction,
//! set-cover greedy, ratio orienteering on tree embeddings, LP-based
//! recourse rounding, independent demands) and exact oracles for tiny
//! instances.

pub mod detvrp;
pub mod error;
pub mod hst;
pub mod indep;
pub mod instances;
pub mod kro;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod recourse;
pub mod reduction;
pub mod seed;
pub mod setcover;
pub mod solution;

pub use error::{Error, Result};
pub use model::{
    evaluate_objective, tour_length, DemandVector, Demands, FixedTour, Metric, RTour, RecourseAction, ScenarioSet,
    ServedTour, StochVrpInstance,
};
pub use indep::{IndepConfig, IndepDistribution, IndepOutcome};
pub use instances::{parse_instance, serialize_instance, Hypergraph};
pub use oracle::{exact_stoch_vrp, OracleCaps};
pub use rational::Rational;
pub use reduction::{BlackBoxConfig, BlackBoxOutcome, DemandSampler, EmpiricalSampler};
pub use setcover::{greedy_set_cover, SetCoverConfig, SetCoverOutcome};
