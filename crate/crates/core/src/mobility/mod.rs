//! Mobility of vehicles and pedestrians on a two-intersection map, with
//! Poisson arrivals and ground-truth collision logging by footprint overlap.

pub mod arrivals;
pub mod fixtures;
pub mod network;
pub mod records;
pub mod scenario;
pub mod shapes;
pub mod stability;
pub mod world;

use thiserror::Error;

pub use arrivals::{generate_arrivals, ArrivalConfig, Spawn};
pub use network::RoadNetwork;
pub use records::{CollisionRecord, TrajectoryRecord};
pub use scenario::{CollisionAction, PedestrianSpec, Scenario, VehicleSpec};
pub use stability::{find_knee, stability_sweep, StabilityPoint};
pub use world::{Agent, AgentCounts, VehiclePlacement, World};

#[derive(Debug, Error)]
pub enum MobilityError {
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("step must be a positive whole number of microseconds, got {0}")]
    InvalidStep(f64),
    #[error("no route with index {0}")]
    InvalidRoute(usize),
    #[error("{0}")]
    InvalidSweep(String),
}
