//! Hand-placed situations with known outcomes, shared by tests and examples.

use crate::entity::EntityId;

use super::scenario::Scenario;
use super::world::{VehiclePlacement, World};
use super::MobilityError;

/// A world with two placed vehicles and no random arrivals.
#[derive(Debug)]
pub struct Fixture {
    pub world: World,
    pub moving: EntityId,
    pub other: EntityId,
    /// When the footprints first touch if nobody brakes, seconds.
    pub impact_time: f64,
}

/// A northbound vehicle stands still across the eastbound lane inside the
/// west junction. A non-yielding eastbound vehicle, `distance` meters
/// (center to center) away, approaches at `speed`.
pub fn stalled_in_junction(scenario: &Scenario, distance: f64, speed: f64) -> Result<Fixture, MobilityError> {
    if !(distance > 0.0 && speed > 0.0) {
        return Err(MobilityError::Scenario("fixture distance and speed must be positive".into()));
    }
    let mut world = World::new(scenario.clone(), Vec::new())?;
    let (east, north) = {
        let net = world.network();
        (net.vehicle_routes[0].clone(), net.vehicle_routes[2].clone())
    };
    let len = scenario.vehicle.length;
    // Stalled center on the eastbound lane axis.
    let stalled_s = (east.origin.y - north.origin.y) + 0.5 * len;
    let center_x = north.origin.x - distance;
    let moving_s = (center_x - east.origin.x) + 0.5 * len;
    if moving_s - len < 0.0 {
        return Err(MobilityError::Scenario(format!("distance {distance} m starts the vehicle off the road")));
    }
    let other = world.place_vehicle(VehiclePlacement {
        route: 2,
        s: stalled_s,
        speed: 0.0,
        desired_speed: 0.0,
        yielding: true,
    })?;
    let moving = world.place_vehicle(VehiclePlacement {
        route: 0,
        s: moving_s,
        speed,
        desired_speed: speed,
        yielding: false,
    })?;
    let gap = distance - 0.5 * len - 0.5 * scenario.vehicle.width;
    Ok(Fixture { world, moving, other, impact_time: gap / speed })
}
