//! Scenario description: road geometry, agent dimensions and driving rules.
//!
//! Loaded from TOML. Every field has a default, so an empty file describes
//! the reference layout: three 500 m roads, two unregulated intersections
//! 150 m apart on the main road, a pedestrian lane and three zebra crossings.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::MobilityError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleSpec {
    pub length: f64,
    pub width: f64,
    /// m/s.
    pub max_speed: f64,
    /// Lower bound of the per-vehicle desired speed, as a fraction of
    /// `max_speed`.
    pub speed_factor_min: f64,
    /// m/s².
    pub max_accel: f64,
    /// m/s². Also used to compute stopping times in the analysis.
    pub max_decel: f64,
    /// Standstill bumper-to-bumper gap, m.
    pub min_gap: f64,
    /// Car-following reaction time, s.
    pub tau: f64,
}

impl Default for VehicleSpec {
    fn default() -> Self {
        VehicleSpec {
            length: 5.0,
            width: 1.8,
            max_speed: 13.89,
            speed_factor_min: 0.9,
            max_accel: 2.6,
            max_decel: 4.5,
            min_gap: 2.5,
            tau: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PedestrianSpec {
    pub radius: f64,
    pub max_speed: f64,
    pub min_speed: f64,
}

impl Default for PedestrianSpec {
    fn default() -> Self {
        PedestrianSpec {
            radius: 0.3,
            max_speed: 2.0,
            min_speed: 1.2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionAction {
    /// Both entities leave the simulation at first contact.
    Remove,
    /// Entities keep moving; contact is logged once per episode.
    Continue,
}

/// Who gives way at the two intersections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub road_length: f64,
    /// Distance between the two intersections along the main road.
    pub intersection_spacing: f64,
    pub lane_width: f64,
    /// Lateral offset of the pedestrian lane from the main road axis.
    pub sidewalk_offset: f64,
    /// Length of the pedestrian lane, centered on the main crossing.
    pub sidewalk_length: f64,
    pub crosswalk_width: f64,
    /// Position of the zebra crossing on the main road, along its axis.
    pub main_crosswalk_x: f64,
    /// Front-bumper distance kept from a junction box when stopping.
    pub junction_stop_margin: f64,
    /// Front-bumper distance kept from a zebra crossing when stopping.
    pub crosswalk_stop_margin: f64,
    /// Distance before a stop line at which priority rules are evaluated.
    pub look_ahead: f64,
    /// Extra time a yielding vehicle keeps between clearing a junction and
    /// the earliest arrival of priority traffic, s.
    pub gap_margin: f64,
    /// Probability that a spawned vehicle ignores priority and crossings.
    pub p_violate: f64,
    /// Integration step, s.
    pub step: f64,
    pub collision_action: CollisionAction,
    pub vehicle: VehicleSpec,
    pub pedestrian: PedestrianSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            road_length: 500.0,
            intersection_spacing: 150.0,
            lane_width: 6.0,
            sidewalk_offset: 20.0,
            sidewalk_length: 250.0,
            crosswalk_width: 4.0,
            main_crosswalk_x: 0.0,
            junction_stop_margin: 0.5,
            crosswalk_stop_margin: 1.5,
            look_ahead: 60.0,
            gap_margin: 1.0,
            p_violate: 0.15,
            step: 0.01,
            collision_action: CollisionAction::Remove,
            vehicle: VehicleSpec::default(),
            pedestrian: PedestrianSpec::default(),
        }
    }
}

impl Scenario {
    pub fn from_toml_str(s: &str) -> Result<Self, MobilityError> {
        let sc: Scenario = toml::from_str(s).map_err(|e| MobilityError::Scenario(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self, MobilityError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MobilityError::Scenario(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), MobilityError> {
        let positive = [
            ("road_length", self.road_length),
            ("intersection_spacing", self.intersection_spacing),
            ("lane_width", self.lane_width),
            ("crosswalk_width", self.crosswalk_width),
            ("look_ahead", self.look_ahead),
            ("step", self.step),
            ("vehicle.length", self.vehicle.length),
            ("vehicle.width", self.vehicle.width),
            ("vehicle.max_speed", self.vehicle.max_speed),
            ("vehicle.speed_factor_min", self.vehicle.speed_factor_min),
            ("vehicle.max_accel", self.vehicle.max_accel),
            ("vehicle.max_decel", self.vehicle.max_decel),
            ("vehicle.tau", self.vehicle.tau),
            ("pedestrian.radius", self.pedestrian.radius),
            ("pedestrian.max_speed", self.pedestrian.max_speed),
            ("pedestrian.min_speed", self.pedestrian.min_speed),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MobilityError::Scenario(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("sidewalk_offset", self.sidewalk_offset),
            ("sidewalk_length", self.sidewalk_length),
            ("junction_stop_margin", self.junction_stop_margin),
            ("crosswalk_stop_margin", self.crosswalk_stop_margin),
            ("gap_margin", self.gap_margin),
            ("vehicle.min_gap", self.vehicle.min_gap),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(MobilityError::Scenario(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.p_violate) {
            return Err(MobilityError::Scenario(format!(
                "p_violate must lie in [0, 1], got {}",
                self.p_violate
            )));
        }
        if self.vehicle.speed_factor_min > 1.0 {
            return Err(MobilityError::Scenario("vehicle.speed_factor_min must be <= 1".into()));
        }
        if self.pedestrian.min_speed > self.pedestrian.max_speed {
            return Err(MobilityError::Scenario("pedestrian.min_speed exceeds max_speed".into()));
        }
        if self.step > 0.1 {
            return Err(MobilityError::Scenario(format!("step must be <= 0.1 s, got {}", self.step)));
        }
        let half = 0.5 * self.road_length;
        let junction_half = 0.5 * self.intersection_spacing + self.lane_width;
        if junction_half + self.vehicle.length * 2.0 >= half {
            return Err(MobilityError::Scenario(
                "intersections must lie well inside the road length".into(),
            ));
        }
        if self.sidewalk_offset - 0.5 * self.crosswalk_width <= self.lane_width
            || self.sidewalk_offset >= half
        {
            return Err(MobilityError::Scenario(
                "sidewalk_offset must clear the main road and stay on the map".into(),
            ));
        }
        let reach = 0.5 * self.intersection_spacing + self.lane_width;
        if 0.5 * self.sidewalk_length - self.main_crosswalk_x.abs() <= reach || self.sidewalk_length > self.road_length {
            return Err(MobilityError::Scenario(
                "sidewalk_length must span both side crossings and fit on the map".into(),
            ));
        }
        let gap_to_junction = 0.5 * self.intersection_spacing - self.lane_width;
        if self.main_crosswalk_x.abs() + 0.5 * self.crosswalk_width >= gap_to_junction {
            return Err(MobilityError::Scenario(
                "main_crosswalk_x must lie between the two intersections".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Scenario::from_toml_str("").unwrap(), Scenario::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Scenario::from_toml_str("road_lenght = 3.0").is_err());
        assert!(Scenario::from_toml_str("[vehicle]\nwheels = 4").is_err());
    }

    #[test]
    fn overrides_apply() {
        let s = Scenario::from_toml_str("p_violate = 0.0\n[vehicle]\nlength = 4.5\n").unwrap();
        assert_eq!(s.p_violate, 0.0);
        assert_eq!(s.vehicle.length, 4.5);
        assert_eq!(s.vehicle.width, 1.8);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(Scenario::from_toml_str("step = 0.5").is_err());
        assert!(Scenario::from_toml_str("p_violate = 1.5").is_err());
        assert!(Scenario::from_toml_str("lane_width = -1").is_err());
    }
}
