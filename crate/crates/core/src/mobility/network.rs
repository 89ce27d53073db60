//! Road topology derived from a [`Scenario`].
//!
//! Road A runs east-west through the origin and has priority. Roads B and C
//! run north-south and cross A at `x = ∓spacing/2`. Every road carries one
//! lane per direction (right-hand traffic). The pedestrian lane runs
//! parallel to A at `y = +offset` west of the main crossing and at
//! `y = -offset` east of it, crossing B, A and C on zebra crossings.

use crate::kinematics::Vec2;

use super::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Parameter interval of `p0 + t·(p1 − p0)`, `t ∈ [0, 1]`, inside the box.
    pub fn clip_segment(&self, p0: Vec2, p1: Vec2) -> Option<(f64, f64)> {
        let d = p1 - p0;
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for (start, delta, lo, hi) in [
            (p0.x, d.x, self.min.x, self.max.x),
            (p0.y, d.y, self.min.y, self.max.y),
        ] {
            if delta == 0.0 {
                if start < lo || start > hi {
                    return None;
                }
            } else {
                let a = (lo - start) / delta;
                let b = (hi - start) / delta;
                t0 = t0.max(a.min(b));
                t1 = t1.min(a.max(b));
            }
        }
        (t0 < t1).then_some((t0, t1))
    }
}

/// Stretch of a vehicle route crossing a junction box. `enter` and `exit` are
/// front-bumper positions along the route where the front reaches the near
/// and far edge of the box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JunctionPass {
    pub junction: usize,
    pub enter: f64,
    pub exit: f64,
    pub priority: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrosswalkPass {
    pub crosswalk: usize,
    pub enter: f64,
    pub exit: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VehicleRoute {
    pub name: String,
    pub origin: Vec2,
    pub direction: Vec2,
    pub heading: f64,
    pub length: f64,
    pub junctions: Vec<JunctionPass>,
    pub crosswalks: Vec<CrosswalkPass>,
}

impl VehicleRoute {
    pub fn point_at(&self, s: f64) -> Vec2 {
        self.origin + self.direction * s
    }

    /// The lane this route drives in, `width` wide.
    pub fn lane_area(&self, width: f64) -> Aabb {
        let side = Vec2::new(-self.direction.y, self.direction.x) * (0.5 * width);
        let (a, b) = (self.origin + side, self.point_at(self.length) - side);
        Aabb { min: Vec2::new(a.x.min(b.x), a.y.min(b.y)), max: Vec2::new(a.x.max(b.x), a.y.max(b.y)) }
    }

    /// Front-bumper interval over which the centre line runs inside `area`.
    pub fn clip(&self, area: &Aabb) -> Option<(f64, f64)> {
        area.clip_segment(self.origin, self.point_at(self.length))
            .map(|(t0, t1)| (t0 * self.length, t1 * self.length))
    }
}

/// Part of a pedestrian route that lies on the carriageway.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PedCrossing {
    pub crosswalk: usize,
    pub enter: f64,
    pub exit: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PedRoute {
    pub name: String,
    pub points: Vec<Vec2>,
    cumulative: Vec<f64>,
    pub crossings: Vec<PedCrossing>,
}

impl PedRoute {
    fn new(name: &str, points: Vec<Vec2>) -> Self {
        let mut cumulative = vec![0.0];
        for w in points.windows(2) {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + (w[1] - w[0]).norm());
        }
        PedRoute {
            name: name.to_string(),
            points,
            cumulative,
            crossings: Vec::new(),
        }
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn segment(&self, s: f64) -> usize {
        let n = self.points.len() - 1;
        (0..n)
            .find(|&i| s < self.cumulative[i + 1])
            .unwrap_or(n - 1)
    }

    pub fn point_at(&self, s: f64) -> Vec2 {
        let i = self.segment(s);
        let a = self.points[i];
        let b = self.points[i + 1];
        let seg = self.cumulative[i + 1] - self.cumulative[i];
        let t = ((s - self.cumulative[i]) / seg).clamp(0.0, 1.0);
        a + (b - a) * t
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        let i = self.segment(s);
        (self.points[i + 1] - self.points[i]).angle()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Junction {
    pub area: Aabb,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crosswalk {
    /// Carriageway part of the crossing.
    pub area: Aabb,
}

/// Topology with six vehicle entries (`v1..v6`) and two pedestrian entries
/// (`p1`, `p2`). Every entry maps to exactly one straight route.
#[derive(Clone, Debug, PartialEq)]
pub struct RoadNetwork {
    pub vehicle_routes: Vec<VehicleRoute>,
    pub ped_routes: Vec<PedRoute>,
    pub junctions: Vec<Junction>,
    pub crosswalks: Vec<Crosswalk>,
}

pub const VEHICLE_ENTRIES: usize = 6;
pub const PEDESTRIAN_ENTRIES: usize = 2;

impl RoadNetwork {
    pub fn build(sc: &Scenario) -> Self {
        let half = 0.5 * sc.road_length;
        let w = sc.lane_width;
        let xb = -0.5 * sc.intersection_spacing;
        let xc = 0.5 * sc.intersection_spacing;
        let off = sc.sidewalk_offset;
        let cw = 0.5 * sc.crosswalk_width;

        let junctions = vec![
            Junction {
                area: Aabb { min: Vec2::new(xb - w, -w), max: Vec2::new(xb + w, w) },
            },
            Junction {
                area: Aabb { min: Vec2::new(xc - w, -w), max: Vec2::new(xc + w, w) },
            },
        ];
        let xm = sc.main_crosswalk_x;
        let crosswalks = vec![
            // Across road B, north arm.
            Crosswalk {
                area: Aabb { min: Vec2::new(xb - w, off - cw), max: Vec2::new(xb + w, off + cw) },
            },
            // Across road A.
            Crosswalk {
                area: Aabb { min: Vec2::new(xm - cw, -w), max: Vec2::new(xm + cw, w) },
            },
            // Across road C, south arm.
            Crosswalk {
                area: Aabb { min: Vec2::new(xc - w, -off - cw), max: Vec2::new(xc + w, -off + cw) },
            },
        ];

        let lane = 0.5 * w;
        let specs: [(&str, Vec2, Vec2, bool); VEHICLE_ENTRIES] = [
            ("v1", Vec2::new(-half, -lane), Vec2::new(1.0, 0.0), true),
            ("v2", Vec2::new(half, lane), Vec2::new(-1.0, 0.0), true),
            ("v3", Vec2::new(xb + lane, -half), Vec2::new(0.0, 1.0), false),
            ("v4", Vec2::new(xb - lane, half), Vec2::new(0.0, -1.0), false),
            ("v5", Vec2::new(xc + lane, -half), Vec2::new(0.0, 1.0), false),
            ("v6", Vec2::new(xc - lane, half), Vec2::new(0.0, -1.0), false),
        ];
        let vehicle_routes = specs
            .iter()
            .map(|&(name, origin, direction, priority)| {
                let length = sc.road_length;
                let end = origin + direction * length;
                let clip = |area: &Aabb| {
                    area.clip_segment(origin, end).map(|(t0, t1)| (t0 * length, t1 * length))
                };
                let mut junction_passes: Vec<JunctionPass> = junctions
                    .iter()
                    .enumerate()
                    .filter_map(|(i, j)| {
                        clip(&j.area).map(|(enter, exit)| JunctionPass {
                            junction: i,
                            enter,
                            exit,
                            priority,
                        })
                    })
                    .collect();
                junction_passes.sort_by(|a, b| a.enter.total_cmp(&b.enter));
                let mut crosswalk_passes: Vec<CrosswalkPass> = crosswalks
                    .iter()
                    .enumerate()
                    .filter_map(|(i, c)| {
                        clip(&c.area).map(|(enter, exit)| CrosswalkPass { crosswalk: i, enter, exit })
                    })
                    .collect();
                crosswalk_passes.sort_by(|a, b| a.enter.total_cmp(&b.enter));
                VehicleRoute {
                    name: name.to_string(),
                    origin,
                    direction,
                    heading: direction.angle(),
                    length,
                    junctions: junction_passes,
                    crosswalks: crosswalk_passes,
                }
            })
            .collect();

        let walk = 0.5 * sc.sidewalk_length;
        let forward = vec![
            Vec2::new(xm - walk, off),
            Vec2::new(xm, off),
            Vec2::new(xm, -off),
            Vec2::new(xm + walk, -off),
        ];
        let mut backward = forward.clone();
        backward.reverse();
        let ped_routes = [("p1", forward), ("p2", backward)]
            .into_iter()
            .map(|(name, pts)| {
                let mut route = PedRoute::new(name, pts);
                for (ci, c) in crosswalks.iter().enumerate() {
                    for i in 0..route.points.len() - 1 {
                        let (a, b) = (route.points[i], route.points[i + 1]);
                        if let Some((t0, t1)) = c.area.clip_segment(a, b) {
                            let base = route.cumulative[i];
                            let seg = route.cumulative[i + 1] - base;
                            route.crossings.push(PedCrossing {
                                crosswalk: ci,
                                enter: base + t0 * seg,
                                exit: base + t1 * seg,
                            });
                        }
                    }
                }
                route.crossings.sort_by(|a, b| a.enter.total_cmp(&b.enter));
                route
            })
            .collect();

        RoadNetwork {
            vehicle_routes,
            ped_routes,
            junctions,
            crosswalks,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_layout() {
        let net = RoadNetwork::build(&Scenario::default());
        assert_eq!(net.vehicle_routes.len(), 6);
        assert_eq!(net.ped_routes.len(), 2);
        assert_eq!(net.junctions.len(), 2);
        assert_eq!(net.crosswalks.len(), 3);

        // Main-road routes pass both intersections with priority.
        for r in &net.vehicle_routes[..2] {
            assert_eq!(r.junctions.len(), 2);
            assert!(r.junctions.iter().all(|j| j.priority));
            assert_eq!(r.crosswalks.len(), 1);
        }
        // Minor roads pass one intersection and one crossing.
        for r in &net.vehicle_routes[2..] {
            assert_eq!(r.junctions.len(), 1);
            assert!(!r.junctions[0].priority);
            assert_eq!(r.crosswalks.len(), 1);
        }
        let v1 = &net.vehicle_routes[0];
        // Box of the west intersection spans x ∈ [-81, -69].
        assert!((v1.junctions[0].enter - (250.0 - 81.0)).abs() < 1e-9);
        assert!((v1.junctions[0].exit - (250.0 - 69.0)).abs() < 1e-9);
        let v3 = &net.vehicle_routes[2];
        assert!((v3.junctions[0].enter - 244.0).abs() < 1e-9);
        // Northbound on B meets the junction before the crossing.
        assert!(v3.crosswalks[0].enter > v3.junctions[0].exit);
        let v4 = &net.vehicle_routes[3];
        assert!(v4.crosswalks[0].exit < v4.junctions[0].enter);
    }

    #[test]
    fn pedestrians_cross_three_times() {
        let net = RoadNetwork::build(&Scenario::default());
        for r in &net.ped_routes {
            assert_eq!(r.crossings.len(), 3);
            for c in &r.crossings {
                // Each carriageway is two 6 m lanes.
                assert!((c.exit - c.enter - 12.0).abs() < 1e-9);
            }
        }
        let p1 = &net.ped_routes[0];
        assert_eq!(p1.crossings.iter().map(|c| c.crosswalk).collect::<Vec<_>>(), vec![0, 1, 2]);
        let p2 = &net.ped_routes[1];
        assert_eq!(p2.crossings.iter().map(|c| c.crosswalk).collect::<Vec<_>>(), vec![2, 1, 0]);
        assert!((p1.length() - p2.length()).abs() < 1e-9);
        assert_eq!(p1.point_at(0.0), Vec2::new(-125.0, 20.0));
        assert!((p1.length() - 290.0).abs() < 1e-9);
        assert!((p1.heading_at(130.0) + std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
