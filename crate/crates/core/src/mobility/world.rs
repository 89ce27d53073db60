//! Microscopic mobility on the road network.
//!
//! Vehicles move along straight lanes with a Krauss-style safe-speed rule:
//! the speed never exceeds the largest value from which the vehicle can still
//! stop behind its leader (or a stop line) when both brake at `max_decel`.
//! Yielding vehicles stop for priority traffic at the two junctions, keep the
//! junction box clear and stop for pedestrians on zebra crossings. Violating
//! vehicles only follow their leader. Pedestrians wait at the curb until the
//! approaching traffic can stop in time.

use std::collections::{HashSet, VecDeque};

use crate::entity::{EntityClass, EntityId, PairId, PairKind};
use crate::kinematics::Vec2;
use crate::time::SimTime;

use super::arrivals::Spawn;
use super::network::{
    CrosswalkPass, JunctionPass, RoadNetwork, PEDESTRIAN_ENTRIES, VEHICLE_ENTRIES,
};
use super::records::{CollisionRecord, TrajectoryRecord};
use super::scenario::{CollisionAction, Scenario};
use super::shapes::{overlaps, Disc, Footprint, OrientedRect};
use super::MobilityError;

/// Leaders slower than this block a priority vehicle from entering a box.
const QUEUE_SPEED: f64 = 3.0;
/// Extra margin a pedestrian wants beyond the vehicle's stopping distance.
const PED_SAFETY_GAP: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Agent {
    pub id: EntityId,
    pub class: EntityClass,
    /// Index into the vehicle or pedestrian routes, by class.
    pub route: usize,
    /// Distance travelled along the route. For vehicles this is the front
    /// bumper.
    pub s: f64,
    pub speed: f64,
    /// Signed acceleration over the last step.
    pub accel: f64,
    pub desired_speed: f64,
    /// `false` for violators, which ignore priority and crossings.
    pub yielding: bool,
    pub spawned_at: SimTime,
    /// Steps taken since spawning. CAM and log schedules are phased on it.
    pub steps_alive: u64,
    reactions: Vec<(SimTime, SimTime)>,
    committed: Option<usize>,
}

impl Agent {
    pub fn is_vehicle(&self) -> bool {
        self.class == EntityClass::Vehicle
    }

    pub fn reacting_at(&self, now: SimTime) -> bool {
        self.reactions.iter().any(|&(from, until)| from <= now && now < until)
    }
}

/// Explicit vehicle placement for constructed scenarios.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehiclePlacement {
    pub route: usize,
    /// Front-bumper position along the route.
    pub s: f64,
    pub speed: f64,
    pub desired_speed: f64,
    pub yielding: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AgentCounts {
    pub spawned: u64,
    pub despawned: u64,
    pub removed: u64,
}

#[derive(Debug, Clone)]
pub struct World {
    scenario: Scenario,
    net: RoadNetwork,
    dt: f64,
    dt_time: SimTime,
    time: SimTime,
    agents: Vec<Agent>,
    next_id: u32,
    queues: Vec<VecDeque<Spawn>>,
    junction_routes: Vec<Vec<(usize, JunctionPass)>>,
    crosswalk_routes: Vec<Vec<(usize, CrosswalkPass)>>,
    /// `zones[r][q]`: stretch of route `r` inside the lane of crossing route `q`.
    zones: Vec<Vec<Option<(f64, f64)>>>,
    contacts: HashSet<PairId>,
    counts: AgentCounts,
}

fn krauss_speed(gap: f64, leader_speed: f64, b: f64, tau: f64) -> f64 {
    let bt = b * tau;
    -bt + (bt * bt + leader_speed * leader_speed + 2.0 * b * gap.max(0.0)).sqrt()
}

/// Time to cover `d` metres from speed `v` accelerating at `a` up to `vmax`.
pub(crate) fn travel_time(d: f64, v: f64, a: f64, vmax: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    let vmax = vmax.max(v);
    if vmax <= 0.0 {
        return f64::INFINITY;
    }
    let t_acc = (vmax - v) / a;
    let d_acc = 0.5 * (v + vmax) * t_acc;
    if d <= d_acc {
        (-v + (v * v + 2.0 * a * d).sqrt()) / a
    } else {
        t_acc + (d - d_acc) / vmax
    }
}

impl World {
    /// Empty world; `arrivals` is consumed as time advances.
    pub fn new(scenario: Scenario, arrivals: Vec<Spawn>) -> Result<Self, MobilityError> {
        scenario.validate()?;
        let dt_time = SimTime::from_secs(scenario.step);
        if dt_time.micros() <= 0 || (dt_time.as_secs() - scenario.step).abs() > 1e-12 {
            return Err(MobilityError::InvalidStep(scenario.step));
        }
        let net = RoadNetwork::build(&scenario);
        let mut junction_routes = vec![Vec::new(); net.junctions.len()];
        let mut crosswalk_routes = vec![Vec::new(); net.crosswalks.len()];
        for (ri, r) in net.vehicle_routes.iter().enumerate() {
            for jp in &r.junctions {
                junction_routes[jp.junction].push((ri, *jp));
            }
            for cp in &r.crosswalks {
                crosswalk_routes[cp.crosswalk].push((ri, *cp));
            }
        }
        let zones = net
            .vehicle_routes
            .iter()
            .map(|r| {
                net.vehicle_routes
                    .iter()
                    .map(|q| {
                        let crossing = r.direction.dot(q.direction).abs() < 0.5;
                        crossing.then(|| r.clip(&q.lane_area(scenario.lane_width))).flatten()
                    })
                    .collect()
            })
            .collect();
        let mut queues = vec![VecDeque::new(); VEHICLE_ENTRIES + PEDESTRIAN_ENTRIES];
        let mut sorted = arrivals;
        sorted.sort_by_key(|s| s.time);
        for sp in sorted {
            let q = match sp.class {
                EntityClass::Vehicle => sp.entry.min(VEHICLE_ENTRIES - 1),
                EntityClass::Pedestrian => VEHICLE_ENTRIES + sp.entry.min(PEDESTRIAN_ENTRIES - 1),
            };
            queues[q].push_back(sp);
        }
        let mut world = World {
            dt: dt_time.as_secs(),
            dt_time,
            scenario,
            net,
            time: SimTime::ZERO,
            agents: Vec::new(),
            next_id: 0,
            queues,
            junction_routes,
            crosswalk_routes,
            zones,
            contacts: HashSet::new(),
            counts: AgentCounts::default(),
        };
        world.spawn_due();
        Ok(world)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn network(&self) -> &RoadNetwork {
        &self.net
    }

    pub fn time(&self) -> SimTime {
        self.time
    }

    pub fn step_size(&self) -> SimTime {
        self.dt_time
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, id: EntityId) -> Option<&Agent> {
        self.agents
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.agents[i])
    }

    pub fn counts(&self) -> AgentCounts {
        self.counts
    }

    pub fn active_vehicles(&self) -> usize {
        self.agents.iter().filter(|a| a.is_vehicle()).count()
    }

    /// Vehicles whose arrival time has passed but whose entry is blocked.
    pub fn waiting_vehicles(&self) -> usize {
        self.queues[..VEHICLE_ENTRIES]
            .iter()
            .map(|q| q.iter().take_while(|s| s.time <= self.time).count())
            .sum()
    }

    fn new_agent(&mut self, class: EntityClass, route: usize, s: f64, speed: f64, desired: f64, yielding: bool) -> EntityId {
        let id = EntityId(self.next_id);
        self.next_id += 1;
        self.agents.push(Agent {
            id,
            class,
            route,
            s,
            speed,
            accel: 0.0,
            desired_speed: desired,
            yielding,
            spawned_at: self.time,
            steps_alive: 0,
            reactions: Vec::new(),
            committed: None,
        });
        self.counts.spawned += 1;
        id
    }

    pub fn place_vehicle(&mut self, p: VehiclePlacement) -> Result<EntityId, MobilityError> {
        if p.route >= self.net.vehicle_routes.len() {
            return Err(MobilityError::InvalidRoute(p.route));
        }
        if !(p.speed >= 0.0 && p.desired_speed >= 0.0 && p.s.is_finite()) {
            return Err(MobilityError::Scenario("invalid vehicle placement".into()));
        }
        Ok(self.new_agent(EntityClass::Vehicle, p.route, p.s, p.speed, p.desired_speed, p.yielding))
    }

    pub fn place_pedestrian(&mut self, route: usize, s: f64, speed: f64) -> Result<EntityId, MobilityError> {
        if route >= self.net.ped_routes.len() {
            return Err(MobilityError::InvalidRoute(route));
        }
        Ok(self.new_agent(EntityClass::Pedestrian, route, s, speed, speed, true))
    }

    /// Brake (vehicles) or stand still (pedestrians) over `[from, until)`.
    /// Returns `false` if the entity has already left.
    pub fn react(&mut self, id: EntityId, from: SimTime, until: SimTime) -> bool {
        let now = self.time;
        let Ok(i) = self.agents.binary_search_by_key(&id, |a| a.id) else {
            return false;
        };
        let a = &mut self.agents[i];
        a.reactions.retain(|&(_, u)| u > now);
        a.reactions.push((from, until));
        true
    }

    pub fn position(&self, a: &Agent) -> Vec2 {
        match a.class {
            EntityClass::Vehicle => {
                self.net.vehicle_routes[a.route].point_at(a.s - 0.5 * self.scenario.vehicle.length)
            }
            EntityClass::Pedestrian => self.net.ped_routes[a.route].point_at(a.s),
        }
    }

    pub fn heading(&self, a: &Agent) -> f64 {
        match a.class {
            EntityClass::Vehicle => self.net.vehicle_routes[a.route].heading,
            EntityClass::Pedestrian => self.net.ped_routes[a.route].heading_at(a.s),
        }
    }

    pub fn footprint(&self, a: &Agent) -> Footprint {
        let center = self.position(a);
        match a.class {
            EntityClass::Vehicle => Footprint::Rect(OrientedRect::new(
                center,
                self.scenario.vehicle.length,
                self.scenario.vehicle.width,
                self.heading(a),
            )),
            EntityClass::Pedestrian => Footprint::Disc(Disc {
                center,
                radius: self.scenario.pedestrian.radius,
            }),
        }
    }

    pub fn record(&self, a: &Agent) -> TrajectoryRecord {
        let p = self.position(a);
        TrajectoryRecord {
            time: self.time,
            id: a.id,
            class: a.class,
            x: p.x,
            y: p.y,
            speed: a.speed,
            heading: self.heading(a),
            accel: a.accel,
        }
    }

    fn bounding_radius(&self, class: EntityClass) -> f64 {
        match class {
            EntityClass::Vehicle => {
                0.5 * self.scenario.vehicle.length.hypot(self.scenario.vehicle.width)
            }
            EntityClass::Pedestrian => self.scenario.pedestrian.radius,
        }
    }

    /// Vehicle indices per route, front-most first.
    fn lanes(&self) -> Vec<Vec<usize>> {
        let mut lanes = vec![Vec::new(); self.net.vehicle_routes.len()];
        for (i, a) in self.agents.iter().enumerate() {
            if a.is_vehicle() {
                lanes[a.route].push(i);
            }
        }
        for lane in &mut lanes {
            lane.sort_by(|&x, &y| {
                self.agents[y]
                    .s
                    .total_cmp(&self.agents[x].s)
                    .then(self.agents[x].id.cmp(&self.agents[y].id))
            });
        }
        lanes
    }

    fn crosswalk_clear_for_pedestrian(&self, crosswalk: usize) -> bool {
        let v = &self.scenario.vehicle;
        self.crosswalk_routes[crosswalk].iter().all(|&(route, cp)| {
            self.agents
                .iter()
                .filter(|a| a.is_vehicle() && a.route == route)
                .all(|a| {
                    let rear = a.s - v.length;
                    if rear >= cp.exit {
                        return true;
                    }
                    if a.s > cp.enter {
                        return false;
                    }
                    let need = a.speed * a.speed / (2.0 * v.max_decel) + PED_SAFETY_GAP;
                    cp.enter - a.s >= need
                })
        })
    }

    /// Stop target before `limit`, preferring `limit - margin`; `None` when
    /// the vehicle can no longer stop in front of `limit`.
    fn stop_target(&self, a: &Agent, limit: f64, margin: f64) -> Option<f64> {
        let braking = a.speed * a.speed / (2.0 * self.scenario.vehicle.max_decel);
        let line = limit - margin;
        if a.s + braking <= line + 1e-9 {
            Some(line)
        } else if a.s + braking <= limit - 0.05 {
            Some(a.s + braking)
        } else {
            None
        }
    }

    fn junction_conflict(&self, i: usize, jp: &JunctionPass, leader: Option<usize>, busy: &[bool]) -> bool {
        let a = &self.agents[i];
        let v = &self.scenario.vehicle;
        // Keep the box clear of our own queue. A moving leader is followed
        // in, unless it is about to stop for pedestrians right past the box.
        if let Some(l) = leader {
            let l = &self.agents[l];
            let rear = l.s - v.length;
            let blocking = rear < jp.exit + v.length + v.min_gap;
            let room = 2.0 * v.length + v.min_gap + self.scenario.crosswalk_stop_margin;
            let held = self.net.vehicle_routes[a.route]
                .crosswalks
                .iter()
                .any(|cp| cp.enter >= jp.exit && cp.enter - jp.exit < room && busy[cp.crosswalk]);
            if blocking && (held || l.speed < QUEUE_SPEED) {
                return true;
            }
        }
        // Lane-level gap acceptance: each crossing lane must be free while we
        // are in it, with a margin against priority traffic.
        for &(route, other) in &self.junction_routes[jp.junction] {
            let (Some(mine), Some(theirs)) = (self.zones[a.route][route], self.zones[route][a.route]) else {
                continue;
            };
            let my_speed = a.desired_speed.max(1.0);
            let my_clear = travel_time(mine.1 + v.length - a.s, a.speed, v.max_accel, my_speed);
            for b in self.agents.iter().filter(|b| b.is_vehicle() && b.route == route) {
                // Inside the box and not yet past our lane.
                if b.s > other.enter && b.s - v.length < theirs.1 {
                    return true;
                }
                if b.s > other.enter {
                    continue;
                }
                let b_in = travel_time(theirs.0 - b.s, b.speed, v.max_accel, b.desired_speed.max(1.0));
                if !jp.priority && other.priority && b_in < my_clear + self.scenario.gap_margin {
                    return true;
                }
            }
        }
        false
    }

    fn vehicle_speed(&self, i: usize, leader: Option<usize>, committed: &[bool], busy: &[bool]) -> f64 {
        let a = &self.agents[i];
        let v = &self.scenario.vehicle;
        let dt = self.dt;
        let floor = (a.speed - v.max_decel * dt).max(0.0);
        if a.reacting_at(self.time) {
            return floor;
        }
        let mut target = (a.speed + v.max_accel * dt).min(a.desired_speed);
        if let Some(l) = leader {
            let l = &self.agents[l];
            let gap = (l.s - v.length) - a.s - v.min_gap;
            target = target.min(krauss_speed(gap, l.speed, v.max_decel, v.tau));
        }
        if a.yielding {
            let route = &self.net.vehicle_routes[a.route];
            let mut stop = f64::INFINITY;
            if let Some(jp) = route.junctions.iter().find(|jp| a.s < jp.enter) {
                if jp.enter - a.s <= self.scenario.look_ahead && self.junction_conflict(i, jp, leader, busy) {
                    if let Some(t) = self.stop_target(a, jp.enter, self.scenario.junction_stop_margin) {
                        stop = stop.min(t);
                    }
                }
            }
            if let Some(cp) = route.crosswalks.iter().find(|cp| a.s < cp.enter) {
                // Never queue on the band itself.
                let queued_over = leader.is_some_and(|l| {
                    let l = &self.agents[l];
                    l.s - v.length < cp.exit + v.length + v.min_gap && l.speed < QUEUE_SPEED
                });
                if cp.enter - a.s <= self.scenario.look_ahead && (committed[cp.crosswalk] || queued_over) {
                    if let Some(t) = self.stop_target(a, cp.enter, self.scenario.crosswalk_stop_margin) {
                        stop = stop.min(t);
                    }
                }
            }
            if stop.is_finite() {
                target = target.min(krauss_speed(stop - a.s, 0.0, v.max_decel, v.tau));
            }
        }
        target.max(floor)
    }

    /// Advances all agents by one step and returns the collisions that
    /// started during it.
    pub fn step(&mut self) -> Vec<CollisionRecord> {
        let dt = self.dt;

        // Pedestrians decide first so that vehicles see fresh commitments.
        let mut ped_moves = Vec::new();
        for (i, a) in self.agents.iter().enumerate() {
            if a.is_vehicle() {
                continue;
            }
            let route = &self.net.ped_routes[a.route];
            let mut commit = a.committed;
            if let Some(c) = commit {
                if !route.crossings.iter().any(|x| x.crosswalk == c && a.s < x.exit) {
                    commit = None;
                }
            }
            let (new_s, new_commit) = if a.reacting_at(self.time) {
                (a.s, commit)
            } else {
                let want = a.s + a.desired_speed * dt;
                match route.crossings.iter().find(|c| a.s < c.exit) {
                    Some(c) if commit != Some(c.crosswalk) && want > c.enter => {
                        if self.crosswalk_clear_for_pedestrian(c.crosswalk) {
                            (want, Some(c.crosswalk))
                        } else {
                            (a.s.max(c.enter.min(want)), commit)
                        }
                    }
                    _ => (want, commit),
                }
            };
            ped_moves.push((i, new_s, new_commit));
        }
        for (i, s, c) in ped_moves {
            let a = &mut self.agents[i];
            let speed = (s - a.s) / dt;
            a.accel = (speed - a.speed) / dt;
            a.speed = speed;
            a.s = s;
            a.committed = c;
        }
        let mut committed = vec![false; self.net.crosswalks.len()];
        for a in &self.agents {
            if let Some(c) = a.committed {
                committed[c] = true;
            }
        }

        // Crosswalks with a pedestrian on them or waiting at the kerb.
        let mut busy = committed.clone();
        for a in self.agents.iter().filter(|a| !a.is_vehicle()) {
            let route = &self.net.ped_routes[a.route];
            if let Some(c) = route.crossings.iter().find(|c| a.s < c.exit) {
                if c.enter - a.s < 0.05 {
                    busy[c.crosswalk] = true;
                }
            }
        }

        let lanes = self.lanes();
        let mut speeds = Vec::new();
        for lane in &lanes {
            for (k, &i) in lane.iter().enumerate() {
                let leader = (k > 0).then(|| lane[k - 1]);
                speeds.push((i, self.vehicle_speed(i, leader, &committed, &busy)));
            }
        }
        for (i, v) in speeds {
            let a = &mut self.agents[i];
            a.accel = (v - a.speed) / dt;
            a.speed = v;
            a.s += v * dt;
        }
        for a in &mut self.agents {
            a.steps_alive += 1;
        }
        self.time += self.dt_time;

        let len = self.scenario.vehicle.length;
        let before = self.agents.len();
        let net = &self.net;
        self.agents.retain(|a| match a.class {
            EntityClass::Vehicle => a.s - len < net.vehicle_routes[a.route].length,
            EntityClass::Pedestrian => a.s < net.ped_routes[a.route].length(),
        });
        self.counts.despawned += (before - self.agents.len()) as u64;

        let records = self.detect_contacts();
        self.spawn_due();
        records
    }

    fn detect_contacts(&mut self) -> Vec<CollisionRecord> {
        let n = self.agents.len();
        let prints: Vec<(Footprint, Vec2, f64)> = self
            .agents
            .iter()
            .map(|a| (self.footprint(a), self.position(a), self.bounding_radius(a.class)))
            .collect();
        let mut touching = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&self.agents[i], &self.agents[j]);
                let Some(kind) = PairKind::of(a.class, b.class) else {
                    continue;
                };
                let (fa, pa, ra) = &prints[i];
                let (fb, pb, rb) = &prints[j];
                if (*pa - *pb).norm() >= ra + rb {
                    continue;
                }
                if overlaps(fa, fb) {
                    let mid = (*pa + *pb) * 0.5;
                    touching.push((PairId::new(a.id, b.id), kind, mid));
                }
            }
        }
        touching.sort_by_key(|t| t.0);
        let records: Vec<CollisionRecord> = match self.scenario.collision_action {
            CollisionAction::Remove => {
                let hit: HashSet<EntityId> =
                    touching.iter().flat_map(|t| [t.0.first(), t.0.second()]).collect();
                let before = self.agents.len();
                self.agents.retain(|a| !hit.contains(&a.id));
                self.counts.removed += (before - self.agents.len()) as u64;
                touching
                    .iter()
                    .map(|&(p, k, at)| CollisionRecord::new(self.time, p, k, at))
                    .collect()
            }
            CollisionAction::Continue => {
                let now: HashSet<PairId> = touching.iter().map(|t| t.0).collect();
                let fresh = touching
                    .iter()
                    .filter(|t| !self.contacts.contains(&t.0))
                    .map(|&(p, k, at)| CollisionRecord::new(self.time, p, k, at))
                    .collect();
                self.contacts = now;
                fresh
            }
        };
        records
    }

    fn spawn_due(&mut self) {
        let v = self.scenario.vehicle;
        for q in 0..self.queues.len() {
            let Some(&sp) = self.queues[q].front() else {
                continue;
            };
            if sp.time > self.time {
                continue;
            }
            match sp.class {
                EntityClass::Vehicle => {
                    let route = q;
                    let desired =
                        v.max_speed * (v.speed_factor_min + (1.0 - v.speed_factor_min) * sp.speed_draw);
                    let last = self
                        .agents
                        .iter()
                        .filter(|a| a.is_vehicle() && a.route == route)
                        .min_by(|x, y| x.s.total_cmp(&y.s));
                    let speed = match last {
                        None => desired,
                        Some(l) => {
                            let gap = (l.s - v.length) - v.length - v.min_gap;
                            if gap < 0.0 {
                                continue;
                            }
                            desired.min(krauss_speed(gap, l.speed, v.max_decel, v.tau))
                        }
                    };
                    let yielding = sp.violation_draw >= self.scenario.p_violate;
                    self.new_agent(EntityClass::Vehicle, route, v.length, speed, desired, yielding);
                }
                EntityClass::Pedestrian => {
                    let p = self.scenario.pedestrian;
                    let speed = p.min_speed + (p.max_speed - p.min_speed) * sp.speed_draw;
                    self.new_agent(EntityClass::Pedestrian, q - VEHICLE_ENTRIES, 0.0, speed, speed, true);
                }
            }
            self.queues[q].pop_front();
        }
        // Keep agents ordered by id for lookups.
        debug_assert!(self.agents.windows(2).all(|w| w[0].id < w[1].id));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty(scenario: Scenario) -> World {
        World::new(scenario, Vec::new()).unwrap()
    }

    fn run(world: &mut World, secs: f64) -> Vec<CollisionRecord> {
        let steps = (secs / world.dt).round() as usize;
        let mut all = Vec::new();
        for _ in 0..steps {
            all.extend(world.step());
        }
        all
    }

    #[test]
    fn free_vehicle_reaches_max_speed() {
        let mut w = empty(Scenario::default());
        let id = w
            .place_vehicle(VehiclePlacement { route: 0, s: 5.0, speed: 13.89, desired_speed: 13.89, yielding: true })
            .unwrap();
        let start = w.agent(id).unwrap().s;
        run(&mut w, 10.0);
        let a = w.agent(id).unwrap();
        // Priority road, no traffic: nothing to yield to.
        assert!((a.speed - 13.89).abs() < 1e-9);
        assert!(a.s - start <= 138.9 + 1e-6);
        assert!(a.s - start > 138.0);
    }

    #[test]
    fn follower_stops_behind_stopped_leader() {
        let mut w = empty(Scenario::default());
        let leader = w
            .place_vehicle(VehiclePlacement { route: 0, s: 100.0, speed: 0.0, desired_speed: 0.0, yielding: true })
            .unwrap();
        let follower = w
            .place_vehicle(VehiclePlacement { route: 0, s: 50.0, speed: 13.89, desired_speed: 13.89, yielding: true })
            .unwrap();
        let hits = run(&mut w, 20.0);
        assert!(hits.is_empty());
        let l = w.agent(leader).unwrap();
        let f = w.agent(follower).unwrap();
        assert!(f.speed < 1e-3);
        assert!(l.s - 5.0 - f.s > 0.0);
    }

    #[test]
    fn violators_meet_at_junction() {
        // Eastbound on the main road and northbound on the west minor road,
        // both 100 m from the crossing point of their center lines.
        let sc = Scenario::default();
        let mut w = empty(sc.clone());
        let v1 = &w.network().vehicle_routes[0];
        let x_cross = -0.5 * sc.intersection_spacing + 0.5 * sc.lane_width;
        let s1 = (x_cross - v1.origin.x) - 100.0 + 2.5;
        let v3 = &w.network().vehicle_routes[2];
        let s3 = (-0.5 * sc.lane_width - v3.origin.y) - 100.0 + 2.5;
        let a = w
            .place_vehicle(VehiclePlacement { route: 0, s: s1, speed: 10.0, desired_speed: 10.0, yielding: false })
            .unwrap();
        let b = w
            .place_vehicle(VehiclePlacement { route: 2, s: s3, speed: 10.0, desired_speed: 10.0, yielding: false })
            .unwrap();
        let hits = run(&mut w, 15.0);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].pair(), PairId::new(a, b));
        assert_eq!(hits[0].kind, PairKind::VehVeh);
        // Centers 100 m out at 10 m/s: corners meet once the centers are
        // 2.5 + 0.9 = 3.4 m from the crossing point, after 9.66 s.
        let expected = (100.0 - 3.4) / 10.0;
        assert!((hits[0].time.as_secs() - expected).abs() <= 0.011, "{}", hits[0].time);
        assert!(w.agent(a).is_none() && w.agent(b).is_none());
    }

    #[test]
    fn yielding_minor_vehicle_waits_for_priority_traffic() {
        let sc = Scenario::default();
        let mut w = empty(sc.clone());
        let main = w
            .place_vehicle(VehiclePlacement { route: 0, s: 120.0, speed: 13.89, desired_speed: 13.89, yielding: true })
            .unwrap();
        let minor = w
            .place_vehicle(VehiclePlacement { route: 2, s: 200.0, speed: 13.89, desired_speed: 13.89, yielding: true })
            .unwrap();
        let hits = run(&mut w, 30.0);
        assert!(hits.is_empty());
        assert!(w.agent(main).is_some() || w.counts().despawned >= 1);
        assert!(w.agent(minor).is_some() || w.counts().despawned >= 1);
    }

    #[test]
    fn contact_episode_logged_once() {
        // Slow violators overlap for many steps but log a single contact.
        let sc = Scenario { collision_action: CollisionAction::Continue, ..Scenario::default() };
        let mut w = empty(sc.clone());
        let x_cross = -0.5 * sc.intersection_spacing + 0.5 * sc.lane_width;
        let s1 = x_cross + 0.5 * sc.road_length - 20.0;
        let s3 = 0.5 * sc.road_length - 0.5 * sc.lane_width - 20.0;
        for (route, s) in [(0, s1), (2, s3)] {
            w.place_vehicle(VehiclePlacement { route, s, speed: 2.0, desired_speed: 2.0, yielding: false })
                .unwrap();
        }
        let hits = run(&mut w, 20.0);
        assert_eq!(hits.len(), 1);
        assert_eq!(w.agents().len(), 2);
    }

    #[test]
    fn conservation_of_agents() {
        use crate::mobility::arrivals::{generate_arrivals, ArrivalConfig};
        let spawns = generate_arrivals(&ArrivalConfig { lambda_v: 0.7, lambda_p: 0.1, seed: 1 }, 120.0);
        let mut w = World::new(Scenario::default(), spawns).unwrap();
        for _ in 0..12_000 {
            w.step();
            let c = w.counts();
            assert_eq!(c.spawned, w.agents().len() as u64 + c.despawned + c.removed);
        }
    }

    #[test]
    fn travel_time_cases() {
        assert_eq!(travel_time(0.0, 5.0, 2.0, 10.0), 0.0);
        assert!((travel_time(100.0, 10.0, 2.0, 10.0) - 10.0).abs() < 1e-12);
        // 0 -> 10 m/s over 25 m, then 75 m at 10 m/s.
        assert!((travel_time(100.0, 0.0, 2.0, 10.0) - 12.5).abs() < 1e-12);
        assert!((travel_time(4.0, 0.0, 2.0, 10.0) - 2.0).abs() < 1e-12);
    }
}
