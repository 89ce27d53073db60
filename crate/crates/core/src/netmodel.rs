//! Message transport and the coupled event loop.
//!
//! CAMs travel entity → eNB → server (`radio + backhaul`). Alerts travel
//! back the same way and are then processed on board, which gives the
//! delivery delay `T_D = backhaul + radio + processing`. A human driver
//! acts `T_H` later; an automated vehicle acts immediately.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

use crate::detector::{Alert, Cam, CollisionDetector, DetectorError};
use crate::entity::{EntityId, PairId, PairKind};
use crate::mobility::{CollisionRecord, MobilityError, TrajectoryRecord, World};
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyProfile {
    /// eNB ↔ server, one way.
    pub backhaul: SimTime,
    /// Entity ↔ eNB, one way.
    pub radio: SimTime,
}

impl LatencyProfile {
    pub const METRO: LatencyProfile = LatencyProfile {
        backhaul: SimTime::from_millis(5),
        radio: SimTime::from_millis(10),
    };
    pub const CLOUD: LatencyProfile = LatencyProfile {
        backhaul: SimTime::from_millis(20),
        radio: SimTime::from_millis(10),
    };
    pub const ZERO: LatencyProfile = LatencyProfile {
        backhaul: SimTime::ZERO,
        radio: SimTime::ZERO,
    };

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "metro" => Some(Self::METRO),
            "cloud" => Some(Self::CLOUD),
            _ => None,
        }
    }

    pub fn one_way(&self) -> SimTime {
        self.radio + self.backhaul
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionProfile {
    /// On-board processing before the alert is shown.
    pub processing: SimTime,
    /// Driver reaction time `T_H`.
    pub human_reaction: SimTime,
}

impl ReactionProfile {
    pub const HUMAN_DRIVER: ReactionProfile = ReactionProfile {
        processing: SimTime::from_millis(400),
        human_reaction: SimTime::from_millis(1000),
    };
    pub const AUTOMATED: ReactionProfile = ReactionProfile {
        processing: SimTime::from_millis(400),
        human_reaction: SimTime::ZERO,
    };

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "hd" | "human" | "human-driver" => Some(Self::HUMAN_DRIVER),
            "av" | "automated" | "automated-vehicle" => Some(Self::AUTOMATED),
            _ => None,
        }
    }
}

/// Time at which a CAM reaches the server.
pub fn send_cam(cam: &Cam, profile: &LatencyProfile) -> SimTime {
    cam.generated_at + profile.one_way()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlertDelivery {
    /// Alert shown to the recipient.
    pub hmi_time: SimTime,
    /// Evasive action starts.
    pub action_time: SimTime,
}

pub fn send_alert(alert: &Alert, latency: &LatencyProfile, reaction: &ReactionProfile) -> AlertDelivery {
    let hmi_time = alert.issued_at + latency.one_way() + reaction.processing;
    AlertDelivery {
        hmi_time,
        action_time: hmi_time + reaction.human_reaction,
    }
}

/// One row of the alert log. Both recipients share the same delivery times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlertRecord {
    pub issued_at: SimTime,
    pub a: EntityId,
    pub b: EntityId,
    pub kind: PairKind,
    pub t_star: f64,
    pub d_star: f64,
    pub hmi_time: SimTime,
    pub action_time: SimTime,
}

pub const ALERT_HEADER: &[&str] = &[
    "issued_at", "a", "b", "kind", "t_star", "d_star", "hmi_time", "action_time",
];

impl AlertRecord {
    pub fn new(alert: &Alert, delivery: AlertDelivery) -> Self {
        AlertRecord {
            issued_at: alert.issued_at,
            a: alert.pair.first(),
            b: alert.pair.second(),
            kind: alert.kind,
            t_star: alert.t_star,
            d_star: alert.d_star,
            hmi_time: delivery.hmi_time,
            action_time: delivery.action_time,
        }
    }

    pub fn pair(&self) -> PairId {
        PairId::new(self.a, self.b)
    }

    /// `T_D`.
    pub fn delivery_delay(&self) -> SimTime {
        self.hmi_time - self.issued_at
    }
}

struct Queued<E> {
    time: SimTime,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Queued<E> {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl<E> Eq for Queued<E> {}

impl<E> PartialOrd for Queued<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Queued<E> {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

/// Time-ordered queue, FIFO among equal timestamps.
pub struct EventQueue<E> {
    heap: BinaryHeap<Queued<E>>,
    seq: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            seq: 0,
        }
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: SimTime, event: E) {
        self.heap.push(Queued { time, seq: self.seq, event });
        self.seq += 1;
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|q| q.time)
    }

    pub fn pop(&mut self) -> Option<(SimTime, E)> {
        self.heap.pop().map(|q| (q.time, q.event))
    }

    /// Next event due at or before `t`.
    pub fn pop_until(&mut self, t: SimTime) -> Option<(SimTime, E)> {
        if self.peek_time()? <= t {
            self.pop()
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error("{0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopOptions {
    pub latency: LatencyProfile,
    pub reaction: ReactionProfile,
    /// When off, CAMs are still logged but the detector is never invoked.
    pub alerts_enabled: bool,
    /// When on, alert recipients brake (vehicles) or stop (pedestrians).
    pub closed_loop: bool,
    /// How long a recipient keeps braking after its action time.
    pub reaction_hold: SimTime,
    /// Log every n-th step of each entity. Must divide the CAM period.
    pub trajectory_decimation: u64,
}

impl Default for LoopOptions {
    fn default() -> Self {
        LoopOptions {
            latency: LatencyProfile::METRO,
            reaction: ReactionProfile::HUMAN_DRIVER,
            alerts_enabled: true,
            closed_loop: false,
            reaction_hold: SimTime::from_secs(2.0),
            trajectory_decimation: 10,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunLogs {
    pub trajectories: Vec<TrajectoryRecord>,
    pub collisions: Vec<CollisionRecord>,
    pub alerts: Vec<AlertRecord>,
}

enum Event {
    CamAtServer(Cam),
    AlertAtHmi { recipient: EntityId, action_time: SimTime },
}

/// Steps the world for `duration`, emitting CAMs on each entity's own
/// period, and feeds the detector in delivery order. Events scheduled past
/// the end are dropped.
pub fn run_coupled(
    mut world: World,
    mut detector: CollisionDetector,
    opts: &LoopOptions,
    duration: SimTime,
) -> Result<RunLogs, NetError> {
    let dt = world.step_size();
    let period = detector.params().cam_period();
    if period.micros() % dt.micros() != 0 {
        return Err(NetError::Config(format!(
            "CAM period {period} s is not a multiple of the step {dt} s"
        )));
    }
    let cam_steps = (period.micros() / dt.micros()) as u64;
    let decim = opts.trajectory_decimation;
    if decim == 0 || cam_steps % decim != 0 {
        return Err(NetError::Config(format!(
            "trajectory decimation {decim} must divide the {cam_steps} steps of a CAM period"
        )));
    }
    if duration <= SimTime::ZERO {
        return Err(NetError::Config("duration must be positive".into()));
    }

    let mut logs = RunLogs::default();
    let mut queue: EventQueue<Event> = EventQueue::new();
    let emit = |world: &World, queue: &mut EventQueue<Event>, logs: &mut RunLogs| {
        for a in world.agents() {
            if a.steps_alive % decim != 0 {
                continue;
            }
            let rec = world.record(a);
            logs.trajectories.push(rec);
            if a.steps_alive % cam_steps == 0 {
                let cam = rec.to_cam();
                queue.push(send_cam(&cam, &opts.latency), Event::CamAtServer(cam));
            }
        }
    };

    emit(&world, &mut queue, &mut logs);
    let steps = duration.micros() / dt.micros();
    for _ in 0..steps {
        logs.collisions.extend(world.step());
        let now = world.time();
        emit(&world, &mut queue, &mut logs);
        while let Some((t, ev)) = queue.pop_until(now) {
            match ev {
                Event::CamAtServer(cam) => {
                    if !opts.alerts_enabled {
                        continue;
                    }
                    for alert in detector.on_cam(cam, t)? {
                        let delivery = send_alert(&alert, &opts.latency, &opts.reaction);
                        logs.alerts.push(AlertRecord::new(&alert, delivery));
                        if opts.closed_loop {
                            for r in alert.recipients() {
                                queue.push(
                                    delivery.hmi_time,
                                    Event::AlertAtHmi { recipient: r, action_time: delivery.action_time },
                                );
                            }
                        }
                    }
                }
                Event::AlertAtHmi { recipient, action_time } => {
                    world.react(recipient, action_time, action_time + opts.reaction_hold);
                }
            }
        }
    }
    Ok(logs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::DetectorParams;
    use crate::entity::EntityClass;
    use crate::kinematics::{KinematicState, Vec2};
    use crate::mobility::Scenario;

    fn cam_at(t: f64) -> Cam {
        Cam {
            sender: EntityId(1),
            class: EntityClass::Vehicle,
            generated_at: SimTime::from_secs(t),
            state: KinematicState::new(Vec2::ZERO, Vec2::ZERO),
        }
    }

    fn alert_at(t: f64) -> Alert {
        Alert {
            issued_at: SimTime::from_secs(t),
            pair: PairId::new(EntityId(1), EntityId(2)),
            kind: PairKind::VehVeh,
            t_star: 5.0,
            d_star: 0.0,
        }
    }

    #[test]
    fn cam_uplink() {
        assert_eq!(send_cam(&cam_at(1.0), &LatencyProfile::METRO), SimTime::from_secs(1.015));
        assert_eq!(send_cam(&cam_at(1.0), &LatencyProfile::CLOUD), SimTime::from_secs(1.030));
        assert_eq!(send_cam(&cam_at(1.0), &LatencyProfile::ZERO), SimTime::from_secs(1.0));
    }

    #[test]
    fn alert_downlink() {
        let m = send_alert(&alert_at(12.0), &LatencyProfile::METRO, &ReactionProfile::HUMAN_DRIVER);
        assert_eq!(m.hmi_time, SimTime::from_secs(12.415));
        assert_eq!(m.action_time, SimTime::from_secs(13.415));
        let c = send_alert(&alert_at(12.0), &LatencyProfile::CLOUD, &ReactionProfile::AUTOMATED);
        assert_eq!(c.hmi_time, SimTime::from_secs(12.430));
        assert_eq!(c.action_time, c.hmi_time);
        let m_av = send_alert(&alert_at(12.0), &LatencyProfile::METRO, &ReactionProfile::AUTOMATED);
        assert_eq!(c.action_time - m_av.action_time, SimTime::from_millis(15));
    }

    #[test]
    fn queue_is_time_ordered_and_fifo() {
        let mut q = EventQueue::new();
        q.push(SimTime::from_millis(5), 'a');
        q.push(SimTime::from_millis(1), 'b');
        q.push(SimTime::from_millis(5), 'c');
        q.push(SimTime::from_millis(3), 'd');
        assert_eq!(q.pop_until(SimTime::from_millis(2)).map(|e| e.1), Some('b'));
        assert_eq!(q.pop_until(SimTime::from_millis(2)), None);
        let rest: Vec<char> = std::iter::from_fn(|| q.pop().map(|e| e.1)).collect();
        assert_eq!(rest, vec!['d', 'a', 'c']);
    }

    #[test]
    fn presets_by_name() {
        assert_eq!(LatencyProfile::by_name("Metro"), Some(LatencyProfile::METRO));
        assert_eq!(LatencyProfile::by_name("edge"), None);
        assert_eq!(ReactionProfile::by_name("av"), Some(ReactionProfile::AUTOMATED));
    }

    #[test]
    fn empty_world_gives_empty_logs() {
        let world = World::new(Scenario::default(), Vec::new()).unwrap();
        let det = CollisionDetector::new(DetectorParams::default()).unwrap();
        let logs = run_coupled(world, det, &LoopOptions::default(), SimTime::from_secs(5.0)).unwrap();
        assert_eq!(logs, RunLogs::default());
    }

    #[test]
    fn rejects_bad_decimation() {
        let world = World::new(Scenario::default(), Vec::new()).unwrap();
        let det = CollisionDetector::new(DetectorParams::default()).unwrap();
        let opts = LoopOptions { trajectory_decimation: 3, ..LoopOptions::default() };
        assert!(run_coupled(world, det, &opts, SimTime::from_secs(1.0)).is_err());
    }
}
