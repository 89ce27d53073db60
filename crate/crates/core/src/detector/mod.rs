//! Server-side collision detection.
//!
//! Each received CAM is checked for freshness, stored as its sender's latest
//! state, and then tested against every fresh entity inside the range of
//! action. Pairs whose closest approach falls within the time and space
//! thresholds are alerted, at most once per second per pair.

mod store;

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

use crate::entity::{EntityClass, EntityId, PairId, PairKind};
use crate::kinematics::{closest_approach, CpaResult, KinematicState};
use crate::time::SimTime;

pub use store::CamStore;

/// One cooperative awareness message.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cam {
    pub sender: EntityId,
    pub class: EntityClass,
    pub generated_at: SimTime,
    pub state: KinematicState,
}

impl Cam {
    /// Sender state advanced to `now` at constant velocity.
    pub fn state_at(&self, now: SimTime) -> KinematicState {
        self.state.advanced((now - self.generated_at).as_secs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassThresholds {
    /// Time-to-collision threshold, seconds.
    pub t2c: f64,
    /// Space-to-collision threshold, meters.
    pub s2c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorParams {
    pub vehicle: ClassThresholds,
    pub pedestrian: ClassThresholds,
    /// Seconds.
    pub max_cam_age: f64,
    /// Hz.
    pub cam_frequency: f64,
    /// Hz.
    pub alert_max_frequency: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            vehicle: ClassThresholds { t2c: 10.0, s2c: 5.0 },
            pedestrian: ClassThresholds { t2c: 5.0, s2c: 2.0 },
            max_cam_age: 0.8,
            cam_frequency: 10.0,
            alert_max_frequency: 1.0,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<(), DetectorError> {
        let named = [
            ("vehicle.t2c", self.vehicle.t2c),
            ("vehicle.s2c", self.vehicle.s2c),
            ("pedestrian.t2c", self.pedestrian.t2c),
            ("pedestrian.s2c", self.pedestrian.s2c),
            ("max_cam_age", self.max_cam_age),
            ("cam_frequency", self.cam_frequency),
            ("alert_max_frequency", self.alert_max_frequency),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DetectorError::InvalidParam { name, value: v });
            }
        }
        Ok(())
    }

    pub fn thresholds(&self, class: EntityClass) -> ClassThresholds {
        match class {
            EntityClass::Vehicle => self.vehicle,
            EntityClass::Pedestrian => self.pedestrian,
        }
    }

    /// Thresholds applied to a pair: vehicle-with-pedestrian pairs use the
    /// pedestrian set.
    pub fn governing(&self, kind: PairKind) -> ClassThresholds {
        match kind {
            PairKind::VehVeh => self.vehicle,
            PairKind::VehPed => self.pedestrian,
        }
    }

    pub fn max_age(&self) -> SimTime {
        SimTime::from_secs(self.max_cam_age)
    }

    pub fn cam_period(&self) -> SimTime {
        SimTime::from_secs(1.0 / self.cam_frequency)
    }

    pub fn alert_interval(&self) -> SimTime {
        SimTime::from_secs(1.0 / self.alert_max_frequency)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DetectorError {
    #[error("CAM from {0} has non-finite fields")]
    NonFinite(EntityId),
    #[error("CAM from {sender} generated at {generated_at} is ahead of server time {now}")]
    FromFuture {
        sender: EntityId,
        generated_at: SimTime,
        now: SimTime,
    },
    #[error("detector parameter {name} must be positive and finite, got {value}")]
    InvalidParam { name: &'static str, value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IngestOutcome {
    Stored,
    /// Older than the maximum CAM age; discarded.
    Stale,
    /// A newer CAM from the same sender is already stored; discarded.
    Superseded,
}

pub fn ingest_cam(
    cam: Cam,
    now: SimTime,
    store: &mut CamStore,
    params: &DetectorParams,
) -> Result<IngestOutcome, DetectorError> {
    if !cam.state.is_finite() {
        return Err(DetectorError::NonFinite(cam.sender));
    }
    if cam.generated_at > now {
        return Err(DetectorError::FromFuture {
            sender: cam.sender,
            generated_at: cam.generated_at,
            now,
        });
    }
    if now - cam.generated_at > params.max_age() {
        return Ok(IngestOutcome::Stale);
    }
    if store.upsert(cam) {
        Ok(IngestOutcome::Stored)
    } else {
        Ok(IngestOutcome::Superseded)
    }
}

/// Range of action: `max(speed · t2c, s2c)`.
pub fn action_radius(speed: f64, thresholds: &ClassThresholds) -> f64 {
    (speed * thresholds.t2c).max(thresholds.s2c)
}

/// Whether two entities `distance` apart are within either one's range of
/// action. Checking both radii keeps the filter symmetric in the pair.
fn in_range(distance: f64, a: (f64, EntityClass), b: (f64, EntityClass), params: &DetectorParams) -> bool {
    let ra = action_radius(a.0, &params.thresholds(a.1));
    let rb = action_radius(b.0, &params.thresholds(b.1));
    distance <= ra.max(rb)
}

/// Fresh CAMs near `cam`'s sender: a superset of everything in range.
fn search<'a>(cam: &Cam, store: &'a CamStore, now: SimTime, params: &DetectorParams) -> Vec<&'a Cam> {
    let me = cam.state_at(now);
    let my_radius = action_radius(me.speed(), &params.thresholds(cam.class));
    let max_other = action_radius(
        store.max_speed(),
        &ClassThresholds {
            t2c: params.vehicle.t2c.max(params.pedestrian.t2c),
            s2c: params.vehicle.s2c.max(params.pedestrian.s2c),
        },
    );
    let slack = store.max_speed() * params.max_cam_age;
    let radius = my_radius.max(max_other) + slack;
    store
        .fresh_near(me.position.x, me.position.y, radius, now, params.max_age())
        .into_iter()
        .filter(|other| other.sender != cam.sender)
        .filter(|other| PairKind::of(cam.class, other.class).is_some())
        .collect()
}

/// Fresh CAMs of other senders within range of action of `cam`'s sender.
/// Pedestrian-with-pedestrian pairs are skipped.
pub fn candidate_set<'a>(
    cam: &Cam,
    store: &'a CamStore,
    now: SimTime,
    params: &DetectorParams,
) -> Vec<&'a Cam> {
    let me = cam.state_at(now);
    search(cam, store, now, params)
        .into_iter()
        .filter(|other| {
            let them = other.state_at(now);
            let d = (me.position - them.position).norm();
            in_range(d, (me.speed(), cam.class), (them.speed(), other.class), params)
        })
        .collect()
}

/// Threshold-independent facts about one pair at one instant: enough to
/// decide detection under any thresholds no looser than the ones used to
/// find it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Encounter {
    pub other: EntityId,
    pub kind: PairKind,
    pub distance: f64,
    /// Speed and class of the CAM sender, then of the other entity.
    pub me: (f64, EntityClass),
    pub them: (f64, EntityClass),
    pub cpa: CpaResult,
}

impl Encounter {
    pub fn detection(&self, params: &DetectorParams) -> Option<Detection> {
        if !in_range(self.distance, self.me, self.them, params) {
            return None;
        }
        let (t_star, d_star) = on_collision_course(self.cpa, &params.governing(self.kind))?;
        Some(Detection {
            other: self.other,
            kind: self.kind,
            t_star,
            d_star,
        })
    }
}

fn encounters(
    cam: &Cam,
    store: &CamStore,
    now: SimTime,
    params: &DetectorParams,
    only: Option<PairKind>,
) -> Vec<Encounter> {
    let me = cam.state_at(now);
    search(cam, store, now, params)
        .into_iter()
        .filter_map(|other| {
            let kind = PairKind::of(cam.class, other.class)?;
            if only.is_some_and(|k| k != kind) {
                return None;
            }
            let them = other.state_at(now);
            Some(Encounter {
                other: other.sender,
                kind,
                distance: (me.position - them.position).norm(),
                me: (me.speed(), cam.class),
                them: (them.speed(), other.class),
                cpa: closest_approach(&me, &them),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detection {
    pub other: EntityId,
    pub kind: PairKind,
    pub t_star: f64,
    pub d_star: f64,
}

/// Whether a closest-approach result puts the pair on a collision course.
pub fn on_collision_course(cpa: CpaResult, thresholds: &ClassThresholds) -> Option<(f64, f64)> {
    match cpa {
        CpaResult::Approaching { t_star, d_star }
            if t_star <= thresholds.t2c && d_star <= thresholds.s2c =>
        {
            Some((t_star, d_star))
        }
        CpaResult::Parallel { current_distance } if current_distance <= thresholds.s2c => {
            Some((0.0, current_distance))
        }
        _ => None,
    }
}

/// Runs the trajectory test between `cam`'s sender and every candidate.
/// Both states are extrapolated to `now` first.
pub fn detect_collisions(
    cam: &Cam,
    store: &CamStore,
    now: SimTime,
    params: &DetectorParams,
) -> Vec<Detection> {
    detect_filtered(cam, store, now, params, None)
}

fn detect_filtered(
    cam: &Cam,
    store: &CamStore,
    now: SimTime,
    params: &DetectorParams,
    only: Option<PairKind>,
) -> Vec<Detection> {
    encounters(cam, store, now, params, only)
        .iter()
        .filter_map(|e| e.detection(params))
        .collect()
}

/// Alert addressed to both members of `pair`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alert {
    pub issued_at: SimTime,
    pub pair: PairId,
    pub kind: PairKind,
    pub t_star: f64,
    pub d_star: f64,
}

impl Alert {
    pub fn recipients(&self) -> [EntityId; 2] {
        [self.pair.first(), self.pair.second()]
    }
}

/// Last alert emission per unordered pair.
#[derive(Debug, Clone)]
pub struct AlertLimiter {
    interval: SimTime,
    last: HashMap<PairId, SimTime>,
}

impl AlertLimiter {
    pub fn new(interval: SimTime) -> Self {
        AlertLimiter {
            interval,
            last: HashMap::new(),
        }
    }

    /// Records an emission and returns `true` if the pair is outside its
    /// quiet interval.
    pub fn try_emit(&mut self, pair: PairId, now: SimTime) -> bool {
        match self.last.get(&pair) {
            Some(&t) if now - t < self.interval => false,
            _ => {
                self.last.insert(pair, now);
                true
            }
        }
    }

    pub fn last_emission(&self, pair: PairId) -> Option<SimTime> {
        self.last.get(&pair).copied()
    }
}

pub fn emit_alerts(
    source: EntityId,
    colliders: &[Detection],
    now: SimTime,
    limiter: &mut AlertLimiter,
) -> Vec<Alert> {
    colliders
        .iter()
        .filter_map(|d| {
            let pair = PairId::new(source, d.other);
            limiter.try_emit(pair, now).then_some(Alert {
                issued_at: now,
                pair,
                kind: d.kind,
                t_star: d.t_star,
                d_star: d.d_star,
            })
        })
        .collect()
}

/// Store, limiter and parameters of one detector instance.
#[derive(Debug, Clone)]
pub struct CollisionDetector {
    params: DetectorParams,
    store: CamStore,
    limiter: AlertLimiter,
    only: Option<PairKind>,
    last_eviction: SimTime,
}

impl CollisionDetector {
    pub fn new(params: DetectorParams) -> Result<Self, DetectorError> {
        params.validate()?;
        // One cell spans the largest vehicle range of action at urban speed.
        let cell = action_radius(13.89, &params.vehicle);
        Ok(CollisionDetector {
            params,
            store: CamStore::new(cell),
            limiter: AlertLimiter::new(params.alert_interval()),
            only: None,
            last_eviction: SimTime::ZERO,
        })
    }

    /// Restricts detection to one pair kind (used by per-kind sweeps).
    pub fn only_kind(mut self, kind: PairKind) -> Self {
        self.only = Some(kind);
        self
    }

    pub fn params(&self) -> &DetectorParams {
        &self.params
    }

    pub fn store(&self) -> &CamStore {
        &self.store
    }

    /// Ingest, detect and emit for one CAM delivered at `now`.
    pub fn on_cam(&mut self, cam: Cam, now: SimTime) -> Result<Vec<Alert>, DetectorError> {
        let found: Vec<Detection> = self
            .encounters_for(cam, now)?
            .iter()
            .filter_map(|e| e.detection(&self.params))
            .collect();
        Ok(emit_alerts(cam.sender, &found, now, &mut self.limiter))
    }

    /// Ingests `cam` and returns every encounter within this detector's
    /// search range, without thresholding or rate limiting.
    pub fn encounters_for(&mut self, cam: Cam, now: SimTime) -> Result<Vec<Encounter>, DetectorError> {
        if now - self.last_eviction >= SimTime::from_secs(1.0) {
            self.store.evict_stale(now, self.params.max_age());
            self.last_eviction = now;
        }
        match ingest_cam(cam, now, &mut self.store, &self.params)? {
            IngestOutcome::Stored => {}
            IngestOutcome::Stale | IngestOutcome::Superseded => return Ok(Vec::new()),
        }
        Ok(encounters(&cam, &self.store, now, &self.params, self.only))
    }
}
