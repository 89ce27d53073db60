//! Offline classification of collisions and alerts.
//!
//! A collision counts as detected when its pair received an alert no more
//! than the governing `t2c` before impact. With `T_FA` the interval from the
//! first such alert to the impact, the driver has
//! `T_A = T_FA − T_D − T_H` left to act. The collision was detected too late
//! when that is shorter than `T_B`, the time needed to brake to a stop.

mod report;
mod sweep;
mod trajectory;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

use crate::detector::DetectorParams;
use crate::entity::{EntityClass, EntityId, PairId, PairKind};
use crate::mobility::shapes::{clearance, Disc, Footprint, OrientedRect};
use crate::mobility::{CollisionRecord, Scenario, TrajectoryRecord};
use crate::netmodel::{AlertRecord, ReactionProfile};
use crate::time::SimTime;

pub use report::{cdf_rows, summarize, AlertClassRow, CdfRow, KindSummary, OutcomeRow, Quantiles, Summary, NEAR_MISS};
pub use sweep::{cell_params, replay_alerts, replay_cams, threshold_sweep, RunInput, SweepCell};
pub use trajectory::{Pose, TrajectoryIndex};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no trajectory data for entity {0}")]
    MissingTrajectory(EntityId),
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Detector(#[from] crate::detector::DetectorError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeClass {
    DetectedInTime,
    DetectedTooLate,
    NotDetected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlertClass {
    TrueTimely,
    TrueLate,
    FalsePositive,
}

/// All times in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReactionBudget {
    pub t_fa: f64,
    pub t_d: f64,
    pub t_h: f64,
    pub t_a: f64,
    pub t_b: f64,
}

impl ReactionBudget {
    pub fn new(t_fa: f64, t_d: f64, t_h: f64, t_b: f64) -> Self {
        ReactionBudget {
            t_fa,
            t_d,
            t_h,
            t_a: t_fa - t_d - t_h,
            t_b,
        }
    }

    pub fn too_late(&self) -> bool {
        self.t_a < self.t_b
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisParams {
    /// Supplies the governing `t2c` that links an alert to a collision.
    pub detector: DetectorParams,
    pub reaction: ReactionProfile,
    /// Used for the braking time `T_B = speed / max_decel`.
    pub vehicle_max_decel: f64,
}

impl AnalysisParams {
    pub fn new(detector: DetectorParams, reaction: ReactionProfile, scenario: &Scenario) -> Self {
        AnalysisParams {
            detector,
            reaction,
            vehicle_max_decel: scenario.vehicle.max_decel,
        }
    }

    pub fn horizon(&self, kind: PairKind) -> SimTime {
        SimTime::from_secs(self.detector.governing(kind).t2c)
    }
}

/// One collision with its outcome; the budget is absent when undetected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedCollision {
    pub time: SimTime,
    pub a: EntityId,
    pub b: EntityId,
    pub kind: PairKind,
    pub outcome: OutcomeClass,
    pub t_fa: Option<f64>,
    pub t_d: Option<f64>,
    pub t_h: Option<f64>,
    pub t_a: Option<f64>,
    pub t_b: Option<f64>,
}

impl ClassifiedCollision {
    pub fn pair(&self) -> PairId {
        PairId::new(self.a, self.b)
    }

    pub fn budget(&self) -> Option<ReactionBudget> {
        Some(ReactionBudget {
            t_fa: self.t_fa?,
            t_d: self.t_d?,
            t_h: self.t_h?,
            t_a: self.t_a?,
            t_b: self.t_b?,
        })
    }
}

/// Time to stop from the speed at `at`; pedestrians stop at once.
pub fn braking_time(
    id: EntityId,
    at: SimTime,
    traj: &TrajectoryIndex,
    max_decel: f64,
) -> Result<f64, AnalysisError> {
    match traj.class(id) {
        None => Err(AnalysisError::MissingTrajectory(id)),
        Some(EntityClass::Pedestrian) => Ok(0.0),
        Some(EntityClass::Vehicle) => {
            let v = traj.speed_at(id, at).ok_or(AnalysisError::MissingTrajectory(id))?;
            Ok(v / max_decel)
        }
    }
}

/// `alerts` may hold the whole log; only those for the collision's pair
/// issued within the horizon before impact are considered. `T_B` is the
/// shorter of the two participants' braking times at the HMI instant:
/// either one stopping in time avoids the impact.
pub fn classify_collision(
    col: &CollisionRecord,
    alerts: &[AlertRecord],
    params: &AnalysisParams,
    traj: &TrajectoryIndex,
) -> Result<ClassifiedCollision, AnalysisError> {
    let pair = col.pair();
    let horizon = params.horizon(col.kind);
    for id in [pair.first(), pair.second()] {
        if traj.class(id).is_none() {
            return Err(AnalysisError::MissingTrajectory(id));
        }
    }
    let first = alerts
        .iter()
        .filter(|a| a.pair() == pair && a.issued_at <= col.time && col.time - a.issued_at <= horizon)
        .min_by_key(|a| a.issued_at);
    let mut out = ClassifiedCollision {
        time: col.time,
        a: col.a,
        b: col.b,
        kind: col.kind,
        outcome: OutcomeClass::NotDetected,
        t_fa: None,
        t_d: None,
        t_h: None,
        t_a: None,
        t_b: None,
    };
    let Some(alert) = first else {
        return Ok(out);
    };
    let t_b = braking_time(pair.first(), alert.hmi_time, traj, params.vehicle_max_decel)?
        .min(braking_time(pair.second(), alert.hmi_time, traj, params.vehicle_max_decel)?);
    let budget = ReactionBudget::new(
        (col.time - alert.issued_at).as_secs(),
        alert.delivery_delay().as_secs(),
        params.reaction.human_reaction.as_secs(),
        t_b,
    );
    out.outcome = if budget.too_late() {
        OutcomeClass::DetectedTooLate
    } else {
        OutcomeClass::DetectedInTime
    };
    out.t_fa = Some(budget.t_fa);
    out.t_d = Some(budget.t_d);
    out.t_h = Some(budget.t_h);
    out.t_a = Some(budget.t_a);
    out.t_b = Some(budget.t_b);
    Ok(out)
}

pub fn classify_collisions(
    collisions: &[CollisionRecord],
    alerts: &[AlertRecord],
    params: &AnalysisParams,
    traj: &TrajectoryIndex,
) -> Result<Vec<ClassifiedCollision>, AnalysisError> {
    let mut by_pair: HashMap<PairId, Vec<AlertRecord>> = HashMap::new();
    for a in alerts {
        by_pair.entry(a.pair()).or_default().push(*a);
    }
    collisions
        .iter()
        .map(|c| classify_collision(c, by_pair.get(&c.pair()).map_or(&[], Vec::as_slice), params, traj))
        .collect()
}

/// An alert is a true positive when its pair collides within the governing
/// `t2c` after issuance; it inherits timely/late from that collision.
pub fn classify_alerts(
    alerts: &[AlertRecord],
    collisions: &[ClassifiedCollision],
    params: &AnalysisParams,
) -> Vec<AlertClass> {
    let mut by_pair: HashMap<PairId, Vec<&ClassifiedCollision>> = HashMap::new();
    for c in collisions {
        by_pair.entry(c.pair()).or_default().push(c);
    }
    alerts
        .iter()
        .map(|a| {
            let horizon = params.horizon(a.kind);
            let hit = by_pair.get(&a.pair()).and_then(|cs| {
                cs.iter()
                    .filter(|c| c.time >= a.issued_at && c.time - a.issued_at <= horizon)
                    .min_by_key(|c| c.time)
            });
            match hit.map(|c| c.outcome) {
                Some(OutcomeClass::DetectedTooLate) => AlertClass::TrueLate,
                Some(_) => AlertClass::TrueTimely,
                None => AlertClass::FalsePositive,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpPairDistance {
    pub a: EntityId,
    pub b: EntityId,
    pub kind: PairKind,
    /// Smallest footprint clearance over the co-existence window, metres.
    pub min_distance: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FpDistances {
    pub pairs: Vec<FpPairDistance>,
    /// Pairs whose logged lifetimes do not overlap.
    pub uncoverable: Vec<PairId>,
}

fn footprint(pose: &Pose, class: EntityClass, scenario: &Scenario) -> Footprint {
    match class {
        EntityClass::Vehicle => Footprint::Rect(OrientedRect::new(
            pose.position,
            scenario.vehicle.length,
            scenario.vehicle.width,
            pose.heading,
        )),
        EntityClass::Pedestrian => Footprint::Disc(Disc {
            center: pose.position,
            radius: scenario.pedestrian.radius,
        }),
    }
}

/// Minimum footprint clearance between `a` and `b` while both are logged,
/// evaluated at every sample instant of either entity.
pub fn min_clearance(
    a: EntityId,
    b: EntityId,
    traj: &TrajectoryIndex,
    scenario: &Scenario,
) -> Result<Option<f64>, AnalysisError> {
    let (ca, cb) = (
        traj.class(a).ok_or(AnalysisError::MissingTrajectory(a))?,
        traj.class(b).ok_or(AnalysisError::MissingTrajectory(b))?,
    );
    let (a0, a1) = traj.span(a).unwrap();
    let (b0, b1) = traj.span(b).unwrap();
    let (from, to) = (a0.max(b0), a1.min(b1));
    if from > to {
        return Ok(None);
    }
    let mut best = f64::INFINITY;
    for t in traj.times_within(a, from, to).chain(traj.times_within(b, from, to)) {
        let (Some(pa), Some(pb)) = (traj.pose_at(a, t), traj.pose_at(b, t)) else {
            continue;
        };
        best = best.min(clearance(&footprint(&pa, ca, scenario), &footprint(&pb, cb, scenario)));
    }
    Ok(best.is_finite().then_some(best))
}

/// Minimum distance reached by every distinct false-positive pair.
pub fn fp_min_distances(
    alerts: &[AlertRecord],
    classes: &[AlertClass],
    traj: &TrajectoryIndex,
    scenario: &Scenario,
) -> Result<FpDistances, AnalysisError> {
    let mut pairs: BTreeMap<PairId, PairKind> = BTreeMap::new();
    for (a, c) in alerts.iter().zip(classes) {
        if *c == AlertClass::FalsePositive {
            pairs.insert(a.pair(), a.kind);
        }
    }
    let mut out = FpDistances::default();
    for (pair, kind) in pairs {
        match min_clearance(pair.first(), pair.second(), traj, scenario)? {
            Some(d) => out.pairs.push(FpPairDistance {
                a: pair.first(),
                b: pair.second(),
                kind,
                min_distance: d,
            }),
            None => out.uncoverable.push(pair),
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub distance: f64,
    pub fraction: f64,
}

/// Empirical CDF: sorted values with cumulative fractions `i/n`.
pub fn cdf(values: &[f64]) -> Vec<CdfPoint> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter()
        .enumerate()
        .map(|(i, d)| CdfPoint {
            distance: d,
            fraction: (i + 1) as f64 / n,
        })
        .collect()
}

/// Everything derived from one run's logs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunAnalysis {
    pub collisions: Vec<ClassifiedCollision>,
    pub alerts: Vec<AlertRecord>,
    pub alert_classes: Vec<AlertClass>,
    pub fp: FpDistances,
}

pub fn analyze_run(
    trajectories: &[TrajectoryRecord],
    collisions: &[CollisionRecord],
    alerts: &[AlertRecord],
    params: &AnalysisParams,
    scenario: &Scenario,
) -> Result<RunAnalysis, AnalysisError> {
    let traj = TrajectoryIndex::new(trajectories);
    let classified = classify_collisions(collisions, alerts, params, &traj)?;
    let classes = classify_alerts(alerts, &classified, params);
    let fp = fp_min_distances(alerts, &classes, &traj, scenario)?;
    Ok(RunAnalysis {
        collisions: classified,
        alerts: alerts.to_vec(),
        alert_classes: classes,
        fp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{send_alert, LatencyProfile};
    use crate::detector::Alert;

    fn rec(id: u32, class: EntityClass, t: f64, x: f64, speed: f64) -> TrajectoryRecord {
        TrajectoryRecord {
            time: SimTime::from_secs(t),
            id: EntityId(id),
            class,
            x,
            y: 0.0,
            speed,
            heading: 0.0,
            accel: 0.0,
        }
    }

    fn alert(issued: f64, kind: PairKind, latency: LatencyProfile, reaction: ReactionProfile) -> AlertRecord {
        let a = Alert {
            issued_at: SimTime::from_secs(issued),
            pair: PairId::new(EntityId(1), EntityId(2)),
            kind,
            t_star: 1.0,
            d_star: 0.0,
        };
        AlertRecord::new(&a, send_alert(&a, &latency, &reaction))
    }

    fn col(t: f64, kind: PairKind) -> CollisionRecord {
        CollisionRecord {
            time: SimTime::from_secs(t),
            a: EntityId(1),
            b: EntityId(2),
            kind,
            x: 0.0,
            y: 0.0,
        }
    }

    fn params(reaction: ReactionProfile) -> AnalysisParams {
        AnalysisParams::new(DetectorParams::default(), reaction, &Scenario::default())
    }

    fn two_vehicles(speed: f64) -> TrajectoryIndex {
        let mut v = Vec::new();
        for k in 0..=300 {
            let t = k as f64 * 0.1;
            v.push(rec(1, EntityClass::Vehicle, t, 0.0, speed));
            v.push(rec(2, EntityClass::Vehicle, t, 50.0, speed));
        }
        TrajectoryIndex::new(&v)
    }

    #[test]
    fn in_time_with_full_budget() {
        let hd = ReactionProfile::HUMAN_DRIVER;
        let alerts = [alert(2.0, PairKind::VehVeh, LatencyProfile::METRO, hd)];
        let c = classify_collision(&col(12.0, PairKind::VehVeh), &alerts, &params(hd), &two_vehicles(13.89)).unwrap();
        let b = c.budget().unwrap();
        assert_eq!(b.t_fa, 10.0);
        assert!((b.t_d - 0.415).abs() < 1e-12);
        assert!((b.t_a - 8.585).abs() < 1e-12);
        assert!((b.t_b - 13.89 / 4.5).abs() < 1e-12);
        assert_eq!(c.outcome, OutcomeClass::DetectedInTime);
    }

    #[test]
    fn late_with_negative_budget() {
        let hd = ReactionProfile::HUMAN_DRIVER;
        let alerts = [alert(10.8, PairKind::VehVeh, LatencyProfile::METRO, hd)];
        let c = classify_collision(&col(12.0, PairKind::VehVeh), &alerts, &params(hd), &two_vehicles(13.89)).unwrap();
        let b = c.budget().unwrap();
        assert!((b.t_fa - 1.2).abs() < 1e-12);
        assert!((b.t_a + 0.215).abs() < 1e-12);
        assert_eq!(c.outcome, OutcomeClass::DetectedTooLate);
        // Recomputing the budget from its stored parts is bit-exact.
        assert_eq!(b.t_fa - b.t_d - b.t_h, b.t_a);
    }

    #[test]
    fn undetected_without_prior_alert() {
        let hd = ReactionProfile::HUMAN_DRIVER;
        let after = [alert(12.5, PairKind::VehVeh, LatencyProfile::METRO, hd)];
        let stale = [alert(1.0, PairKind::VehVeh, LatencyProfile::METRO, hd)];
        for alerts in [&after[..], &stale[..], &[]] {
            let c = classify_collision(&col(12.0, PairKind::VehVeh), alerts, &params(hd), &two_vehicles(13.89)).unwrap();
            assert_eq!(c.outcome, OutcomeClass::NotDetected);
            assert!(c.budget().is_none());
        }
    }

    #[test]
    fn missing_trajectory_is_an_error() {
        let hd = ReactionProfile::HUMAN_DRIVER;
        let traj = TrajectoryIndex::new(&[rec(1, EntityClass::Vehicle, 0.0, 0.0, 1.0)]);
        assert!(matches!(
            classify_collision(&col(12.0, PairKind::VehVeh), &[], &params(hd), &traj),
            Err(AnalysisError::MissingTrajectory(EntityId(2)))
        ));
    }

    #[test]
    fn pedestrian_stops_at_once() {
        let hd = ReactionProfile::HUMAN_DRIVER;
        let mut v = Vec::new();
        for k in 0..=100 {
            let t = k as f64 * 0.1;
            v.push(rec(1, EntityClass::Vehicle, t, 0.0, 13.89));
            v.push(rec(2, EntityClass::Pedestrian, t, 20.0, 1.5));
        }
        let traj = TrajectoryIndex::new(&v);
        let alerts = [alert(8.0, PairKind::VehPed, LatencyProfile::METRO, hd)];
        let c = classify_collision(&col(9.5, PairKind::VehPed), &alerts, &params(hd), &traj).unwrap();
        assert_eq!(c.t_b, Some(0.0));
        assert_eq!(c.outcome, OutcomeClass::DetectedInTime);
    }

    #[test]
    fn alert_classes() {
        let hd = ReactionProfile::HUMAN_DRIVER;
        let p = params(hd);
        let traj = two_vehicles(13.89);
        let alerts = [
            alert(5.0, PairKind::VehVeh, LatencyProfile::METRO, hd),
            alert(20.0, PairKind::VehVeh, LatencyProfile::METRO, hd),
        ];
        let cols = classify_collisions(&[col(12.0, PairKind::VehVeh)], &alerts, &p, &traj).unwrap();
        let classes = classify_alerts(&alerts, &cols, &p);
        assert_eq!(classes, vec![AlertClass::TrueTimely, AlertClass::FalsePositive]);
        let cols = classify_collisions(&[col(9.0, PairKind::VehVeh)], &alerts, &p, &traj).unwrap();
        let classes = classify_alerts(&alerts, &cols, &p);
        assert_eq!(classes, vec![AlertClass::TrueLate, AlertClass::FalsePositive]);
    }

    #[test]
    fn cdf_shape() {
        let c = cdf(&[3.0, 0.0, 1.0, 1.0]);
        assert_eq!(c.first().unwrap().distance, 0.0);
        assert_eq!(c.last().unwrap().fraction, 1.0);
        assert!(c.windows(2).all(|w| w[0].distance <= w[1].distance && w[0].fraction < w[1].fraction));
        assert!(cdf(&[]).is_empty());
    }

    #[test]
    fn fp_distance_between_parked_cars() {
        let traj = two_vehicles(0.0);
        let hd = ReactionProfile::HUMAN_DRIVER;
        let alerts = [alert(5.0, PairKind::VehVeh, LatencyProfile::METRO, hd)];
        let fp = fp_min_distances(&alerts, &[AlertClass::FalsePositive], &traj, &Scenario::default()).unwrap();
        assert_eq!(fp.pairs.len(), 1);
        assert!((fp.pairs[0].min_distance - 45.0).abs() < 1e-9);
        assert!(fp.uncoverable.is_empty());
    }

    #[test]
    fn fp_without_overlap_is_uncoverable() {
        let traj = TrajectoryIndex::new(&[
            rec(1, EntityClass::Vehicle, 0.0, 0.0, 1.0),
            rec(2, EntityClass::Vehicle, 5.0, 0.0, 1.0),
        ]);
        let hd = ReactionProfile::HUMAN_DRIVER;
        let alerts = [alert(0.0, PairKind::VehVeh, LatencyProfile::METRO, hd)];
        let fp = fp_min_distances(&alerts, &[AlertClass::FalsePositive], &traj, &Scenario::default()).unwrap();
        assert!(fp.pairs.is_empty());
        assert_eq!(fp.uncoverable.len(), 1);
    }
}
