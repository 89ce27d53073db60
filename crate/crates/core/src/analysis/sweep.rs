//! Replay of recorded trajectories through detectors with other thresholds.
//!
//! The CAM stream is rebuilt from the trajectory log: each entity emitted a
//! CAM at its first logged instant and then once per CAM period. Alerts do
//! not feed back into mobility here, so every grid cell sees the same
//! traffic.
//!
//! A sweep runs the candidate search and closest-approach step once per
//! run, with the loosest thresholds of the grid, and keeps every encounter
//! that could alert. Each cell then only re-applies its own thresholds and
//! the per-pair rate limit to that trace.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

use crate::detector::{emit_alerts, AlertLimiter, Cam, ClassThresholds, CollisionDetector, DetectorParams, Encounter};
use crate::entity::{EntityId, PairKind};
use crate::mobility::{CollisionRecord, TrajectoryRecord};
use crate::netmodel::{send_alert, send_cam, AlertRecord, LatencyProfile, ReactionProfile};
use crate::time::SimTime;

use super::{
    classify_alerts, classify_collisions, AlertClass, AnalysisError, AnalysisParams, OutcomeClass,
    TrajectoryIndex,
};

/// Logs of one recorded run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunInput {
    pub trajectories: Vec<TrajectoryRecord>,
    pub collisions: Vec<CollisionRecord>,
    /// End of the run; CAMs delivered later were never processed.
    pub duration: SimTime,
}

/// CAMs implied by a trajectory log, in emission order.
pub fn replay_cams(trajectories: &[TrajectoryRecord], cam_period: SimTime) -> Vec<Cam> {
    let mut first: HashMap<EntityId, SimTime> = HashMap::new();
    for r in trajectories {
        let e = first.entry(r.id).or_insert(r.time);
        *e = (*e).min(r.time);
    }
    let mut cams: Vec<Cam> = trajectories
        .iter()
        .filter(|r| (r.time - first[&r.id]).is_multiple_of(cam_period))
        .map(TrajectoryRecord::to_cam)
        .collect();
    cams.sort_by_key(|c| (c.generated_at, c.sender));
    cams.dedup_by_key(|c| (c.generated_at, c.sender));
    cams
}

/// Feeds `cams` to `detector` at their server arrival times, up to `end`.
pub fn replay_alerts(
    cams: &[Cam],
    mut detector: CollisionDetector,
    latency: &LatencyProfile,
    reaction: &ReactionProfile,
    end: SimTime,
) -> Result<Vec<AlertRecord>, AnalysisError> {
    let mut out = Vec::new();
    for cam in cams {
        let at = send_cam(cam, latency);
        if at > end {
            continue;
        }
        for alert in detector.on_cam(*cam, at)? {
            out.push(AlertRecord::new(&alert, send_alert(&alert, latency, reaction)));
        }
    }
    Ok(out)
}

/// Aggregate over all runs for one `(t2c, s2c)` cell and pair kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub kind: PairKind,
    pub t2c: f64,
    pub s2c: f64,
    pub collisions: usize,
    pub not_detected: usize,
    pub too_late: usize,
    pub undetected_or_late_pct: Option<f64>,
    pub alerts: usize,
    pub false_positives: usize,
    pub fp_pct: Option<f64>,
    /// Distinct pairs alerted at least once, summed over runs.
    pub alerted_pairs: usize,
}

fn pct(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

/// Encounters of one CAM that alert under the loosest thresholds.
struct TraceEvent {
    at: SimTime,
    source: EntityId,
    encounters: Vec<Encounter>,
}

fn build_trace(
    cams: &[Cam],
    loose: &DetectorParams,
    latency: &LatencyProfile,
    end: SimTime,
) -> Result<Vec<TraceEvent>, AnalysisError> {
    let mut detector = CollisionDetector::new(*loose)?;
    let mut trace = Vec::new();
    for cam in cams {
        let at = send_cam(cam, latency);
        if at > end {
            continue;
        }
        let encounters: Vec<Encounter> = detector
            .encounters_for(*cam, at)?
            .into_iter()
            .filter(|e| e.detection(loose).is_some())
            .collect();
        if !encounters.is_empty() {
            trace.push(TraceEvent { at, source: cam.sender, encounters });
        }
    }
    Ok(trace)
}

fn trace_alerts(
    trace: &[TraceEvent],
    kind: PairKind,
    params: &DetectorParams,
    latency: &LatencyProfile,
    reaction: &ReactionProfile,
) -> Vec<AlertRecord> {
    let mut limiter = AlertLimiter::new(params.alert_interval());
    let mut out = Vec::new();
    for ev in trace {
        let found: Vec<_> = ev
            .encounters
            .iter()
            .filter(|e| e.kind == kind)
            .filter_map(|e| e.detection(params))
            .collect();
        for alert in emit_alerts(ev.source, &found, ev.at, &mut limiter) {
            out.push(AlertRecord::new(&alert, send_alert(&alert, latency, reaction)));
        }
    }
    out
}

/// `base` with both classes widened to the largest grid values.
fn loosest(base: &DetectorParams, t2c_grid: &[f64], s2c_grid: &[f64]) -> DetectorParams {
    let t = t2c_grid.iter().copied().fold(base.vehicle.t2c.max(base.pedestrian.t2c), f64::max);
    let s = s2c_grid.iter().copied().fold(base.vehicle.s2c.max(base.pedestrian.s2c), f64::max);
    let wide = ClassThresholds { t2c: t, s2c: s };
    DetectorParams { vehicle: wide, pedestrian: wide, ..*base }
}

/// Evaluates every grid cell for both pair kinds. Vehicle-vehicle cells vary
/// the vehicle thresholds, vehicle-pedestrian cells the pedestrian ones;
/// each cell only raises alerts of its own kind.
pub fn threshold_sweep(
    runs: &[RunInput],
    t2c_grid: &[f64],
    s2c_grid: &[f64],
    base: &AnalysisParams,
    latency: &LatencyProfile,
) -> Result<Vec<SweepCell>, AnalysisError> {
    if t2c_grid.is_empty() || s2c_grid.is_empty() {
        return Err(AnalysisError::InvalidInput("threshold grids must be non-empty".into()));
    }
    if t2c_grid.iter().chain(s2c_grid).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(AnalysisError::InvalidInput("thresholds must be positive".into()));
    }
    base.detector.validate()?;
    let period = base.detector.cam_period();
    let loose = loosest(&base.detector, t2c_grid, s2c_grid);
    let prepared: Vec<(Vec<TraceEvent>, TrajectoryIndex)> = runs
        .par_iter()
        .map(|r| {
            let cams = replay_cams(&r.trajectories, period);
            Ok((build_trace(&cams, &loose, latency, r.duration)?, TrajectoryIndex::new(&r.trajectories)))
        })
        .collect::<Result<_, AnalysisError>>()?;

    let cells: Vec<(PairKind, f64, f64)> = PairKind::ALL
        .iter()
        .flat_map(|&k| t2c_grid.iter().flat_map(move |&t| s2c_grid.iter().map(move |&s| (k, t, s))))
        .collect();

    cells
        .par_iter()
        .map(|&(kind, t2c, s2c)| {
            let params = AnalysisParams { detector: cell_params(&base.detector, kind, t2c, s2c), ..*base };
            let mut cell = SweepCell {
                kind,
                t2c,
                s2c,
                collisions: 0,
                not_detected: 0,
                too_late: 0,
                undetected_or_late_pct: None,
                alerts: 0,
                false_positives: 0,
                fp_pct: None,
                alerted_pairs: 0,
            };
            for (run, (trace, traj)) in runs.iter().zip(&prepared) {
                let alerts = trace_alerts(trace, kind, &params.detector, latency, &params.reaction);
                cell_for_run(&mut cell, run, &alerts, traj, &params)?;
            }
            cell.undetected_or_late_pct = pct(cell.not_detected + cell.too_late, cell.collisions);
            cell.fp_pct = pct(cell.false_positives, cell.alerts);
            Ok(cell)
        })
        .collect()
}

fn cell_for_run(
    cell: &mut SweepCell,
    run: &RunInput,
    alerts: &[AlertRecord],
    traj: &TrajectoryIndex,
    params: &AnalysisParams,
) -> Result<(), AnalysisError> {
    let collisions: Vec<CollisionRecord> =
        run.collisions.iter().filter(|c| c.kind == cell.kind).copied().collect();
    let classified = classify_collisions(&collisions, alerts, params, traj)?;
    let classes = classify_alerts(alerts, &classified, params);
    cell.collisions += classified.len();
    cell.not_detected += classified.iter().filter(|c| c.outcome == OutcomeClass::NotDetected).count();
    cell.too_late += classified.iter().filter(|c| c.outcome == OutcomeClass::DetectedTooLate).count();
    cell.alerts += alerts.len();
    cell.false_positives += classes.iter().filter(|c| **c == AlertClass::FalsePositive).count();
    cell.alerted_pairs += alerts.iter().map(|a| a.pair()).collect::<HashSet<_>>().len();
    Ok(())
}

/// Detector parameters of a cell, for callers that want to re-run it.
pub fn cell_params(base: &DetectorParams, kind: PairKind, t2c: f64, s2c: f64) -> DetectorParams {
    let mut p = *base;
    let th = ClassThresholds { t2c, s2c };
    match kind {
        PairKind::VehVeh => p.vehicle = th,
        PairKind::VehPed => p.pedestrian = th,
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::{generate_arrivals, ArrivalConfig, Scenario, World};
    use crate::netmodel::{run_coupled, LoopOptions};

    #[test]
    fn trace_matches_direct_replay() {
        let sc = Scenario::default();
        let arrivals = generate_arrivals(&ArrivalConfig { lambda_v: 0.7, lambda_p: 0.2, seed: 4 }, 60.0);
        let world = World::new(sc.clone(), arrivals).unwrap();
        let base = DetectorParams::default();
        let opts = LoopOptions { alerts_enabled: false, ..LoopOptions::default() };
        let end = SimTime::from_secs(60.0);
        let logs = run_coupled(world, CollisionDetector::new(base).unwrap(), &opts, end).unwrap();
        let cams = replay_cams(&logs.trajectories, base.cam_period());
        let t2c = [2.0, 5.0, 10.0];
        let s2c = [1.0, 3.0, 8.0];
        let latency = LatencyProfile::CLOUD;
        let reaction = ReactionProfile::HUMAN_DRIVER;
        let trace = build_trace(&cams, &loosest(&base, &t2c, &s2c), &latency, end).unwrap();
        let mut total = 0;
        for kind in PairKind::ALL {
            for &t in &t2c {
                for &s in &s2c {
                    let p = cell_params(&base, kind, t, s);
                    let direct = CollisionDetector::new(p).unwrap().only_kind(kind);
                    let expected = replay_alerts(&cams, direct, &latency, &reaction, end).unwrap();
                    assert_eq!(trace_alerts(&trace, kind, &p, &latency, &reaction), expected, "{kind} {t} {s}");
                    total += expected.len();
                }
            }
        }
        assert!(total > 0);
    }
}
