use serde::{Deserialize, Serialize};

use crate::entity::PairKind;
use crate::netmodel::{LatencyProfile, ReactionProfile};

use super::{cdf, AlertClass, OutcomeClass, RunAnalysis};

/// Distance below which a false-positive pair counts as a near miss.
pub const NEAR_MISS: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub max: f64,
}

impl Quantiles {
    /// Nearest-rank quantiles; `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| v[((p * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        Some(Quantiles {
            min: v[0],
            p25: q(0.25),
            median: q(0.5),
            p75: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Percentages are `None` when their denominator is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindSummary {
    pub kind: PairKind,
    pub collisions: usize,
    pub detected_in_time: usize,
    pub detected_too_late: usize,
    pub not_detected: usize,
    pub pct_in_time: Option<f64>,
    pub pct_too_late: Option<f64>,
    pub pct_not_detected: Option<f64>,
    pub alerts: usize,
    pub true_timely: usize,
    pub true_late: usize,
    pub false_positives: usize,
    pub pct_false_positive: Option<f64>,
    pub fp_pairs: usize,
    pub fp_uncoverable: usize,
    pub pct_fp_pairs_within_5m: Option<f64>,
    pub fp_distance: Option<Quantiles>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub label: String,
    pub latency: LatencyProfile,
    pub reaction: ReactionProfile,
    pub runs: usize,
    pub total_alerts: usize,
    pub kinds: Vec<KindSummary>,
}

impl Summary {
    pub fn kind(&self, kind: PairKind) -> &KindSummary {
        self.kinds.iter().find(|k| k.kind == kind).expect("both kinds are always present")
    }
}

fn pct(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

/// Pools the classified logs of several runs into one report.
pub fn summarize(
    label: &str,
    runs: &[RunAnalysis],
    latency: LatencyProfile,
    reaction: ReactionProfile,
) -> Summary {
    let kinds = PairKind::ALL
        .iter()
        .map(|&kind| {
            let cols = runs.iter().flat_map(|r| r.collisions.iter()).filter(|c| c.kind == kind);
            let (mut in_time, mut late, mut missed) = (0, 0, 0);
            for c in cols {
                match c.outcome {
                    OutcomeClass::DetectedInTime => in_time += 1,
                    OutcomeClass::DetectedTooLate => late += 1,
                    OutcomeClass::NotDetected => missed += 1,
                }
            }
            let (mut timely, mut tlate, mut fp) = (0, 0, 0);
            for r in runs {
                for (a, c) in r.alerts.iter().zip(&r.alert_classes) {
                    if a.kind != kind {
                        continue;
                    }
                    match c {
                        AlertClass::TrueTimely => timely += 1,
                        AlertClass::TrueLate => tlate += 1,
                        AlertClass::FalsePositive => fp += 1,
                    }
                }
            }
            let distances: Vec<f64> = runs
                .iter()
                .flat_map(|r| r.fp.pairs.iter())
                .filter(|p| p.kind == kind)
                .map(|p| p.min_distance)
                .collect();
            let uncoverable: usize = runs
                .iter()
                .map(|r| {
                    r.fp.uncoverable
                        .iter()
                        .filter(|p| {
                            r.alerts.iter().any(|a| a.pair() == **p && a.kind == kind)
                        })
                        .count()
                })
                .sum();
            let collisions = in_time + late + missed;
            let alerts = timely + tlate + fp;
            KindSummary {
                kind,
                collisions,
                detected_in_time: in_time,
                detected_too_late: late,
                not_detected: missed,
                pct_in_time: pct(in_time, collisions),
                pct_too_late: pct(late, collisions),
                pct_not_detected: pct(missed, collisions),
                alerts,
                true_timely: timely,
                true_late: tlate,
                false_positives: fp,
                pct_false_positive: pct(fp, alerts),
                fp_pairs: distances.len(),
                fp_uncoverable: uncoverable,
                pct_fp_pairs_within_5m: pct(
                    distances.iter().filter(|d| **d <= NEAR_MISS).count(),
                    distances.len(),
                ),
                fp_distance: Quantiles::of(&distances),
            }
        })
        .collect::<Vec<_>>();
    Summary {
        label: label.to_string(),
        latency,
        reaction,
        runs: runs.len(),
        total_alerts: kinds.iter().map(|k| k.alerts).sum(),
        kinds,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub label: String,
    pub kind: PairKind,
    pub outcome: OutcomeClass,
    pub count: usize,
    pub pct: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlertClassRow {
    pub label: String,
    pub kind: PairKind,
    pub class: AlertClass,
    pub count: usize,
    pub pct: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub label: String,
    pub kind: PairKind,
    pub distance: f64,
    pub fraction: f64,
}

impl Summary {
    pub fn outcome_rows(&self) -> Vec<OutcomeRow> {
        self.kinds
            .iter()
            .flat_map(|k| {
                [
                    (OutcomeClass::DetectedInTime, k.detected_in_time, k.pct_in_time),
                    (OutcomeClass::DetectedTooLate, k.detected_too_late, k.pct_too_late),
                    (OutcomeClass::NotDetected, k.not_detected, k.pct_not_detected),
                ]
                .map(|(outcome, count, pct)| OutcomeRow {
                    label: self.label.clone(),
                    kind: k.kind,
                    outcome,
                    count,
                    pct,
                })
            })
            .collect()
    }

    pub fn alert_rows(&self) -> Vec<AlertClassRow> {
        self.kinds
            .iter()
            .flat_map(|k| {
                [
                    (AlertClass::TrueTimely, k.true_timely),
                    (AlertClass::TrueLate, k.true_late),
                    (AlertClass::FalsePositive, k.false_positives),
                ]
                .map(|(class, count)| AlertClassRow {
                    label: self.label.clone(),
                    kind: k.kind,
                    class,
                    count,
                    pct: pct(count, k.alerts),
                })
            })
            .collect()
    }
}

/// Pooled false-positive distance CDF per pair kind.
pub fn cdf_rows(label: &str, runs: &[RunAnalysis]) -> Vec<CdfRow> {
    PairKind::ALL
        .iter()
        .flat_map(|&kind| {
            let d: Vec<f64> = runs
                .iter()
                .flat_map(|r| r.fp.pairs.iter())
                .filter(|p| p.kind == kind)
                .map(|p| p.min_distance)
                .collect();
            cdf(&d).into_iter().map(move |p| CdfRow {
                label: label.to_string(),
                kind,
                distance: p.distance,
                fraction: p.fraction,
            })
        })
        .collect()
}
