//! Runs a seeded batch under the four latency/reaction profiles and prints
//! the pooled outcome and alert shares.
//!
//!     cargo run --release --example batch_summary -- [seeds] [duration]

use cv2i::analysis::{analyze_run, summarize, AnalysisParams};
use cv2i::detector::{CollisionDetector, DetectorParams};
use cv2i::entity::PairKind;
use cv2i::mobility::{generate_arrivals, ArrivalConfig, Scenario, World};
use cv2i::netmodel::{run_coupled, LatencyProfile, LoopOptions, ReactionProfile};
use cv2i::time::SimTime;
use rayon::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10);
    let duration: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(300.0);
    let scenario = Scenario::default();
    let detector = DetectorParams::default();

    for (lname, latency) in [("metro", LatencyProfile::METRO), ("cloud", LatencyProfile::CLOUD)] {
        for (rname, reaction) in [("hd", ReactionProfile::HUMAN_DRIVER), ("av", ReactionProfile::AUTOMATED)] {
            let opts = LoopOptions { latency, reaction, ..LoopOptions::default() };
            let params = AnalysisParams::new(detector, reaction, &scenario);
            let runs = (0..seeds)
                .into_par_iter()
                .map(|seed| {
                    let arrivals = generate_arrivals(&ArrivalConfig { seed, ..ArrivalConfig::default() }, duration);
                    let world = World::new(scenario.clone(), arrivals)?;
                    let logs = run_coupled(world, CollisionDetector::new(detector)?, &opts, SimTime::from_secs(duration))?;
                    Ok(analyze_run(&logs.trajectories, &logs.collisions, &logs.alerts, &params, &scenario)?)
                })
                .collect::<Result<Vec<_>, Box<dyn std::error::Error + Send + Sync>>>()
                .map_err(|e| e.to_string())?;
            let s = summarize(&format!("{lname}-{rname}"), &runs, latency, reaction);
            println!("== {} ({} runs, {} alerts)", s.label, s.runs, s.total_alerts);
            for kind in PairKind::ALL {
                let k = s.kind(kind);
                println!(
                    "  {:8} collisions {:4} in-time {:4} late {:4} missed {:4} | alerts {:5} fp {:5} ({:.1}%) | fp pairs {} within 5 m {:.1}% uncoverable {}",
                    kind.label(),
                    k.collisions,
                    k.detected_in_time,
                    k.detected_too_late,
                    k.not_detected,
                    k.alerts,
                    k.false_positives,
                    k.pct_false_positive.unwrap_or(f64::NAN),
                    k.fp_pairs,
                    k.pct_fp_pairs_within_5m.unwrap_or(f64::NAN),
                    k.fp_uncoverable,
                );
            }
        }
    }
    Ok(())
}
