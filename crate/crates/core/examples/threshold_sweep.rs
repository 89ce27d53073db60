//! Replays open-loop runs through detectors with other thresholds and
//! prints the vehicle-vehicle heatmaps.
//!
//!     cargo run --release --example threshold_sweep -- [seeds] [duration]

use cv2i::analysis::{threshold_sweep, AnalysisParams, RunInput};
use cv2i::detector::{CollisionDetector, DetectorParams};
use cv2i::entity::PairKind;
use cv2i::mobility::{generate_arrivals, ArrivalConfig, Scenario, World};
use cv2i::netmodel::{run_coupled, LatencyProfile, LoopOptions, ReactionProfile};
use cv2i::time::SimTime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let duration: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(300.0);
    let scenario = Scenario::default();
    let detector = DetectorParams::default();
    let opts = LoopOptions { alerts_enabled: false, ..LoopOptions::default() };

    let mut runs = Vec::new();
    for seed in 0..seeds {
        let arrivals = generate_arrivals(&ArrivalConfig { seed, ..ArrivalConfig::default() }, duration);
        let world = World::new(scenario.clone(), arrivals)?;
        let logs = run_coupled(world, CollisionDetector::new(detector)?, &opts, SimTime::from_secs(duration))?;
        runs.push(RunInput { trajectories: logs.trajectories, collisions: logs.collisions, duration: SimTime::from_secs(duration) });
    }
    let t2c: Vec<f64> = (1..=10).map(f64::from).collect();
    let s2c: Vec<f64> = (1..=8).map(f64::from).collect();
    let base = AnalysisParams::new(detector, ReactionProfile::HUMAN_DRIVER, &scenario);
    let cells = threshold_sweep(&runs, &t2c, &s2c, &base, &LatencyProfile::METRO)?;

    for (title, get) in [
        ("undetected or late %", (|c: &cv2i::analysis::SweepCell| c.undetected_or_late_pct) as fn(&_) -> _),
        ("false positive %", |c: &cv2i::analysis::SweepCell| c.fp_pct),
    ] {
        println!("VehVeh {title} (rows t2c, columns s2c)");
        print!("{:>5}", "");
        for s in &s2c {
            print!("{s:>7}");
        }
        println!();
        for t in &t2c {
            print!("{t:>5}");
            for s in &s2c {
                let c = cells.iter().find(|c| c.kind == PairKind::VehVeh && c.t2c == *t && c.s2c == *s).unwrap();
                match get(c) {
                    Some(v) => print!("{v:>7.1}"),
                    None => print!("{:>7}", "-"),
                }
            }
            println!();
        }
    }
    Ok(())
}
