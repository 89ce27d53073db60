//! How close did falsely alerted pairs actually get? Prints the distance
//! distribution per pair kind for one coupled run.
//!
//!     cargo run --release --example fp_distances -- [seed]

use cv2i::analysis::{analyze_run, cdf, AnalysisParams, Quantiles};
use cv2i::detector::{CollisionDetector, DetectorParams};
use cv2i::entity::PairKind;
use cv2i::mobility::{generate_arrivals, ArrivalConfig, Scenario, World};
use cv2i::netmodel::{run_coupled, LoopOptions};
use cv2i::time::SimTime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let scenario = Scenario::default();
    let detector = DetectorParams::default();
    let opts = LoopOptions::default();
    let world = World::new(scenario.clone(), generate_arrivals(&ArrivalConfig { seed, ..ArrivalConfig::default() }, 300.0))?;
    let logs = run_coupled(world, CollisionDetector::new(detector)?, &opts, SimTime::from_secs(300.0))?;
    let params = AnalysisParams::new(detector, opts.reaction, &scenario);
    let run = analyze_run(&logs.trajectories, &logs.collisions, &logs.alerts, &params, &scenario)?;

    for kind in PairKind::ALL {
        let d: Vec<f64> = run.fp.pairs.iter().filter(|p| p.kind == kind).map(|p| p.min_distance).collect();
        let Some(q) = Quantiles::of(&d) else {
            println!("{kind}: no false-positive pairs");
            continue;
        };
        println!(
            "{kind}: {} pairs, min {:.2} m, quartiles {:.2} / {:.2} / {:.2} m, max {:.2} m",
            d.len(),
            q.min,
            q.p25,
            q.median,
            q.p75,
            q.max
        );
        let curve = cdf(&d);
        for limit in [1.0, 2.5, 5.0, 10.0, 20.0] {
            let share = curve.iter().take_while(|p| p.distance <= limit).last().map_or(0.0, |p| p.fraction);
            println!("  within {limit:>4} m: {:>5.1}%", 100.0 * share);
        }
    }
    println!("uncoverable pairs: {}", run.fp.uncoverable.len());
    Ok(())
}
