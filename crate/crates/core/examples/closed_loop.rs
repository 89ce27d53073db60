//! A non-yielding car heads for a vehicle stalled in the junction. Without
//! alerts it crashes; with alerts delivered from a Metro server to an
//! automated vehicle it brakes in time.
//!
//!     cargo run --release --example closed_loop

use cv2i::analysis::{analyze_run, AnalysisParams};
use cv2i::detector::{CollisionDetector, DetectorParams};
use cv2i::mobility::fixtures::stalled_in_junction;
use cv2i::mobility::Scenario;
use cv2i::netmodel::{run_coupled, LatencyProfile, LoopOptions, ReactionProfile};
use cv2i::time::SimTime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::default();
    let params = DetectorParams::default();
    for (label, alerts_enabled) in [("alerts off", false), ("alerts on", true)] {
        let f = stalled_in_junction(&scenario, 150.0, 13.89)?;
        let opts = LoopOptions {
            latency: LatencyProfile::METRO,
            reaction: ReactionProfile::AUTOMATED,
            alerts_enabled,
            closed_loop: true,
            ..LoopOptions::default()
        };
        let logs = run_coupled(f.world, CollisionDetector::new(params)?, &opts, SimTime::from_secs(20.0))?;
        println!("{label}: {} alerts, {} collisions (unbraked impact at {:.2} s)", logs.alerts.len(), logs.collisions.len(), f.impact_time);
        if let Some(first) = logs.alerts.first() {
            let t_fa = f.impact_time - first.issued_at.as_secs();
            let t_d = first.delivery_delay().as_secs();
            println!("  first alert at {} s: T_FA {t_fa:.2} s, T_D {t_d:.3} s, T_A {:.2} s vs T_B {:.2} s", first.issued_at, t_fa - t_d, 13.89 / scenario.vehicle.max_decel);
        }
        let last = logs.trajectories.iter().filter(|r| r.id == f.moving).last().unwrap();
        println!("  moving car ends at x = {:.1} m, speed {:.2} m/s", last.x, last.speed);
        let a = analyze_run(&logs.trajectories, &logs.collisions, &logs.alerts, &AnalysisParams::new(params, opts.reaction, &scenario), &scenario)?;
        for c in &a.collisions {
            println!("  collision at {} s: {:?}", c.time, c.outcome);
        }
    }
    Ok(())
}
