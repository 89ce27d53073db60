//! Mean number of vehicles in the system against the arrival rate, with
//! and without pedestrians, and where growth stops being linear.
//!
//!     cargo run --release --example stability_sweep -- [seeds] [duration]

use cv2i::mobility::{find_knee, stability_sweep, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let duration: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(300.0);
    let lambda_v: Vec<f64> = (0..=16).map(|k| k as f64 * 0.05).collect();
    let lambda_p = [0.0, 0.2];
    let seed_list: Vec<u64> = (0..seeds).collect();
    let points = stability_sweep(&Scenario::default(), &lambda_v, &lambda_p, duration, &seed_list)?;
    println!("{:>6} {:>14} {:>14}", "λv", "λp=0", "λp=0.2");
    for lv in &lambda_v {
        let at = |lp: f64| points.iter().find(|p| p.lambda_v == *lv && p.lambda_p == lp).unwrap();
        let (a, b) = (at(0.0), at(0.2));
        println!("{lv:>6.2} {:>8.1} ±{:<4.1} {:>8.1} ±{:<4.1}", a.mean_vehicles, a.ci95, b.mean_vehicles, b.ci95);
    }
    for lp in lambda_p {
        let pts: Vec<_> = points.iter().filter(|p| p.lambda_p == lp).copied().collect();
        match find_knee(&pts, 0.3, 0.1) {
            Some(k) => println!("λp={lp}: knee at λv={k}"),
            None => println!("λp={lp}: linear over the whole grid"),
        }
    }
    Ok(())
}
