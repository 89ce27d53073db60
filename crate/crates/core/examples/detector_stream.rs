//! Feeds the CAM streams of two cars converging on a junction to the
//! server-side detector and prints the alerts it raises.
//!
//!     cargo run --release --example detector_stream

use cv2i::detector::{Cam, CollisionDetector, DetectorParams};
use cv2i::entity::{EntityClass, EntityId};
use cv2i::kinematics::{KinematicState, Vec2};
use cv2i::netmodel::{send_alert, send_cam, LatencyProfile, ReactionProfile};
use cv2i::time::SimTime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut detector = CollisionDetector::new(DetectorParams::default())?;
    let latency = LatencyProfile::METRO;
    let v = 13.89;
    // Both 180 m from the crossing point, one eastbound, one northbound.
    for k in 0..150 {
        let t = k as f64 * 0.1;
        for (id, pos, vel) in [
            (1, Vec2::new(-180.0 + v * t, 0.0), Vec2::new(v, 0.0)),
            (2, Vec2::new(0.0, -180.0 + v * t), Vec2::new(0.0, v)),
        ] {
            let cam = Cam {
                sender: EntityId(id),
                class: EntityClass::Vehicle,
                generated_at: SimTime::from_secs(t),
                state: KinematicState::new(pos, vel),
            };
            let at = send_cam(&cam, &latency);
            for alert in detector.on_cam(cam, at)? {
                let d = send_alert(&alert, &latency, &ReactionProfile::HUMAN_DRIVER);
                println!(
                    "t={} alert {:?} t*={:.2} s d*={:.2} m, shown at {} s, driver acts at {} s",
                    alert.issued_at, alert.recipients(), alert.t_star, alert.d_star, d.hmi_time, d.action_time
                );
            }
        }
    }
    println!("impact would be at {:.2} s", 180.0 / v);
    Ok(())
}
