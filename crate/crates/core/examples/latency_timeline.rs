//! Reaction budget of one alert under each server placement and driver
//! type: what is left to the driver once the alert has travelled.
//!
//!     cargo run --release --example latency_timeline -- [t_fa] [speed]

use cv2i::analysis::ReactionBudget;
use cv2i::detector::Alert;
use cv2i::entity::{EntityId, PairId, PairKind};
use cv2i::netmodel::{send_alert, LatencyProfile, ReactionProfile};
use cv2i::time::SimTime;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let t_fa: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4.0);
    let speed: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(13.89);
    let alert = Alert {
        issued_at: SimTime::from_secs(100.0),
        pair: PairId::new(EntityId(1), EntityId(2)),
        kind: PairKind::VehVeh,
        t_star: t_fa,
        d_star: 0.0,
    };
    let t_b = speed / 4.5;
    println!("first alert {t_fa} s before impact, braking from {speed} m/s takes {t_b:.3} s");
    for (lname, l) in [("Metro", LatencyProfile::METRO), ("Cloud", LatencyProfile::CLOUD)] {
        for (rname, r) in [("HD", ReactionProfile::HUMAN_DRIVER), ("AV", ReactionProfile::AUTOMATED)] {
            let d = send_alert(&alert, &l, &r);
            let t_d = (d.hmi_time - alert.issued_at).as_secs();
            let b = ReactionBudget::new(t_fa, t_d, r.human_reaction.as_secs(), t_b);
            println!(
                "{lname}-{rname}: T_D {:.3} s, T_H {:.1} s, T_A {:.3} s -> {}",
                b.t_d,
                b.t_h,
                b.t_a,
                if b.too_late() { "too late" } else { "in time" }
            );
        }
    }
    Ok(())
}
