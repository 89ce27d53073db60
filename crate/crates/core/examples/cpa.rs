//! Closest point of approach for a few textbook encounters, constant
//! velocity versus braking-aware.
//!
//!     cargo run --release --example cpa

use cv2i::kinematics::{closest_approach, closest_approach_accel, KinematicState, Vec2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        (
            "head-on, 100 m apart at 10 m/s each",
            KinematicState::new(Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)),
            KinematicState::new(Vec2::new(100.0, 0.0), Vec2::new(-10.0, 0.0)),
        ),
        (
            "perpendicular, offset by 10 m",
            KinematicState::new(Vec2::new(-50.0, 0.0), Vec2::new(10.0, 0.0)),
            KinematicState::new(Vec2::new(10.0, -50.0), Vec2::new(0.0, 10.0)),
        ),
        (
            "same lane, same speed",
            KinematicState::new(Vec2::new(0.0, 0.0), Vec2::new(13.89, 0.0)),
            KinematicState::new(Vec2::new(20.0, 0.0), Vec2::new(13.89, 0.0)),
        ),
        (
            "already separating",
            KinematicState::new(Vec2::new(0.0, 0.0), Vec2::new(-5.0, 0.0)),
            KinematicState::new(Vec2::new(10.0, 0.0), Vec2::new(5.0, 0.0)),
        ),
    ];
    for (label, a, b) in cases {
        println!("{label}: {:?}", closest_approach(&a, &b));
    }

    // A follower closing on a leader that brakes to a stop.
    let leader = KinematicState::new(Vec2::new(30.0, 0.0), Vec2::new(10.0, 0.0))
        .with_acceleration(Vec2::new(-4.5, 0.0));
    let follower = KinematicState::new(Vec2::ZERO, Vec2::new(10.0, 0.0));
    println!("braking leader, constant velocity: {:?}", closest_approach(&follower, &leader));
    println!(
        "braking leader, with deceleration: {:?}",
        closest_approach_accel(&follower, &leader, 10.0, 0.01)?
    );
    Ok(())
}
