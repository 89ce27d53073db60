//! Closest point of approach between two moving entities.
//!
//! The relative-motion quadratic `D(t) = |Δx + Δv·t|²` is minimized in closed
//! form for constant velocities. A numeric variant handles constant
//! accelerations with speeds clamped at zero (braking never reverses).

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector pointing along `angle` (radians, counter-clockwise from +x).
    pub fn from_angle(angle: f64) -> Self {
        Vec2::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub acceleration: Vec2,
}

impl KinematicState {
    /// State with zero acceleration.
    pub fn new(position: Vec2, velocity: Vec2) -> Self {
        KinematicState {
            position,
            velocity,
            acceleration: Vec2::ZERO,
        }
    }

    pub fn with_acceleration(mut self, acceleration: Vec2) -> Self {
        self.acceleration = acceleration;
        self
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.velocity.is_finite() && self.acceleration.is_finite()
    }

    /// Constant-velocity extrapolation by `dt` seconds.
    pub fn advanced(&self, dt: f64) -> KinematicState {
        KinematicState {
            position: self.position + self.velocity * dt,
            ..*self
        }
    }

    /// Position after `t` seconds under constant acceleration, holding still
    /// once the velocity component along the initial heading reaches zero.
    pub fn position_braking_clamped(&self, t: f64) -> Vec2 {
        let v = self.velocity;
        let a = self.acceleration;
        let along = v.dot(a);
        let t_eff = if along < 0.0 {
            t.min(-v.norm_sq() / along)
        } else {
            t
        };
        self.position + v * t_eff + a * (0.5 * t_eff * t_eff)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CpaResult {
    /// Minimum distance `d_star` is reached `t_star` seconds from now.
    Approaching { t_star: f64, d_star: f64 },
    /// The minimum lies in the past; the pair is separating.
    Receding,
    /// No relative motion; the distance stays constant.
    Parallel { current_distance: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
}

/// `|d(t)|²` under constant velocities. Accelerations are ignored.
pub fn squared_distance_at(a: &KinematicState, b: &KinematicState, t: f64) -> f64 {
    let dp = a.position - b.position;
    let dv = a.velocity - b.velocity;
    (dp + dv * t).norm_sq()
}

/// Closed-form closest approach under constant velocities.
pub fn closest_approach(a: &KinematicState, b: &KinematicState) -> CpaResult {
    let dp = a.position - b.position;
    let dv = a.velocity - b.velocity;
    let closing = dv.norm_sq();
    if closing == 0.0 {
        return CpaResult::Parallel {
            current_distance: dp.norm(),
        };
    }
    let t_star = -dp.dot(dv) / closing;
    if t_star < 0.0 {
        return CpaResult::Receding;
    }
    let d_sq = (dp + dv * t_star).norm_sq();
    CpaResult::Approaching {
        t_star,
        d_star: d_sq.max(0.0).sqrt(),
    }
}

/// Closest approach under constant accelerations with zero-speed clamping.
///
/// Samples the distance on a `step` grid over `[0, horizon]`, then refines the
/// bracketing interval by ternary search.
pub fn closest_approach_accel(
    a: &KinematicState,
    b: &KinematicState,
    horizon: f64,
    step: f64,
) -> Result<CpaResult, KinematicsError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(KinematicsError::InvalidHorizon(horizon));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(KinematicsError::InvalidStep(step));
    }
    let rel_v = a.velocity - b.velocity;
    let rel_a = a.acceleration - b.acceleration;
    let dist = |t: f64| (a.position_braking_clamped(t) - b.position_braking_clamped(t)).norm();

    if rel_v.norm_sq() == 0.0 && rel_a.norm_sq() == 0.0 {
        return Ok(CpaResult::Parallel {
            current_distance: dist(0.0),
        });
    }

    let n = (horizon / step).ceil() as usize;
    let mut best_i = 0usize;
    let mut best_d = dist(0.0);
    for i in 1..=n {
        let t = (i as f64 * step).min(horizon);
        let d = dist(t);
        if d < best_d {
            best_d = d;
            best_i = i;
        }
    }

    if best_i == 0 && dist(step.min(horizon)) > best_d {
        // Distance grows from the start. Check the sub-step interval before
        // declaring the pair receding.
        let (t, d) = ternary_min(&dist, 0.0, step.min(horizon));
        if t <= f64::EPSILON * 16.0 {
            return Ok(CpaResult::Receding);
        }
        return Ok(CpaResult::Approaching {
            t_star: t,
            d_star: d,
        });
    }

    let lo = (best_i as f64 - 1.0).max(0.0) * step;
    let hi = ((best_i as f64 + 1.0) * step).min(horizon);
    let (t, d) = ternary_min(&dist, lo, hi);
    let (t_star, d_star) = if d <= best_d {
        (t, d)
    } else {
        ((best_i as f64 * step).min(horizon), best_d)
    };
    Ok(CpaResult::Approaching { t_star, d_star })
}

fn ternary_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn st(px: f64, py: f64, vx: f64, vy: f64) -> KinematicState {
        KinematicState::new(Vec2::new(px, py), Vec2::new(vx, vy))
    }

    /// Brute-force minimum of the distance over `[0, horizon]` on a 1 ms grid.
    fn sampled_min(a: &KinematicState, b: &KinematicState, horizon: f64) -> (f64, f64) {
        let n = (horizon * 1000.0).round() as usize;
        let pos_a = |t: f64| a.position + a.velocity * t;
        let pos_b = |t: f64| b.position + b.velocity * t;
        (0..=n)
            .map(|i| {
                let t = i as f64 * 1e-3;
                (t, (pos_a(t) - pos_b(t)).norm())
            })
            .fold((0.0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
    }

    #[test]
    fn squared_distance_examples() {
        let origin = st(0.0, 0.0, 0.0, 0.0);
        assert_eq!(squared_distance_at(&origin, &st(3.0, 4.0, 0.0, 0.0), 7.0), 25.0);
        let a = st(0.0, 0.0, 10.0, 0.0);
        assert_eq!(squared_distance_at(&a, &st(100.0, 0.0, -10.0, 0.0), 5.0), 0.0);
        // Direct evaluation: a at (55, 0), b at (60, 5) after 5.5 s.
        let b = st(60.0, -50.0, 0.0, 10.0);
        let d2 = squared_distance_at(&a, &b, 5.5);
        assert!((d2 - 50.0).abs() < 1e-9, "{d2}");
        let pa = Vec2::new(55.0, 0.0);
        let pb = Vec2::new(60.0, 5.0);
        assert!(((pa - pb).norm_sq() - d2).abs() < 1e-9);
    }

    #[test]
    fn head_on_pair_meets_at_midpoint() {
        let r = closest_approach(&st(0.0, 0.0, 10.0, 0.0), &st(100.0, 0.0, -10.0, 0.0));
        assert_eq!(r, CpaResult::Approaching { t_star: 5.0, d_star: 0.0 });
    }

    #[test]
    fn separating_pair_is_receding() {
        let r = closest_approach(&st(0.0, 0.0, 10.0, 0.0), &st(-100.0, 0.0, -10.0, 0.0));
        assert_eq!(r, CpaResult::Receding);
    }

    #[test]
    fn crossing_pair_matches_sampled_minimum() {
        let a = st(0.0, 0.0, 10.0, 0.0);
        let b = st(60.0, -50.0, 0.0, 10.0);
        let (t_ref, d_ref) = sampled_min(&a, &b, 20.0);
        let CpaResult::Approaching { t_star, d_star } = closest_approach(&a, &b) else {
            panic!("expected approaching");
        };
        assert!((t_star - 5.5).abs() < 1e-12);
        assert!((d_star - 50f64.sqrt()).abs() < 1e-12);
        assert!((d_star - d_ref).abs() < 1e-3);
        assert!((t_star - t_ref).abs() < 1e-3);
    }

    #[test]
    fn equal_velocities_are_parallel() {
        let r = closest_approach(&st(0.0, 0.0, 3.0, 1.0), &st(3.0, 4.0, 3.0, 1.0));
        assert_eq!(r, CpaResult::Parallel { current_distance: 5.0 });
    }

    #[test]
    fn t_star_zero_counts_as_approaching() {
        // Already at closest approach: moving perpendicular to the separation.
        let r = closest_approach(&st(0.0, 0.0, 0.0, 1.0), &st(10.0, 0.0, 0.0, -1.0));
        assert_eq!(r, CpaResult::Approaching { t_star: 0.0, d_star: 10.0 });
    }

    #[test]
    fn accel_variant_reduces_to_constant_velocity() {
        let a = st(0.0, 0.0, 10.0, 0.0);
        let b = st(100.0, 0.0, -10.0, 0.0);
        let CpaResult::Approaching { t_star, d_star } =
            closest_approach_accel(&a, &b, 20.0, 0.01).unwrap()
        else {
            panic!()
        };
        assert!((t_star - 5.0).abs() < 1e-3);
        assert!(d_star < 1e-6);

        let b = st(60.0, -50.0, 0.0, 10.0);
        let CpaResult::Approaching { t_star, d_star } =
            closest_approach_accel(&a, &b, 20.0, 0.01).unwrap()
        else {
            panic!()
        };
        assert!((d_star - 50f64.sqrt()).abs() < 1e-6);
        assert!((t_star - 5.5).abs() < 1e-3);
    }

    #[test]
    fn braking_vehicle_stops_short_and_never_reverses() {
        // v²/2a = 100/4 = 25 m stopping distance, reached at t = 5 s.
        let a = st(0.0, 0.0, 10.0, 0.0).with_acceleration(Vec2::new(-2.0, 0.0));
        assert_eq!(a.position_braking_clamped(5.0), Vec2::new(25.0, 0.0));
        assert_eq!(a.position_braking_clamped(30.0), Vec2::new(25.0, 0.0));
        let b = st(100.0, 0.0, 0.0, 0.0);
        let CpaResult::Approaching { t_star, d_star } =
            closest_approach_accel(&a, &b, 20.0, 0.01).unwrap()
        else {
            panic!()
        };
        assert!((d_star - 75.0).abs() < 1e-6, "{d_star}");
        assert!(t_star >= 5.0 - 1e-3);
    }

    #[test]
    fn accel_variant_rejects_bad_grid() {
        let a = st(0.0, 0.0, 1.0, 0.0);
        assert_eq!(
            closest_approach_accel(&a, &a, 0.0, 0.1),
            Err(KinematicsError::InvalidHorizon(0.0))
        );
        assert_eq!(
            closest_approach_accel(&a, &a, 1.0, -0.1),
            Err(KinematicsError::InvalidStep(-0.1))
        );
    }

    fn arb_state() -> impl Strategy<Value = KinematicState> {
        (-200.0..200.0f64, -200.0..200.0f64, 0.0..20.0f64, 0.0..std::f64::consts::TAU)
            .prop_map(|(x, y, s, h)| KinematicState::new(Vec2::new(x, y), Vec2::from_angle(h) * s))
    }

    proptest! {
        #[test]
        fn symmetric_in_arguments(a in arb_state(), b in arb_state()) {
            prop_assert_eq!(closest_approach(&a, &b), closest_approach(&b, &a));
        }

        #[test]
        fn no_sampled_time_beats_d_star(a in arb_state(), b in arb_state(), t in 0.0..120.0f64) {
            if let CpaResult::Approaching { d_star, .. } = closest_approach(&a, &b) {
                prop_assert!(squared_distance_at(&a, &b, t) >= d_star * d_star - 1e-9);
            }
        }

        #[test]
        fn rigid_motion_invariant(
            a in arb_state(),
            b in arb_state(),
            angle in 0.0..std::f64::consts::TAU,
            tx in -1000.0..1000.0f64,
            ty in -1000.0..1000.0f64,
        ) {
            let shift = Vec2::new(tx, ty);
            let xf = |s: &KinematicState| KinematicState::new(
                s.position.rotate(angle) + shift,
                s.velocity.rotate(angle),
            );
            match (closest_approach(&a, &b), closest_approach(&xf(&a), &xf(&b))) {
                (
                    CpaResult::Approaching { t_star: t1, d_star: d1 },
                    CpaResult::Approaching { t_star: t2, d_star: d2 },
                ) => {
                    prop_assert!((t1 - t2).abs() <= 1e-9 * t1.abs().max(1.0));
                    // Rounding in the rotated frame is absolute in the
                    // position magnitudes, not relative to d*.
                    prop_assert!((d1 - d2).abs() <= 1e-9 * d1.max(1.0) + 1e-9 * 1500.0);
                }
                (CpaResult::Receding, CpaResult::Receding) => {}
                (x, y) => {
                    // Only t* ≈ 0 may flip across the receding boundary.
                    let near_zero = |r: CpaResult| match r {
                        CpaResult::Approaching { t_star, .. } => t_star < 1e-9,
                        CpaResult::Receding => true,
                        CpaResult::Parallel { .. } => false,
                    };
                    prop_assert!(near_zero(x) && near_zero(y), "{:?} vs {:?}", x, y);
                }
            }
        }

        #[test]
        fn identical_velocities_parallel(p1 in arb_state(), p2 in arb_state()) {
            let b = KinematicState::new(p2.position, p1.velocity);
            let is_parallel = matches!(closest_approach(&p1, &b), CpaResult::Parallel { .. });
            prop_assert!(is_parallel);
        }
    }
}
