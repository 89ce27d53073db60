//! Simulation clock.
//!
//! Time is kept as integer microseconds so that latency sums, alert spacing
//! and reaction budgets are exact. Kinematics converts to `f64` seconds at the
//! boundary via [`SimTime::as_secs`].

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, AddAssign, Sub};

const MICROS_PER_SEC: f64 = 1_000_000.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(i64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub const fn from_micros(us: i64) -> Self {
        SimTime(us)
    }

    pub const fn from_millis(ms: i64) -> Self {
        SimTime(ms * 1000)
    }

    /// Rounds to the nearest microsecond.
    pub fn from_secs(secs: f64) -> Self {
        SimTime((secs * MICROS_PER_SEC).round() as i64)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    pub fn as_secs(self) -> f64 {
        self.0 as f64 / MICROS_PER_SEC
    }

    pub fn is_multiple_of(self, period: SimTime) -> bool {
        period.0 != 0 && self.0 % period.0 == 0
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:06}", abs / 1_000_000, abs % 1_000_000)
    }
}

// Serialized as seconds so logs and configs stay human-readable.
impl Serialize for SimTime {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_secs())
    }
}

impl<'de> Deserialize<'de> for SimTime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let secs = f64::deserialize(d)?;
        if !secs.is_finite() {
            return Err(serde::de::Error::custom("time must be finite"));
        }
        Ok(SimTime::from_secs(secs))
    }
}
