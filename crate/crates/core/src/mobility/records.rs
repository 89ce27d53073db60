//! Trajectory and collision logs.
//!
//! Both are written as CSV with a header row. Times are seconds with
//! microsecond resolution and round-trip exactly.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::detector::Cam;
use crate::entity::{EntityClass, EntityId, PairId, PairKind};
use crate::kinematics::{KinematicState, Vec2};
use crate::time::SimTime;

/// One row of the floating entity data log. `x`, `y` is the footprint
/// center; `accel` is signed along the heading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub time: SimTime,
    pub id: EntityId,
    pub class: EntityClass,
    pub x: f64,
    pub y: f64,
    pub speed: f64,
    pub heading: f64,
    pub accel: f64,
}

impl TrajectoryRecord {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn state(&self) -> KinematicState {
        let dir = Vec2::from_angle(self.heading);
        KinematicState::new(self.position(), dir * self.speed).with_acceleration(dir * self.accel)
    }

    /// The CAM this entity emits at `time`. Live runs build CAMs through
    /// this function too, so replaying a log reproduces them bit for bit.
    pub fn to_cam(&self) -> Cam {
        Cam {
            sender: self.id,
            class: self.class,
            generated_at: self.time,
            state: self.state(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionRecord {
    pub time: SimTime,
    /// Smaller id of the pair.
    pub a: EntityId,
    pub b: EntityId,
    pub kind: PairKind,
    /// Midpoint of the two footprint centers at first contact.
    pub x: f64,
    pub y: f64,
}

impl CollisionRecord {
    pub fn new(time: SimTime, pair: PairId, kind: PairKind, at: Vec2) -> Self {
        CollisionRecord {
            time,
            a: pair.first(),
            b: pair.second(),
            kind,
            x: at.x,
            y: at.y,
        }
    }

    pub fn pair(&self) -> PairId {
        PairId::new(self.a, self.b)
    }
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the header even when `rows` is empty.
pub fn write_csv_with_header<T: Serialize, W: Write>(
    rows: &[T],
    header: &[&str],
    out: W,
) -> csv::Result<()> {
    if rows.is_empty() {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header)?;
        w.flush()?;
        return Ok(());
    }
    write_csv(rows, out)
}

pub fn read_csv<T: for<'de> Deserialize<'de>, R: Read>(input: R) -> csv::Result<Vec<T>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub const TRAJECTORY_HEADER: &[&str] = &["time", "id", "class", "x", "y", "speed", "heading", "accel"];
pub const COLLISION_HEADER: &[&str] = &["time", "a", "b", "kind", "x", "y"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_round_trip() {
        let rows = vec![
            TrajectoryRecord {
                time: SimTime::from_micros(12_340_000),
                id: EntityId(3),
                class: EntityClass::Vehicle,
                x: -72.0,
                y: 1.0 / 3.0,
                speed: 13.89,
                heading: std::f64::consts::FRAC_PI_2,
                accel: -4.5,
            },
            TrajectoryRecord {
                time: SimTime::from_micros(12_350_000),
                id: EntityId(4),
                class: EntityClass::Pedestrian,
                x: 0.1,
                y: 20.0,
                speed: 1.7,
                heading: 0.0,
                accel: 0.0,
            },
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("time,id,class,x,y,speed,heading,accel\n"));
        let back: Vec<TrajectoryRecord> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert_eq!(back[0].to_cam(), rows[0].to_cam());
    }

    #[test]
    fn empty_log_keeps_header() {
        let mut buf = Vec::new();
        write_csv_with_header::<CollisionRecord, _>(&[], COLLISION_HEADER, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "time,a,b,kind,x,y\n");
        let back: Vec<CollisionRecord> = read_csv(buf.as_slice()).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn collision_pair_is_canonical() {
        let r = CollisionRecord::new(
            SimTime::from_secs(1.0),
            PairId::new(EntityId(9), EntityId(2)),
            PairKind::VehPed,
            Vec2::new(1.0, 2.0),
        );
        assert_eq!((r.a, r.b), (EntityId(2), EntityId(9)));
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        assert_eq!(read_csv::<CollisionRecord, _>(buf.as_slice()).unwrap(), vec![r]);
    }
}
