use std::collections::HashMap;

use crate::entity::{EntityClass, EntityId};
use crate::kinematics::Vec2;
use crate::mobility::TrajectoryRecord;
use crate::time::SimTime;

/// Trajectory log grouped per entity, each series sorted by time.
#[derive(Clone, Debug, Default)]
pub struct TrajectoryIndex {
    by_id: HashMap<EntityId, Vec<TrajectoryRecord>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Vec2,
    pub heading: f64,
    pub speed: f64,
}

impl TrajectoryIndex {
    pub fn new(records: &[TrajectoryRecord]) -> Self {
        let mut by_id: HashMap<EntityId, Vec<TrajectoryRecord>> = HashMap::new();
        for r in records {
            by_id.entry(r.id).or_default().push(*r);
        }
        for series in by_id.values_mut() {
            series.sort_by_key(|r| r.time);
        }
        TrajectoryIndex { by_id }
    }

    pub fn series(&self, id: EntityId) -> Option<&[TrajectoryRecord]> {
        self.by_id.get(&id).map(Vec::as_slice)
    }

    pub fn class(&self, id: EntityId) -> Option<EntityClass> {
        self.series(id).map(|s| s[0].class)
    }

    /// First and last logged instants.
    pub fn span(&self, id: EntityId) -> Option<(SimTime, SimTime)> {
        self.series(id).map(|s| (s[0].time, s[s.len() - 1].time))
    }

    /// Interpolated pose at `t`, or `None` outside the logged span. The
    /// heading is taken from the earlier sample: routes are straight
    /// between samples except at pedestrian corners.
    pub fn pose_at(&self, id: EntityId, t: SimTime) -> Option<Pose> {
        let s = self.series(id)?;
        if t < s[0].time || t > s[s.len() - 1].time {
            return None;
        }
        let i = s.partition_point(|r| r.time <= t);
        let a = &s[i - 1];
        if a.time == t || i == s.len() {
            return Some(Pose { position: a.position(), heading: a.heading, speed: a.speed });
        }
        let b = &s[i];
        let w = (t - a.time).as_secs() / (b.time - a.time).as_secs();
        Some(Pose {
            position: a.position() + (b.position() - a.position()) * w,
            heading: a.heading,
            speed: a.speed + (b.speed - a.speed) * w,
        })
    }

    /// Speed at `t`, clamped to the first or last sample outside the span.
    pub fn speed_at(&self, id: EntityId, t: SimTime) -> Option<f64> {
        let s = self.series(id)?;
        let t = t.max(s[0].time).min(s[s.len() - 1].time);
        self.pose_at(id, t).map(|p| p.speed)
    }

    /// Sample instants of `id` inside `[from, to]`.
    pub fn times_within(&self, id: EntityId, from: SimTime, to: SimTime) -> impl Iterator<Item = SimTime> + '_ {
        self.series(id)
            .unwrap_or(&[])
            .iter()
            .map(|r| r.time)
            .filter(move |&t| t >= from && t <= to)
    }
}
