use std::collections::HashMap;

use crate::detector::Cam;
use crate::entity::EntityId;
use crate::time::SimTime;

type Cell = (i64, i64);

/// Latest CAM per sender, indexed by a uniform grid over reported positions.
#[derive(Debug, Clone)]
pub struct CamStore {
    latest: HashMap<EntityId, Cam>,
    cells: HashMap<Cell, Vec<EntityId>>,
    cell_of: HashMap<EntityId, Cell>,
    cell_size: f64,
    // Largest speed ever stored; bounds how far an entry can have moved since
    // it was indexed.
    max_speed: f64,
}

impl CamStore {
    pub fn new(cell_size: f64) -> Self {
        assert!(cell_size > 0.0 && cell_size.is_finite(), "cell size must be positive");
        CamStore {
            latest: HashMap::new(),
            cells: HashMap::new(),
            cell_of: HashMap::new(),
            cell_size,
            max_speed: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.latest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.latest.is_empty()
    }

    pub fn get(&self, id: EntityId) -> Option<&Cam> {
        self.latest.get(&id)
    }

    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }

    fn cell(&self, x: f64, y: f64) -> Cell {
        (
            (x / self.cell_size).floor() as i64,
            (y / self.cell_size).floor() as i64,
        )
    }

    /// Replaces the sender's entry. Returns `false` (and leaves the store
    /// untouched) when the stored CAM is newer than `cam`.
    pub(crate) fn upsert(&mut self, cam: Cam) -> bool {
        if let Some(prev) = self.latest.get(&cam.sender) {
            if prev.generated_at > cam.generated_at {
                return false;
            }
        }
        let id = cam.sender;
        let cell = self.cell(cam.state.position.x, cam.state.position.y);
        if let Some(old) = self.cell_of.insert(id, cell) {
            if old != cell {
                self.unlink(id, old);
                self.cells.entry(cell).or_default().push(id);
            }
        } else {
            self.cells.entry(cell).or_default().push(id);
        }
        self.max_speed = self.max_speed.max(cam.state.speed());
        self.latest.insert(id, cam);
        true
    }

    fn unlink(&mut self, id: EntityId, cell: Cell) {
        if let Some(ids) = self.cells.get_mut(&cell) {
            ids.retain(|&x| x != id);
            if ids.is_empty() {
                self.cells.remove(&cell);
            }
        }
    }

    pub fn remove(&mut self, id: EntityId) -> Option<Cam> {
        let cam = self.latest.remove(&id)?;
        if let Some(cell) = self.cell_of.remove(&id) {
            self.unlink(id, cell);
        }
        Some(cam)
    }

    /// Drops every entry older than `max_age` at `now`.
    pub fn evict_stale(&mut self, now: SimTime, max_age: SimTime) -> usize {
        let stale: Vec<EntityId> = self
            .latest
            .values()
            .filter(|c| now - c.generated_at > max_age)
            .map(|c| c.sender)
            .collect();
        for id in &stale {
            self.remove(*id);
        }
        stale.len()
    }

    /// Fresh entries whose indexed position lies within `radius` of
    /// `(x, y)`, sorted by sender id. The caller applies exact distance
    /// filtering; `radius` must already include any motion slack.
    pub fn fresh_near(
        &self,
        x: f64,
        y: f64,
        radius: f64,
        now: SimTime,
        max_age: SimTime,
    ) -> Vec<&Cam> {
        let (c0x, c0y) = self.cell(x - radius, y - radius);
        let (c1x, c1y) = self.cell(x + radius, y + radius);
        let span = (c1x - c0x + 1).saturating_mul(c1y - c0y + 1);
        let mut out: Vec<&Cam> = if span as usize > self.cells.len() {
            self.latest.values().collect()
        } else {
            let mut v = Vec::new();
            for cx in c0x..=c1x {
                for cy in c0y..=c1y {
                    if let Some(ids) = self.cells.get(&(cx, cy)) {
                        v.extend(ids.iter().filter_map(|id| self.latest.get(id)));
                    }
                }
            }
            v
        };
        out.retain(|c| now - c.generated_at <= max_age && c.generated_at <= now);
        out.sort_by_key(|c| c.sender);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cam> {
        self.latest.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entity::EntityClass;
    use crate::kinematics::{KinematicState, Vec2};

    fn cam(id: u32, t: f64, x: f64, y: f64) -> Cam {
        Cam {
            sender: EntityId(id),
            class: EntityClass::Vehicle,
            generated_at: SimTime::from_secs(t),
            state: KinematicState::new(Vec2::new(x, y), Vec2::ZERO),
        }
    }

    #[test]
    fn moving_entry_changes_cell() {
        let mut s = CamStore::new(10.0);
        assert!(s.upsert(cam(1, 0.0, 1.0, 1.0)));
        assert!(s.upsert(cam(1, 0.1, 55.0, 1.0)));
        let now = SimTime::from_secs(0.1);
        let age = SimTime::from_secs(0.8);
        assert_eq!(s.cells.keys().copied().collect::<Vec<_>>(), vec![(5, 0)]);
        assert_eq!(s.fresh_near(55.0, 0.0, 5.0, now, age).len(), 1);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn eviction_removes_only_stale() {
        let mut s = CamStore::new(10.0);
        s.upsert(cam(1, 0.0, 0.0, 0.0));
        s.upsert(cam(2, 1.0, 0.0, 0.0));
        let n = s.evict_stale(SimTime::from_secs(1.5), SimTime::from_secs(0.8));
        assert_eq!(n, 1);
        assert!(s.get(EntityId(1)).is_none());
        assert!(s.get(EntityId(2)).is_some());
    }
}
