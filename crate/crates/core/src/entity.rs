//! Identifiers shared by the mobility, detection and analysis layers.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityClass {
    Vehicle,
    Pedestrian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairKind {
    VehVeh,
    VehPed,
}

impl PairKind {
    pub const ALL: [PairKind; 2] = [PairKind::VehVeh, PairKind::VehPed];

    /// `None` for pedestrian pairs, which are never analysed.
    pub fn of(a: EntityClass, b: EntityClass) -> Option<PairKind> {
        match (a, b) {
            (EntityClass::Vehicle, EntityClass::Vehicle) => Some(PairKind::VehVeh),
            (EntityClass::Pedestrian, EntityClass::Pedestrian) => None,
            _ => Some(PairKind::VehPed),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PairKind::VehVeh => "VehVeh",
            PairKind::VehPed => "VehPed",
        }
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Unordered pair of entities, stored with the smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairId {
    lo: EntityId,
    hi: EntityId,
}

impl PairId {
    pub fn new(a: EntityId, b: EntityId) -> Self {
        if a <= b {
            PairId { lo: a, hi: b }
        } else {
            PairId { lo: b, hi: a }
        }
    }

    pub fn first(&self) -> EntityId {
        self.lo
    }

    pub fn second(&self) -> EntityId {
        self.hi
    }

    pub fn contains(&self, id: EntityId) -> bool {
        self.lo == id || self.hi == id
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_id_is_unordered() {
        assert_eq!(PairId::new(EntityId(7), EntityId(3)), PairId::new(EntityId(3), EntityId(7)));
        assert_eq!(PairId::new(EntityId(7), EntityId(3)).first(), EntityId(3));
    }

    #[test]
    fn pedestrian_pairs_have_no_kind() {
        use EntityClass::*;
        assert_eq!(PairKind::of(Pedestrian, Pedestrian), None);
        assert_eq!(PairKind::of(Pedestrian, Vehicle), Some(PairKind::VehPed));
        assert_eq!(PairKind::of(Vehicle, Vehicle), Some(PairKind::VehVeh));
    }
}
