//! Entity footprints: vehicles are rectangles aligned with their heading,
//! pedestrians are discs.

use crate::kinematics::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedRect {
    pub center: Vec2,
    /// Half length along the heading, half width across it.
    pub half_length: f64,
    pub half_width: f64,
    pub heading: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disc {
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Footprint {
    Rect(OrientedRect),
    Disc(Disc),
}

impl OrientedRect {
    pub fn new(center: Vec2, length: f64, width: f64, heading: f64) -> Self {
        OrientedRect {
            center,
            half_length: 0.5 * length,
            half_width: 0.5 * width,
            heading,
        }
    }

    fn axes(&self) -> (Vec2, Vec2) {
        let u = Vec2::from_angle(self.heading);
        (u, Vec2::new(-u.y, u.x))
    }

    pub fn corners(&self) -> [Vec2; 4] {
        let (u, v) = self.axes();
        let a = u * self.half_length;
        let b = v * self.half_width;
        let c = self.center;
        [c + a + b, c - a + b, c - a - b, c + a - b]
    }

    pub fn bounding_radius(&self) -> f64 {
        self.half_length.hypot(self.half_width)
    }

    /// Point expressed in the rectangle's own frame.
    fn to_local(&self, p: Vec2) -> Vec2 {
        let (u, v) = self.axes();
        let d = p - self.center;
        Vec2::new(d.dot(u), d.dot(v))
    }

    /// Distance from `p` to the rectangle (zero inside).
    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        let l = self.to_local(p);
        let dx = (l.x.abs() - self.half_length).max(0.0);
        let dy = (l.y.abs() - self.half_width).max(0.0);
        dx.hypot(dy)
    }

    fn projected_radius(&self, axis: Vec2) -> f64 {
        let (u, v) = self.axes();
        self.half_length * u.dot(axis).abs() + self.half_width * v.dot(axis).abs()
    }
}

/// Separating-axis test on the four face normals. Touching is not overlap.
pub fn rects_overlap(a: &OrientedRect, b: &OrientedRect) -> bool {
    let d = b.center - a.center;
    if d.norm() >= a.bounding_radius() + b.bounding_radius() {
        return false;
    }
    let (au, av) = a.axes();
    let (bu, bv) = b.axes();
    [au, av, bu, bv]
        .into_iter()
        .all(|axis| d.dot(axis).abs() < a.projected_radius(axis) + b.projected_radius(axis))
}

pub fn rect_disc_overlap(r: &OrientedRect, d: &Disc) -> bool {
    r.distance_to_point(d.center) < d.radius
}

fn segment_point_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    let t = if len_sq == 0.0 {
        0.0
    } else {
        ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0)
    };
    (p - (a + ab * t)).norm()
}

/// Gap between two rectangles, zero when they overlap.
pub fn rect_clearance(a: &OrientedRect, b: &OrientedRect) -> f64 {
    if rects_overlap(a, b) {
        return 0.0;
    }
    // Disjoint convex polygons: the gap is realized between a vertex of one
    // and an edge of the other.
    let ca = a.corners();
    let cb = b.corners();
    let mut best = f64::INFINITY;
    for (poly, other) in [(&ca, &cb), (&cb, &ca)] {
        for &p in poly.iter() {
            for i in 0..4 {
                best = best.min(segment_point_distance(p, other[i], other[(i + 1) % 4]));
            }
        }
    }
    best
}

pub fn clearance(a: &Footprint, b: &Footprint) -> f64 {
    match (a, b) {
        (Footprint::Rect(r1), Footprint::Rect(r2)) => rect_clearance(r1, r2),
        (Footprint::Rect(r), Footprint::Disc(d)) | (Footprint::Disc(d), Footprint::Rect(r)) => {
            (r.distance_to_point(d.center) - d.radius).max(0.0)
        }
        (Footprint::Disc(d1), Footprint::Disc(d2)) => {
            ((d1.center - d2.center).norm() - d1.radius - d2.radius).max(0.0)
        }
    }
}

pub fn overlaps(a: &Footprint, b: &Footprint) -> bool {
    match (a, b) {
        (Footprint::Rect(r1), Footprint::Rect(r2)) => rects_overlap(r1, r2),
        (Footprint::Rect(r), Footprint::Disc(d)) | (Footprint::Disc(d), Footprint::Rect(r)) => {
            rect_disc_overlap(r, d)
        }
        (Footprint::Disc(d1), Footprint::Disc(d2)) => {
            (d1.center - d2.center).norm() < d1.radius + d2.radius
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn car(x: f64, y: f64, heading: f64) -> OrientedRect {
        OrientedRect::new(Vec2::new(x, y), 5.0, 1.8, heading)
    }

    #[test]
    fn same_heading_ten_meters_apart() {
        assert!(!rects_overlap(&car(0.0, 0.0, 0.0), &car(10.0, 0.0, 0.0)));
        assert!((rect_clearance(&car(0.0, 0.0, 0.0), &car(10.0, 0.0, 0.0)) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rectangle_disc_example() {
        let r = car(0.0, 0.0, 0.0);
        let ped = Disc { center: Vec2::new(2.7, 0.0), radius: 0.3 };
        // 2.7 - 2.5 = 0.2 < 0.3
        assert!(rect_disc_overlap(&r, &ped));
        let far = Disc { center: Vec2::new(2.9, 0.0), radius: 0.3 };
        assert!(!rect_disc_overlap(&r, &far));
    }

    #[test]
    fn perpendicular_side_impact() {
        // Car heading north whose front is 0.5 m into the side of an eastbound car.
        let a = car(0.0, 0.0, 0.0);
        let b = car(0.0, -0.9 - 2.5 + 0.5, FRAC_PI_2);
        assert!(rects_overlap(&a, &b));
        let c = car(0.0, -0.9 - 2.5 - 1.0, FRAC_PI_2);
        assert!(!rects_overlap(&a, &c));
        assert!((rect_clearance(&a, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_corner_gap() {
        // Rotated 45°, the corner-to-corner gap is not along either face normal.
        let a = car(0.0, 0.0, 0.0);
        let b = OrientedRect::new(Vec2::new(10.0, 10.0), 2.0, 2.0, std::f64::consts::FRAC_PI_4);
        let expected = (Vec2::new(10.0 - 2f64.sqrt(), 10.0) - Vec2::new(2.5, 0.9)).norm();
        let got = rect_clearance(&a, &b);
        assert!(got <= expected + 1e-12);
        assert!(got > 0.0);
    }

    proptest! {
        #[test]
        fn overlap_is_symmetric(
            x in -10.0..10.0f64, y in -10.0..10.0f64,
            h1 in 0.0..6.3f64, h2 in 0.0..6.3f64,
        ) {
            let a = car(0.0, 0.0, h1);
            let b = car(x, y, h2);
            prop_assert_eq!(rects_overlap(&a, &b), rects_overlap(&b, &a));
            prop_assert_eq!(rects_overlap(&a, &b), rect_clearance(&a, &b) == 0.0);
        }

        #[test]
        fn clearance_never_exceeds_center_gap(
            x in -30.0..30.0f64, y in -30.0..30.0f64, h in 0.0..6.3f64,
        ) {
            let a = car(0.0, 0.0, 0.0);
            let b = car(x, y, h);
            prop_assert!(rect_clearance(&a, &b) <= Vec2::new(x, y).norm() + 1e-9);
        }
    }
}
