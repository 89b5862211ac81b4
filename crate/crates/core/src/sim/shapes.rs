//! Oriented rectangles, segment tests and ray casting.

use crate::geometry::Vec2;

/// Oriented rectangle footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    pub center: Vec2,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl Footprint {
    pub fn corners(&self) -> [Vec2; 4] {
        let f = Vec2::from_angle(self.heading) * (0.5 * self.length);
        let l = Vec2::from_angle(self.heading).perp() * (0.5 * self.width);
        let c = self.center;
        [c + f + l, c - f + l, c - f - l, c + f - l]
    }

    pub fn edges(&self) -> [(Vec2, Vec2); 4] {
        let k = self.corners();
        [(k[0], k[1]), (k[1], k[2]), (k[2], k[3]), (k[3], k[0])]
    }

    /// Separating-axis overlap test. Touching counts as overlap.
    pub fn overlaps(&self, other: &Footprint) -> bool {
        let (a, b) = (self.corners(), other.corners());
        let axes = [
            Vec2::from_angle(self.heading),
            Vec2::from_angle(self.heading).perp(),
            Vec2::from_angle(other.heading),
            Vec2::from_angle(other.heading).perp(),
        ];
        axes.iter().all(|ax| {
            let (amin, amax) = project(&a, *ax);
            let (bmin, bmax) = project(&b, *ax);
            amax >= bmin && bmax >= amin
        })
    }

    pub fn intersects_segment(&self, p: Vec2, q: Vec2) -> bool {
        if self.contains(p) || self.contains(q) {
            return true;
        }
        self.edges()
            .iter()
            .any(|&(a, b)| segments_intersect(p, q, a, b))
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let r = (p - self.center).rotate(-self.heading);
        r.x.abs() <= 0.5 * self.length && r.y.abs() <= 0.5 * self.width
    }
}

fn project(pts: &[Vec2; 4], ax: Vec2) -> (f64, f64) {
    pts.iter()
        .map(|p| p.dot(ax))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

pub fn segments_intersect(p: Vec2, q: Vec2, a: Vec2, b: Vec2) -> bool {
    let d1 = (q - p).cross(a - p);
    let d2 = (q - p).cross(b - p);
    let d3 = (b - a).cross(p - a);
    let d4 = (b - a).cross(q - a);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |u: Vec2, v: Vec2, w: Vec2, c: f64| {
        c == 0.0
            && w.x >= u.x.min(v.x)
            && w.x <= u.x.max(v.x)
            && w.y >= u.y.min(v.y)
            && w.y <= u.y.max(v.y)
    };
    on(p, q, a, d1) || on(p, q, b, d2) || on(a, b, p, d3) || on(a, b, q, d4)
}

/// Distance along the ray `origin + t dir` (unit `dir`) to segment `a b`.
pub fn ray_hit(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-12 {
        return None;
    }
    let w = a - origin;
    let t = w.cross(e) / denom;
    let u = w.cross(dir) / denom;
    (t >= 0.0 && (0.0..=1.0).contains(&u)).then_some(t)
}
