use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec2};

/// Internal uniform sample spacing of the resampled centerline [m].
pub const GRID_SPACING: f64 = 0.05;
/// Largest spacing accepted between consecutive rows of a track file [m].
pub const MAX_FILE_SPACING: f64 = 0.5;
/// Smallest number of rows accepted in a track file.
pub const MIN_FILE_POINTS: usize = 20;

const CSV_HEADER: [&str; 4] = ["x_m", "y_m", "w_left_m", "w_right_m"];

/// Curvilinear track coordinates: arc length along the centerline and signed
/// lateral offset (positive to the left).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrenetPose {
    pub s: f64,
    pub d: f64,
}

impl FrenetPose {
    pub fn new(s: f64, d: f64) -> Self {
        Self { s, d }
    }
}

/// A closed track: a uniformly resampled centerline with per-sample widths.
///
/// The centerline is a closed polyline; sample `N - 1` connects back to sample
/// `0`. Lateral offsets are measured along vertex normals that are linearly
/// interpolated inside each segment, which makes the Cartesian/Frenet maps
/// exact inverses of each other.
#[derive(Debug, Clone)]
pub struct TrackModel {
    points: Vec<Vec2>,
    normals: Vec<Vec2>,
    width_left: Vec<f64>,
    width_right: Vec<f64>,
    cum_s: Vec<f64>,
    curvature: Vec<f64>,
    source_s: Vec<f64>,
    length: f64,
    ds: f64,
}

impl TrackModel {
    /// Builds a track from raw centerline samples and resamples it onto the
    /// uniform internal grid.
    ///
    /// Validates widths and closure; the row count and spacing limits of the
    /// file format are enforced by [`load_track`].
    pub fn from_samples(
        points: &[Vec2],
        width_left: &[f64],
        width_right: &[f64],
    ) -> Result<Self, GeometryError> {
        let n = points.len();
        if n < 3 || width_left.len() != n || width_right.len() != n {
            return Err(GeometryError::TooFewPoints {
                found: n,
                required: 3,
            });
        }
        for i in 0..n {
            let (p, wl, wr) = (points[i], width_left[i], width_right[i]);
            if !(p.x.is_finite() && p.y.is_finite() && wl.is_finite() && wr.is_finite()) {
                return Err(GeometryError::Row {
                    row: i + 1,
                    reason: "non-finite value".into(),
                });
            }
            if wl <= 0.0 || wr <= 0.0 {
                return Err(GeometryError::Row {
                    row: i + 1,
                    reason: "width must be positive".into(),
                });
            }
        }

        let mut source_s = Vec::with_capacity(n);
        let mut acc = 0.0;
        let mut max_spacing: f64 = 0.0;
        for i in 0..n {
            source_s.push(acc);
            if i + 1 < n {
                let seg = points[i].dist(points[i + 1]);
                if seg <= 0.0 {
                    return Err(GeometryError::Row {
                        row: i + 2,
                        reason: "duplicate point".into(),
                    });
                }
                max_spacing = max_spacing.max(seg);
                acc += seg;
            }
        }
        let closing = points[n - 1].dist(points[0]);
        if closing > 2.0 * max_spacing {
            return Err(GeometryError::NotClosed {
                gap: closing,
                max_spacing,
            });
        }
        let length = if closing > 0.0 { acc + closing } else { acc };
        // a file may repeat the first point at the end
        let n_unique = if closing > 0.0 { n } else { n - 1 };

        let m = ((length / GRID_SPACING).round() as usize).max(n_unique);
        let ds = length / m as f64;
        let mut res_points = Vec::with_capacity(m);
        let mut res_wl = Vec::with_capacity(m);
        let mut res_wr = Vec::with_capacity(m);
        let mut seg = 0usize;
        for k in 0..m {
            let s = k as f64 * ds;
            while seg + 1 < n_unique && source_s[seg + 1] <= s {
                seg += 1;
            }
            let next = (seg + 1) % n_unique;
            let s0 = source_s[seg];
            let s1 = if next == 0 { length } else { source_s[next] };
            let t = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
            let prev = (seg + n_unique - 1) % n_unique;
            let after = (next + 1) % n_unique;
            let knots = [
                s0 - points[prev].dist(points[seg]),
                s0,
                s1,
                s1 + points[next].dist(points[after]),
            ];
            res_points.push(catmull_rom(
                [points[prev], points[seg], points[next], points[after]],
                knots,
                s0 + t * (s1 - s0),
            ));
            res_wl.push(width_left[seg] + t * (width_left[next] - width_left[seg]));
            res_wr.push(width_right[seg] + t * (width_right[next] - width_right[seg]));
        }
        source_s.truncate(n_unique);

        let normals = (0..m)
            .map(|i| {
                let prev = res_points[(i + m - 1) % m];
                let next = res_points[(i + 1) % m];
                let cur = res_points[i];
                let t = (cur - prev).normalized() + (next - cur).normalized();
                let t = if t.norm() < 1e-12 {
                    (next - cur).normalized()
                } else {
                    t.normalized()
                };
                t.perp()
            })
            .collect();

        let mut track = Self {
            points: res_points,
            normals,
            width_left: res_wl,
            width_right: res_wr,
            cum_s: (0..m).map(|k| k as f64 * ds).collect(),
            curvature: Vec::new(),
            source_s,
            length,
            ds,
        };
        track.curvature = track.compute_curvature(5);
        Ok(track)
    }

    fn compute_curvature(&self, half_window: usize) -> Vec<f64> {
        let m = self.len();
        let raw: Vec<f64> = (0..m)
            .map(|i| {
                let prev = self.points[(i + m - 1) % m];
                let next = self.points[(i + 1) % m];
                let a = (self.points[i] - prev).angle();
                let b = (next - self.points[i]).angle();
                wrap_angle(b - a) / self.ds
            })
            .collect();
        let w = half_window.min(m / 4);
        (0..m)
            .map(|i| {
                let sum: f64 = (0..=2 * w).map(|k| raw[(i + m + k - w) % m]).sum();
                sum / (2 * w + 1) as f64
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total centerline length [m].
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Uniform grid spacing [m].
    pub fn ds(&self) -> f64 {
        self.ds
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn cum_arc_length(&self) -> &[f64] {
        &self.cum_s
    }

    pub fn width_left(&self) -> &[f64] {
        &self.width_left
    }

    pub fn width_right(&self) -> &[f64] {
        &self.width_right
    }

    /// Arc length of each row of the source samples.
    pub fn source_arc_lengths(&self) -> &[f64] {
        &self.source_s
    }

    /// Smoothed signed centerline curvature per grid sample [1/m].
    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    pub fn max_width(&self) -> f64 {
        self.width_left
            .iter()
            .chain(&self.width_right)
            .fold(0.0, |a, &b| a.max(b))
    }

    pub fn wrap_s(&self, s: f64) -> f64 {
        crate::Real::wrap(s, self.length)
    }

    /// Forward arc distance from `from` to `to`, in `[0, L)`.
    pub fn forward_gap(&self, from: f64, to: f64) -> f64 {
        self.wrap_s(to - from)
    }

    /// Signed arc distance from `from` to `to`, in `(-L/2, L/2]`.
    pub fn signed_gap(&self, from: f64, to: f64) -> f64 {
        let g = self.wrap_s(to - from);
        if g > 0.5 * self.length {
            g - self.length
        } else {
            g
        }
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let s = self.wrap_s(s);
        let i = ((s / self.ds) as usize).min(self.len() - 1);
        let t = ((s - self.cum_s[i]) / self.ds).clamp(0.0, 1.0);
        (i, t)
    }

    fn interp(&self, values: &[f64], s: f64) -> f64 {
        let (i, t) = self.locate(s);
        let j = (i + 1) % self.len();
        values[i] + t * (values[j] - values[i])
    }

    /// Samples a per-grid-point profile at arbitrary arc length (linear, periodic).
    pub fn sample(&self, values: &[f64], s: f64) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.interp(values, s)
    }

    pub fn width_left_at(&self, s: f64) -> f64 {
        self.interp(&self.width_left, s)
    }

    pub fn width_right_at(&self, s: f64) -> f64 {
        self.interp(&self.width_right, s)
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        self.interp(&self.curvature, s)
    }

    /// Unit tangent of the centerline at `s`.
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        let (i, t) = self.locate(s);
        let j = (i + 1) % self.len();
        let n = self.normals[i].lerp(self.normals[j], t).normalized();
        Vec2::new(n.y, -n.x)
    }

    /// Centerline heading at `s` [rad].
    pub fn heading_at(&self, s: f64) -> f64 {
        self.tangent_at(s).angle()
    }

    /// Maps a Frenet pose to a Cartesian position.
    pub fn frenet_to_cart(&self, q: FrenetPose) -> Vec2 {
        let (i, t) = self.locate(q.s);
        let j = (i + 1) % self.len();
        let c = self.points[i].lerp(self.points[j], t);
        let n = self.normals[i].lerp(self.normals[j], t);
        c + n * q.d
    }

    /// Maps a Cartesian position to Frenet coordinates using a full search.
    pub fn cart_to_frenet(&self, p: Vec2) -> Result<FrenetPose, GeometryError> {
        self.project_segments(p, 0..self.len())
    }

    /// Like [`cart_to_frenet`](Self::cart_to_frenet) but only searches
    /// segments within `window` meters of `s_hint`, falling back to a full
    /// search when nothing is found there.
    pub fn cart_to_frenet_near(
        &self,
        p: Vec2,
        s_hint: f64,
        window: f64,
    ) -> Result<FrenetPose, GeometryError> {
        let m = self.len();
        let half = ((window / self.ds).ceil() as usize).min(m / 2);
        let (center, _) = self.locate(s_hint);
        let idx = (0..=2 * half).map(|k| (center + m + k - half) % m);
        match self.project_segments(p, idx) {
            Ok(q) => Ok(q),
            Err(_) => self.cart_to_frenet(p),
        }
    }

    fn project_segments(
        &self,
        p: Vec2,
        segments: impl Iterator<Item = usize>,
    ) -> Result<FrenetPose, GeometryError> {
        let m = self.len();
        let bound = 2.0 * self.max_width();
        let mut best: Option<(f64, f64)> = None;
        for i in segments {
            let j = (i + 1) % m;
            let a = self.points[i];
            let e = self.points[j] - a;
            let na = self.normals[i];
            let dn = self.normals[j] - na;
            let w = p - a;
            // (w - t e) x (na + t dn) = 0
            let qa = -e.cross(dn);
            let qb = w.cross(dn) - e.cross(na);
            let qc = w.cross(na);
            for t in quadratic_roots(qa, qb, qc) {
                if !(-1e-9..=1.0 + 1e-9).contains(&t) {
                    continue;
                }
                let t = t.clamp(0.0, 1.0);
                let n = na + dn * t;
                let d = (w - e * t).dot(n) / n.dot(n);
                if best.is_none_or(|(_, bd)| d.abs() < bd.abs()) {
                    best = Some((self.cum_s[i] + t * self.ds, d));
                }
            }
        }
        match best {
            Some((s, d)) if d.abs() <= bound => Ok(FrenetPose {
                s: self.wrap_s(s),
                d,
            }),
            Some((_, d)) => Err(GeometryError::OutOfCorridor {
                distance: d.abs(),
                bound,
            }),
            None => Err(GeometryError::OutOfCorridor {
                distance: f64::INFINITY,
                bound,
            }),
        }
    }

    /// Left and right boundary polylines.
    pub fn boundaries(&self) -> (Vec<Vec2>, Vec<Vec2>) {
        let left = (0..self.len())
            .map(|i| self.points[i] + self.normals[i] * self.width_left[i])
            .collect();
        let right = (0..self.len())
            .map(|i| self.points[i] - self.normals[i] * self.width_right[i])
            .collect();
        (left, right)
    }

    /// Renders the source-format CSV of the resampled centerline.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for i in 0..self.len() {
            let p = self.points[i];
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.x, p.y, self.width_left[i], self.width_right[i]
            ));
        }
        out
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return vec![0.0];
    }
    if a.abs() <= 1e-12 * scale {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Chord-length Catmull-Rom interpolation between `p[1]` and `p[2]`.
fn catmull_rom(p: [Vec2; 4], k: [f64; 4], s: f64) -> Vec2 {
    let mix = |a: Vec2, b: Vec2, ka: f64, kb: f64| {
        a * ((kb - s) / (kb - ka)) + b * ((s - ka) / (kb - ka))
    };
    let a1 = mix(p[0], p[1], k[0], k[1]);
    let a2 = mix(p[1], p[2], k[1], k[2]);
    let a3 = mix(p[2], p[3], k[2], k[3]);
    let b1 = mix(a1, a2, k[0], k[2]);
    let b2 = mix(a2, a3, k[1], k[3]);
    mix(b1, b2, k[1], k[2])
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Parses a track file (`x_m,y_m,w_left_m,w_right_m` with a header row).
///
/// Rows in error messages are 1-based data rows, not counting the header.
pub fn load_track(source: &str) -> Result<TrackModel, GeometryError> {
    let mut lines = source.lines();
    let header = lines.next().ok_or(GeometryError::MissingHeader)?;
    let cols: Vec<&str> = header
        .trim_start_matches('\u{feff}')
        .split(',')
        .map(str::trim)
        .collect();
    if cols != CSV_HEADER {
        return Err(GeometryError::MissingHeader);
    }

    let mut points = Vec::new();
    let mut wl = Vec::new();
    let mut wr = Vec::new();
    for (k, line) in lines.enumerate() {
        let row = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(GeometryError::Row {
                row,
                reason: format!("expected 4 columns, found {}", fields.len()),
            });
        }
        let mut vals = [0.0; 4];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f.parse::<f64>().map_err(|_| GeometryError::Row {
                row,
                reason: format!("cannot parse '{f}'"),
            })?;
            if !v.is_finite() {
                return Err(GeometryError::Row {
                    row,
                    reason: "non-finite value".into(),
                });
            }
        }
        if vals[2] <= 0.0 || vals[3] <= 0.0 {
            return Err(GeometryError::Row {
                row,
                reason: "width must be positive".into(),
            });
        }
        if let Some(&prev) = points.last() {
            let spacing = Vec2::new(vals[0], vals[1]).dist(prev);
            if spacing > MAX_FILE_SPACING {
                return Err(GeometryError::Row {
                    row,
                    reason: format!("spacing {spacing:.3} m exceeds {MAX_FILE_SPACING} m"),
                });
            }
        }
        points.push(Vec2::new(vals[0], vals[1]));
        wl.push(vals[2]);
        wr.push(vals[3]);
    }
    if points.len() < MIN_FILE_POINTS {
        return Err(GeometryError::TooFewPoints {
            found: points.len(),
            required: MIN_FILE_POINTS,
        });
    }
    TrackModel::from_samples(&points, &wl, &wr)
}
