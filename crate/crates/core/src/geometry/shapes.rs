//! Generators for the bundled test tracks.

use std::f64::consts::PI;

use super::Vec2;

pub type Samples = (Vec<Vec2>, Vec<f64>, Vec<f64>);

/// Counter-clockwise circle of radius `r` with `n` samples and constant half-width.
pub fn circle(r: f64, n: usize, half_width: f64) -> Samples {
    let pts = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64 - 0.5 * PI;
            Vec2::new(r * a.cos(), r * a.sin())
        })
        .collect();
    (pts, vec![half_width; n], vec![half_width; n])
}

/// Counter-clockwise stadium: two straights of length `straight` joined by
/// half circles of radius `radius`. Sample 0 sits at the start of the bottom
/// straight.
pub fn oval(straight: f64, radius: f64, half_width: f64, spacing: f64) -> Samples {
    let length = 2.0 * straight + 2.0 * PI * radius;
    let n = (length / spacing).round() as usize;
    let pts = (0..n)
        .map(|k| {
            let s = length * k as f64 / n as f64;
            oval_point(straight, radius, s)
        })
        .collect();
    (pts, vec![half_width; n], vec![half_width; n])
}

fn oval_point(straight: f64, radius: f64, s: f64) -> Vec2 {
    let arc = PI * radius;
    if s < straight {
        Vec2::new(s, 0.0)
    } else if s < straight + arc {
        let a = (s - straight) / radius - 0.5 * PI;
        Vec2::new(straight + radius * a.cos(), radius + radius * a.sin())
    } else if s < 2.0 * straight + arc {
        Vec2::new(straight - (s - straight - arc), 2.0 * radius)
    } else {
        let a = (s - 2.0 * straight - arc) / radius + 0.5 * PI;
        Vec2::new(radius * a.cos(), radius + radius * a.sin())
    }
}

/// Writes samples in the track-file CSV format.
pub fn to_csv(samples: &Samples) -> String {
    let (p, wl, wr) = samples;
    let mut out = String::from("x_m,y_m,w_left_m,w_right_m\n");
    for i in 0..p.len() {
        out.push_str(&format!("{},{},{},{}\n", p[i].x, p[i].y, wl[i], wr[i]));
    }
    out
}
