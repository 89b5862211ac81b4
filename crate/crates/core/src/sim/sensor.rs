//! Statistical opponent detector with line-of-sight occlusion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Agent, World};
use crate::geometry::{FrenetPose, Vec2};
use crate::tracker::Detection;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionNoiseModel {
    /// Mean detection error in the ego body frame (forward, left) [m].
    pub bias: [f64; 2],
    pub sigma: [f64; 2],
    pub tpr: f64,
    /// Probability of one false detection per frame.
    pub fdr: f64,
    pub fov_range: f64,
    /// Total field-of-view angle centered on the ego heading [rad].
    pub fov_angle: f64,
    pub seed: u64,
}

impl Default for DetectionNoiseModel {
    fn default() -> Self {
        Self {
            bias: [-0.08, 0.01],
            sigma: [0.06, 0.06],
            tpr: 0.97,
            fdr: 0.02,
            fov_range: 10.0,
            fov_angle: 270f64.to_radians(),
            seed: 0,
        }
    }
}

/// One sensing frame: what was reported and which opponents were visible.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorFrame {
    pub detections: Vec<Detection<f64>>,
    /// Opponent ids passing the range, field-of-view and line-of-sight tests.
    pub visible: Vec<u64>,
}

/// Detector state: the noise model plus its own random stream.
#[derive(Debug, Clone)]
pub struct Sensor {
    pub model: DetectionNoiseModel,
    rng: ChaCha8Rng,
}

impl Sensor {
    pub fn new(model: DetectionNoiseModel) -> Self {
        Self {
            model,
            rng: ChaCha8Rng::seed_from_u64(model.seed),
        }
    }

    pub fn synthesize(&mut self, world: &World) -> SensorFrame {
        synthesize_detections(world, self)
    }
}

/// Whether the straight sight line from `from` to `target` is clear of
/// other footprints and stays inside the track corridor.
pub fn line_of_sight(world: &World, from: Vec2, target: &Agent) -> bool {
    for o in &world.opponents {
        if o.id != target.id
            && o.footprint()
                .intersects_segment(from, target.state.position())
        {
            return false;
        }
    }
    let to = target.state.position();
    let track = world.track();
    let len = from.dist(to);
    let steps = (len / 0.1).ceil().max(1.0) as usize;
    let mut hint = world.ego.state.s;
    for k in 1..steps {
        let p = from.lerp(to, k as f64 / steps as f64);
        match track.cart_to_frenet_near(p, hint, 2.0) {
            Ok(FrenetPose { s, d }) => {
                if d > track.width_left_at(s) || d < -track.width_right_at(s) {
                    return false;
                }
                hint = s;
            }
            Err(_) => return false,
        }
    }
    true
}

pub fn synthesize_detections(world: &World, sensor: &mut Sensor) -> SensorFrame {
    let m = sensor.model;
    let ego = &world.ego.state;
    let origin = ego.position();
    let rot_bias = Vec2::new(m.bias[0], m.bias[1]).rotate(ego.psi);
    let nx = Normal::new(0.0, m.sigma[0].max(0.0)).expect("finite sigma");
    let ny = Normal::new(0.0, m.sigma[1].max(0.0)).expect("finite sigma");
    let t = world.t;
    let mut out = SensorFrame {
        detections: Vec::new(),
        visible: Vec::new(),
    };

    for opp in &world.opponents {
        let p = opp.state.position();
        let rel = p - origin;
        if rel.norm() > m.fov_range {
            continue;
        }
        let bearing = crate::geometry::wrap_angle(rel.angle() - ego.psi);
        if bearing.abs() > 0.5 * m.fov_angle {
            continue;
        }
        if !line_of_sight(world, origin, opp) {
            continue;
        }
        out.visible.push(opp.id);
        // draws happen for every visible opponent so the stream stays aligned
        let hit = sensor.rng.random_bool(m.tpr.clamp(0.0, 1.0));
        let noise = Vec2::new(nx.sample(&mut sensor.rng), ny.sample(&mut sensor.rng));
        if hit {
            let z = p + rot_bias + noise;
            out.detections.push(Detection {
                z: z.to_array(),
                extent: opp.spec.footprint,
                timestamp: t,
            });
        }
    }

    if sensor.rng.random_bool(m.fdr.clamp(0.0, 1.0)) {
        let track = world.track();
        let s = sensor.rng.random_range(0.0..track.length());
        let u: f64 = sensor.rng.random_range(0.0..1.0);
        let (wl, wr) = (track.width_left_at(s), track.width_right_at(s));
        let d = -wr + u * (wl + wr);
        let z = track.frenet_to_cart(FrenetPose::new(s, d));
        out.detections.push(Detection {
            z: z.to_array(),
            extent: [0.5, 0.3],
            timestamp: t,
        });
    }
    out
}
