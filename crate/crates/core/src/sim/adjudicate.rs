use serde::{Deserialize, Serialize};

use super::World;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Overtake {
        opponent: u64,
    },
    /// `opponent` is `None` when the ego left the track.
    Crash {
        opponent: Option<u64>,
    },
    LapComplete {
        lap: u32,
        lap_time: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Pass counting with one vehicle length of hysteresis, plus lap timing.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjudicator {
    hysteresis: f64,
    /// Ego-minus-opponent unwrapped progress at the start.
    rel0: Vec<f64>,
    passes: Vec<i64>,
    laps: u32,
    last_crossing: Option<f64>,
}

impl Adjudicator {
    pub fn new(world: &World, hysteresis: f64) -> Self {
        let len = world.track().length();
        let ego_s = world.ego.state.s;
        let rel0 = world
            .opponents
            .iter()
            .map(|o| -world.track().forward_gap(ego_s, o.state.s).min(len))
            .collect();
        let last_crossing = (ego_s.abs() < 1e-9).then_some(0.0);
        Self {
            hysteresis,
            rel0,
            passes: vec![0; world.opponents.len()],
            laps: 0,
            last_crossing,
        }
    }

    /// Signed unwrapped lead of the ego over opponent `k` [m].
    pub fn lead(&self, world: &World, k: usize) -> f64 {
        self.rel0[k] + world.ego.state.progress - world.opponents[k].state.progress
    }

    pub fn passes(&self) -> &[i64] {
        &self.passes
    }

    /// Events caused by the step from `prev_ego_u` (unwrapped ego arc length) to now.
    pub fn adjudicate(&mut self, world: &World, prev_t: f64, prev_ego_u: f64) -> Vec<Event> {
        let mut out = Vec::new();
        let t = world.t;
        let len = world.track().length();

        let ego_u = world.ego.start_u() + world.ego.state.progress;
        let (a, b) = (
            (prev_ego_u / len).floor() as i64,
            (ego_u / len).floor() as i64,
        );
        for k in (a + 1)..=b {
            let frac = (k as f64 * len - prev_ego_u) / (ego_u - prev_ego_u);
            let tc = prev_t + frac * (t - prev_t);
            if let Some(prev) = self.last_crossing {
                self.laps += 1;
                out.push(Event {
                    t: tc,
                    kind: EventKind::LapComplete {
                        lap: self.laps,
                        lap_time: tc - prev,
                    },
                });
            }
            self.last_crossing = Some(tc);
        }

        for k in 0..world.opponents.len() {
            let lead = self.lead(world, k);
            let p = self.passes[k];
            if lead >= p as f64 * len + self.hysteresis {
                self.passes[k] += 1;
                out.push(Event {
                    t,
                    kind: EventKind::Overtake {
                        opponent: world.opponents[k].id,
                    },
                });
            } else if lead <= (p - 1) as f64 * len - self.hysteresis {
                self.passes[k] -= 1;
            }
        }

        if let Some(kind) = crash(world) {
            out.push(Event { t, kind });
        }
        out
    }
}

fn crash(world: &World) -> Option<EventKind> {
    let ego = world.ego.footprint();
    for o in &world.opponents {
        if ego.overlaps(&o.footprint()) {
            return Some(EventKind::Crash {
                opponent: Some(o.id),
            });
        }
    }
    let st = &world.ego.state;
    let half = 0.5 * world.ego.spec.footprint[1];
    let track = world.track();
    if st.d + half > track.width_left_at(st.s) + 1e-9
        || st.d - half < -track.width_right_at(st.s) - 1e-9
    {
        return Some(EventKind::Crash { opponent: None });
    }
    None
}
