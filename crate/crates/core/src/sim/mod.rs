//! Closed-track multi-agent simulator.

mod adjudicate;
pub mod reactive;
mod scenario;
mod sensor;
pub mod shapes;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    make_reference_line, FrenetPose, GeometryError, LineKind, RefLineConfig, ReferenceLine,
    TrackModel, Vec2,
};
use crate::Real;

pub use adjudicate::{Adjudicator, Event, EventKind};
pub use reactive::GapConfig;
pub use scenario::{EgoSpec, Mode, OpponentSpec, Scenario, StopCondition};
pub use sensor::{line_of_sight, synthesize_detections, DetectionNoiseModel, Sensor, SensorFrame};
use shapes::Footprint;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid agent: {0}")]
    InvalidAgent(String),
    #[error("scenario: {0}")]
    Scenario(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    RacingLine,
    ShortestPath,
    Centerline,
    ReactiveGap,
}

impl Behavior {
    pub const ALL: [Behavior; 4] = [
        Behavior::RacingLine,
        Behavior::ShortestPath,
        Behavior::Centerline,
        Behavior::ReactiveGap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Behavior::RacingLine => "racing_line",
            Behavior::ShortestPath => "shortest_path",
            Behavior::Centerline => "centerline",
            Behavior::ReactiveGap => "reactive_gap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Ego,
    Opponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub role: Role,
    pub behavior: Behavior,
    /// Ego lap time over this agent's lap time.
    pub speed_scaler: f64,
    /// `[length, width]` [m].
    pub footprint: [f64; 2],
    pub start_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentState {
    pub s: f64,
    /// Arc length travelled since the start [m].
    pub progress: f64,
    pub d: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
    /// Cartesian velocity over the last step [m/s].
    pub vel: [f64; 2],
}

impl AgentState {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub id: u64,
    pub spec: AgentSpec,
    pub state: AgentState,
    line: Arc<ReferenceLine>,
}

impl Agent {
    pub fn footprint(&self) -> Footprint {
        Footprint {
            center: self.state.position(),
            heading: self.state.psi,
            length: self.spec.footprint[0],
            width: self.spec.footprint[1],
        }
    }

    /// Line this agent follows (scaled to its pace for opponents).
    pub fn line(&self) -> &ReferenceLine {
        &self.line
    }

    fn start_u(&self) -> f64 {
        self.spec.start_s
    }
}

/// Reference lines of every behavior at the ego lap speed.
#[derive(Debug, Clone)]
pub struct LineSet {
    pub racing: Arc<ReferenceLine>,
    pub shortest: Arc<ReferenceLine>,
    pub center: Arc<ReferenceLine>,
}

impl LineSet {
    pub fn build(
        track: &TrackModel,
        lap_speed: f64,
        cfg: &RefLineConfig,
    ) -> Result<Self, GeometryError> {
        Ok(Self {
            racing: Arc::new(make_reference_line(
                track,
                LineKind::RacingLine,
                lap_speed,
                cfg,
            )?),
            shortest: Arc::new(make_reference_line(
                track,
                LineKind::ShortestPath,
                lap_speed,
                cfg,
            )?),
            center: Arc::new(make_reference_line(
                track,
                LineKind::Centerline,
                lap_speed,
                cfg,
            )?),
        })
    }

    pub fn for_behavior(&self, b: Behavior) -> &Arc<ReferenceLine> {
        match b {
            Behavior::RacingLine => &self.racing,
            Behavior::ShortestPath => &self.shortest,
            Behavior::Centerline | Behavior::ReactiveGap => &self.center,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub ego_accel: f64,
    pub ego_brake: f64,
    /// Largest lateral offset change per metre of travel for the ego.
    pub ego_lateral_slope: f64,
    pub gap: GapConfig,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            ego_accel: 4.0,
            ego_brake: 10.0,
            ego_lateral_slope: 1.0,
            gap: GapConfig::default(),
        }
    }
}

/// Outcome of a run: ordered events and completed ego lap times.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub events: Vec<Event>,
    pub lap_times: Vec<f64>,
    pub crashed: bool,
}

#[derive(Debug, Clone)]
pub struct World {
    pub t: f64,
    track: Arc<TrackModel>,
    pub ego: Agent,
    pub opponents: Vec<Agent>,
    pub cfg: WorldConfig,
    ego_plan: Arc<ReferenceLine>,
    ego_speed_cap: f64,
    adjudicator: Option<Adjudicator>,
    pub outcome: SimOutcome,
}

impl World {
    /// Places the ego and opponents on `track`. Opponent ids are 1, 2, ... in order.
    pub fn new(
        track: Arc<TrackModel>,
        lines: &LineSet,
        ego: AgentSpec,
        opponents: &[AgentSpec],
        cfg: WorldConfig,
    ) -> Result<Self, SimError> {
        let ego_line = lines.for_behavior(ego.behavior).clone();
        let t_ego = ego_line.lap_time();
        let mut all = Vec::new();
        for (k, spec) in opponents.iter().enumerate() {
            if !(spec.speed_scaler > 0.0 && spec.speed_scaler.is_finite()) {
                return Err(SimError::InvalidAgent(format!(
                    "opponent {} speed_scaler must be positive",
                    k + 1
                )));
            }
            if !(spec.footprint[0] > 0.0 && spec.footprint[1] > 0.0) {
                return Err(SimError::InvalidAgent(format!(
                    "opponent {} footprint must be positive",
                    k + 1
                )));
            }
            let base = lines.for_behavior(spec.behavior);
            let factor = spec.speed_scaler * base.lap_time() / t_ego;
            let line = Arc::new(base.scaled(factor));
            all.push(Agent::place(k as u64 + 1, *spec, line, &track));
        }
        let ego_agent = Agent::place(0, ego, ego_line.clone(), &track);
        let mut w = Self {
            t: 0.0,
            track,
            ego: ego_agent,
            opponents: all,
            cfg,
            ego_plan: ego_line,
            ego_speed_cap: f64::INFINITY,
            adjudicator: None,
            outcome: SimOutcome::default(),
        };
        let hysteresis = ego.footprint[0];
        w.adjudicator = Some(Adjudicator::new(&w, hysteresis));
        Ok(w)
    }

    pub fn track(&self) -> &TrackModel {
        &self.track
    }

    pub fn track_arc(&self) -> &Arc<TrackModel> {
        &self.track
    }

    pub fn ego_plan(&self) -> &Arc<ReferenceLine> {
        &self.ego_plan
    }

    pub fn set_ego_plan(&mut self, plan: Arc<ReferenceLine>) {
        self.ego_plan = plan;
    }

    pub fn set_ego_speed_cap(&mut self, cap: f64) {
        self.ego_speed_cap = cap.max(0.0);
    }

    pub fn crashed(&self) -> bool {
        self.outcome.crashed
    }

    /// Lead of the ego over opponent index `k` in unwrapped arc length.
    pub fn ego_lead(&self, k: usize) -> f64 {
        self.adjudicator.as_ref().map_or(0.0, |a| a.lead(self, k))
    }

    /// Overtakes minus re-passes per opponent.
    pub fn passes(&self) -> Vec<i64> {
        self.adjudicator
            .as_ref()
            .map_or_else(Vec::new, |a| a.passes().to_vec())
    }
}

impl Agent {
    fn place(id: u64, spec: AgentSpec, line: Arc<ReferenceLine>, track: &TrackModel) -> Self {
        let s = track.wrap_s(spec.start_s);
        let (d, slope) = match spec.behavior {
            Behavior::ReactiveGap => (0.0, 0.0),
            _ => (line.offset_at(s), line.slope_at(s)),
        };
        let v = line.speed_at(s);
        let mut a = Agent {
            id,
            spec,
            state: AgentState {
                s,
                d,
                v,
                ..Default::default()
            },
            line,
        };
        a.spec.start_s = s;
        a.set_pose(track, s, d, slope);
        a
    }

    fn set_pose(&mut self, track: &TrackModel, s: f64, d: f64, slope: f64) {
        let p = track.frenet_to_cart(FrenetPose::new(s, d));
        let k = track.curvature_at(s);
        self.state.s = s;
        self.state.d = d;
        self.state.x = p.x;
        self.state.y = p.y;
        self.state.psi = track.heading_at(s) + slope.atan2((1.0 - k * d).max(0.05));
    }
}

/// Advances every agent by `dt` and adjudicates. Returns the new events; a
/// crash ends the run and later calls do nothing.
pub fn step_world(world: &mut World, dt: f64) -> Vec<Event> {
    if world.outcome.crashed || !(dt > 0.0) {
        return Vec::new();
    }
    let prev_t = world.t;
    let prev_u = world.ego.start_u() + world.ego.state.progress;
    let footprints: Vec<(u64, Footprint)> = std::iter::once(&world.ego)
        .chain(&world.opponents)
        .map(|a| (a.id, a.footprint()))
        .collect();
    let track = world.track.clone();

    step_ego(world, &track, dt);
    let gap = world.cfg.gap;
    for opp in world.opponents.iter_mut() {
        let before = opp.state.position();
        match opp.spec.behavior {
            Behavior::ReactiveGap => {
                let others: Vec<Footprint> = footprints
                    .iter()
                    .filter(|(id, _)| *id != opp.id)
                    .map(|&(_, f)| f)
                    .collect();
                step_reactive(opp, &track, &others, &gap, dt);
            }
            _ => step_scripted(opp, &track, dt),
        }
        let after = opp.state.position();
        opp.state.vel = ((after - before) * (1.0 / dt)).to_array();
    }
    world.t = prev_t + dt;

    let mut adj = world.adjudicator.take().expect("adjudicator present");
    let events = adj.adjudicate(world, prev_t, prev_u);
    world.adjudicator = Some(adj);
    for e in &events {
        match e.kind {
            EventKind::LapComplete { lap_time, .. } => world.outcome.lap_times.push(lap_time),
            EventKind::Crash { .. } => world.outcome.crashed = true,
            EventKind::Overtake { .. } => {}
        }
    }
    world.outcome.events.extend(events.iter().copied());
    events
}

fn step_ego(world: &mut World, track: &TrackModel, dt: f64) {
    let plan = world.ego_plan.clone();
    let cfg = world.cfg;
    let ego = &mut world.ego;
    let before = ego.state.position();
    let target_v = plan.speed_at(ego.state.s).min(world.ego_speed_cap);
    let v = target_v
        .clamp(
            ego.state.v - cfg.ego_brake * dt,
            ego.state.v + cfg.ego_accel * dt,
        )
        .max(0.0);
    let ds = v * dt;
    let s = track.wrap_s(ego.state.s + ds);
    let want = plan.offset_at(s);
    let max_dd = cfg.ego_lateral_slope * ds;
    let d = ego.state.d + (want - ego.state.d).clamp(-max_dd, max_dd);
    let slope = if ds > 0.0 {
        (d - ego.state.d) / ds
    } else {
        0.0
    };
    ego.state.v = v;
    ego.state.progress += ds;
    ego.set_pose(track, s, d, slope);
    ego.state.vel = ((ego.state.position() - before) * (1.0 / dt)).to_array();
}

fn step_scripted(opp: &mut Agent, track: &TrackModel, dt: f64) {
    let v = opp.line.speed_at(opp.state.s);
    let ds = v * dt;
    let s = track.wrap_s(opp.state.s + ds);
    opp.state.v = v;
    opp.state.progress += ds;
    let (d, slope) = (opp.line.offset_at(s), opp.line.slope_at(s));
    opp.set_pose(track, s, d, slope);
}

fn step_reactive(
    opp: &mut Agent,
    track: &TrackModel,
    others: &[Footprint],
    gap: &GapConfig,
    dt: f64,
) {
    let st = opp.state;
    let scan = reactive::range_scan(track, st.s, st.position(), st.psi, others, gap);
    let target = reactive::gap_heading(&scan, gap.free_range, track.heading_at(st.s));
    let psi = reactive::steer(st.psi, target, dt, gap.max_turn_rate);
    let v = opp.line.speed_at(st.s);
    let p = st.position() + Vec2::from_angle(psi) * (v * dt);
    let q = track
        .cart_to_frenet_near(p, st.s, 2.0)
        .unwrap_or(FrenetPose::new(st.s + v * dt, st.d));
    let half = 0.5 * opp.spec.footprint[1];
    let d = q.d.clamp(
        -track.width_right_at(q.s) + half,
        track.width_left_at(q.s) - half,
    );
    let ds = (q.s - st.s + 0.5 * track.length()).wrap(track.length()) - 0.5 * track.length();
    let pos = track.frenet_to_cart(FrenetPose::new(q.s, d));
    opp.state.s = q.s;
    opp.state.d = d;
    opp.state.x = pos.x;
    opp.state.y = pos.y;
    opp.state.psi = crate::geometry::wrap_angle(psi);
    opp.state.v = v;
    opp.state.progress += ds;
}

/// Per-step record of every agent for the trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub agents: Vec<TraceAgent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceAgent {
    pub id: u64,
    pub s: f64,
    pub d: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
}

impl TraceRecord {
    pub fn capture(world: &World) -> Self {
        let agents = std::iter::once(&world.ego)
            .chain(&world.opponents)
            .map(|a| TraceAgent {
                id: a.id,
                s: a.state.s,
                d: a.state.d,
                x: a.state.x,
                y: a.state.y,
                psi: a.state.psi,
                v: a.state.v,
            })
            .collect();
        Self { t: world.t, agents }
    }
}

/// Ground truth of one frame for tracking evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub t: f64,
    pub opponents: Vec<TruthOpponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthOpponent {
    pub id: u64,
    pub p: [f64; 2],
    pub v: [f64; 2],
    pub visible: bool,
}

impl TruthRecord {
    pub fn capture(world: &World, visible: &[u64]) -> Self {
        let opponents = world
            .opponents
            .iter()
            .map(|o| TruthOpponent {
                id: o.id,
                p: o.state.position().to_array(),
                v: o.state.vel,
                visible: visible.contains(&o.id),
            })
            .collect();
        Self {
            t: world.t,
            opponents,
        }
    }
}
