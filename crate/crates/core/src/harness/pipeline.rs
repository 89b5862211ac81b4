//! The closed loop: sense, track, regress, predict, plan, step.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::{compute_tracking_metrics, LoopTiming, MetricsReport};
use super::HarnessError;
use crate::geometry::{
    capped_speed, load_track, path_curvature, FrenetPose, RefLineConfig, ReferenceLine, TrackModel,
};
use crate::gpr::{ProfileBook, ProfileConfig, ProfileDump, ProfileObservation};
use crate::planner::{
    build_problem, choose_side, solve_overtake, splice, OtherOpponent, Phase, PlannerConfig,
    PlannerRecord, Side,
};
use crate::prediction::{compute_roc_with, select_target, EgoState, RocConfig, RocRecord};
use crate::sim::{
    step_world, Event, EventKind, LineSet, Mode, Scenario, Sensor, StopCondition, TraceRecord,
    TruthRecord, World, WorldConfig,
};
use crate::tracker::{KfConfig, TrackerConfig, TrackerState, TrackerTraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Simulation steps per planning cycle.
    pub plan_every: usize,
    /// Center-to-center gap held behind an opponent [m].
    pub trail_gap: f64,
    /// Speed cap gain on the gap error [1/s].
    pub gap_gain: f64,
    /// Lateral distance below which an opponent ahead blocks the ego [m].
    pub lane_conflict: f64,
    /// Overtakes start when the RoC is entered within this time [s] ...
    pub trigger_time: f64,
    /// ... or when the ego already trails within this distance of the trail gap [m].
    pub trigger_slack: f64,
    pub roc: RocConfig,
    pub planner: PlannerConfig,
    pub refline: RefLineConfig,
    pub kf: KfConfig<f64>,
    pub tracker: TrackerConfig<f64>,
    pub world: WorldConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            plan_every: 2,
            trail_gap: 1.8,
            gap_gain: 1.5,
            lane_conflict: 0.4,
            trigger_time: 1.5,
            trigger_slack: 0.5,
            roc: RocConfig::default(),
            // longer than the planner's standalone defaults so merges stay gentle at race speed
            planner: PlannerConfig {
                lead_in: 2.0,
                lead_out: 3.0,
                ..PlannerConfig::default()
            },
            refline: RefLineConfig::default(),
            kf: KfConfig::default(),
            tracker: TrackerConfig::default(),
            world: WorldConfig::default(),
        }
    }
}

/// Everything a run produced, kept in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Attempt {
    /// Nothing to do yet.
    Idle,
    /// A trajectory was spliced onto the plan.
    Spliced,
    /// The RoC was due but no feasible trajectory came out.
    Failed,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: MetricsReport,
    pub events: Vec<Event>,
    pub tracker: Vec<TrackerTraceRecord>,
    pub truth: Vec<TruthRecord>,
    pub planner: Vec<PlannerRecord>,
    pub trace: Vec<TraceRecord>,
    /// `(file name, csv)` of every executed overtaking trajectory.
    pub trajectories: Vec<(String, String)>,
    pub profiles: Vec<ProfileDump>,
}

/// Opponent seen by the tracker, in track coordinates.
#[derive(Debug, Clone, Copy)]
struct Observed {
    id: u64,
    pose: FrenetPose,
    vs: f64,
    extent: [f64; 2],
}

#[derive(Debug, Clone, Copy)]
struct Active {
    target: u64,
    side: Side,
    /// Ego progress at which the spliced span ends.
    end_progress: f64,
}

pub(crate) fn build_world(sc: &Scenario, cfg: &PipelineConfig) -> Result<World, HarnessError> {
    let text = std::fs::read_to_string(&sc.track).map_err(|e| HarnessError::io(&sc.track, e))?;
    let track = Arc::new(load_track(&text)?);
    let lines = LineSet::build(&track, sc.ego.lap_speed, &cfg.refline)?;
    Ok(World::new(
        track,
        &lines,
        sc.ego_spec(),
        &sc.opponent_specs(),
        cfg.world,
    )?)
}

/// Runs one scenario to its stop condition.
pub fn run_loaded(sc: &Scenario, cfg: &PipelineConfig) -> Result<RunArtifacts, HarnessError> {
    sc.validate()?;
    let world = build_world(sc, cfg)?;
    Ok(Loop::new(sc, cfg, world).run())
}

struct Loop<'a> {
    sc: &'a Scenario,
    cfg: &'a PipelineConfig,
    mode: Mode,
    stop: StopCondition,
    world: World,
    track: Arc<TrackModel>,
    base: Arc<ReferenceLine>,
    sensor: Sensor,
    tracker: TrackerState<f64>,
    book: ProfileBook<f64>,
    seen: Vec<Observed>,
    active: Option<Active>,
    out: RunArtifacts,
    timing: Vec<f64>,
}

impl<'a> Loop<'a> {
    fn new(sc: &'a Scenario, cfg: &'a PipelineConfig, world: World) -> Self {
        let track = world.track_arc().clone();
        let base = world.ego_plan().clone();
        let len = track.length();
        let mut noise = sc.noise;
        noise.seed = sc.seed;
        // the filter steps in frames; velocities are per frame until scaled
        let mut kf = cfg.kf;
        kf.dt = 1.0;
        let stop = sc.stop.unwrap_or(StopCondition::Duration(sc.duration_s));
        let report = MetricsReport {
            seed: sc.seed,
            mode: sc.mode,
            stop,
            sim_time: 0.0,
            e_pos: None,
            e_vel: None,
            tpr: None,
            fdr: None,
            id_switches: None,
            n_ot: 0,
            n_crash: 0,
            r_otc: None,
            s_scaler: sc.opponents.iter().map(|o| o.speed_scaler).collect(),
            laps: 0,
            mean_lap: None,
            total_time: None,
            null_reasons: Default::default(),
            timing: LoopTiming::default(),
        };
        Self {
            sc,
            cfg,
            mode: sc.mode,
            stop,
            world,
            track,
            base,
            sensor: Sensor::new(noise),
            tracker: TrackerState::new(kf, cfg.tracker),
            book: ProfileBook::new(len, ProfileConfig::for_track(len)),
            seen: Vec::new(),
            active: None,
            out: RunArtifacts {
                report,
                events: Vec::new(),
                tracker: Vec::new(),
                truth: Vec::new(),
                planner: Vec::new(),
                trace: Vec::new(),
                trajectories: Vec::new(),
                profiles: Vec::new(),
            },
            timing: Vec::new(),
        }
    }

    fn t_max(&self) -> f64 {
        match self.stop {
            StopCondition::Duration(d) => d,
            _ => self.sc.duration_s,
        }
    }

    fn run(mut self) -> RunArtifacts {
        let dt = self.sc.dt;
        let t_max = self.t_max();
        let mut step = 0usize;
        self.out.trace.push(TraceRecord::capture(&self.world));
        while self.world.t < t_max - 1e-9 {
            let frame = self.sensor.synthesize(&self.world);
            self.tracker.step(&frame.detections, 1.0);
            let per_second = 1.0 / dt;
            self.out.tracker.push(TrackerTraceRecord::capture(
                self.world.t,
                &self.tracker,
                &frame.detections,
                per_second,
            ));
            self.out
                .truth
                .push(TruthRecord::capture(&self.world, &frame.visible));
            self.observe();

            if step.is_multiple_of(self.cfg.plan_every.max(1)) {
                let clock = Instant::now();
                let rec = self.plan();
                self.timing.push(clock.elapsed().as_secs_f64() * 1e3);
                self.out.planner.push(rec);
            }

            let events = step_world(&mut self.world, dt);
            self.out.trace.push(TraceRecord::capture(&self.world));
            self.out.events.extend(events);
            step += 1;
            if self.done() {
                break;
            }
        }
        self.finish()
    }

    fn done(&self) -> bool {
        if self.world.crashed() {
            return true;
        }
        match self.stop {
            StopCondition::NOvertakes(n) => {
                self.out
                    .events
                    .iter()
                    .filter(|e| matches!(e.kind, EventKind::Overtake { .. }))
                    .count()
                    >= n as usize
            }
            StopCondition::NLaps(n) => self.world.outcome.lap_times.len() >= n as usize,
            StopCondition::Duration(_) => false,
        }
    }

    /// Transforms confirmed tracklets to track coordinates and feeds the profiles.
    fn observe(&mut self) {
        self.seen.clear();
        let track = &self.track;
        for o in self.tracker.confirmed() {
            let p = crate::geometry::Vec2::new(o.p[0], o.p[1]);
            let Ok(pose) = track.cart_to_frenet(p) else {
                continue;
            };
            if pose.d > track.width_left_at(pose.s) + 0.25
                || pose.d < -track.width_right_at(pose.s) - 0.25
            {
                continue;
            }
            let tangent = track.tangent_at(pose.s);
            let stretch = (1.0 - track.curvature_at(pose.s) * pose.d).max(0.05);
            let per_second = 1.0 / self.sc.dt;
            let vs = per_second * (o.v[0] * tangent.x + o.v[1] * tangent.y) / stretch;
            // rejected observations leave the profile unchanged
            let _ = self.book.ingest(
                o.id,
                ProfileObservation {
                    s: pose.s,
                    d: pose.d,
                    vs,
                },
            );
            self.seen.push(Observed {
                id: o.id,
                pose,
                vs,
                extent: o.extent,
            });
        }
    }

    fn plan(&mut self) -> PlannerRecord {
        let t = self.world.t;
        let mut rec = PlannerRecord {
            t,
            phase: Phase::Free,
            roc: None,
            side: None,
            cost: None,
            feasible: None,
        };
        if self.mode == Mode::TrackOnly {
            self.world.set_ego_speed_cap(f64::INFINITY);
            return rec;
        }
        let len = self.track.length();
        let ego = self.world.ego.state;
        if let Some(a) = self.active {
            if ego.progress >= a.end_progress {
                self.world.set_ego_plan(self.base.clone());
                self.active = None;
            }
        }

        let opps: Vec<(u64, FrenetPose, f64)> =
            self.seen.iter().map(|o| (o.id, o.pose, o.vs)).collect();
        let target = select_target(ego.s, &opps, len);
        self.world.set_ego_speed_cap(self.speed_cap(target));

        if let Some(a) = self.active {
            // keep refining the maneuver against the committed target and side
            rec.phase = Phase::Overtaking;
            if let Some(tgt) = self.seen.iter().find(|o| o.id == a.target).copied() {
                let gap = self.track.forward_gap(ego.s, tgt.pose.s);
                if self.attempt(&tgt, Some(a.side), &mut rec) == Attempt::Failed && gap < 0.5 * len
                {
                    // still behind and no safe maneuver left: fall back to trailing
                    self.world.set_ego_plan(self.base.clone());
                    self.active = None;
                    rec.phase = Phase::Trailing;
                }
            }
            self.world.set_ego_speed_cap(self.speed_cap(target));
            return rec;
        }
        let Some(tid) = target else { return rec };
        rec.phase = Phase::Trailing;
        if self.mode == Mode::TrackingEval {
            return rec;
        }
        let tgt = *self
            .seen
            .iter()
            .find(|o| o.id == tid)
            .expect("target is observed");
        if self.attempt(&tgt, None, &mut rec) == Attempt::Spliced {
            rec.phase = Phase::Overtaking;
            // the new plan may clear a lane the old one blocked
            self.world.set_ego_speed_cap(self.speed_cap(target));
        }
        rec
    }

    /// The current plan's offsets with speeds re-derived from the base plan,
    /// so repeated splices do not ratchet the speed profile down.
    fn flown_plan(&self) -> Arc<ReferenceLine> {
        let mut plan = (**self.world.ego_plan()).clone();
        let curv = path_curvature(&self.track, &plan.offsets, 3);
        let cap = capped_speed(&curv, f64::INFINITY, &self.cfg.refline);
        for ((v, b), c) in plan.speed.iter_mut().zip(&self.base.speed).zip(cap) {
            *v = b.min(c);
        }
        Arc::new(plan)
    }

    /// Predicts the RoC against `tgt` and, when it is close enough (or a
    /// maneuver is already under way), solves and splices an overtaking
    /// trajectory onto the current plan. Returns whether a plan was spliced.
    fn attempt(&mut self, tgt: &Observed, side: Option<Side>, rec: &mut PlannerRecord) -> Attempt {
        let t = self.world.t;
        let ego = self.world.ego.state;
        let gap = self.track.forward_gap(ego.s, tgt.pose.s);
        let Some(prof) = self.book.get_mut(tgt.id) else {
            return Attempt::Idle;
        };
        if !prof.ready() {
            return Attempt::Idle;
        }
        let Ok(fit) = prof.fitted() else {
            return Attempt::Idle;
        };
        // once committed, predict with the speeds of the maneuver actually flown
        let reference = if side.is_some() {
            self.flown_plan()
        } else {
            self.base.clone()
        };
        let state = EgoState {
            pose: FrenetPose::new(ego.s, ego.d),
            speed: ego.v,
            plan: &reference,
        };
        let Ok(Some(roc)) = compute_roc_with(&state, tgt.id, tgt.pose.s, &fit, &self.cfg.roc)
        else {
            return Attempt::Idle;
        };
        rec.roc = Some(RocRecord::new(t, &roc));
        let close = roc.t_entry <= self.cfg.trigger_time
            || gap <= self.cfg.trail_gap + self.cfg.trigger_slack;
        if side.is_none() && !close {
            return Attempt::Idle;
        }

        let others: Vec<OtherOpponent> = self
            .seen
            .iter()
            .filter(|o| o.id != tgt.id)
            .map(|o| OtherOpponent {
                id: o.id,
                pose: o.pose,
                extent: o.extent,
            })
            .collect();
        let current = reference.clone();
        let problem = match build_problem(
            &roc,
            ego.s,
            &current,
            &fit,
            &others,
            &self.track,
            &self.cfg.planner,
        ) {
            Ok(p) => p,
            Err(_) => {
                rec.feasible = Some(false);
                return Attempt::Failed;
            }
        };
        let side = match side.map_or_else(|| choose_side(&problem), Ok) {
            Ok(s) => s,
            Err(_) => {
                rec.feasible = Some(false);
                return Attempt::Failed;
            }
        };
        rec.side = Some(side);
        let traj = match solve_overtake(&problem, side) {
            Ok(tr) => tr,
            Err(_) => {
                rec.feasible = Some(false);
                return Attempt::Failed;
            }
        };
        rec.cost = Some(traj.cost);
        rec.feasible = Some(traj.feasible);
        if !traj.feasible {
            return Attempt::Failed;
        }
        let spliced = splice(&traj, &current, &self.track, &self.cfg.planner);
        self.world.set_ego_plan(Arc::new(spliced));
        let last = traj.samples.last().map_or(ego.s, |x| x.s);
        let end = ego.progress + (last - ego.s);
        let fresh = self.active.is_none();
        let end_progress = self.active.map_or(end, |a| a.end_progress.max(end));
        self.active = Some(Active {
            target: tgt.id,
            side,
            end_progress,
        });
        if fresh {
            let k = self.out.trajectories.len() + 1;
            self.out
                .trajectories
                .push((format!("overtake_{k:03}.csv"), traj.to_csv()));
        }
        Attempt::Spliced
    }

    /// Gap-keeping speed cap behind every opponent that blocks the ego's path.
    fn speed_cap(&self, target: Option<u64>) -> f64 {
        let len = self.track.length();
        let ego = self.world.ego.state;
        let plan = self.world.ego_plan();
        let c = self.cfg;
        let mut cap = f64::INFINITY;
        for o in &self.seen {
            let gap = self.track.forward_gap(ego.s, o.pose.s);
            if gap > 0.5 * len {
                continue;
            }
            let lane = (plan.offset_at(o.pose.s) - o.pose.d).abs() < c.lane_conflict
                || (gap < 2.0 * c.planner.vehicle_length
                    && (ego.d - o.pose.d).abs() < c.lane_conflict);
            let blocks = lane || (self.active.is_none() && Some(o.id) == target);
            if blocks {
                cap = cap.min((o.vs + c.gap_gain * (gap - c.trail_gap)).max(0.0));
            }
        }
        cap
    }

    fn finish(mut self) -> RunArtifacts {
        let mut report = self.out.report.clone();
        report.sim_time = self.world.t;
        report.race_fields(&self.out.events, &self.world.outcome.lap_times);
        report.tracking_fields(compute_tracking_metrics(&self.out.tracker, &self.out.truth));
        report.timing = LoopTiming::from_samples(&self.timing);
        self.out.report = report;
        self.out.profiles = self.book.iter().map(|p| p.dump()).collect();
        self.out
    }
}
