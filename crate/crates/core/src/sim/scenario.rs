use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AgentSpec, Behavior, DetectionNoiseModel, Role, SimError};

fn default_dt() -> f64 {
    0.025
}

fn default_duration() -> f64 {
    120.0
}

fn default_footprint() -> [f64; 2] {
    [0.5, 0.3]
}

fn default_ego_behavior() -> Behavior {
    Behavior::RacingLine
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoSpec {
    #[serde(default = "default_ego_behavior")]
    pub behavior: Behavior,
    /// Speed cap of the ego reference line [m/s].
    pub lap_speed: f64,
    #[serde(default)]
    pub start_s: f64,
    #[serde(default = "default_footprint")]
    pub footprint: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpponentSpec {
    pub behavior: Behavior,
    pub speed_scaler: f64,
    pub start_s: f64,
    #[serde(default = "default_footprint")]
    pub footprint: [f64; 2],
}

/// Scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Track CSV, relative paths resolved against the scenario file.
    pub track: PathBuf,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
    pub ego: EgoSpec,
    #[serde(default)]
    pub opponents: Vec<OpponentSpec>,
    #[serde(default)]
    pub noise: DetectionNoiseModel,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopCondition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Ego follows its line and never plans around opponents.
    TrackOnly,
    #[default]
    TrailAndOvertake,
    /// Ego trails the opponents and never overtakes.
    TrackingEval,
}

/// Exactly one stop condition per run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCondition {
    NOvertakes(u32),
    NLaps(u32),
    Duration(f64),
}

impl Scenario {
    pub fn from_json(text: &str, base_dir: Option<&Path>) -> Result<Self, SimError> {
        let mut sc: Scenario =
            serde_json::from_str(text).map_err(|e| SimError::Scenario(e.to_string()))?;
        if let Some(dir) = base_dir {
            if sc.track.is_relative() {
                sc.track = dir.join(&sc.track);
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Scenario(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, path.parent())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Scenario(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.duration_s > 0.0) {
            return bad("duration_s must be positive");
        }
        if !(self.ego.lap_speed > 0.0 && self.ego.lap_speed.is_finite()) {
            return bad("ego.lap_speed must be positive");
        }
        if self.ego.behavior == Behavior::ReactiveGap {
            return bad("the ego cannot use reactive_gap");
        }
        for o in &self.opponents {
            if !(o.speed_scaler > 0.0 && o.speed_scaler <= 1.5) {
                return bad("speed_scaler must lie in (0, 1.5]");
            }
        }
        let n = &self.noise;
        if !(0.0..=1.0).contains(&n.tpr) || !(0.0..=1.0).contains(&n.fdr) {
            return bad("noise.tpr and noise.fdr must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn ego_spec(&self) -> AgentSpec {
        AgentSpec {
            role: Role::Ego,
            behavior: self.ego.behavior,
            speed_scaler: 1.0,
            footprint: self.ego.footprint,
            start_s: self.ego.start_s,
        }
    }

    pub fn opponent_specs(&self) -> Vec<AgentSpec> {
        self.opponents
            .iter()
            .map(|o| AgentSpec {
                role: Role::Opponent,
                behavior: o.behavior,
                speed_scaler: o.speed_scaler,
                footprint: o.footprint,
                start_s: o.start_s,
            })
            .collect()
    }
}
