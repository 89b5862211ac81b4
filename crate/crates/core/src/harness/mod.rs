//! Scenario runner, metrics and reports.

mod metrics;
mod pipeline;
mod sweep;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::sim::{Mode, Scenario, SimError, StopCondition};

pub use metrics::{
    compute_tracking_metrics, overtake_rate, overtake_segments, LoopTiming, MetricsReport,
    TrackingMetrics, METRIC_GATE,
};
pub use pipeline::{run_loaded, PipelineConfig, RunArtifacts};
pub use sweep::{sweep_speed_scaler, SweepReport, SweepRow, SUCCESS_FLOOR};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("metrics: {0}")]
    Metrics(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One run request. `None` fields fall back to the scenario file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: PathBuf,
    pub mode: Option<Mode>,
    pub stop: Option<StopCondition>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub pipeline: PipelineConfig,
}

impl RunConfig {
    pub fn new(scenario: impl Into<PathBuf>) -> Self {
        Self {
            scenario: scenario.into(),
            mode: None,
            stop: None,
            seed: None,
            out_dir: None,
            pipeline: PipelineConfig::default(),
        }
    }

    /// The scenario with this request's overrides applied.
    pub fn resolve(&self) -> Result<Scenario, HarnessError> {
        let mut sc = Scenario::load(&self.scenario)?;
        if let Some(m) = self.mode {
            sc.mode = m;
        }
        if let Some(s) = self.stop {
            sc.stop = Some(s);
        }
        if let Some(seed) = self.seed {
            sc.seed = seed;
        }
        Ok(sc)
    }
}

/// Loads, runs and (with an output directory) writes every artifact.
pub fn run_scenario(cfg: &RunConfig) -> Result<MetricsReport, HarnessError> {
    let sc = cfg.resolve()?;
    let art = run_loaded(&sc, &cfg.pipeline)?;
    if let Some(dir) = &cfg.out_dir {
        write_artifacts(dir, &art)?;
    }
    Ok(art.report)
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, HarnessError> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    for r in rows {
        serde_json::to_writer(&mut w, r).expect("serializable record");
        w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Writes `report.json`, `timing.json`, the JSON-lines logs, the profile dump
/// and one CSV per executed overtaking trajectory.
pub fn write_artifacts(dir: &Path, art: &RunArtifacts) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    write_json(&dir.join("report.json"), &art.report)?;
    write_json(&dir.join("timing.json"), &art.report.timing)?;
    write_jsonl(&dir.join("events.jsonl"), &art.events)?;
    write_jsonl(&dir.join("tracker.jsonl"), &art.tracker)?;
    write_jsonl(&dir.join("truth.jsonl"), &art.truth)?;
    write_jsonl(&dir.join("planner.jsonl"), &art.planner)?;
    write_jsonl(&dir.join("trace.jsonl"), &art.trace)?;
    write_json(&dir.join("profiles.json"), &art.profiles)?;
    for (name, csv) in &art.trajectories {
        let p = dir.join(name);
        std::fs::write(&p, csv).map_err(|e| HarnessError::io(&p, e))?;
    }
    Ok(())
}

/// Reads a pipeline configuration; missing fields keep their defaults.
pub fn load_pipeline_config(path: &Path) -> Result<PipelineConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

/// Reads a JSON-lines file into records.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| {
                HarnessError::Config(format!("{} line {}: {e}", path.display(), k + 1))
            })
        })
        .collect()
}
