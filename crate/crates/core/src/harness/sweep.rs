use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::overtake_rate;
use super::pipeline::{run_loaded, PipelineConfig};
use super::HarnessError;
use crate::sim::{Mode, Scenario, StopCondition};

/// Smallest overtake success rate that still counts a scaler as mastered.
pub const SUCCESS_FLOOR: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub s: f64,
    pub runs: usize,
    pub n_ot: u64,
    pub n_crash: u64,
    /// `null` when no run produced an overtake or a crash.
    pub r_otc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Largest scaler whose rate reaches the success floor.
    pub s_max: Option<f64>,
    pub floor: f64,
}

/// Runs `base` once per (scaler, seed) with every opponent set to the scaler.
///
/// Runs without a stop condition end after five overtakes.
pub fn sweep_speed_scaler(
    base: &Scenario,
    scalers: &[f64],
    seeds: &[u64],
    cfg: &PipelineConfig,
) -> Result<SweepReport, HarnessError> {
    if scalers.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(HarnessError::Config(
            "scalers must be strictly ascending".into(),
        ));
    }
    if seeds.is_empty() {
        return Err(HarnessError::Config("at least one seed is required".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..scalers.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let results: Vec<(usize, u64, u64)> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let mut sc = base.clone();
            sc.seed = seed;
            sc.mode = Mode::TrailAndOvertake;
            sc.stop = Some(base.stop.unwrap_or(StopCondition::NOvertakes(5)));
            sc.opponents
                .iter_mut()
                .for_each(|o| o.speed_scaler = scalers[i]);
            let art = run_loaded(&sc, cfg)?;
            Ok((i, art.report.n_ot, art.report.n_crash))
        })
        .collect::<Result<_, HarnessError>>()?;

    let mut rows: Vec<SweepRow> = scalers
        .iter()
        .map(|&s| SweepRow {
            s,
            runs: 0,
            n_ot: 0,
            n_crash: 0,
            r_otc: None,
        })
        .collect();
    for (i, ot, c) in results {
        rows[i].runs += 1;
        rows[i].n_ot += ot;
        rows[i].n_crash += c;
    }
    for r in &mut rows {
        r.r_otc = overtake_rate(r.n_ot, r.n_crash);
    }
    let s_max = rows
        .iter()
        .filter(|r| r.r_otc.is_some_and(|x| x >= SUCCESS_FLOOR))
        .map(|r| r.s)
        .next_back();
    Ok(SweepReport {
        rows,
        s_max,
        floor: SUCCESS_FLOOR,
    })
}
