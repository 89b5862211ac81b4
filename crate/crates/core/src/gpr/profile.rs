use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{gp_fit, GpModel, GprError, PriorMean, RbfKernel};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig<T> {
    pub d_kernel: RbfKernel<T>,
    pub vs_kernel: RbfKernel<T>,
    pub max_points: usize,
    /// Observations closer than this (wrapped) to a stored input are dropped [m].
    pub min_gap: T,
    /// Number of equal arc-length bins used to measure coverage.
    pub coverage_bins: usize,
    pub coverage_min: T,
    /// New points needed before a stale fit is refreshed.
    pub refit_batch: usize,
}

impl<T: Real> ProfileConfig<T> {
    pub fn for_track(length: T) -> Self {
        let max_points = 400;
        Self {
            d_kernel: RbfKernel::new(T::two(), T::half(), T::lit(0.1)),
            vs_kernel: RbfKernel::new(T::two(), T::one(), T::lit(0.3)),
            max_points,
            min_gap: length / T::lit(max_points as f64),
            coverage_bins: 100,
            coverage_min: T::lit(0.9),
            refit_batch: 5,
        }
    }
}

/// One opponent observation in track coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileObservation<T> {
    pub s: T,
    pub d: T,
    pub vs: T,
}

/// Immutable snapshot of the two fitted GPs of one opponent.
#[derive(Debug, Clone)]
pub struct FittedProfile<T> {
    pub opponent_id: u64,
    pub gp_d: GpModel<T>,
    pub gp_vs: GpModel<T>,
}

/// Online per-opponent data for the lateral-offset and speed GPs.
#[derive(Debug, Clone)]
pub struct OpponentProfile<T> {
    opponent_id: u64,
    track_length: T,
    cfg: ProfileConfig<T>,
    // sorted by s
    samples: Vec<ProfileObservation<T>>,
    bin_counts: Vec<u32>,
    covered_bins: usize,
    pending: usize,
    fitted: Option<Arc<FittedProfile<T>>>,
}

impl<T: Real> OpponentProfile<T> {
    pub fn new(opponent_id: u64, track_length: T, cfg: ProfileConfig<T>) -> Self {
        Self {
            opponent_id,
            track_length,
            cfg,
            samples: Vec::new(),
            bin_counts: vec![0; cfg.coverage_bins.max(1)],
            covered_bins: 0,
            pending: 0,
            fitted: None,
        }
    }

    pub fn opponent_id(&self) -> u64 {
        self.opponent_id
    }

    pub fn config(&self) -> &ProfileConfig<T> {
        &self.cfg
    }

    pub fn samples(&self) -> &[ProfileObservation<T>] {
        &self.samples
    }

    /// Fraction of arc-length bins holding at least one stored observation.
    pub fn coverage(&self) -> T {
        T::lit(self.covered_bins as f64) / T::lit(self.bin_counts.len() as f64)
    }

    pub fn ready(&self) -> bool {
        self.coverage() >= self.cfg.coverage_min
    }

    fn bin_of(&self, s: T) -> usize {
        let nb = self.bin_counts.len();
        let b = (s / self.track_length * T::lit(nb as f64))
            .floor()
            .to_usize()
            .unwrap_or(0);
        b.min(nb - 1)
    }

    fn nearest_gap(&self, s: T) -> T {
        if self.samples.is_empty() {
            return T::infinity();
        }
        let n = self.samples.len();
        let idx = self.samples.partition_point(|o| o.s < s);
        // neighbors on both sides, wrapping at the seam
        let cand = [idx % n, (idx + n - 1) % n];
        cand.iter()
            .map(|&i| self.samples[i].s.wrapped_dist(s, self.track_length))
            .fold(T::infinity(), T::min)
    }

    /// Adds an observation. Returns `Ok(true)` when it was stored and
    /// `Ok(false)` when down-sampling skipped it.
    pub fn ingest(&mut self, obs: ProfileObservation<T>) -> Result<bool, GprError> {
        if !(obs.s.is_finite() && obs.d.is_finite() && obs.vs.is_finite()) {
            return Err(GprError::NonFinite);
        }
        let s = obs.s.wrap(self.track_length);
        if self.samples.len() >= self.cfg.max_points || self.nearest_gap(s) < self.cfg.min_gap {
            return Ok(false);
        }
        let idx = self.samples.partition_point(|o| o.s < s);
        self.samples.insert(idx, ProfileObservation { s, ..obs });
        let b = self.bin_of(s);
        if self.bin_counts[b] == 0 {
            self.covered_bins += 1;
        }
        self.bin_counts[b] += 1;
        self.pending += 1;
        Ok(true)
    }

    /// Forces a refit from the stored observations.
    pub fn refit(&mut self) -> Result<Arc<FittedProfile<T>>, GprError> {
        let s: Vec<T> = self.samples.iter().map(|o| o.s).collect();
        let d: Vec<T> = self.samples.iter().map(|o| o.d).collect();
        let vs: Vec<T> = self.samples.iter().map(|o| o.vs).collect();
        let gp_d = gp_fit(
            &s,
            &d,
            self.cfg.d_kernel,
            self.track_length,
            PriorMean::Zero,
        )?;
        let gp_vs = gp_fit(
            &s,
            &vs,
            self.cfg.vs_kernel,
            self.track_length,
            PriorMean::SampleMean,
        )?;
        let fit = Arc::new(FittedProfile {
            opponent_id: self.opponent_id,
            gp_d,
            gp_vs,
        });
        self.fitted = Some(fit.clone());
        self.pending = 0;
        Ok(fit)
    }

    /// Current fit, refreshed lazily once enough new points have arrived.
    pub fn fitted(&mut self) -> Result<Arc<FittedProfile<T>>, GprError> {
        match &self.fitted {
            Some(f) if self.pending < self.cfg.refit_batch => Ok(f.clone()),
            _ => self.refit(),
        }
    }

    /// Last fit without refreshing.
    pub fn last_fit(&self) -> Option<Arc<FittedProfile<T>>> {
        self.fitted.clone()
    }
}

/// Serializable view of a profile for offline inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileDump {
    pub opponent_id: u64,
    pub coverage: f64,
    pub d: SeriesDump,
    pub vs: SeriesDump,
    pub hyperparams: HyperparamDump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDump {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparamDump {
    pub d: RbfKernel<f64>,
    pub vs: RbfKernel<f64>,
    pub min_gap: f64,
    pub max_points: usize,
    pub coverage_bins: usize,
    pub coverage_min: f64,
}

impl OpponentProfile<f64> {
    pub fn dump(&self) -> ProfileDump {
        let s: Vec<f64> = self.samples.iter().map(|o| o.s).collect();
        ProfileDump {
            opponent_id: self.opponent_id,
            coverage: self.coverage(),
            d: SeriesDump {
                s: s.clone(),
                y: self.samples.iter().map(|o| o.d).collect(),
            },
            vs: SeriesDump {
                s,
                y: self.samples.iter().map(|o| o.vs).collect(),
            },
            hyperparams: HyperparamDump {
                d: self.cfg.d_kernel,
                vs: self.cfg.vs_kernel,
                min_gap: self.cfg.min_gap,
                max_points: self.cfg.max_points,
                coverage_bins: self.bin_counts.len(),
                coverage_min: self.cfg.coverage_min,
            },
        }
    }
}
