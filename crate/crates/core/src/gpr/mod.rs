//! Gaussian-process regression of opponent lateral offset and speed over arc length.

mod gp;
pub mod linalg;
mod profile;

use std::collections::BTreeMap;

use thiserror::Error;

pub use gp::{gp_fit, GpModel, PriorMean, RbfKernel};
pub use profile::{
    FittedProfile, HyperparamDump, OpponentProfile, ProfileConfig, ProfileDump, ProfileObservation,
    SeriesDump,
};

use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GprError {
    #[error("GP needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite input or target")]
    NonFinite,
    #[error("kernel matrix not positive definite after maximum jitter")]
    NotPositiveDefinite,
}

/// Routes observations to per-opponent profiles keyed by tracker id.
#[derive(Debug, Clone)]
pub struct ProfileBook<T> {
    track_length: T,
    cfg: ProfileConfig<T>,
    profiles: BTreeMap<u64, OpponentProfile<T>>,
}

impl<T: Real> ProfileBook<T> {
    pub fn new(track_length: T, cfg: ProfileConfig<T>) -> Self {
        Self {
            track_length,
            cfg,
            profiles: BTreeMap::new(),
        }
    }

    pub fn ingest(&mut self, id: u64, obs: ProfileObservation<T>) -> Result<bool, GprError> {
        let (len, cfg) = (self.track_length, self.cfg);
        self.profiles
            .entry(id)
            .or_insert_with(|| OpponentProfile::new(id, len, cfg))
            .ingest(obs)
    }

    pub fn get(&self, id: u64) -> Option<&OpponentProfile<T>> {
        self.profiles.get(&id)
    }

    pub fn get_mut(&mut self, id: u64) -> Option<&mut OpponentProfile<T>> {
        self.profiles.get_mut(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &OpponentProfile<T>> {
        self.profiles.values()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}
