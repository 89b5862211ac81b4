pub mod geometry;
pub mod gpr;
pub mod harness;
pub mod planner;
pub mod prediction;
pub mod scalar;
pub mod sim;
pub mod tracker;

pub use scalar::Real;

pub type Tracker = tracker::TrackerState<f64>;
pub type Tracker32 = tracker::TrackerState<f32>;
pub type Tracklet = tracker::Tracklet<f64>;
pub type Tracklet32 = tracker::Tracklet<f32>;
pub type KfState = tracker::KfState<f64>;
pub type KfState32 = tracker::KfState<f32>;
pub type Detection = tracker::Detection<f64>;
pub type Detection32 = tracker::Detection<f32>;
pub type GpModel = gpr::GpModel<f64>;
pub type GpModel32 = gpr::GpModel<f32>;
pub type OpponentProfile = gpr::OpponentProfile<f64>;
pub type OpponentProfile32 = gpr::OpponentProfile<f32>;
pub type Cholesky = gpr::linalg::Cholesky<f64>;
pub type Cholesky32 = gpr::linalg::Cholesky<f32>;
