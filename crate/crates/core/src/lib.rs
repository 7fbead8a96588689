//! Structure-preserving mixup for synthetic tabular data.
//!
//! Synthetic rows are affine combinations `W·x_i + (1−W)·x_j` of two
//! original rows. When the weight law satisfies `E[W²] = E[W]` the synthetic
//! data keeps the mean, variance and covariance of the original data, and the
//! conditional moments given a categorical column stay within a gap that is
//! controlled by the `u`-function of the weight law.
//!
//! The numeric core is generic over [`Scalar`] (implemented for `f32` and
//! `f64`); the aliases at the bottom of this file fix the scalar to `f64`,
//! which is what the CLI and the experiment harness use.

pub mod data;
pub mod error;
pub mod harness;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod special_fn;
pub mod stats;
pub mod synthesis;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type WeightDistribution = weights::WeightDistribution<f64>;
pub type WeightDistributionF32 = weights::WeightDistribution<f32>;
pub type EpBetaParams = solver::EpBetaParams<f64>;
pub type SolverRequest = solver::SolverRequest<f64>;
pub type Dataset = data::Dataset<f64>;
pub type DatasetF32 = data::Dataset<f32>;
pub type MixupConfig = synthesis::MixupConfig<f64>;
pub type StatsReport = stats::StatsReport<f64>;
pub type BiasReport = stats::BiasReport<f64>;
pub type OlsFit = stats::OlsFit<f64>;
pub type DriftTrace = harness::DriftTrace<f64>;
pub type InferenceResult = harness::InferenceResult<f64>;

pub use data::{ColumnKind, ColumnSpec, Schema};
pub use weights::Joint;
