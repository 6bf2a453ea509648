//! Mixed binary/ternary error model on hexagonal lattice cells, a paired
//! Monte Carlo comparison of a majority-vote decoder against a five-feature
//! regime classifier, and a toolkit of syndrome statistics.
//!
//! The statistics routines are generic over [`num::Real`] (`f32` or `f64`);
//! the aliases below fix the common `f64` and `f32` instantiations.

pub mod calibration;
pub mod config;
pub mod dataset;
pub mod decode;
pub mod error;
pub mod error_model;
pub mod ingest;
pub mod lattice;
pub mod montecarlo;
pub mod num;
pub mod stats;

pub use dataset::SyndromeDataset;
pub use error::{Error, Result};
pub use num::Real;

pub type FitResult = stats::FitResult<f64>;
pub type KwwFit = stats::KwwFit<f64>;
pub type TTest = stats::TTest<f64>;
pub type Anova = stats::Anova<f64>;
pub type AlphaS = stats::AlphaS<f64>;
pub type DfaResult = stats::DfaResult<f64>;

pub type FitResult32 = stats::FitResult<f32>;
pub type KwwFit32 = stats::KwwFit<f32>;
pub type TTest32 = stats::TTest<f32>;
pub type Anova32 = stats::Anova<f32>;
pub type AlphaS32 = stats::AlphaS<f32>;
pub type DfaResult32 = stats::DfaResult<f32>;
