//! Timescale decomposition of daily series by singular spectrum analysis,
//! with a Fourier band baseline and penalized Poisson regression on the
//! resulting exposure variables.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod error;
pub mod fft_band;
pub mod gam;
pub mod grouping;
pub mod scalar;
pub mod series;
pub mod ssa;
pub mod synth;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use scalar::Real;

pub type TimeSeries64 = series::TimeSeries<f64>;
pub type StationPanel64 = series::StationPanel<f64>;
pub type TrajectoryMatrix64 = ssa::TrajectoryMatrix<f64>;
pub type Decomposition64 = ssa::Decomposition<f64>;
pub type Eigentriple64 = ssa::Eigentriple<f64>;
pub type WMatrix64 = grouping::WMatrix<f64>;
pub type Grouping64 = grouping::Grouping<f64>;
pub type BandDecomposition64 = fft_band::BandDecomposition<f64>;
pub type Design64 = gam::Design<f64>;
pub type GamFit64 = gam::GamFit<f64>;
pub type ModelSpec64 = gam::ModelSpec<f64>;
