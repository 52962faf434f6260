//! Pipeline behind the `timescale` command: preprocessing, SSA and FFT
//! decompositions, Poisson GAM fits, model comparison and simulation.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{Overrides, PipelineConfig, Subcommand};
pub use error::{CliError, ErrorRecord};
pub use pipeline::run;
