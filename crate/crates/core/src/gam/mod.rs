//! Penalized Poisson regression with cubic regression spline smooths,
//! UBRE-based smoothing selection and inference summaries.

mod design;
mod inference;
mod pirls;
mod report;
mod select;
pub mod spline;

pub use design::{
    build_design, Design, ModelSpec, SmoothBlock, SmoothSetup, SmoothTerm, DEFAULT_BASIS_DIM,
    DOW_LEVELS,
};
pub use inference::{
    compare_models, compare_values, relative_risk, relative_risk_from, ModelComparison,
    RelativeRisk,
};
pub use pirls::{
    fit_pirls, poisson_deviance, ubre_score, validate_counts, GamFit, ParametricSummary,
    SmoothSummary, CONVERGENCE_TOL, MAX_ITERATIONS,
};
pub use report::FitReport;
pub use select::{default_grid, select_smoothing};
