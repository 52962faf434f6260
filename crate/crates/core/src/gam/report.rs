use std::fmt::Write;

use serde::Serialize;

use super::design::{Design, SmoothSetup};
use super::pirls::{GamFit, ParametricSummary, SmoothSummary};
use crate::scalar::Real;

/// Serializable fit summary.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub name: String,
    pub parametric: Vec<ParametricSummary>,
    pub smooths: Vec<SmoothSummary>,
    pub smooth_setup: Vec<SmoothSetup>,
    /// Approximate; squared-residual analogue of R² adjusted by tr(R).
    pub adj_r2_approx: f64,
    pub dev_explained: f64,
    pub deviance: f64,
    pub null_deviance: f64,
    pub tr_r: f64,
    pub ubre: f64,
    pub n: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl FitReport {
    pub fn new<T: Real>(name: &str, fit: &GamFit<T>, design: &Design<T>) -> Self {
        FitReport {
            name: name.to_string(),
            parametric: fit.parametric.clone(),
            smooths: fit.smooths.clone(),
            smooth_setup: design.smooth_setup(),
            adj_r2_approx: fit.adj_r2,
            dev_explained: fit.dev_explained,
            deviance: fit.deviance.as_f64(),
            null_deviance: fit.null_deviance.as_f64(),
            tr_r: fit.tr_r.as_f64(),
            ubre: fit.ubre.as_f64(),
            n: fit.n,
            iterations: fit.iterations,
            converged: fit.converged,
        }
    }

    /// Plain-text estimate table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Model: {}", self.name);
        let _ = writeln!(out, "\nApproximate significance of parameter estimates");
        let _ = writeln!(
            out,
            "{:<20} {:>12} {:>12} {:>9} {:>10}",
            "", "Estimate", "Std. Error", "z value", "Pr(>|z|)"
        );
        for p in &self.parametric {
            let _ = writeln!(
                out,
                "{:<20} {:>12.7} {:>12.7} {:>9.3} {:>10}",
                p.name,
                p.estimate,
                p.std_error,
                p.z,
                format_p(p.p_value)
            );
        }
        if !self.smooths.is_empty() {
            let _ = writeln!(out, "\nApproximate significance of smooth terms (Wald)");
            let _ = writeln!(
                out,
                "{:<20} {:>8} {:>10} {:>7} {:>10}",
                "", "edf", "Chi.sq", "Ref.df", "p-value"
            );
            for s in &self.smooths {
                let _ = writeln!(
                    out,
                    "{:<20} {:>8.3} {:>10.3} {:>7} {:>10}",
                    format!("S({})", s.name),
                    s.edf,
                    s.chi_sq,
                    s.ref_df,
                    format_p(s.p_value)
                );
            }
        }
        let _ = writeln!(out, "\nGlobal scores");
        let _ = writeln!(
            out,
            "{:>14} {:>15} {:>11} {:>6}",
            "R-sq.(adj)*", "Dev. explained", "UBRE score", "n"
        );
        let _ = writeln!(
            out,
            "{:>14.3} {:>14.1}% {:>11.5} {:>6}",
            self.adj_r2_approx,
            100.0 * self.dev_explained,
            self.ubre,
            self.n
        );
        let _ = writeln!(out, "* approximate");
        out
    }
}

fn format_p(p: f64) -> String {
    if p < 2e-16 {
        "<2e-16".to_string()
    } else {
        format!("{p:.3e}")
    }
}
