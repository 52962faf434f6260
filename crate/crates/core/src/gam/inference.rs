use serde::Serialize;

use super::pirls::{chi_sq_upper, GamFit};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rate ratio for an exposure increment with an estimate ± 2 se interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeRisk {
    pub rr: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn relative_risk<T: Real>(fit: &GamFit<T>, exposure: &str, increment: f64) -> Result<RelativeRisk> {
    let c = fit
        .coefficient(exposure)
        .ok_or_else(|| Error::UnknownExposure(exposure.to_string()))?;
    Ok(relative_risk_from(c.estimate, c.std_error, increment))
}

pub fn relative_risk_from(estimate: f64, std_error: f64, increment: f64) -> RelativeRisk {
    RelativeRisk {
        rr: (increment * estimate).exp(),
        lower: (increment * (estimate - 2.0 * std_error)).exp(),
        upper: (increment * (estimate + 2.0 * std_error)).exp(),
    }
}

/// Approximate analysis-of-deviance between two fits on the same data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelComparison {
    pub deviance_difference: f64,
    pub df_difference: f64,
    pub p_value: f64,
}

/// Compares `simpler` against `richer` (the one with larger tr(R)).
///
/// The p-value is the chi-square upper tail of the deviance drop on the
/// (possibly fractional) difference in effective degrees of freedom.
pub fn compare_models<T: Real>(simpler: &GamFit<T>, richer: &GamFit<T>) -> Result<ModelComparison> {
    let dev = simpler.deviance.as_f64() - richer.deviance.as_f64();
    let df = richer.tr_r.as_f64() - simpler.tr_r.as_f64();
    compare_values(dev, df)
}

pub fn compare_values(deviance_difference: f64, df_difference: f64) -> Result<ModelComparison> {
    if deviance_difference == 0.0 && df_difference.abs() <= 1e-12 {
        return Ok(ModelComparison {
            deviance_difference,
            df_difference,
            p_value: 1.0,
        });
    }
    if !(df_difference > 0.0) {
        return Err(Error::InvalidComparison(df_difference));
    }
    Ok(ModelComparison {
        deviance_difference,
        df_difference,
        p_value: chi_sq_upper(deviance_difference, df_difference),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rr_examples() {
        let r = relative_risk_from(0.0, 0.01, 10.0);
        assert_eq!(r.rr, 1.0);
        assert!((r.lower * r.upper - 1.0).abs() < 1e-15);
        let r = relative_risk_from(0.0039257, 0.0016050, 10.0);
        assert!((r.rr - 1.040).abs() < 5e-4);
        assert!((r.lower - 1.00718).abs() < 1e-5);
        assert!((r.upper - 1.074).abs() < 5e-4);
        assert_eq!(relative_risk_from(0.3, 0.1, 0.0).rr, 1.0);
    }

    #[test]
    fn comparison_p_values() {
        let c = compare_values(3.84, 1.0).unwrap();
        assert!((c.p_value - 0.05).abs() < 1e-3);
        assert_eq!(compare_values(0.0, 0.0).unwrap().p_value, 1.0);
        assert!(matches!(compare_values(1.0, -0.5), Err(Error::InvalidComparison(_))));
        assert!(compare_values(1.0, 0.0).is_err());
        // fractional df
        let c = compare_values(5.0, 2.5).unwrap();
        assert!(c.p_value > 0.0 && c.p_value < 1.0);
    }
}
