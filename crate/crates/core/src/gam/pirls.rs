use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use super::design::Design;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_ITERATIONS: usize = 100;
pub const CONVERGENCE_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 30;

/// Estimate table row for a parametric coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParametricSummary {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Approximate significance of a smooth term (Wald statistic on the
/// rounded-up edf).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothSummary {
    pub name: String,
    pub edf: f64,
    pub delta: f64,
    pub chi_sq: f64,
    pub ref_df: usize,
    pub p_value: f64,
}

/// Converged penalized Poisson fit.
#[derive(Debug, Clone, PartialEq)]
pub struct GamFit<T: Real> {
    pub column_names: Vec<String>,
    pub coefficients: DVector<T>,
    /// Bayesian covariance (XᵀWX + Sλ)⁻¹ with unit scale.
    pub covariance: DMatrix<T>,
    pub parametric: Vec<ParametricSummary>,
    pub smooths: Vec<SmoothSummary>,
    pub deltas: Vec<f64>,
    pub deviance: T,
    pub null_deviance: T,
    /// Total effective degrees of freedom tr(R).
    pub tr_r: T,
    pub ubre: T,
    pub adj_r2: f64,
    pub dev_explained: f64,
    pub n: usize,
    pub iterations: usize,
    pub converged: bool,
    pub deviance_trace: Vec<f64>,
    pub linear_predictor: Vec<T>,
    pub fitted: Vec<T>,
    /// Per-coefficient diagonal of (XᵀWX + Sλ)⁻¹XᵀWX.
    pub edf_per_coef: Vec<T>,
}

impl<T: Real> GamFit<T> {
    /// Fitted contribution of smooth `j` at the data points.
    pub fn smooth_term(&self, design: &Design<T>, j: usize) -> Vec<T> {
        let cols = design.smooths[j].columns.clone();
        let x = design.matrix.columns(cols.start, cols.len());
        let beta = self.coefficients.rows(cols.start, cols.len());
        (x * beta).iter().copied().collect()
    }

    pub fn coefficient(&self, name: &str) -> Option<&ParametricSummary> {
        self.parametric.iter().find(|p| p.name == name)
    }
}

/// UBRE with unit scale: deviance/n + 2 tr(R)/n - 1.
pub fn ubre_score<T: Real>(fit: &GamFit<T>) -> T {
    ubre(fit.deviance, fit.tr_r, fit.n)
}

fn ubre<T: Real>(deviance: T, tr_r: T, n: usize) -> T {
    let n = T::from_count(n);
    deviance / n + T::lit(2.0) * tr_r / n - T::one()
}

/// Poisson deviance 2 Σ [y log(y/μ) - (y - μ)].
pub fn poisson_deviance<T: Real>(y: &[T], mu: &[T]) -> T {
    let two = T::lit(2.0);
    y.iter().zip(mu).fold(T::zero(), |acc, (&yi, &mi)| {
        let term = if yi > T::zero() { yi * (yi / mi).ln() } else { T::zero() };
        acc + two * (term - (yi - mi))
    })
}

pub fn validate_counts<T: Real>(y: &[T]) -> Result<()> {
    if let Some((i, v)) = y
        .iter()
        .enumerate()
        .find(|(_, &v)| !v.is_finite() || v < T::zero() || v.floor() != v)
    {
        return Err(Error::InvalidCounts(format!(
            "entry {i} = {} is not a nonnegative integer",
            v.as_f64()
        )));
    }
    Ok(())
}

fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

pub(crate) fn chi_sq_upper(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).map(|c| c.sf(x)).unwrap_or(f64::NAN)
}

/// Penalized IRLS for the log-link Poisson model at fixed smoothing parameters.
///
/// Iterates until the penalized deviance changes by less than 1e-8 relative
/// (at most 100 iterations), halving steps that increase it.
pub fn fit_pirls<T: Real>(design: &Design<T>, counts: &[T], deltas: &[f64]) -> Result<GamFit<T>> {
    let n = design.rows();
    if counts.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} counts for {n} design rows",
            counts.len()
        )));
    }
    validate_counts(counts)?;
    if deltas.len() != design.smooths.len() {
        return Err(Error::InvalidArgument(format!(
            "{} smoothing parameters for {} smooths",
            deltas.len(),
            design.smooths.len()
        )));
    }
    if let Some(d) = deltas.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
        return Err(Error::InvalidArgument(format!("smoothing parameter {d} is not >= 0")));
    }

    let x = &design.matrix;
    let penalty = design.total_penalty(deltas);
    let y = DVector::from_column_slice(counts);

    let mut mu: DVector<T> = y.map(|v| v + T::lit(0.1));
    let mut eta: DVector<T> = mu.map(|m| m.ln());
    let mut beta: Option<DVector<T>> = None;
    let mut trace = Vec::new();
    let mut old_pdev: Option<T> = None;
    let tol = T::lit(CONVERGENCE_TOL);

    for iteration in 1..=MAX_ITERATIONS {
        let z = DVector::from_fn(n, |i, _| eta[i] + (y[i] - mu[i]) / mu[i]);
        let a = weighted_gram(x, &mu) + &penalty;
        let rhs = x.transpose() * DVector::from_fn(n, |i, _| mu[i] * z[i]);
        let chol = a.cholesky().ok_or(Error::NotPositiveDefinite)?;
        let mut candidate = chol.solve(&rhs);

        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let eta_c = x * &candidate;
            let mu_c = eta_c.map(|e| e.exp());
            let dev = poisson_deviance(y.as_slice(), mu_c.as_slice());
            let pdev = dev + candidate.dot(&(&penalty * &candidate));
            let ok = pdev.is_finite()
                && match old_pdev {
                    None => true,
                    Some(old) => pdev <= old + old.abs() * T::lit(1e-12),
                };
            if ok {
                accepted = Some((eta_c, mu_c, pdev));
                break;
            }
            match &beta {
                Some(b) => candidate = (&candidate + b) * T::lit(0.5),
                None => break,
            }
        }
        let Some((eta_c, mu_c, pdev)) = accepted else {
            return Err(Error::NotConverged {
                iterations: iteration,
                trace,
            });
        };
        trace.push(pdev.as_f64());
        eta = eta_c;
        mu = mu_c;
        beta = Some(candidate);
        if let Some(old) = old_pdev {
            if (pdev - old).abs() <= tol * (pdev.abs() + T::lit(0.1)) {
                let beta = beta.expect("set");
                return finish(design, counts, deltas, beta, &penalty, iteration, trace);
            }
        }
        old_pdev = Some(pdev);
    }
    Err(Error::NotConverged {
        iterations: MAX_ITERATIONS,
        trace,
    })
}

fn weighted_gram<T: Real>(x: &DMatrix<T>, w: &DVector<T>) -> DMatrix<T> {
    let mut wx = x.clone();
    for (mut row, &wi) in wx.row_iter_mut().zip(w.iter()) {
        row *= wi;
    }
    x.transpose() * wx
}

fn finish<T: Real>(
    design: &Design<T>,
    counts: &[T],
    deltas: &[f64],
    beta: DVector<T>,
    penalty: &DMatrix<T>,
    iterations: usize,
    trace: Vec<f64>,
) -> Result<GamFit<T>> {
    let x = &design.matrix;
    let n = design.rows();
    let eta = x * &beta;
    let mu = eta.map(|e| e.exp());
    let xtwx = weighted_gram(x, &mu);
    let a = &xtwx + penalty;
    let covariance = a.cholesky().ok_or(Error::NotPositiveDefinite)?.inverse();
    let influence = &covariance * &xtwx;
    let edf_per_coef: Vec<T> = influence.diagonal().iter().copied().collect();
    let tr_r = edf_per_coef.iter().fold(T::zero(), |acc, &v| acc + v);

    let deviance = poisson_deviance(counts, mu.as_slice());
    let ybar = counts.iter().fold(T::zero(), |a, &v| a + v) / T::from_count(n);
    let null_deviance = poisson_deviance(counts, &vec![ybar; n]);

    let parametric = (0..design.parametric)
        .map(|j| {
            let estimate = beta[j].as_f64();
            let std_error = covariance[(j, j)].as_f64().sqrt();
            let z = estimate / std_error;
            ParametricSummary {
                name: design.column_names[j].clone(),
                estimate,
                std_error,
                z,
                p_value: normal_two_sided(z),
            }
        })
        .collect();

    let smooths = design
        .smooths
        .iter()
        .zip(deltas)
        .map(|(block, &delta)| {
            let r = block.columns.clone();
            let edf = edf_per_coef[r.clone()].iter().fold(0.0, |a, v| a + v.as_f64());
            let theta = beta.rows(r.start, r.len()).into_owned();
            let v = covariance.view((r.start, r.start), (r.len(), r.len())).into_owned();
            let (chi_sq, ref_df) = wald(&theta, &v, edf);
            SmoothSummary {
                name: block.name.clone(),
                edf,
                delta,
                chi_sq,
                ref_df,
                p_value: chi_sq_upper(chi_sq, ref_df as f64),
            }
        })
        .collect();

    let resid_ss: f64 = counts
        .iter()
        .zip(mu.iter())
        .map(|(&y, &m)| (y - m).as_f64().powi(2))
        .sum();
    let total_ss: f64 = counts.iter().map(|&y| (y - ybar).as_f64().powi(2)).sum();
    let nf = n as f64;
    let adj_r2 = 1.0 - (resid_ss / (nf - tr_r.as_f64())) / (total_ss / (nf - 1.0));
    let dev_explained = 1.0 - deviance.as_f64() / null_deviance.as_f64();

    Ok(GamFit {
        column_names: design.column_names.clone(),
        coefficients: beta,
        covariance,
        parametric,
        smooths,
        deltas: deltas.to_vec(),
        deviance,
        null_deviance,
        tr_r,
        ubre: ubre(deviance, tr_r, n),
        adj_r2,
        dev_explained,
        n,
        iterations,
        converged: true,
        deviance_trace: trace,
        linear_predictor: eta.iter().copied().collect(),
        fitted: mu.iter().copied().collect(),
        edf_per_coef,
    })
}

/// θᵀ V⁻ θ using the leading ceil(edf) eigenpairs of V.
fn wald<T: Real>(theta: &DVector<T>, v: &DMatrix<T>, edf: f64) -> (f64, usize) {
    let rank = (edf.ceil().max(1.0) as usize).min(theta.len());
    let eig = v.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..theta.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let stat = order[..rank]
        .iter()
        .filter(|&&i| eig.eigenvalues[i] > T::zero())
        .map(|&i| {
            let proj = eig.eigenvectors.column(i).dot(theta).as_f64();
            proj * proj / eig.eigenvalues[i].as_f64()
        })
        .sum();
    (stat, rank)
}
