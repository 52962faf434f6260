use std::ops::Range;

use chrono::Weekday;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::spline::{quantile_knots, CubicSpline};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_BASIS_DIM: usize = 10;

/// A penalized smooth of one covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothTerm<T> {
    pub name: String,
    pub covariate: Vec<T>,
    pub basis_dim: usize,
}

/// Terms of the log-rate model: intercept, linear exposures, optional
/// day-of-week dummies and penalized smooths.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelSpec<T> {
    pub exposures: Vec<(String, Vec<T>)>,
    pub weekdays: Option<Vec<Weekday>>,
    pub smooths: Vec<SmoothTerm<T>>,
    /// Row count for a model without data-bearing terms.
    pub observations: Option<usize>,
}

impl<T: Real> ModelSpec<T> {
    /// Number of observations implied by the terms, if any term has data.
    pub fn intercept_only(n: usize) -> Self {
        ModelSpec {
            exposures: Vec::new(),
            weekdays: None,
            smooths: Vec::new(),
            observations: Some(n),
        }
    }

    pub fn len(&self) -> Option<usize> {
        self.observations.or_else(|| {
            self.exposures
            .first()
            .map(|e| e.1.len())
            .or_else(|| self.weekdays.as_ref().map(Vec::len))
                .or_else(|| self.smooths.first().map(|s| s.covariate.len()))
        })
    }
}

/// Day-of-week dummy order; Monday is the reference level.
pub const DOW_LEVELS: [Weekday; 6] = [
    Weekday::Tue,
    Weekday::Wed,
    Weekday::Thu,
    Weekday::Fri,
    Weekday::Sat,
    Weekday::Sun,
];

/// One smooth's columns in the model matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothBlock<T: Real> {
    pub name: String,
    pub basis_dim: usize,
    pub columns: Range<usize>,
    /// Penalty on the block's (centered) coefficients, rescaled to the data.
    pub penalty: DMatrix<T>,
    pub penalty_scale: f64,
    pub spline: CubicSpline<T>,
    /// Maps centered coefficients to knot values.
    pub constraint: DMatrix<T>,
}

/// Model matrix with penalties and column bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Design<T: Real> {
    pub matrix: DMatrix<T>,
    pub column_names: Vec<String>,
    /// Columns 0..parametric are unpenalized.
    pub parametric: usize,
    pub smooths: Vec<SmoothBlock<T>>,
}

impl<T: Real> Design<T> {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Sum of `deltas[j] * S_j` embedded in the full coefficient space.
    pub fn total_penalty(&self, deltas: &[f64]) -> DMatrix<T> {
        let p = self.cols();
        let mut s = DMatrix::zeros(p, p);
        for (block, &delta) in self.smooths.iter().zip(deltas) {
            let r = block.columns.clone();
            let mut view = s.view_mut((r.start, r.start), (r.len(), r.len()));
            view += &block.penalty * T::lit(delta);
        }
        s
    }

    pub fn exposure_column(&self, name: &str) -> Option<usize> {
        self.column_names[..self.parametric].iter().position(|c| c == name)
    }
}

/// Householder reflector whose trailing columns span the null space of `c`ᵀ.
fn sum_to_zero_constraint<T: Real>(c: &DVector<T>) -> DMatrix<T> {
    let k = c.len();
    let norm = c.norm();
    let mut v = c.clone();
    let sign = if c[0] >= T::zero() { T::one() } else { -T::one() };
    v[0] += sign * norm;
    let vv = v.dot(&v);
    let h = DMatrix::identity(k, k) - (&v * v.transpose()) * (T::lit(2.0) / vv);
    h.columns(1, k - 1).into_owned()
}

fn frobenius<T: Real>(m: &DMatrix<T>) -> f64 {
    m.norm().as_f64()
}

/// Assembles the model matrix.
///
/// Each smooth contributes `basis_dim - 1` columns whose values sum to zero
/// over the data; its penalty is the integrated squared second derivative,
/// carried through the same constraint and rescaled to the size of the
/// block's cross-product so that smoothing parameters are comparable.
pub fn build_design<T: Real>(spec: &ModelSpec<T>) -> Result<Design<T>> {
    let n = spec
        .len()
        .ok_or_else(|| Error::InvalidArgument("model has no data-bearing terms".into()))?;
    if n == 0 {
        return Err(Error::InvalidArgument("model has no observations".into()));
    }
    let mut columns: Vec<(String, Vec<T>)> = vec![("(Intercept)".into(), vec![T::one(); n])];
    for (name, x) in &spec.exposures {
        if x.len() != n {
            return Err(Error::InvalidArgument(format!(
                "exposure '{name}' has length {} (expected {n})",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("exposure '{name}' has non-finite values")));
        }
        columns.push((name.clone(), x.clone()));
    }
    if let Some(days) = &spec.weekdays {
        if days.len() != n {
            return Err(Error::InvalidArgument("weekday series has wrong length".into()));
        }
        for level in DOW_LEVELS {
            let col = days
                .iter()
                .map(|&d| if d == level { T::one() } else { T::zero() })
                .collect();
            columns.push((format!("dow{level}"), col));
        }
    }
    check_rank(&columns)?;

    let parametric = columns.len();
    let mut blocks = Vec::new();
    let mut smooth_cols: Vec<DMatrix<T>> = Vec::new();
    let mut next = parametric;
    for term in &spec.smooths {
        if term.covariate.len() != n {
            return Err(Error::InvalidArgument(format!(
                "smooth '{}' has length {} (expected {n})",
                term.name,
                term.covariate.len()
            )));
        }
        if term.basis_dim < 3 {
            return Err(Error::InvalidArgument(format!(
                "smooth '{}' needs basis dimension of at least 3",
                term.name
            )));
        }
        let knots = quantile_knots(&term.covariate, term.basis_dim, &term.name)?;
        let spline = CubicSpline::new(knots)?;
        let raw = spline.basis_matrix(&term.covariate);
        let colsums = DVector::from_iterator(raw.ncols(), raw.column_iter().map(|c| c.sum()));
        let z = sum_to_zero_constraint(&colsums);
        let centered = &raw * &z;
        let penalty = z.transpose() * spline.penalty() * &z;
        let xtx = centered.transpose() * &centered;
        let scale = frobenius(&xtx) / frobenius(&penalty);
        let penalty = (&penalty + penalty.transpose()) * T::lit(0.5 * scale);
        let width = centered.ncols();
        blocks.push(SmoothBlock {
            name: term.name.clone(),
            basis_dim: term.basis_dim,
            columns: next..next + width,
            penalty,
            penalty_scale: scale,
            spline,
            constraint: z,
        });
        next += width;
        smooth_cols.push(centered);
    }

    let mut matrix = DMatrix::zeros(n, next);
    for (j, (_, col)) in columns.iter().enumerate() {
        matrix.set_column(j, &DVector::from_column_slice(col));
    }
    let mut column_names: Vec<String> = columns.into_iter().map(|c| c.0).collect();
    for (block, cols) in blocks.iter().zip(&smooth_cols) {
        matrix
            .view_mut((0, block.columns.start), (n, block.columns.len()))
            .copy_from(cols);
        column_names.extend((1..=block.columns.len()).map(|i| format!("s({}).{i}", block.name)));
    }
    Ok(Design {
        matrix,
        column_names,
        parametric,
        smooths: blocks,
    })
}

/// Gram-Schmidt pass flagging columns that lie in the span of earlier ones.
fn check_rank<T: Real>(columns: &[(String, Vec<T>)]) -> Result<()> {
    let mut basis: Vec<DVector<T>> = Vec::new();
    let mut collinear = Vec::new();
    let tol = T::lit(1e-9).max(T::epsilon() * T::lit(1e3));
    for (name, col) in columns {
        let original = DVector::from_column_slice(col);
        let scale = original.norm();
        let mut r = original.clone();
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dot(&r);
                r -= q * proj;
            }
        }
        let rn = r.norm();
        if !(scale > T::zero()) || rn <= tol * scale {
            collinear.push(name.clone());
        } else {
            basis.push(r / rn);
        }
    }
    if collinear.is_empty() {
        Ok(())
    } else {
        Err(Error::RankDeficient(collinear))
    }
}

/// Design summary for reports.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SmoothSetup {
    pub name: String,
    pub basis_dim: usize,
    pub knots: Vec<f64>,
    pub penalty_scale: f64,
}

impl<T: Real> Design<T> {
    pub fn smooth_setup(&self) -> Vec<SmoothSetup> {
        self.smooths
            .iter()
            .map(|b| SmoothSetup {
                name: b.name.clone(),
                basis_dim: b.basis_dim,
                knots: b.spline.knots().iter().map(|k| k.as_f64()).collect(),
                penalty_scale: b.penalty_scale,
            })
            .collect()
    }
}
