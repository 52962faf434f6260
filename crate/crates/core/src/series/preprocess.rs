//! Daily aggregation, spatial averaging, causal imputation and outlier screening.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{StationPanel, Step, TimeSeries};
use crate::error::{Error, Result};
use crate::scalar::{self, Real};

pub const DEFAULT_AVAILABILITY: f64 = 0.75;
pub const DEFAULT_IMPUTE_WINDOW: usize = 15;
pub const DEFAULT_REMOVE_COUNT: usize = 5;

/// Averages a sub-daily series into calendar days (midnight to midnight).
///
/// A day keeps the mean of its observed values when the observed fraction
/// reaches `availability`; otherwise it is missing. Days not fully covered by
/// the series are dropped.
pub fn aggregate_daily<T: Real>(s: &TimeSeries<T>, availability: f64) -> Result<TimeSeries<T>> {
    if s.step() == Step::Daily {
        return Err(Error::InvalidArgument(
            "aggregate_daily expects a sub-daily series".into(),
        ));
    }
    if !(availability > 0.0 && availability <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "availability threshold {availability} outside (0, 1]"
        )));
    }
    let per_day = s.step().per_day();

    // Consecutive runs of indices sharing a calendar date.
    let mut days: Vec<(chrono::NaiveDate, usize, usize)> = Vec::new();
    for i in 0..s.len() {
        let d = s.date(i);
        match days.last_mut() {
            Some((date, _, end)) if *date == d => *end = i + 1,
            _ => days.push((d, i, i + 1)),
        }
    }
    let whole: Vec<_> = days
        .into_iter()
        .filter(|&(_, a, b)| b - a == per_day && s.timestamp(a).time() == chrono::NaiveTime::MIN)
        .collect();
    let Some(&(first_day, _, _)) = whole.first() else {
        return Err(Error::InsufficientSpan(s.len()));
    };

    let values = whole
        .iter()
        .map(|&(_, a, b)| {
            let obs: Vec<T> = s.values()[a..b].iter().flatten().copied().collect();
            let fraction = obs.len() as f64 / per_day as f64;
            if fraction + 1e-12 >= availability {
                scalar::mean(&obs)
            } else {
                None
            }
        })
        .collect();
    TimeSeries::new(
        s.name(),
        first_day.and_hms_opt(0, 0, 0).expect("midnight"),
        Step::Daily,
        values,
    )
}

/// Per-time-point mean over the stations observed at that time.
pub fn spatial_average<T: Real>(p: &StationPanel<T>) -> TimeSeries<T> {
    let values = (0..p.len())
        .map(|t| {
            let obs: Vec<T> = p.row(t).into_iter().flatten().collect();
            scalar::mean(&obs)
        })
        .collect();
    TimeSeries::new("spatial_mean", p.start(), p.step(), values)
        .expect("means of finite values are finite")
}

/// What [`impute_causal_ma`] filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImputationReport {
    pub window: usize,
    /// Indices filled from the causal moving average.
    pub imputed: Vec<usize>,
    /// Indices whose causal window was empty, filled with `fallback_value`.
    pub median_fallback: Vec<usize>,
    pub fallback_value: f64,
}

/// Fills each gap with the mean of the preceding `window` values.
///
/// Values imputed earlier count as available. A gap with nothing in its
/// window takes the median of the originally observed values.
pub fn impute_causal_ma<T: Real>(
    s: &TimeSeries<T>,
    window: usize,
) -> Result<(TimeSeries<T>, ImputationReport)> {
    if window == 0 {
        return Err(Error::InvalidArgument("imputation window must be positive".into()));
    }
    let observed = s.observed();
    let fallback = scalar::median(&observed)
        .ok_or_else(|| Error::InvalidArgument("series has no observed values".into()))?;

    let mut filled: Vec<Option<T>> = s.values().to_vec();
    let mut report = ImputationReport {
        window,
        imputed: Vec::new(),
        median_fallback: Vec::new(),
        fallback_value: fallback.as_f64(),
    };
    for t in 0..filled.len() {
        if filled[t].is_some() {
            continue;
        }
        let lo = t.saturating_sub(window);
        let prior: Vec<T> = filled[lo..t].iter().flatten().copied().collect();
        match scalar::mean(&prior) {
            Some(m) => {
                filled[t] = Some(m);
                report.imputed.push(t);
            }
            None => {
                filled[t] = Some(fallback);
                report.median_fallback.push(t);
            }
        }
    }
    Ok((s.with_values(s.name(), filled)?, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovedRow {
    pub index: usize,
    pub squared_distance: f64,
}

/// Audit trail of [`screen_outliers`].
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct OutlierReport {
    pub complete_cases: usize,
    pub removed: Vec<RemovedRow>,
}

/// Blanks the `remove_count` complete-case rows farthest from the
/// complete-case mean in classical Mahalanobis distance.
pub fn screen_outliers<T: Real>(
    p: &StationPanel<T>,
    remove_count: usize,
) -> Result<(StationPanel<T>, OutlierReport)> {
    if remove_count == 0 {
        return Ok((p.clone(), OutlierReport::default()));
    }
    let k = p.stations();
    let rows: Vec<(usize, Vec<T>)> = (0..p.len())
        .filter_map(|t| {
            let row: Option<Vec<T>> = p.row(t).into_iter().collect();
            row.map(|r| (t, r))
        })
        .collect();
    let n = rows.len();
    if n < k + 1 {
        return Err(Error::SingularCovariance(format!(
            "{n} complete cases for {k} stations"
        )));
    }
    if remove_count >= n {
        return Err(Error::InvalidArgument(format!(
            "cannot remove {remove_count} of {n} complete cases"
        )));
    }

    let data = DMatrix::from_fn(n, k, |i, j| rows[i].1[j]);
    let mean: DVector<T> = data.row_mean().transpose();
    let centered = DMatrix::from_fn(n, k, |i, j| data[(i, j)] - mean[j]);
    let cov = (centered.transpose() * &centered) / T::from_count(n - 1);

    let eig = cov.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().fold(T::zero(), |m, &e| m.max(e.abs()));
    let min_eig = eig.eigenvalues.iter().fold(max_eig, |m, &e| m.min(e));
    if max_eig <= T::zero() || min_eig <= max_eig * T::lit(1e-12) {
        return Err(Error::SingularCovariance(
            "complete-case covariance is not positive definite".into(),
        ));
    }
    let chol = cov.cholesky().ok_or_else(|| {
        Error::SingularCovariance("complete-case covariance is not positive definite".into())
    })?;

    let mut ranked: Vec<(usize, T)> = (0..n)
        .map(|i| {
            let dev = centered.row(i).transpose();
            let solved = chol.solve(&dev);
            (rows[i].0, dev.dot(&solved))
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    ranked.truncate(remove_count);

    let mut series: Vec<TimeSeries<T>> = p.series().to_vec();
    for s in &mut series {
        let mut values = s.values().to_vec();
        for &(t, _) in &ranked {
            values[t] = None;
        }
        *s = s.with_values(s.name(), values)?;
    }
    let report = OutlierReport {
        complete_cases: n,
        removed: ranked
            .into_iter()
            .map(|(index, d)| RemovedRow {
                index,
                squared_distance: d.as_f64(),
            })
            .collect(),
    };
    Ok((StationPanel::new(series)?, report))
}
