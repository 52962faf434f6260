//! Time-series containers, CSV input/output and daily preprocessing.

mod csv_io;
mod preprocess;

pub use csv_io::{
    read_panel, read_panel_from, read_series, read_series_from, write_panel, write_panel_to,
    write_series, write_series_to, write_table, write_table_to,
};
pub use preprocess::{
    aggregate_daily, impute_causal_ma, screen_outliers, spatial_average, ImputationReport,
    OutlierReport, RemovedRow, DEFAULT_AVAILABILITY, DEFAULT_IMPUTE_WINDOW, DEFAULT_REMOVE_COUNT,
};

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sampling interval of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    Hourly,
    BiHourly,
    Daily,
}

impl Step {
    pub fn minutes(self) -> i64 {
        match self {
            Step::Hourly => 60,
            Step::BiHourly => 120,
            Step::Daily => 24 * 60,
        }
    }

    pub fn duration(self) -> Duration {
        Duration::minutes(self.minutes())
    }

    /// Number of samples in one calendar day.
    pub fn per_day(self) -> usize {
        (24 * 60 / self.minutes()) as usize
    }

    pub fn from_minutes(m: i64) -> Option<Step> {
        match m {
            60 => Some(Step::Hourly),
            120 => Some(Step::BiHourly),
            1440 => Some(Step::Daily),
            _ => None,
        }
    }
}

/// Regularly sampled series with explicit missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    start: NaiveDateTime,
    step: Step,
    values: Vec<Option<T>>,
    name: String,
}

impl<T: Real> TimeSeries<T> {
    /// Builds a series, rejecting empty input and non-finite observations.
    pub fn new(
        name: impl Into<String>,
        start: NaiveDateTime,
        step: Step,
        values: Vec<Option<T>>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("time series must have at least one value".into()));
        }
        if let Some(i) = values
            .iter()
            .position(|v| v.map_or(false, |x| !x.is_finite()))
        {
            return Err(Error::InvalidArgument(format!("non-finite value at index {i}")));
        }
        Ok(TimeSeries {
            start,
            step,
            values,
            name: name.into(),
        })
    }

    /// Complete daily series starting at midnight of `start`.
    pub fn daily(name: impl Into<String>, start: NaiveDate, values: Vec<T>) -> Result<Self> {
        Self::new(
            name,
            start.and_hms_opt(0, 0, 0).expect("midnight is valid"),
            Step::Daily,
            values.into_iter().map(Some).collect(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn step(&self) -> Step {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    /// Timestamp of observation `i`.
    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        self.start + Duration::minutes(self.step.minutes() * i as i64)
    }

    pub fn date(&self, i: usize) -> NaiveDate {
        self.timestamp(i).date()
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Observed values in order, skipping missing entries.
    pub fn observed(&self) -> Vec<T> {
        self.values.iter().flatten().copied().collect()
    }

    /// The values of a fully observed series.
    pub fn complete_values(&self) -> Result<Vec<T>> {
        match self.values.iter().position(Option::is_none) {
            None => Ok(self.values.iter().map(|v| v.expect("checked")).collect()),
            Some(first) => Err(Error::MissingValues {
                count: self.missing_count(),
                first,
            }),
        }
    }

    /// A series on the same calendar with new values.
    pub fn with_values(&self, name: impl Into<String>, values: Vec<Option<T>>) -> Result<Self> {
        Self::new(name, self.start, self.step, values)
    }
}

/// Aligned multi-station observations of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct StationPanel<T> {
    series: Vec<TimeSeries<T>>,
    station_ids: Vec<String>,
}

impl<T: Real> StationPanel<T> {
    /// Builds a panel; members must share start, step and length.
    pub fn new(series: Vec<TimeSeries<T>>) -> Result<Self> {
        let first = series
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty station panel".into()))?;
        for s in &series[1..] {
            if s.start != first.start || s.step != first.step || s.len() != first.len() {
                return Err(Error::InvalidArgument(format!(
                    "station '{}' is not aligned with '{}'",
                    s.name, first.name
                )));
            }
        }
        let station_ids = series.iter().map(|s| s.name.clone()).collect();
        Ok(StationPanel {
            series,
            station_ids,
        })
    }

    pub fn series(&self) -> &[TimeSeries<T>] {
        &self.series
    }

    pub fn station_ids(&self) -> &[String] {
        &self.station_ids
    }

    pub fn stations(&self) -> usize {
        self.series.len()
    }

    /// Number of time points.
    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step(&self) -> Step {
        self.series[0].step
    }

    pub fn start(&self) -> NaiveDateTime {
        self.series[0].start
    }

    /// Observation of every station at time `t`.
    pub fn row(&self, t: usize) -> Vec<Option<T>> {
        self.series.iter().map(|s| s.values[t]).collect()
    }
}
