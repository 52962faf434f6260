//! Synthetic scenarios with planted harmonic structure and planted Poisson
//! regression effects. All randomness comes from a seeded ChaCha8 stream.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gam::DOW_LEVELS;
use crate::scalar::Real;
use crate::series::TimeSeries;

/// Largest linear predictor accepted when simulating counts.
pub const MAX_LINEAR_PREDICTOR: f64 = 20.0;

/// `amplitude * sin(2π t / period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub amplitude: f64,
    pub period: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Harmonic {
    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * std::f64::consts::PI * t / self.period + self.phase).sin()
    }
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 6, 1).expect("valid date")
}

/// A synthetic exposure series and the count process driven by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthScenario {
    pub n: usize,
    pub harmonics: Vec<Harmonic>,
    /// Polynomial coefficients in t (days), constant term first.
    #[serde(default)]
    pub trend: Vec<f64>,
    #[serde(default)]
    pub noise_sd: f64,
    /// One effect per harmonic on the log rate.
    #[serde(default)]
    pub planted_betas: Vec<f64>,
    /// Log-rate offsets for Tuesday..Sunday relative to Monday.
    #[serde(default)]
    pub dow_effects: Vec<f64>,
    #[serde(default)]
    pub intercept: f64,
    #[serde(default = "default_start")]
    pub start: NaiveDate,
    pub seed: u64,
}

impl Default for SynthScenario {
    /// Constant level plus harmonics of 12 and 30 days; N = 599 makes both
    /// periods divide L = 60 and K = 540.
    fn default() -> Self {
        SynthScenario {
            n: 599,
            harmonics: vec![
                Harmonic { amplitude: 10.0, period: 30.0, phase: 0.4 },
                Harmonic { amplitude: 5.0, period: 12.0, phase: 1.1 },
            ],
            trend: vec![40.0],
            noise_sd: 0.0,
            planted_betas: vec![0.004, 0.01],
            dow_effects: vec![0.02, 0.03, 0.01, 0.0, -0.08, -0.12],
            intercept: 2.2,
            start: default_start(),
            seed: 20071001,
        }
    }
}

impl SynthScenario {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.harmonics.is_empty() {
            problems.push("at least one harmonic is required".to_string());
        }
        for (i, h) in self.harmonics.iter().enumerate() {
            if !(h.period >= 2.0) {
                problems.push(format!("harmonic {} period {} is below 2 days", i + 1, h.period));
            }
        }
        let max_period = self.harmonics.iter().map(|h| h.period).fold(0.0, f64::max);
        if (self.n as f64) < 2.0 * max_period {
            problems.push(format!("n = {} covers fewer than two cycles of period {max_period}", self.n));
        }
        if !(self.noise_sd >= 0.0) {
            problems.push("noise_sd must be nonnegative".into());
        }
        if !self.planted_betas.is_empty() && self.planted_betas.len() != self.harmonics.len() {
            problems.push(format!(
                "{} planted betas for {} harmonics",
                self.planted_betas.len(),
                self.harmonics.len()
            ));
        }
        if !self.dow_effects.is_empty() && self.dow_effects.len() != 6 {
            problems.push(format!("{} day-of-week effects (expected 6)", self.dow_effects.len()));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(problems.join("; ")))
        }
    }

    pub fn weekdays(&self) -> Vec<Weekday> {
        weekdays_from(self.start, self.n)
    }
}

pub fn weekdays_from(start: NaiveDate, n: usize) -> Vec<Weekday> {
    (0..n)
        .map(|i| (start + chrono::Duration::days(i as i64)).weekday())
        .collect()
}

/// Generated series with its additive parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSeries<T: Real> {
    pub series: TimeSeries<T>,
    pub trend: Vec<T>,
    pub harmonics: Vec<Vec<T>>,
    pub noise: Vec<T>,
}

/// `trend(t) + Σ harmonics + N(0, noise_sd²)`, deterministic in the seed.
pub fn gen_harmonic_series<T: Real>(sc: &SynthScenario) -> Result<SyntheticSeries<T>> {
    sc.validate()?;
    let ts: Vec<f64> = (0..sc.n).map(|t| t as f64).collect();
    let trend: Vec<f64> = ts
        .iter()
        .map(|&t| sc.trend.iter().rev().fold(0.0, |acc, &c| acc * t + c))
        .collect();
    let harmonics: Vec<Vec<f64>> = sc
        .harmonics
        .iter()
        .map(|h| ts.iter().map(|&t| h.value(t)).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let noise: Vec<f64> = if sc.noise_sd > 0.0 {
        let normal = Normal::new(0.0, sc.noise_sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        (0..sc.n).map(|_| normal.sample(&mut rng)).collect()
    } else {
        vec![0.0; sc.n]
    };
    let values: Vec<T> = (0..sc.n)
        .map(|t| T::lit(trend[t] + harmonics.iter().map(|h| h[t]).sum::<f64>() + noise[t]))
        .collect();
    let cast = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
    Ok(SyntheticSeries {
        series: TimeSeries::daily("synthetic", sc.start, values)?,
        trend: cast(trend),
        harmonics: harmonics.into_iter().map(cast).collect(),
        noise: cast(noise),
    })
}

/// exp(intercept + Σ β_ℓ comp_ℓ(t) + dow(t)) with the overflow guard.
pub fn poisson_rates<T: Real>(
    components: &[Vec<T>],
    betas: &[f64],
    weekdays: &[Weekday],
    dow_effects: &[f64],
    intercept: f64,
) -> Result<Vec<f64>> {
    if components.len() != betas.len() {
        return Err(Error::InvalidArgument(format!(
            "{} components for {} betas",
            components.len(),
            betas.len()
        )));
    }
    if !dow_effects.is_empty() && dow_effects.len() != 6 {
        return Err(Error::InvalidArgument("expected 6 day-of-week effects".into()));
    }
    let n = weekdays.len();
    if components.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument("components and calendar differ in length".into()));
    }
    (0..n)
        .map(|t| {
            let dow = DOW_LEVELS
                .iter()
                .position(|&d| d == weekdays[t])
                .and_then(|i| dow_effects.get(i))
                .copied()
                .unwrap_or(0.0);
            let eta = intercept
                + dow
                + components
                    .iter()
                    .zip(betas)
                    .map(|(c, b)| b * c[t].as_f64())
                    .sum::<f64>();
            if eta > MAX_LINEAR_PREDICTOR || !eta.is_finite() {
                return Err(Error::PredictorOverflow(eta));
            }
            Ok(eta.exp())
        })
        .collect()
}

/// Draws y_t ~ Poisson(rate_t) for a daily calendar starting at `start`.
pub fn gen_poisson_counts<T: Real>(
    start: NaiveDate,
    components: &[Vec<T>],
    betas: &[f64],
    dow_effects: &[f64],
    intercept: f64,
    seed: u64,
) -> Result<TimeSeries<T>> {
    let n = components.first().map_or(0, Vec::len);
    let rates = poisson_rates(components, betas, &weekdays_from(start, n), dow_effects, intercept)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = rates
        .iter()
        .map(|&r| {
            let d = Poisson::new(r).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            Ok(T::lit(d.sample(&mut rng)))
        })
        .collect::<Result<Vec<T>>>()?;
    TimeSeries::daily("counts", start, counts)
}
