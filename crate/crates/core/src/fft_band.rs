//! Fourier band decomposition: frequencies are partitioned by period
//! breakpoints and each band is inverted separately.

use rustfft::num_complex::Complex;
use rustfft::{FftNum, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Period breakpoints in days; band `b` covers periods in `(breaks[b], breaks[b+1]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSpec {
    breaks: Vec<f64>,
}

impl BandSpec {
    pub fn new(breaks: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidArgument("at least two breaks are required".into()));
        }
        if !(breaks[0] >= 1.0) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "first break {} must be a finite period of at least 1",
                breaks[0]
            )));
        }
        if let Some(w) = breaks.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!(
                "breaks must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(BandSpec { breaks })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn band_count(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn interval(&self, band: usize) -> (f64, f64) {
        (self.breaks[band], self.breaks[band + 1])
    }

    /// Band holding `period`. Periods outside the outer breaks go to the
    /// nearest outer band so the bands always sum to the input.
    pub fn band_of(&self, period: f64) -> usize {
        let last = self.band_count() - 1;
        (0..=last)
            .find(|&b| period <= self.breaks[b + 1])
            .unwrap_or(last)
    }
}

/// One frequency band of a decomposed series.
#[derive(Debug, Clone, PartialEq)]
pub struct Band<T> {
    pub lower: f64,
    pub upper: f64,
    /// Frequency indices k (0..=N/2) assigned to the band.
    pub frequencies: Vec<usize>,
    pub series: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandDecomposition<T> {
    pub bands: Vec<Band<T>>,
    /// Largest imaginary residue seen before discarding it.
    pub max_imaginary: f64,
}

impl<T: Real> BandDecomposition<T> {
    pub fn metadata(&self) -> Vec<BandMetadata> {
        self.bands
            .iter()
            .enumerate()
            .map(|(i, b)| BandMetadata {
                label: format!("B{}", i + 1),
                lower: b.lower,
                upper: b.upper,
                frequencies: b.frequencies.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandMetadata {
    pub label: String,
    pub lower: f64,
    pub upper: f64,
    pub frequencies: Vec<usize>,
}

/// Splits `x` into band series whose sum is `x`.
///
/// Frequency index k has period N/k. The mean rides with the longest-period
/// band and Nyquist with whichever band holds period 2.
pub fn band_decompose<T: Real + FftNum>(x: &[T], spec: &BandSpec) -> Result<BandDecomposition<T>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidArgument("series must have at least two values".into()));
    }
    let last = *spec.breaks.last().expect("validated");
    if last > n as f64 {
        return Err(Error::InvalidArgument(format!(
            "last break {last} exceeds series length {n}"
        )));
    }
    let bands = spec.band_count();
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); bands];
    assigned[bands - 1].push(0);
    for k in 1..=n / 2 {
        assigned[spec.band_of(n as f64 / k as f64)].push(k);
    }
    if let Some(b) = assigned.iter().position(|a| a.iter().all(|&k| k == 0)) {
        let (lower, upper) = spec.interval(b);
        return Err(Error::EmptyBand { band: b + 1, lower, upper });
    }

    let mut planner = FftPlanner::<T>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut spectrum: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
    forward.process(&mut spectrum);

    let scale = T::from_count(n);
    let mut max_imaginary = 0.0_f64;
    let mut out = Vec::with_capacity(bands);
    for (b, freqs) in assigned.into_iter().enumerate() {
        let mut masked = vec![Complex::new(T::zero(), T::zero()); n];
        for &k in &freqs {
            masked[k] = spectrum[k];
            masked[(n - k) % n] = spectrum[(n - k) % n];
        }
        inverse.process(&mut masked);
        let series = masked
            .iter()
            .map(|c| {
                max_imaginary = max_imaginary.max(Real::as_f64(c.im / scale).abs());
                c.re / scale
            })
            .collect();
        let (lower, upper) = spec.interval(b);
        out.push(Band {
            lower,
            upper,
            frequencies: freqs,
            series,
        });
    }
    Ok(BandDecomposition {
        bands: out,
        max_imaginary,
    })
}
