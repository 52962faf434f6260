use serde::Serialize;

use crate::scalar::Real;

/// Period of a component from its count of local maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodEstimate {
    /// Series length divided by the number of peaks (length itself when none).
    pub period: f64,
    pub peaks: usize,
    /// Set when no interior maximum exists; the component behaves like a trend.
    pub trend: bool,
}

impl PeriodEstimate {
    /// Integer part of the period, used to decide identifiability.
    pub fn whole_days(&self) -> u64 {
        self.period.floor() as u64
    }
}

/// Indices of interior local maxima; a plateau counts once, at its start.
pub fn peak_indices<T: Real>(x: &[T]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let mut t = 1;
    while t + 1 < x.len() {
        if x[t] > x[t - 1] {
            let mut j = t + 1;
            while j < x.len() && x[j] == x[t] {
                j += 1;
            }
            if j < x.len() && x[j] < x[t] {
                peaks.push(t);
            }
            t = j;
        } else {
            t += 1;
        }
    }
    peaks
}

/// Number of days divided by number of peaks.
pub fn estimate_period<T: Real>(component: &[T]) -> PeriodEstimate {
    let n = component.len();
    let peaks = peak_indices(component).len();
    if peaks == 0 {
        PeriodEstimate {
            period: n as f64,
            peaks,
            trend: true,
        }
    } else {
        PeriodEstimate {
            period: n as f64 / peaks as f64,
            peaks,
            trend: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_period_twelve() {
        let x: Vec<f64> = (0..120)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 12.0).sin())
            .collect();
        let expected: Vec<usize> = (0..10).map(|k| 3 + 12 * k).collect();
        assert_eq!(peak_indices(&x), expected);
        let p = estimate_period(&x);
        assert_eq!(p.period, 12.0);
        assert!(!p.trend);
    }

    #[test]
    fn monotone_is_trend() {
        let x: Vec<f64> = (0..50).map(|t| t as f64 * 0.3).collect();
        let p = estimate_period(&x);
        assert!(p.trend);
        assert_eq!(p.period, 50.0);
    }

    #[test]
    fn plateaus_collapse() {
        assert_eq!(peak_indices(&[0.0, 1.0, 1.0, 1.0, 0.0, 2.0, 0.0]), vec![1, 5]);
        // plateau running to the end is not interior
        assert!(peak_indices(&[0.0, 1.0, 1.0]).is_empty());
        // rising into a plateau that rises again is not a peak
        assert!(peak_indices(&[0.0, 1.0, 1.0, 2.0]).is_empty());
        // edges never count
        assert!(peak_indices(&[5.0, 1.0, 0.0]).is_empty());
    }
}
