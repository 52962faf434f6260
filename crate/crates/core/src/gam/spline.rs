//! Cubic regression spline parameterised by function values at the knots,
//! with natural end conditions and linear extrapolation beyond the knots.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Knot sequence together with the maps from knot values to knot second
/// derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline<T: Real> {
    knots: Vec<T>,
    /// k x k map from knot values to second derivatives (zero at the ends).
    second_deriv: DMatrix<T>,
    /// Integrated squared second derivative as a quadratic form in knot values.
    penalty: DMatrix<T>,
}

/// `k` knots at evenly spaced quantiles of the distinct covariate values.
pub fn quantile_knots<T: Real>(x: &[T], k: usize, name: &str) -> Result<Vec<T>> {
    let mut u: Vec<T> = x.to_vec();
    u.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    u.dedup();
    if u.len() < 2 {
        return Err(Error::ConstantCovariate(name.to_string()));
    }
    if u.len() < k {
        return Err(Error::InvalidArgument(format!(
            "smooth '{name}' has {} distinct values, fewer than basis dimension {k}",
            u.len()
        )));
    }
    let m = u.len() - 1;
    Ok((0..k)
        .map(|i| {
            let pos = i as f64 * m as f64 / (k - 1) as f64;
            let lo = pos.floor() as usize;
            let frac = T::lit(pos - lo as f64);
            if lo >= m {
                u[m]
            } else {
                u[lo] + (u[lo + 1] - u[lo]) * frac
            }
        })
        .collect())
}

impl<T: Real> CubicSpline<T> {
    pub fn new(knots: Vec<T>) -> Result<Self> {
        let k = knots.len();
        if k < 3 {
            return Err(Error::InvalidArgument("cubic spline needs at least 3 knots".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("knots must be strictly increasing".into()));
        }
        let h: Vec<T> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let six = T::lit(6.0);
        let three = T::lit(3.0);
        let mut d = DMatrix::zeros(k - 2, k);
        let mut b = DMatrix::zeros(k - 2, k - 2);
        for i in 0..k - 2 {
            d[(i, i)] = T::one() / h[i];
            d[(i, i + 1)] = -T::one() / h[i] - T::one() / h[i + 1];
            d[(i, i + 2)] = T::one() / h[i + 1];
            b[(i, i)] = (h[i] + h[i + 1]) / three;
            if i + 1 < k - 2 {
                b[(i, i + 1)] = h[i + 1] / six;
                b[(i + 1, i)] = h[i + 1] / six;
            }
        }
        let chol = b
            .cholesky()
            .ok_or_else(|| Error::InvalidArgument("degenerate knot spacing".into()))?;
        let interior = chol.solve(&d);
        let mut second_deriv = DMatrix::zeros(k, k);
        second_deriv.rows_mut(1, k - 2).copy_from(&interior);
        let mut penalty = d.transpose() * &interior;
        // exact symmetry
        penalty = (&penalty + penalty.transpose()) * T::lit(0.5);
        Ok(CubicSpline {
            knots,
            second_deriv,
            penalty,
        })
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn dim(&self) -> usize {
        self.knots.len()
    }

    pub fn penalty(&self) -> &DMatrix<T> {
        &self.penalty
    }

    /// Basis row at `x`: spline value = row · (values at knots).
    pub fn basis_row(&self, x: T) -> DVector<T> {
        let k = self.dim();
        let kn = &self.knots;
        let mut row = DVector::zeros(k);
        if x < kn[0] || x > kn[k - 1] {
            // linear continuation with the end slope
            let (j, at) = if x < kn[0] { (0, kn[0]) } else { (k - 2, kn[k - 1]) };
            let h = kn[j + 1] - kn[j];
            let six = T::lit(6.0);
            // slope at the end knot as a functional of knot values
            let mut slope = DVector::zeros(k);
            slope[j] -= T::one() / h;
            slope[j + 1] += T::one() / h;
            let dj = self.second_deriv.row(j).transpose();
            let dj1 = self.second_deriv.row(j + 1).transpose();
            if x < kn[0] {
                slope += (dj * (-T::lit(2.0)) - dj1) * (h / six);
                row[0] = T::one();
            } else {
                slope += (dj + dj1 * T::lit(2.0)) * (h / six);
                row[k - 1] = T::one();
            }
            return row + slope * (x - at);
        }
        let mut j = match kn.iter().position(|&kv| kv > x) {
            Some(p) => p.saturating_sub(1),
            None => k - 2,
        };
        j = j.min(k - 2);
        let h = kn[j + 1] - kn[j];
        let am = (kn[j + 1] - x) / h;
        let ap = (x - kn[j]) / h;
        let six = T::lit(6.0);
        let dm = kn[j + 1] - x;
        let dp = x - kn[j];
        let cm = (dm * dm * dm / h - h * dm) / six;
        let cp = (dp * dp * dp / h - h * dp) / six;
        row[j] += am;
        row[j + 1] += ap;
        row += self.second_deriv.row(j).transpose() * cm;
        row += self.second_deriv.row(j + 1).transpose() * cp;
        row
    }

    /// n x k model matrix for the covariate values.
    pub fn basis_matrix(&self, x: &[T]) -> DMatrix<T> {
        let mut m = DMatrix::zeros(x.len(), self.dim());
        for (i, &xi) in x.iter().enumerate() {
            m.set_row(i, &self.basis_row(xi).transpose());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knots() -> Vec<f64> {
        vec![0.0, 0.7, 1.5, 2.0, 3.1, 4.0]
    }

    #[test]
    fn interpolates_knot_values() {
        let s = CubicSpline::new(knots()).unwrap();
        for (i, &kv) in s.knots().iter().enumerate() {
            let row = s.basis_row(kv);
            for j in 0..s.dim() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((row[j] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reproduces_lines_with_zero_penalty() {
        let s = CubicSpline::new(knots()).unwrap();
        let beta = DVector::from_iterator(6, s.knots().iter().map(|k| 2.0 - 0.5 * k));
        for x in [-1.0, 0.3, 1.9, 3.99, 5.0] {
            let v = s.basis_row(x).dot(&beta);
            assert!((v - (2.0 - 0.5 * x)).abs() < 1e-12);
        }
        assert!(beta.dot(&(s.penalty() * &beta)).abs() < 1e-10);
    }

    #[test]
    fn penalty_matches_direct_integral() {
        // f'' is linear between knots: recover its end values on each piece
        // from central differences and integrate the square exactly
        let s = CubicSpline::new(knots()).unwrap();
        let beta = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0, -1.0, 2.0]);
        let f = |x: f64| s.basis_row(x).dot(&beta);
        let e = 1e-3;
        let f2 = |x: f64| (f(x + e) - 2.0 * f(x) + f(x - e)) / (e * e);
        let mut integral = 0.0;
        for w in s.knots().windows(2) {
            let (a, b) = (w[0] + 2.0 * e, w[1] - 2.0 * e);
            let slope = (f2(b) - f2(a)) / (b - a);
            let p = f2(a) - slope * (a - w[0]);
            let q = f2(b) + slope * (w[1] - b);
            integral += (w[1] - w[0]) / 3.0 * (p * p + p * q + q * q);
        }
        let quad = beta.dot(&(s.penalty() * &beta));
        assert!((integral - quad).abs() < 1e-5 * quad, "{integral} vs {quad}");
    }

    #[test]
    fn extrapolation_is_c1() {
        let s = CubicSpline::new(knots()).unwrap();
        let beta = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0, -1.0, 2.0]);
        let f = |x: f64| s.basis_row(x).dot(&beta);
        for edge in [0.0, 4.0] {
            let e = 1e-6;
            let left = (f(edge) - f(edge - e)) / e;
            let right = (f(edge + e) - f(edge)) / e;
            assert!((left - right).abs() < 1e-4, "slope jump at {edge}: {left} vs {right}");
        }
    }

    #[test]
    fn quantile_knots_cover_range() {
        let x: Vec<f64> = (0..101).map(|i| (i as f64).sqrt()).collect();
        let k = quantile_knots(&x, 5, "x").unwrap();
        assert_eq!(k.len(), 5);
        assert_eq!(k[0], 0.0);
        assert_eq!(k[4], 10.0);
        assert!(matches!(quantile_knots(&[2.0; 10], 5, "c"), Err(Error::ConstantCovariate(_))));
        assert!(quantile_knots(&[1.0, 2.0, 3.0], 5, "few").is_err());
    }
}
