use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::ssa::{anti_diagonal_counts, Decomposition};

/// Matrix of w-correlations between elementary series.
#[derive(Debug, Clone, PartialEq)]
pub struct WMatrix<T: Real> {
    entries: DMatrix<T>,
}

impl<T: Real> WMatrix<T> {
    /// Wraps a symmetric matrix with unit diagonal and entries in [-1, 1].
    pub fn new(entries: DMatrix<T>) -> Result<Self> {
        let d = entries.nrows();
        if d == 0 || entries.ncols() != d {
            return Err(Error::InvalidArgument("w-matrix must be square and nonempty".into()));
        }
        let tol = T::lit(1e-10);
        for i in 0..d {
            if (entries[(i, i)] - T::one()).abs() > tol {
                return Err(Error::InvalidArgument(format!("w-matrix diagonal {i} is not 1")));
            }
            for j in 0..d {
                let w = entries[(i, j)];
                if (w - entries[(j, i)]).abs() > tol || w.abs() > T::one() + tol {
                    return Err(Error::InvalidArgument(format!(
                        "w-matrix entry ({i}, {j}) is not a valid correlation"
                    )));
                }
            }
        }
        Ok(WMatrix { entries })
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Dissimilarity 1 - |w| between 0-based items.
    pub fn dissimilarity(&self, a: usize, b: usize) -> T {
        T::one() - self.entries[(a, b)].abs()
    }

    /// Writes the d x d matrix as headerless CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| format!("{}", self.entries[(i, j)].as_f64()))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Weighted inner products of elementary series, normalised to correlations.
///
/// The weight of position `t` is the anti-diagonal count, so each entry is
/// the Frobenius inner product of the two diagonal-averaged matrices.
pub fn wcorr_matrix<T: Real>(dec: &Decomposition<T>) -> Result<WMatrix<T>> {
    let traj = dec.trajectory();
    let weights: Vec<T> = anti_diagonal_counts(traj.window(), traj.lagged())
        .into_iter()
        .map(T::from_count)
        .collect();
    let series: Vec<&[T]> = dec.triples().iter().map(|e| e.elementary.as_slice()).collect();
    let inner = |a: &[T], b: &[T]| {
        a.iter()
            .zip(b)
            .zip(&weights)
            .fold(T::zero(), |acc, ((&x, &y), &w)| acc + w * x * y)
    };
    let norms: Vec<T> = series.iter().map(|s| inner(s, s).sqrt()).collect();
    if let Some(i) = norms.iter().position(|n| !(*n > T::zero())) {
        return Err(Error::ZeroNorm(i + 1));
    }
    let d = series.len();
    let mut entries = DMatrix::identity(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let w = (inner(series[i], series[j]) / (norms[i] * norms[j]))
                .max(-T::one())
                .min(T::one());
            entries[(i, j)] = w;
            entries[(j, i)] = w;
        }
    }
    Ok(WMatrix { entries })
}
