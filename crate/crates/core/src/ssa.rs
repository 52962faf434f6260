//! Trajectory-matrix embedding, SVD into eigentriples and diagonal averaging.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::series::TimeSeries;

/// Default relative cut-off (against the leading eigenvalue) for retained triples.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// L x K Hankel matrix of lagged windows of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMatrix<T: Real> {
    entries: DMatrix<T>,
    source_length: usize,
}

impl<T: Real> TrajectoryMatrix<T> {
    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    /// Window length L (number of rows).
    pub fn window(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of lagged vectors K = N - L + 1.
    pub fn lagged(&self) -> usize {
        self.entries.ncols()
    }

    pub fn source_length(&self) -> usize {
        self.source_length
    }

    /// Lag-covariance matrix X Xᵀ / K.
    pub fn lag_covariance(&self) -> DMatrix<T> {
        (&self.entries * self.entries.transpose()) / T::from_count(self.lagged())
    }
}

/// Largest admissible window length for a series of length `n` (L <= K).
pub fn max_window(n: usize) -> usize {
    (n + 1) / 2
}

/// Embeds raw values into their L-trajectory matrix.
pub fn embed_values<T: Real>(values: &[T], window: usize) -> Result<TrajectoryMatrix<T>> {
    let n = values.len();
    if window < 2 || window > max_window(n) {
        return Err(Error::WindowLength {
            window,
            n,
            max: max_window(n),
        });
    }
    let k = n - window + 1;
    Ok(TrajectoryMatrix {
        entries: DMatrix::from_fn(window, k, |i, j| values[i + j]),
        source_length: n,
    })
}

/// Embeds a complete series; gaps must be imputed first.
pub fn embed<T: Real>(s: &TimeSeries<T>, window: usize) -> Result<TrajectoryMatrix<T>> {
    embed_values(&s.complete_values()?, window)
}

/// Number of cells on anti-diagonal `t` of an L x K matrix.
pub fn anti_diagonal_count(t: usize, l: usize, k: usize) -> usize {
    let n = l + k - 1;
    (t + 1).min(l).min(k).min(n - t)
}

/// All anti-diagonal counts; these are the weights of the w-inner product.
pub fn anti_diagonal_counts(l: usize, k: usize) -> Vec<usize> {
    (0..l + k - 1).map(|t| anti_diagonal_count(t, l, k)).collect()
}

/// Diagonal averaging: the series whose trajectory matrix is the
/// Frobenius-nearest Hankel matrix to `y`.
pub fn hankelize<T: Real>(y: &DMatrix<T>) -> Vec<T> {
    let (l, k) = y.shape();
    let mut sums = vec![T::zero(); l + k - 1];
    for j in 0..k {
        for i in 0..l {
            sums[i + j] += y[(i, j)];
        }
    }
    sums.iter_mut()
        .enumerate()
        .for_each(|(t, s)| *s /= T::from_count(anti_diagonal_count(t, l, k)));
    sums
}

/// Diagonal average of the rank-one matrix `sigma * u * vᵀ` without forming it.
fn hankelize_rank_one<T: Real>(sigma: T, u: &DVector<T>, v: &DVector<T>) -> Vec<T> {
    let (l, k) = (u.len(), v.len());
    (0..l + k - 1)
        .map(|t| {
            let lo = t.saturating_sub(k - 1);
            let hi = t.min(l - 1);
            let s = (lo..=hi).fold(T::zero(), |acc, i| acc + u[i] * v[t - i]);
            sigma * s / T::from_count(hi - lo + 1)
        })
        .collect()
}

/// One term `sigma * u * vᵀ` of the SVD expansion with its diagonal average.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigentriple<T: Real> {
    /// 1-based rank.
    pub index: usize,
    pub sigma: T,
    pub u: DVector<T>,
    pub v: DVector<T>,
    pub elementary: Vec<T>,
}

impl<T: Real> Eigentriple<T> {
    pub fn lambda(&self) -> T {
        self.sigma * self.sigma
    }

    /// The rank-one matrix `sigma * u * vᵀ`.
    pub fn matrix(&self) -> DMatrix<T> {
        &self.u * self.v.transpose() * self.sigma
    }
}

/// SVD expansion of a trajectory matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T: Real> {
    trajectory: TrajectoryMatrix<T>,
    triples: Vec<Eigentriple<T>>,
    total_energy: T,
}

impl<T: Real> Decomposition<T> {
    pub fn trajectory(&self) -> &TrajectoryMatrix<T> {
        &self.trajectory
    }

    pub fn triples(&self) -> &[Eigentriple<T>] {
        &self.triples
    }

    /// Number of retained eigentriples d.
    pub fn rank(&self) -> usize {
        self.triples.len()
    }

    pub fn series_len(&self) -> usize {
        self.trajectory.source_length
    }

    /// Eigenvalues of X Xᵀ in decreasing order.
    pub fn lambda(&self) -> Vec<T> {
        self.triples.iter().map(Eigentriple::lambda).collect()
    }

    /// Eigenvalues of the lag-covariance X Xᵀ / K; same eigenvectors.
    pub fn lag_covariance_lambda(&self) -> Vec<T> {
        let k = T::from_count(self.trajectory.lagged());
        self.triples.iter().map(|e| e.lambda() / k).collect()
    }

    /// Sum of retained eigenvalues.
    pub fn total_energy(&self) -> T {
        self.total_energy
    }

    /// Elementary series of triple `index` (1-based).
    pub fn elementary(&self, index: usize) -> Result<&[T]> {
        self.check_index(index)?;
        Ok(&self.triples[index - 1].elementary)
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index == 0 || index > self.rank() {
            return Err(Error::IndexOutOfRange {
                index,
                d: self.rank(),
            });
        }
        Ok(())
    }

    pub fn export(&self) -> DecompositionExport {
        let lambda: Vec<f64> = self.lambda().into_iter().map(Real::as_f64).collect();
        let total: f64 = self.total_energy.as_f64();
        DecompositionExport {
            l: self.trajectory.window(),
            k: self.trajectory.lagged(),
            n: self.trajectory.source_length,
            shares: lambda.iter().map(|x| x / total).collect(),
            lambda,
            elementary: self
                .triples
                .iter()
                .map(|e| e.elementary.iter().map(|x| x.as_f64()).collect())
                .collect(),
        }
    }
}

/// JSON shape of an exported decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionExport {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub lambda: Vec<f64>,
    pub shares: Vec<f64>,
    pub elementary: Vec<Vec<f64>>,
}

fn argmax_abs<T: Real>(u: &DVector<T>) -> usize {
    let mut best = 0;
    for i in 1..u.len() {
        if u[i].abs() > u[best].abs() {
            best = i;
        }
    }
    best
}

/// Thin SVD of the trajectory matrix, truncated at `rank_tol * lambda_1`.
///
/// Triples are sorted by singular value; near-equal values (relative 1e-10)
/// are ordered by the position of the largest-magnitude entry of `u`. Each `u`
/// is signed so its first non-negligible entry is positive and `v = Xᵀu/sigma`.
pub fn decompose<T: Real>(x: &TrajectoryMatrix<T>, rank_tol: f64) -> Result<Decomposition<T>> {
    let svd = x.entries.clone().svd(true, false);
    let u_mat = svd.u.as_ref().expect("requested u");
    let mut pairs: Vec<(T, DVector<T>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, u_mat.column(i).into_owned()))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let sigma1 = pairs.first().map_or(T::zero(), |p| p.0);
    if !(sigma1 > T::zero()) {
        return Err(Error::ZeroMatrix);
    }
    let lambda1 = sigma1 * sigma1;
    let tol = T::lit(rank_tol);
    pairs.retain(|(s, _)| *s * *s / lambda1 >= tol && *s > T::zero());

    // Tie runs.
    let tie = sigma1 * T::lit(1e-10);
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[start].0 - pairs[end].0 <= tie {
            end += 1;
        }
        pairs[start..end].sort_by_key(|p| argmax_abs(&p.1));
        start = end;
    }

    let xt = x.entries.transpose();
    let triples = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (sigma, mut u))| {
            let scale = u.iter().fold(T::zero(), |m, c| m.max(c.abs()));
            if let Some(first) = u.iter().find(|c| c.abs() > scale * T::lit(1e-12)) {
                if *first < T::zero() {
                    u.neg_mut();
                }
            }
            let v = (&xt * &u) / sigma;
            let elementary = hankelize_rank_one(sigma, &u, &v);
            Eigentriple {
                index: i + 1,
                sigma,
                u,
                v,
                elementary,
            }
        })
        .collect::<Vec<_>>();
    let total_energy = triples.iter().fold(T::zero(), |acc, e| acc + e.lambda());
    Ok(Decomposition {
        trajectory: x.clone(),
        triples,
        total_energy,
    })
}

fn check_group<T: Real>(dec: &Decomposition<T>, group: &[usize]) -> Result<()> {
    if group.is_empty() {
        return Err(Error::InvalidArgument("empty eigentriple group".into()));
    }
    group.iter().try_for_each(|&i| dec.check_index(i))
}

/// Component series of a group of 1-based triple indices.
pub fn reconstruct<T: Real>(dec: &Decomposition<T>, group: &[usize]) -> Result<Vec<T>> {
    check_group(dec, group)?;
    let mut out = vec![T::zero(); dec.series_len()];
    for &i in group {
        for (o, &e) in out.iter_mut().zip(&dec.triples[i - 1].elementary) {
            *o += e;
        }
    }
    Ok(out)
}

/// Fraction of total energy carried by a group of triples.
pub fn eigenvalue_share<T: Real>(dec: &Decomposition<T>, group: &[usize]) -> Result<T> {
    group.iter().try_for_each(|&i| dec.check_index(i))?;
    let part = group
        .iter()
        .fold(T::zero(), |acc, &i| acc + dec.triples[i - 1].lambda());
    Ok(part / dec.total_energy)
}
