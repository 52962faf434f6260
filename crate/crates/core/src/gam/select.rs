use super::design::Design;
use super::pirls::{fit_pirls, GamFit};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// log10 smoothing parameters -3, -2.5, ..., 6.
pub fn default_grid() -> Vec<f64> {
    (0..=18).map(|i| -3.0 + 0.5 * i as f64).collect()
}

const MAX_CYCLES: usize = 50;

/// UBRE coordinate descent over a grid of log10 smoothing parameters.
///
/// Each smooth in turn takes the grid value minimising UBRE with the others
/// held fixed; cycles stop once no coordinate moves. Equal scores keep the
/// smaller smoothing parameter. Every smooth starts at the grid midpoint.
pub fn select_smoothing<T: Real>(
    design: &Design<T>,
    counts: &[T],
    log10_grid: &[f64],
) -> Result<GamFit<T>> {
    let m = design.smooths.len();
    let fit = |deltas: &[f64]| {
        fit_pirls(design, counts, deltas).map_err(|e| Error::SmoothingFailed {
            deltas: deltas.to_vec(),
            source: Box::new(e),
        })
    };
    if m == 0 {
        return fit(&[]);
    }
    if log10_grid.is_empty() {
        return Err(Error::InvalidArgument("empty smoothing grid".into()));
    }
    let mut grid = log10_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    grid.dedup();
    let values: Vec<f64> = grid.iter().map(|g| 10f64.powf(*g)).collect();

    let mut chosen = vec![grid.len() / 2; m];
    let deltas_of = |idx: &[usize]| idx.iter().map(|&i| values[i]).collect::<Vec<_>>();
    let mut best = fit(&deltas_of(&chosen))?;
    for _ in 0..MAX_CYCLES {
        let mut moved = false;
        for j in 0..m {
            let mut local_best: Option<(usize, GamFit<T>)> = None;
            for g in 0..values.len() {
                let mut trial = chosen.clone();
                trial[j] = g;
                let candidate = if g == chosen[j] { best.clone() } else { fit(&deltas_of(&trial))? };
                let better = match &local_best {
                    None => true,
                    Some((_, b)) => candidate.ubre < b.ubre,
                };
                if better {
                    local_best = Some((g, candidate));
                }
            }
            let (g, f) = local_best.expect("grid is nonempty");
            if g != chosen[j] && f.ubre < best.ubre {
                chosen[j] = g;
                best = f;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    Ok(best)
}
