use serde::Serialize;

use super::WMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One agglomeration step. Cluster member lists are 1-based triple indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Merge {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub height: f64,
}

/// Complete-linkage merge history over the items of a w-matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    pub items: usize,
    pub merges: Vec<Merge>,
}

/// Linkage heights around a cut, for judging how clean it is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutHeights {
    /// Highest merge performed inside the kept clusters.
    pub within: f64,
    /// Height of the first merge that the cut leaves undone.
    pub between: f64,
}

impl Dendrogram {
    /// Partition obtained by stopping when `p` clusters remain, sorted by
    /// smallest member.
    pub fn cut(&self, p: usize) -> Result<Vec<Vec<usize>>> {
        if p == 0 || p > self.items {
            return Err(Error::InvalidArgument(format!(
                "group count {p} outside 1..={}",
                self.items
            )));
        }
        let mut clusters: Vec<Vec<usize>> = (1..=self.items).map(|i| vec![i]).collect();
        for m in &self.merges[..self.items - p] {
            clusters.retain(|c| c != &m.left && c != &m.right);
            clusters.push(union(&m.left, &m.right));
        }
        clusters.sort_by_key(|c| c[0]);
        Ok(clusters)
    }

    pub fn cut_heights(&self, p: usize) -> CutHeights {
        let done = self.items.saturating_sub(p);
        CutHeights {
            within: self.merges[..done].iter().map(|m| m.height).fold(0.0, f64::max),
            between: self.merges.get(done).map_or(f64::INFINITY, |m| m.height),
        }
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u
}

/// Agglomerative clustering on 1 - |w| with complete linkage.
///
/// The closest pair merges first; equal distances go to the pair whose
/// smallest members are lowest.
pub fn complete_linkage<T: Real>(w: &WMatrix<T>) -> Dendrogram {
    let d = w.dim();
    let mut clusters: Vec<Vec<usize>> = (0..d).map(|i| vec![i]).collect();
    // dist[a][b] between current clusters a, b
    let mut dist: Vec<Vec<f64>> = (0..d)
        .map(|a| (0..d).map(|b| w.dissimilarity(a, b).as_f64()).collect())
        .collect();
    let mut merges = Vec::with_capacity(d.saturating_sub(1));
    while clusters.len() > 1 {
        let key = |a: usize, b: usize| {
            let (x, y) = (clusters[a][0], clusters[b][0]);
            (x.min(y), x.max(y))
        };
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let h = dist[a][b];
                let better = match best {
                    None => true,
                    Some((ba, bb, bh)) => h < bh || (h == bh && key(a, b) < key(ba, bb)),
                };
                if better {
                    best = Some((a, b, h));
                }
            }
        }
        let (a, b, h) = best.expect("at least two clusters");
        let to_labels = |c: &[usize]| c.iter().map(|i| i + 1).collect::<Vec<_>>();
        merges.push(Merge {
            left: to_labels(&clusters[a]),
            right: to_labels(&clusters[b]),
            height: h,
        });
        // complete linkage: distance to the union is the larger of the two
        for c in 0..clusters.len() {
            let m = dist[a][c].max(dist[b][c]);
            dist[a][c] = m;
            dist[c][a] = m;
        }
        dist[a][a] = 0.0;
        let merged = union(&clusters[a], &clusters[b]);
        clusters[a] = merged;
        clusters.remove(b);
        dist.remove(b);
        for row in &mut dist {
            row.remove(b);
        }
    }
    Dendrogram { items: d, merges }
}

/// Cuts the complete-linkage dendrogram of `w` into `p` groups.
pub fn cluster_groups<T: Real>(w: &WMatrix<T>, p: usize) -> Result<Vec<Vec<usize>>> {
    complete_linkage(w).cut(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn from_dissimilarity(d: &[[f64; 3]; 3]) -> WMatrix<f64> {
        WMatrix::new(DMatrix::from_fn(3, 3, |i, j| 1.0 - d[i][j])).unwrap()
    }

    #[test]
    fn hand_traced_three_items() {
        let w = from_dissimilarity(&[[0.0, 0.1, 0.9], [0.1, 0.0, 0.8], [0.9, 0.8, 0.0]]);
        let dend = complete_linkage(&w);
        assert!((dend.merges[0].height - 0.1).abs() < 1e-15);
        assert!((dend.merges[1].height - 0.9).abs() < 1e-15);
        assert_eq!(dend.cut(2).unwrap(), vec![vec![1, 2], vec![3]]);
        assert_eq!(dend.cut(3).unwrap(), vec![vec![1], vec![2], vec![3]]);
        assert_eq!(dend.cut(1).unwrap(), vec![vec![1, 2, 3]]);
        assert!(dend.cut(0).is_err());
        let h = dend.cut_heights(2);
        assert!((h.within - 0.1).abs() < 1e-15);
        assert!((h.between - 0.9).abs() < 1e-15);
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let d = 12;
        let mut m = DMatrix::identity(d, d);
        for i in 0..d {
            for j in i + 1..d {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let w = WMatrix::new(m.clone()).unwrap();
        let base = cluster_groups(&w, 4).unwrap();
        for _ in 0..20 {
            let mut perm: Vec<usize> = (0..d).collect();
            perm.shuffle(&mut rng);
            // permuted item k is original item perm[k]
            let pm = DMatrix::from_fn(d, d, |a, b| m[(perm[a], perm[b])]);
            let got = cluster_groups(&WMatrix::new(pm).unwrap(), 4).unwrap();
            let mut mapped: Vec<Vec<usize>> = got
                .iter()
                .map(|g| {
                    let mut o: Vec<usize> = g.iter().map(|&k| perm[k - 1] + 1).collect();
                    o.sort_unstable();
                    o
                })
                .collect();
            mapped.sort_by_key(|g| g[0]);
            assert_eq!(mapped, base);
        }
    }
}
