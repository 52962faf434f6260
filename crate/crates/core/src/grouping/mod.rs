//! Eigentriple grouping: w-correlations, complete-linkage clustering,
//! peak-count periods, non-identifiability merging and manual regrouping.

mod linkage;
mod period;
mod wcorr;

pub use linkage::{cluster_groups, complete_linkage, CutHeights, Dendrogram, Merge};
pub use period::{estimate_period, peak_indices, PeriodEstimate};
pub use wcorr::{wcorr_matrix, WMatrix};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{pearson, Real};
use crate::ssa::{eigenvalue_share, reconstruct, Decomposition};

/// Default Pearson tolerance for merging non-identifiable components.
pub const DEFAULT_EPSILON: f64 = 0.25;

/// Partition of eigentriple indices with reconstructed components.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping<T: Real> {
    groups: Vec<Vec<usize>>,
    components: Vec<Vec<T>>,
    periods: Vec<PeriodEstimate>,
    labels: Vec<String>,
}

/// Checks that `groups` partitions 1..=d.
pub fn check_partition(groups: &[Vec<usize>], d: usize) -> Result<()> {
    let mut seen = BTreeSet::new();
    let mut overlap = BTreeSet::new();
    for &i in groups.iter().flatten() {
        if i == 0 || i > d {
            return Err(Error::IndexOutOfRange { index: i, d });
        }
        if !seen.insert(i) {
            overlap.insert(i);
        }
    }
    let missing: Vec<usize> = (1..=d).filter(|i| !seen.contains(i)).collect();
    if !overlap.is_empty() || !missing.is_empty() || groups.iter().any(Vec::is_empty) {
        return Err(Error::NotPartition {
            overlap: overlap.into_iter().collect(),
            missing,
        });
    }
    Ok(())
}

impl<T: Real> Grouping<T> {
    /// Reconstructs each group and estimates its period.
    pub fn from_groups(dec: &Decomposition<T>, groups: Vec<Vec<usize>>) -> Result<Self> {
        let labels = (1..=groups.len()).map(|i| format!("G{i}")).collect();
        Self::with_labels(dec, groups, labels)
    }

    pub fn with_labels(
        dec: &Decomposition<T>,
        mut groups: Vec<Vec<usize>>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != groups.len() {
            return Err(Error::InvalidArgument("one label per group required".into()));
        }
        check_partition(&groups, dec.rank())?;
        groups.iter_mut().for_each(|g| g.sort_unstable());
        let components = groups
            .iter()
            .map(|g| reconstruct(dec, g))
            .collect::<Result<Vec<_>>>()?;
        let periods = components.iter().map(|c| estimate_period(c)).collect();
        Ok(Grouping {
            groups,
            components,
            periods,
            labels,
        })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.components
    }

    pub fn periods(&self) -> &[PeriodEstimate] {
        &self.periods
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn shares(&self, dec: &Decomposition<T>) -> Result<Vec<f64>> {
        self.groups
            .iter()
            .map(|g| eigenvalue_share(dec, g).map(Real::as_f64))
            .collect()
    }

    pub fn export(&self, dec: &Decomposition<T>) -> Result<GroupingExport> {
        Ok(GroupingExport {
            labels: self.labels.clone(),
            groups: self.groups.clone(),
            periods: self.periods.iter().map(|p| p.period).collect(),
            peaks: self.periods.iter().map(|p| p.peaks).collect(),
            trend: self.periods.iter().map(|p| p.trend).collect(),
            shares: self.shares(dec)?,
        })
    }
}

/// JSON shape of an exported grouping.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GroupingExport {
    pub labels: Vec<String>,
    pub groups: Vec<Vec<usize>>,
    pub periods: Vec<f64>,
    pub peaks: Vec<usize>,
    pub trend: Vec<bool>,
    pub shares: Vec<f64>,
}

/// Clusters eigentriples into `p` groups and reconstructs them.
pub fn cluster_decomposition<T: Real>(
    dec: &Decomposition<T>,
    w: &WMatrix<T>,
    p: usize,
) -> Result<Grouping<T>> {
    Grouping::from_groups(dec, cluster_groups(w, p)?)
}

/// How non-identifiable components are merged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum MergeMode {
    /// Merge whenever the integer parts of two periods agree.
    FloorRule,
    /// Additionally require |Pearson correlation| below `epsilon`.
    Pearson { epsilon: f64 },
}

impl Default for MergeMode {
    fn default() -> Self {
        MergeMode::FloorRule
    }
}

/// First pair (lowest indices) of components that must be merged.
///
/// Components with different trend flags never merge.
pub fn next_merge(
    periods: &[PeriodEstimate],
    correlation: impl Fn(usize, usize) -> f64,
    mode: MergeMode,
) -> Option<(usize, usize)> {
    for a in 0..periods.len() {
        for b in a + 1..periods.len() {
            let (pa, pb) = (&periods[a], &periods[b]);
            if pa.trend != pb.trend || pa.whole_days() != pb.whole_days() {
                continue;
            }
            match mode {
                MergeMode::FloorRule => return Some((a, b)),
                MergeMode::Pearson { epsilon } => {
                    if correlation(a, b).abs() < epsilon {
                        return Some((a, b));
                    }
                }
            }
        }
    }
    None
}

/// Repeatedly merges non-identifiable components until none remain.
///
/// The merged group takes the position of the lower of the pair.
pub fn merge_nonidentifiable<T: Real>(
    g: &Grouping<T>,
    dec: &Decomposition<T>,
    mode: MergeMode,
) -> Result<Grouping<T>> {
    let mut current = g.clone();
    loop {
        let comps = &current.components;
        let pair = next_merge(
            &current.periods,
            |a, b| pearson(&comps[a], &comps[b]).as_f64(),
            mode,
        );
        let Some((a, b)) = pair else {
            return Ok(current);
        };
        let mut groups = current.groups.clone();
        let mut labels = current.labels.clone();
        let moved = groups.remove(b);
        groups[a].extend(moved);
        let absorbed = labels.remove(b);
        labels[a] = format!("{}+{absorbed}", labels[a]);
        current = Grouping::with_labels(dec, groups, labels)?;
    }
}

/// A manual regrouping directive. Group numbers are 1-based positions in
/// the grouping the directive applies to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "op")]
pub enum RegroupEdit {
    /// Replace one group by the given parts, in place.
    Split { group: usize, parts: Vec<Vec<usize>> },
    /// Join groups into the position of the first one listed.
    Merge { groups: Vec<usize> },
}

/// Applies split and merge directives in order, then reconstructs.
pub fn regroup<T: Real>(
    g: &Grouping<T>,
    dec: &Decomposition<T>,
    edits: &[RegroupEdit],
) -> Result<Grouping<T>> {
    if edits.is_empty() {
        return Ok(g.clone());
    }
    let mut groups = g.groups.clone();
    for edit in edits {
        match edit {
            RegroupEdit::Split { group, parts } => {
                let pos = position(*group, groups.len())?;
                let mut target = groups[pos].clone();
                target.sort_unstable();
                let mut union: Vec<usize> = parts.iter().flatten().copied().collect();
                union.sort_unstable();
                if union != target || parts.iter().any(Vec::is_empty) {
                    let overlap = duplicates(&union);
                    let missing = target.iter().filter(|i| !union.contains(i)).copied().collect();
                    let mut extra: Vec<usize> =
                        union.iter().filter(|i| !target.contains(i)).copied().collect();
                    extra.dedup();
                    let mut overlap: Vec<usize> = overlap.into_iter().chain(extra).collect();
                    overlap.sort_unstable();
                    overlap.dedup();
                    return Err(Error::NotPartition { overlap, missing });
                }
                groups.splice(pos..=pos, parts.iter().cloned());
            }
            RegroupEdit::Merge { groups: which } => {
                if which.len() < 2 {
                    return Err(Error::InvalidArgument("merge needs at least two groups".into()));
                }
                let positions = which
                    .iter()
                    .map(|&w| position(w, groups.len()))
                    .collect::<Result<Vec<_>>>()?;
                if !duplicates(&positions).is_empty() {
                    return Err(Error::InvalidArgument("merge lists a group twice".into()));
                }
                let head = positions[0];
                let mut joined: Vec<usize> =
                    positions.iter().flat_map(|&p| groups[p].clone()).collect();
                joined.sort_unstable();
                groups[head] = joined;
                let mut drop: Vec<usize> = positions[1..].to_vec();
                drop.sort_unstable_by(|a, b| b.cmp(a));
                for p in drop {
                    groups.remove(p);
                }
            }
        }
    }
    Grouping::from_groups(dec, groups)
}

fn position(group: usize, len: usize) -> Result<usize> {
    if group == 0 || group > len {
        return Err(Error::InvalidArgument(format!(
            "group {group} does not exist (have {len})"
        )));
    }
    Ok(group - 1)
}

fn duplicates(sorted_or_not: &[usize]) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut dup = BTreeSet::new();
    for &i in sorted_or_not {
        if !seen.insert(i) {
            dup.insert(i);
        }
    }
    dup.into_iter().collect()
}
