use nalgebra::DMatrix;
use proptest::prelude::*;
use timescale_core::grouping::{
    cluster_groups, complete_linkage, estimate_period, merge_nonidentifiable, regroup, wcorr_matrix,
    Grouping, MergeMode, RegroupEdit, WMatrix,
};
use timescale_core::ssa::{decompose, embed_values};

fn random_w(d: usize, seed: &[f64]) -> WMatrix<f64> {
    let mut m = DMatrix::identity(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in i + 1..d {
            m[(i, j)] = seed[k];
            m[(j, i)] = seed[k];
            k += 1;
        }
    }
    WMatrix::new(m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cut_is_a_partition(vals in prop::collection::vec(-1.0..1.0_f64, 28), p in 1usize..=8) {
        let w = random_w(8, &vals);
        let groups = cluster_groups(&w, p).unwrap();
        prop_assert_eq!(groups.len(), p);
        let mut all: Vec<usize> = groups.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (1..=8).collect::<Vec<_>>());
        let dendro = complete_linkage(&w);
        prop_assert!(dendro.merges.windows(2).all(|m| m[0].height <= m[1].height + 1e-15));
    }

    #[test]
    fn period_of_sampled_sine(period in 3.0..40.0_f64, phase in 0.0..6.28_f64) {
        let n = 800;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * std::f64::consts::PI * t as f64 / period + phase).sin()).collect();
        let est = estimate_period(&x);
        prop_assert!(!est.trend);
        prop_assert!((est.period - period).abs() <= period * period / n as f64 * 1.5 + 1e-9);
    }
}

#[test]
fn monotone_component_is_trend() {
    let x: Vec<f64> = (0..100).map(|t| (t as f64).sqrt()).collect();
    assert!(estimate_period(&x).trend);
}

fn mixed_series() -> Vec<f64> {
    (0..240)
        .map(|t| {
            let t = t as f64;
            20.0 + 5.0 * (2.0 * std::f64::consts::PI * t / 12.0).sin()
                + 2.0 * (2.0 * std::f64::consts::PI * t / 6.0).cos()
                + 0.3 * ((t * 1.7).sin() * 3.1).cos()
        })
        .collect()
}

#[test]
fn splits_and_merges_round_trip() {
    let x = mixed_series();
    let dec = decompose(&embed_values(&x, 48).unwrap(), 0.0).unwrap();
    let d = dec.rank();
    let w = wcorr_matrix(&dec).unwrap();
    let base = Grouping::from_groups(&dec, cluster_groups(&w, 4).unwrap()).unwrap();
    let total = |g: &Grouping<f64>| -> Vec<f64> {
        (0..240).map(|t| g.components().iter().map(|c| c[t]).sum()).collect()
    };
    let first: Vec<usize> = base.groups()[0].clone();
    let merged = regroup(&base, &dec, &[RegroupEdit::Merge { groups: vec![1, 2] }]).unwrap();
    assert_eq!(merged.len(), 3);
    let mut parts = vec![first.clone()];
    let rest: Vec<usize> = merged.groups()[0].iter().filter(|i| !first.contains(i)).copied().collect();
    parts.push(rest);
    let split = regroup(&merged, &dec, &[RegroupEdit::Split { group: 1, parts }]).unwrap();
    assert_eq!(split.groups(), base.groups(), "{:?}", merged.groups());
    for (a, b) in total(&split).iter().zip(&x) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    let m = merge_nonidentifiable(&base, &dec, MergeMode::FloorRule).unwrap();
    let mut all: Vec<usize> = m.groups().iter().flatten().copied().collect();
    all.sort_unstable();
    assert_eq!(all, (1..=d).collect::<Vec<_>>());
    assert!(regroup(&base, &dec, &[RegroupEdit::Split { group: 1, parts: vec![vec![d + 5]] }]).is_err());
}
