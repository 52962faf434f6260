use nalgebra::DMatrix;
use proptest::prelude::*;
use timescale_core::ssa::{
    anti_diagonal_count, decompose, eigenvalue_share, embed_values, hankelize, max_window,
    reconstruct, DEFAULT_RANK_TOL,
};
use timescale_core::synth::{gen_harmonic_series, SynthScenario};
use timescale_core::grouping::{cluster_decomposition, wcorr_matrix};

fn series(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0_f64, len)
}

fn frob(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hankelize_inverts_embedding(x in series(40), l in 2usize..=20) {
        let traj = embed_values(&x, l).unwrap();
        let back = hankelize(traj.entries());
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn hankelize_is_linear(
        a in prop::collection::vec(-10.0..10.0_f64, 50),
        b in prop::collection::vec(-10.0..10.0_f64, 50),
        alpha in -3.0..3.0_f64,
    ) {
        let ma = DMatrix::from_row_slice(5, 10, &a);
        let mb = DMatrix::from_row_slice(5, 10, &b);
        let lhs = hankelize(&(&ma * alpha + &mb));
        let ha = hankelize(&ma);
        let hb = hankelize(&mb);
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - (alpha * ha[i] + hb[i])).abs() <= 1e-10);
        }
    }

    #[test]
    fn hankel_projection_is_nearest(
        y in prop::collection::vec(-10.0..10.0_f64, 150),
        z in prop::collection::vec(-1.0..1.0_f64, 24),
    ) {
        let m = DMatrix::from_row_slice(10, 15, &y);
        let h = hankelize(&m);
        let proj = embed_values(&h, 10).unwrap();
        let perturbed: Vec<f64> = h.iter().zip(&z).map(|(a, b)| a + b).collect();
        let other = embed_values(&perturbed, 10).unwrap();
        prop_assert!(frob(&(&m - proj.entries())) <= frob(&(&m - other.entries())) + 1e-12);
    }

    #[test]
    fn elementary_series_sum_back(x in series(61), l in 2usize..=31) {
        let dec = decompose(&embed_values(&x, l).unwrap(), DEFAULT_RANK_TOL).unwrap();
        let all: Vec<usize> = (1..=dec.rank()).collect();
        let rec = reconstruct(&dec, &all).unwrap();
        let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (a, b) in rec.iter().zip(&x) {
            prop_assert!((a - b).abs() <= 1e-9 * scale.max(1.0));
        }
        let share = eigenvalue_share(&dec, &all).unwrap();
        prop_assert!((share - 1.0).abs() < 1e-12);
    }
}

#[test]
fn anti_diagonal_counts_sum_to_matrix_size() {
    for (l, k) in [(3, 5), (5, 5), (12, 12), (7, 30)] {
        let n = l + k - 1;
        let total: usize = (0..n).map(|t| anti_diagonal_count(t, l, k)).sum();
        assert_eq!(total, l * k);
    }
    assert_eq!(max_window(23), 12);
}

#[test]
fn noiseless_harmonics_recovered_exactly() {
    let sc = SynthScenario::default();
    let s = gen_harmonic_series::<f64>(&sc).unwrap();
    let x = s.series.complete_values().unwrap();
    let dec = decompose(&embed_values(&x, 60).unwrap(), DEFAULT_RANK_TOL).unwrap();
    assert_eq!(dec.rank(), 5);
    let w = wcorr_matrix(&dec).unwrap();
    let g = cluster_decomposition(&dec, &w, 3).unwrap();
    let mut truths = vec![s.trend.clone()];
    truths.extend(s.harmonics.iter().cloned());
    for truth in &truths {
        let best = g
            .components()
            .iter()
            .map(|c| c.iter().zip(truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min);
        assert!(best <= 1e-6, "max error {best}");
    }
}
