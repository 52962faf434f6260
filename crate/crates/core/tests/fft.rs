use proptest::prelude::*;
use timescale_core::fft_band::{band_decompose, BandSpec};
use timescale_core::Error;

fn spec() -> BandSpec {
    BandSpec::new(vec![1.0, 19.0, 41.0, 83.0, 165.0, 579.0]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bands_add_up_and_are_orthogonal(x in prop::collection::vec(-50.0..50.0_f64, 579)) {
        let d = band_decompose(&x, &spec()).unwrap();
        prop_assert_eq!(d.bands.len(), 5);
        let norm = x.iter().map(|v| v * v).sum::<f64>();
        for t in 0..579 {
            let s: f64 = d.bands.iter().map(|b| b.series[t]).sum();
            prop_assert!((s - x[t]).abs() <= 1e-10 * norm.sqrt().max(1.0));
        }
        for i in 0..5 {
            for j in i + 1..5 {
                let dot: f64 = d.bands[i].series.iter().zip(&d.bands[j].series).map(|(a, b)| a * b).sum();
                prop_assert!(dot.abs() <= 1e-8 * norm.max(1.0));
            }
        }
        prop_assert!(d.max_imaginary <= 1e-9 * norm.sqrt().max(1.0));
    }

    #[test]
    fn every_frequency_lands_in_one_band(n in 40usize..300) {
        let s = BandSpec::new(vec![2.0, 7.0, n as f64]).unwrap();
        let x: Vec<f64> = (0..n).map(|t| ((t * 7919) % 13) as f64).collect();
        let d = band_decompose(&x, &s).unwrap();
        let mut all: Vec<usize> = d.bands.iter().flat_map(|b| b.frequencies.clone()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..=n / 2).collect::<Vec<_>>());
    }
}

#[test]
fn cosine_lands_in_its_band() {
    let n = 240;
    let x: Vec<f64> = (0..n)
        .map(|t| {
            let t = t as f64;
            (2.0 * std::f64::consts::PI * t / 30.0).cos() + 0.5 * (2.0 * std::f64::consts::PI * t / 6.0).cos()
        })
        .collect();
    let s = BandSpec::new(vec![2.0, 10.0, 240.0]).unwrap();
    let d = band_decompose(&x, &s).unwrap();
    for t in 0..n {
        let tt = t as f64;
        assert!((d.bands[0].series[t] - 0.5 * (2.0 * std::f64::consts::PI * tt / 6.0).cos()).abs() < 1e-10);
        assert!((d.bands[1].series[t] - (2.0 * std::f64::consts::PI * tt / 30.0).cos()).abs() < 1e-10);
    }
}

#[test]
fn bad_specs_fail() {
    assert!(BandSpec::new(vec![5.0]).is_err());
    assert!(BandSpec::new(vec![5.0, 3.0]).is_err());
    assert!(band_decompose(&[1.0; 50], &BandSpec::new(vec![1.0, 60.0]).unwrap()).is_err());
    let narrow = BandSpec::new(vec![2.0, 10.0, 10.5, 50.0]).unwrap();
    assert!(matches!(band_decompose(&[1.0; 50], &narrow), Err(Error::EmptyBand { band: 2, .. })));
}
