use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use timescale_core::gam::{
    build_design, compare_models, default_grid, fit_pirls, select_smoothing, ubre_score,
    ModelSpec, SmoothTerm,
};
use timescale_core::synth::{gen_poisson_counts, weekdays_from};
use timescale_core::Error;

/// Plain Newton-Raphson Poisson GLM with Gaussian elimination, written
/// independently of the library's linear algebra.
fn newton_glm(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let mut beta = vec![0.0; p];
    beta[0] = mean.ln();
    for _ in 0..200 {
        let mut grad = vec![0.0; p];
        let mut hess = vec![vec![0.0; p]; p];
        for (row, &yi) in x.iter().zip(y) {
            let eta: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let mu = eta.exp();
            for j in 0..p {
                grad[j] += (yi - mu) * row[j];
                for k in 0..p {
                    hess[j][k] += mu * row[j] * row[k];
                }
            }
        }
        let step = solve(hess, grad);
        let size: f64 = step.iter().map(|s| s.abs()).fold(0.0, f64::max);
        for j in 0..p {
            beta[j] += step[j];
        }
        if size < 1e-14 {
            break;
        }
    }
    beta
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2001, 1, 1).unwrap()
}

#[test]
fn unpenalized_fit_matches_newton_oracle() {
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 150;
        let exposures: Vec<(String, Vec<f64>)> = (0..3)
            .map(|j| (format!("x{j}"), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let comps: Vec<Vec<f64>> = exposures.iter().map(|e| e.1.clone()).collect();
        let counts = gen_poisson_counts(start(), &comps, &[0.3, -0.2, 0.1], &[], 1.5, seed)
            .unwrap()
            .complete_values()
            .unwrap();
        let spec = ModelSpec { exposures, ..Default::default() };
        let design = build_design(&spec).unwrap();
        let fit = fit_pirls(&design, &counts, &[]).unwrap();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| design.matrix.row(i).iter().copied().collect()).collect();
        let oracle = newton_glm(&rows, &counts);
        for (a, b) in fit.coefficients.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-8, "seed {seed}: {a} vs {b}");
        }
        assert!((fit.tr_r - 4.0).abs() < 1e-9);
        assert!(fit.converged);
    }
}

#[test]
fn intercept_only_reference_values() {
    let design = build_design(&ModelSpec::<f64>::intercept_only(3)).unwrap();
    let fit = fit_pirls(&design, &[1.0, 2.0, 3.0], &[]).unwrap();
    assert!((fit.coefficients[0] - 2f64.ln()).abs() < 1e-10);
    assert!((fit.deviance - 1.046496).abs() < 1e-6, "{}", fit.deviance);
    assert!((fit.ubre - 0.015499).abs() < 1e-6, "{}", fit.ubre);
    assert!((ubre_score(&fit) - fit.ubre).abs() < 1e-15);
}

fn smooth_data(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let time: Vec<f64> = (0..n).map(|t| t as f64).collect();
    let wave: Vec<f64> = time.iter().map(|t| (t / n as f64 * 6.0).sin()).collect();
    let counts = gen_poisson_counts(start(), &[wave], &[0.8], &[], 2.0, seed)
        .unwrap()
        .complete_values()
        .unwrap();
    (time, counts)
}

fn time_spec(time: &[f64]) -> ModelSpec<f64> {
    ModelSpec {
        smooths: vec![SmoothTerm { name: "time".into(), covariate: time.to_vec(), basis_dim: 10 }],
        ..Default::default()
    }
}

#[test]
fn heavy_penalty_leaves_a_line() {
    let (time, counts) = smooth_data(300, 1);
    let design = build_design(&time_spec(&time)).unwrap();
    let fit = fit_pirls(&design, &counts, &[1e9]).unwrap();
    assert!((fit.smooths[0].edf - 1.0).abs() < 0.05, "edf {}", fit.smooths[0].edf);
}

#[test]
fn edf_decreases_with_penalty_and_smooths_are_centered() {
    let (time, counts) = smooth_data(300, 2);
    let design = build_design(&time_spec(&time)).unwrap();
    let mut last = f64::INFINITY;
    for d in [1e-3, 1e-1, 1e1, 1e3, 1e5] {
        let fit = fit_pirls(&design, &counts, &[d]).unwrap();
        let edf = fit.smooths[0].edf;
        assert!(edf <= last + 1e-9, "edf rose to {edf} at {d}");
        assert!(edf >= 1.0 - 1e-6 && edf <= 9.0 + 1e-6);
        last = edf;
        let s = fit.smooth_term(&design, 0);
        assert!(s.iter().sum::<f64>().abs() < 1e-8);
        let manual = fit.deviance / 300.0 + 2.0 * fit.tr_r / 300.0 - 1.0;
        assert!((manual - fit.ubre).abs() < 1e-12);
    }
}

#[test]
fn selection_finds_curvature_and_is_deterministic() {
    let (time, counts) = smooth_data(400, 3);
    let n = time.len();
    let mut spec = time_spec(&time);
    spec.weekdays = Some(weekdays_from(start(), n));
    let design = build_design(&spec).unwrap();
    let a = select_smoothing(&design, &counts, &default_grid()).unwrap();
    let b = select_smoothing(&design, &counts, &default_grid()).unwrap();
    assert_eq!(a, b);
    assert!(a.smooths[0].edf > 1.5, "edf {}", a.smooths[0].edf);
    assert!(a.smooths[0].p_value < 1e-6);
    for d in default_grid() {
        let other = fit_pirls(&design, &counts, &[10f64.powf(d)]).unwrap();
        assert!(a.ubre <= other.ubre + 1e-12);
    }
}

#[test]
fn nested_comparison_prefers_true_smooth() {
    let (time, counts) = smooth_data(300, 4);
    let null = build_design(&ModelSpec::<f64>::intercept_only(300)).unwrap();
    let full = build_design(&time_spec(&time)).unwrap();
    let f0 = fit_pirls(&null, &counts, &[]).unwrap();
    let f1 = select_smoothing(&full, &counts, &default_grid()).unwrap();
    let cmp = compare_models(&f0, &f1).unwrap();
    assert!(cmp.deviance_difference > 0.0 && cmp.p_value < 1e-6);
    assert!(compare_models(&f1, &f0).is_err());
    let same = compare_models(&f0, &f0).unwrap();
    assert_eq!(same.p_value, 1.0);
}

#[test]
fn invalid_inputs_are_rejected() {
    let design = build_design(&ModelSpec::<f64>::intercept_only(3)).unwrap();
    assert!(matches!(fit_pirls(&design, &[1.0, -1.0, 2.0], &[]), Err(Error::InvalidCounts(_))));
    assert!(matches!(fit_pirls(&design, &[1.0, 0.5, 2.0], &[]), Err(Error::InvalidCounts(_))));
    let collinear = ModelSpec {
        exposures: vec![("a".into(), vec![1.0, 2.0, 3.0]), ("b".into(), vec![2.0, 4.0, 6.0])],
        ..Default::default()
    };
    assert!(matches!(build_design(&collinear), Err(Error::RankDeficient(_))));
    let constant = ModelSpec {
        smooths: vec![SmoothTerm { name: "c".into(), covariate: vec![1.0; 20], basis_dim: 5 }],
        ..Default::default()
    };
    assert!(build_design(&constant).is_err());
}
