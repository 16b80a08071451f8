use nalgebra::DMatrix;

use blockamc::mapping::{program, MapConfig};
use blockamc::matgen::{gen_rhs, generate, GenSpec, MatrixKind};
use blockamc::Matrix;

#[test]
fn wishart_256_is_positive_definite() {
    let a = generate(&GenSpec::new(MatrixKind::Wishart, 256, 7)).unwrap();
    let m = DMatrix::from_row_slice(256, 256, a.data());
    let eig = m.symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > 0.0, "min eigenvalue {min}");
}

#[test]
fn rhs_256_stays_in_unit_range() {
    let b = gen_rhs(256, 7).unwrap();
    assert!(b.iter().all(|v| (-1.0..=1.0).contains(v)));
}

/// 100 000 cells at 0.6·G₀ (well clear of the clip floor): the programming
/// error has zero mean and a standard deviation within 2% of σ·G₀.
#[test]
fn programming_noise_has_the_configured_spread() {
    let cfg = MapConfig::default();
    let a = Matrix::from_fn(250, 400, |_, _| 0.6);
    let arr = program(&a, &cfg, 42).unwrap();
    let errors: Vec<f64> = arr.g_plus.data().iter().map(|g| g - 0.6 * cfg.g0).collect();
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let std = (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let target = cfg.sigma_rel * cfg.g0;
    assert!((std - target).abs() <= 0.02 * target, "std {std:e} vs {target:e}");
    assert!(mean.abs() <= 5.0 * target / n.sqrt(), "mean {mean:e}");
}

#[test]
fn different_seeds_give_independent_noise() {
    let cfg = MapConfig::default();
    let a = Matrix::from_fn(200, 200, |_, _| 0.5);
    let p = program(&a, &cfg, 1).unwrap();
    let q = program(&a, &cfg, 2).unwrap();
    let d: Vec<f64> = p.g_plus.data().iter().zip(q.g_plus.data()).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sigma = cfg.sigma_rel * cfg.g0;
    // The difference of two independent draws has std σ·√2.
    assert!(mean.abs() <= 5.0 * sigma * 2f64.sqrt() / n.sqrt(), "mean {mean:e}");
    assert!(d.iter().any(|x| *x != 0.0));
}
