//! Frozen values from an independent numpy/sympy implementation.

use approx::assert_abs_diff_eq;
use arisum::dependence::{alpha_hat, autocovariance, independence_gap};
use arisum::deviation::{mertens_riemann_check, variance_growth};
use arisum::prob_space::moments;
use arisum::sieve::sieve_table;
use arisum::summation::{accumulate, mertens};
use arisum::FunctionKind;

#[test]
fn mertens_at_powers_of_ten() {
    assert_eq!(mertens(1_000_000).unwrap(), 212);
    assert_eq!(mertens(10_000_000).unwrap(), 1037);
}

#[test]
fn counting_functions() {
    let cps = [10_000, 1_000_000];
    let get = |kind| accumulate(kind, 1_000_000, &cps).unwrap();
    let sf = get(FunctionKind::SquarefreeIndicator);
    assert_eq!((sf.int_at(10_000), sf.int_at(1_000_000)), (Some(6083), Some(607_926)));
    let pi = get(FunctionKind::PrimeIndicator);
    assert_eq!((pi.int_at(10_000), pi.int_at(1_000_000)), (Some(1229), Some(78_498)));
    let tw = get(FunctionKind::TwinPrimeIndicator);
    assert_eq!((tw.int_at(10_000), tw.int_at(1_000_000)), (Some(205), Some(8169)));
    let li = get(FunctionKind::Liouville);
    assert_eq!((li.int_at(10_000), li.int_at(1_000_000)), (Some(-94), Some(-530)));
    assert_eq!(get(FunctionKind::OmegaEquals(1)).int_at(1_000_000), Some(78_734));
    assert_eq!(get(FunctionKind::OmegaEquals(2)).int_at(1_000_000), Some(288_726));
    assert_eq!(get(FunctionKind::OmegaEquals(3)).int_at(1_000_000), Some(379_720));
}

#[test]
fn chebyshev_psi() {
    let s = accumulate(FunctionKind::VonMangoldt, 10_000, &[10_000]).unwrap();
    assert_abs_diff_eq!(s.sums.get(0).unwrap(), 10_013.396_693_263_115, epsilon = 1e-8);
}

#[test]
fn weight_moments_at_a_million() {
    let t = sieve_table(FunctionKind::SignedSquarefree, 1, 1_000_000).unwrap();
    let m = moments(&t, 1_000_000).unwrap();
    assert_eq!(m.mean, 0.304_281);
    let exact = (1_520_133.0 * 1e6 - 304_281f64 * 304_281.0) / 1e12;
    assert_abs_diff_eq!(m.variance, exact, epsilon = 1e-15);
}

#[test]
fn prime_lag_one_dependence() {
    let t = sieve_table(FunctionKind::PrimeIndicator, 1, 10_000).unwrap();
    let r = autocovariance(&t, 10_000, &[1]).unwrap();
    assert_abs_diff_eq!(r.r_hat[0], -0.015_007_421_183_118_307, epsilon = 1e-15);
    let gap = independence_gap(&t, 10_000, 1, &[1], &[1]).unwrap();
    assert_abs_diff_eq!(gap, 0.015_007_421_334_192_623, epsilon = 1e-15);
    let a = alpha_hat(&t, 10_000, &[1]).unwrap();
    assert_abs_diff_eq!(a.alpha_hat[0], 0.0150, epsilon = 1e-4);
}

#[test]
fn moebius_lag_zero_at_a_million() {
    let t = sieve_table(FunctionKind::Moebius, 1, 1_000_000).unwrap();
    let r = autocovariance(&t, 1_000_000, &[0]).unwrap();
    assert_abs_diff_eq!(r.r_hat[0], 0.607_925_955_056, epsilon = 1e-11);
}

#[test]
fn mertens_exponent_maxima() {
    let r = mertens_riemann_check(1_000_000, 0.0).unwrap();
    assert_eq!(r.argmax_n, 300_551);
    assert_abs_diff_eq!(r.worst_ratio, 0.869_020_370_393_411_6, epsilon = 1e-12);
    assert_eq!(r.skipped, 5361);
    let r = mertens_riemann_check(100_000, 0.01).unwrap();
    assert_eq!(r.argmax_n, 5);
    assert_abs_diff_eq!(r.worst_ratio, 0.844_463_839_359_594_2, epsilon = 1e-12);
}

#[test]
fn moebius_variance_growth_is_flat() {
    let t = sieve_table(FunctionKind::Moebius, 1, 1_000_000).unwrap();
    let g = variance_growth(&t, 1_000_000, 1000).unwrap();
    let last = g.points.last().unwrap();
    assert_eq!(last.0, 1_000_000);
    assert_abs_diff_eq!(last.1, 0.619, epsilon = 1e-3);
    assert!(g.slope.unwrap().abs() <= 0.15, "{:?}", g.slope);
}

#[test]
fn ks_of_normal_quantiles() {
    use statrs::distribution::{ContinuousCDF, Normal};
    let normal = Normal::standard();
    let j = 99;
    let xs: Vec<f64> = (1..=j).map(|i| normal.inverse_cdf(i as f64 / (j + 1) as f64)).collect();
    let d = arisum::limit_dist::ks_normal(&xs).unwrap();
    assert!(d <= 0.011, "{d}");
    assert_abs_diff_eq!(d, 0.01, epsilon = 1e-9);
}
