//! Normality machinery for summation functions.
//!
//! A single arithmetic sequence yields one realization of `S(n)`, so the
//! normality of the sum is examined on disjoint block sums
//! `T_j = f((j-1)B + 1) + ... + f(jB)`, which serve as approximately
//! independent replicates. Neighbouring blocks are still dependent; that
//! inflates the KS statistic and is stated in every report.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::output::format_real;
use crate::sieve::{FunctionKind, ValueTable};
use crate::{Error, Result};

pub const MIN_BLOCK_SIZE: u64 = 100;
pub const MIN_BLOCKS: u64 = 30;
pub const MIN_KS_SAMPLES: usize = 30;
pub const DEFAULT_BLOCK_SIZE: u64 = 1000;

pub const BLOCK_SUM_NOTE: &str =
    "normality is tested on standardized disjoint block sums; dependence between blocks inflates the KS statistic";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub kind: FunctionKind,
    pub n: u64,
    pub block_size: u64,
    pub block_count: u64,
    pub block_sums: Vec<f64>,
    pub standardized_samples: Vec<f64>,
    /// Filled by [`normality_report`]; `None` straight out of [`block_standardize`].
    pub ks_statistic: Option<f64>,
    /// Mean of the block sums.
    pub sample_mean: f64,
    /// Standard deviation of the block sums, `J - 1` denominator.
    pub sample_sd: f64,
    pub note: String,
}

impl NormalityReport {
    /// `block,T,z` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "block,T,z")?;
        for (j, (t, z)) in self.block_sums.iter().zip(&self.standardized_samples).enumerate() {
            writeln!(w, "{},{},{}", j + 1, format_real(*t), format_real(*z))?;
        }
        Ok(())
    }
}

/// Variance `Q (1 - Q/n)` of a binomial count with success frequency `Q/n`.
pub fn binomial_variance(q: u64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroArgument);
    }
    if q > n {
        return Err(Error::InvalidArgument(format!("count {q} exceeds n = {n}")));
    }
    // Q(n - Q)/n keeps the Q <-> n - Q symmetry exact.
    Ok((q as f64) * ((n - q) as f64) / n as f64)
}

/// Disjoint block sums of `f` on `[1, J*B]`, standardized by their own mean and sd.
pub fn block_standardize(table: &ValueTable, n: u64, block_size: u64) -> Result<NormalityReport> {
    table.require_prefix(n)?;
    if block_size < MIN_BLOCK_SIZE {
        return Err(Error::BlockTooSmall { block: block_size, min: MIN_BLOCK_SIZE });
    }
    let blocks = n / block_size;
    if blocks < MIN_BLOCKS {
        return Err(Error::TooFewBlocks { blocks, required: MIN_BLOCKS });
    }
    let block_sums = block_sums(table, blocks, block_size);
    let (mean, sd) = mean_sd(&block_sums);
    if sd.is_nan() || sd <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let standardized_samples = block_sums.iter().map(|t| (t - mean) / sd).collect();
    Ok(NormalityReport {
        kind: table.kind(),
        n,
        block_size,
        block_count: blocks,
        block_sums,
        standardized_samples,
        ks_statistic: None,
        sample_mean: mean,
        sample_sd: sd,
        note: BLOCK_SUM_NOTE.to_string(),
    })
}

pub(crate) fn block_sums(table: &ValueTable, blocks: u64, block_size: u64) -> Vec<f64> {
    let b = block_size as usize;
    match (table.as_int(), table.as_real()) {
        (Some(v), _) => {
            v[..blocks as usize * b].chunks_exact(b).map(|c| c.iter().map(|&x| x as i64).sum::<i64>() as f64).collect()
        }
        (_, Some(v)) => v[..blocks as usize * b].chunks_exact(b).map(|c| c.iter().sum()).collect(),
        _ => unreachable!(),
    }
}

/// Mean and `J - 1` standard deviation.
pub(crate) fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Kolmogorov-Smirnov distance `sup_z |F_hat(z) - Phi(z)|` between the
/// sample's empirical distribution and the standard normal. Both one-sided
/// deviations are taken at every order statistic.
pub fn ks_normal(samples: &[f64]) -> Result<f64> {
    if samples.len() < MIN_KS_SAMPLES {
        return Err(Error::TooFewSamples { got: samples.len(), required: MIN_KS_SAMPLES });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteSample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let phi = normal.cdf(x);
        let above = (i + 1) as f64 / n - phi;
        let below = phi - i as f64 / n;
        d.max(above).max(below)
    }))
}

/// Block standardization followed by the KS distance to the standard normal.
pub fn normality_report(table: &ValueTable, n: u64, block_size: u64) -> Result<NormalityReport> {
    let mut report = block_standardize(table, n, block_size)?;
    report.ks_statistic = Some(ks_normal(&report.standardized_samples)?);
    Ok(report)
}

/// Limiting mean and variance of the weight taking 2 on squarefree integers
/// with an even number of prime factors, -1 with an odd number, 0 elsewhere:
/// `(3/pi^2, 15/pi^2 - 9/pi^4)`.
pub fn signed_squarefree_moments() -> (f64, f64) {
    let pi2 = PI * PI;
    (3.0 / pi2, 15.0 / pi2 - 9.0 / (pi2 * pi2))
}

/// Limiting variance `6/pi^2` of the Moebius function.
pub fn mertens_increment_variance() -> f64 {
    6.0 / (PI * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob_space::moments;
    use crate::sieve::sieve_table;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binomial_variance_examples() {
        assert!((binomial_variance(7, 10).unwrap() - 2.1).abs() < 1e-15);
        assert_eq!(binomial_variance(0, 10).unwrap(), 0.0);
        assert_eq!(binomial_variance(10, 10).unwrap(), 0.0);
        assert!(binomial_variance(11, 10).is_err());
        assert!(binomial_variance(0, 0).is_err());
    }

    #[test]
    fn constants() {
        let (mean, var) = signed_squarefree_moments();
        assert!((mean - 0.303_963_550_927_013_3).abs() < 1e-15);
        assert!((var - 1.427_423_914_342_907_5).abs() < 1e-14);
        let pi2 = PI * PI;
        assert!((2.0 * (3.0 / pi2) - 3.0 / pi2 - mean).abs() < 1e-15);
        assert!((mertens_increment_variance() - 0.607_927_101_854_026_7).abs() < 1e-15);
    }

    #[test]
    fn small_moebius_variance() {
        let t = sieve_table(FunctionKind::Moebius, 1, 10).unwrap();
        assert!((moments(&t, 10).unwrap().variance - 0.69).abs() < 1e-15);
    }

    #[test]
    fn constant_table_is_degenerate() {
        let t = ValueTable::from_int_values(FunctionKind::PrimeIndicator, 1, vec![1; 10_000]).unwrap();
        assert!(matches!(block_standardize(&t, 10_000, 100), Err(Error::DegenerateVariance)));
    }

    #[test]
    fn block_preconditions() {
        let t = sieve_table(FunctionKind::Moebius, 1, 10_000).unwrap();
        assert!(matches!(block_standardize(&t, 10_000, 99), Err(Error::BlockTooSmall { .. })));
        assert!(matches!(block_standardize(&t, 10_000, 500), Err(Error::TooFewBlocks { blocks: 20, .. })));
    }

    #[test]
    fn standardized_samples_are_standard() {
        let t = sieve_table(FunctionKind::Moebius, 1, 100_000).unwrap();
        let r = block_standardize(&t, 100_000, 1000).unwrap();
        let (m, sd) = mean_sd(&r.standardized_samples);
        assert!(m.abs() < 1e-12);
        assert!((sd - 1.0).abs() < 1e-12);
        assert_eq!(r.block_count, 100);
        assert!(r.ks_statistic.is_none());
    }

    #[test]
    fn ks_edge_cases() {
        assert!(matches!(ks_normal(&[0.0; 29]), Err(Error::TooFewSamples { got: 29, .. })));
        let mut xs = vec![0.0; 40];
        xs[3] = f64::NAN;
        assert!(matches!(ks_normal(&xs), Err(Error::NonFiniteSample)));
        assert!(ks_normal(&[1.7; 50]).unwrap() >= 0.5);
    }

    #[test]
    fn bernoulli_blocks_look_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
        let v: Vec<i8> = (0..100_000).map(|_| rng.random_bool(0.5) as i8).collect();
        let t = ValueTable::from_int_values(FunctionKind::PrimeIndicator, 1, v).unwrap();
        let r = normality_report(&t, 100_000, 1000).unwrap();
        assert!(r.ks_statistic.unwrap() <= 0.15, "{:?}", r.ks_statistic);
    }
}
