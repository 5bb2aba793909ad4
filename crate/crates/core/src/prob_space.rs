//! The uniform probability space on `[1, n]` and the random variable
//! `x_n(k) = f(k)` it induces: mean, variance, density and distribution
//! function.

use serde::Serialize;

use crate::sieve::{FunctionKind, TableValues, ValueTable};
use crate::summation::accumulate;
use crate::{Error, Result};

/// Beyond this many distinct values no histogram is kept.
pub const HISTOGRAM_MAX_DISTINCT: usize = 64;
/// Largest `n` for which the von Mangoldt distribution function is tabulated.
pub const REAL_CDF_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMoments {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub min_value: f64,
    pub max_value: f64,
    /// `(value, count)` pairs in ascending value order.
    pub histogram: Option<Vec<(f64, u64)>>,
}

/// `F(y) = P{f(k) < y}` on the support points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCdf {
    pub n: u64,
    /// Sorted distinct values.
    pub support: Vec<f64>,
    /// `cdf_below[i] = P{f < support[i]}`; the extra last entry is `P{f < +inf} = 1`.
    pub cdf_below: Vec<f64>,
}

impl EmpiricalCdf {
    /// Fraction of `k <= n` with `f(k) < y`.
    pub fn cdf_below(&self, y: f64) -> f64 {
        if y.is_nan() {
            return f64::NAN;
        }
        // Index of the first support point >= y; past the end selects the total mass.
        let i = self.support.partition_point(|&s| s < y);
        self.cdf_below[i]
    }
}

/// Exact `n * sum(f^2) - sum(f)^2` over `n^2`, shared so that every variance
/// derived from integer sums rounds identically.
pub(crate) fn variance_from_int_sums(sum: i64, sum_sq: i64, n: u64) -> f64 {
    let n = n as i128;
    let num = n * sum_sq as i128 - (sum as i128) * (sum as i128);
    num as f64 / (n * n) as f64
}

pub(crate) fn variance_from_real_values(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Mean, variance, range and histogram of `f` on `[1, n]`.
pub fn moments(table: &ValueTable, n: u64) -> Result<EmpiricalMoments> {
    table.require_prefix(n)?;
    let len = n as usize;
    match table.values() {
        TableValues::Int(v) => {
            let v = &v[..len];
            let mut counts = [0u64; 256];
            for &x in v {
                counts[(x as u8) as usize] += 1;
            }
            let mut histogram: Vec<(f64, u64)> =
                counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(b, &c)| ((b as u8 as i8) as f64, c)).collect();
            histogram.sort_by(|a, b| a.0.total_cmp(&b.0));
            let sum: i64 = histogram.iter().map(|&(x, c)| x as i64 * c as i64).sum();
            let sum_sq: i64 = histogram.iter().map(|&(x, c)| (x * x) as i64 * c as i64).sum();
            Ok(EmpiricalMoments {
                n,
                mean: sum as f64 / n as f64,
                variance: variance_from_int_sums(sum, sum_sq, n),
                min_value: histogram[0].0,
                max_value: histogram[histogram.len() - 1].0,
                histogram: Some(histogram),
            })
        }
        TableValues::Real(v) => {
            let v = &v[..len];
            let mean = v.iter().sum::<f64>() / n as f64;
            let (min_value, max_value) =
                v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            let mut sorted = v.to_vec();
            sorted.sort_by(f64::total_cmp);
            let histogram = run_lengths(&sorted, HISTOGRAM_MAX_DISTINCT);
            Ok(EmpiricalMoments { n, mean, variance: variance_from_real_values(v), min_value, max_value, histogram })
        }
    }
}

fn run_lengths(sorted: &[f64], max_distinct: usize) -> Option<Vec<(f64, u64)>> {
    let mut runs: Vec<(f64, u64)> = Vec::new();
    for &x in sorted {
        match runs.last_mut() {
            Some((v, c)) if *v == x => *c += 1,
            _ => {
                if runs.len() == max_distinct {
                    return None;
                }
                runs.push((x, 1));
            }
        }
    }
    Some(runs)
}

/// `p_n = Q(n) / n` for an indicator kind.
pub fn density(kind: FunctionKind, n: u64) -> Result<f64> {
    if !kind.is_indicator() {
        return Err(Error::NotIndicator(kind));
    }
    if n == 0 {
        return Err(Error::ZeroArgument);
    }
    let q = accumulate(kind, n, &[n])?.int_at(n).expect("integer kind");
    Ok(q as f64 / n as f64)
}

/// Distribution function `P{f(k) < y}` of `f` on `[1, n]`.
pub fn empirical_cdf(table: &ValueTable, n: u64) -> Result<EmpiricalCdf> {
    table.require_prefix(n)?;
    if table.kind() == FunctionKind::VonMangoldt && n > REAL_CDF_LIMIT {
        return Err(Error::Unsupported {
            kind: table.kind(),
            reason: "alphabet too large for an exact distribution function",
        });
    }
    let mut sorted: Vec<f64> = table.to_f64_vec();
    sorted.truncate(n as usize);
    sorted.sort_by(f64::total_cmp);
    let runs = run_lengths(&sorted, usize::MAX).expect("unbounded");
    let mut support = Vec::with_capacity(runs.len());
    let mut cdf_below = Vec::with_capacity(runs.len() + 1);
    let mut below = 0u64;
    for (value, count) in runs {
        support.push(value);
        cdf_below.push(below as f64 / n as f64);
        below += count;
    }
    cdf_below.push(1.0);
    Ok(EmpiricalCdf { n, support, cdf_below })
}
