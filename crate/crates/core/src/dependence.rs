//! Dependence structure of `f(1), f(2), ...` viewed as a random sequence.
//!
//! Probabilities are frequencies over `k`, so a "joint event at lag h" is the
//! fraction of `k in [1, n - h]` with `f(k) in B1` and `f(k + h) in B2`. The
//! mixing estimate scans every pair of single-coordinate value subsets, which
//! makes it a lower bound for the supremum over the full past and future
//! sigma-algebras.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::fit::ols_slope;
use crate::output::format_real;
use crate::prob_space::variance_from_int_sums;
use crate::sieve::{FunctionKind, SieveConfig, TableValues, ValueTable};
use crate::summation::SummationSeries;
use crate::{Error, Result};

pub const EVENT_FAMILY: &str = "single-coordinate value subsets";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceSequence {
    pub n: u64,
    pub lags: Vec<u64>,
    pub r_hat: Vec<f64>,
    pub mean_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingEstimate {
    pub n: u64,
    pub lags: Vec<u64>,
    pub alpha_hat: Vec<f64>,
    pub event_family: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summability {
    /// `sum_{j <= l} alpha_hat(j)` for `l = 1..=L`.
    pub partial_sums: Vec<f64>,
    /// Least-squares slope of the partial sums over the last half of the lags.
    /// Near zero when the series plateaus.
    pub tail_slope: f64,
}

fn check_lag(lag: u64, n: u64) -> Result<()> {
    if 2 * lag >= n {
        return Err(Error::LagTooLarge { lag, n });
    }
    Ok(())
}

/// Empirical autocovariance
/// `r(h) = 1/(n-h) * sum_{k=1}^{n-h} (f(k) - m)(f(k+h) - m)` with `m` the mean on `[1, n]`.
///
/// Integer tables are evaluated from exact integer sums, so `r(0)` equals the
/// variance reported by [`crate::prob_space::moments`] bit for bit.
pub fn autocovariance(table: &ValueTable, n: u64, lags: &[u64]) -> Result<CovarianceSequence> {
    table.require_prefix(n)?;
    for &lag in lags {
        check_lag(lag, n)?;
    }
    let len = n as usize;
    let (r_hat, mean_used) = match table.values() {
        TableValues::Int(v) => {
            let v = &v[..len];
            let sum: i64 = v.iter().map(|&x| x as i64).sum();
            let r = lags.par_iter().map(|&h| int_autocovariance(v, sum, h as usize)).collect();
            (r, sum as f64 / n as f64)
        }
        TableValues::Real(v) => {
            let v = &v[..len];
            let mean = v.iter().sum::<f64>() / n as f64;
            let r = lags
                .par_iter()
                .map(|&h| {
                    let h = h as usize;
                    let s: f64 = v[..len - h].iter().zip(&v[h..]).map(|(a, b)| (a - mean) * (b - mean)).sum();
                    s / (len - h) as f64
                })
                .collect();
            (r, mean)
        }
    };
    Ok(CovarianceSequence { n, lags: lags.to_vec(), r_hat, mean_used })
}

fn int_autocovariance(v: &[i8], sum: i64, h: usize) -> f64 {
    let n = v.len();
    if h == 0 {
        let sum_sq: i64 = v.iter().map(|&x| (x as i64) * (x as i64)).sum();
        return variance_from_int_sums(sum, sum_sq, n as u64);
    }
    let head: i64 = v[..n - h].iter().map(|&x| x as i64).sum();
    let tail: i64 = v[h..].iter().map(|&x| x as i64).sum();
    let cross: i64 = v[..n - h].iter().zip(&v[h..]).map(|(&a, &b)| a as i64 * b as i64).sum();
    // n^2 (n-h) r(h) = n^2 cross - n sum (head + tail) + (n-h) sum^2, exactly.
    let (n, m) = (n as i128, (n - h) as i128);
    let (sum, head, tail, cross) = (sum as i128, head as i128, tail as i128, cross as i128);
    let num = n * n * cross - n * sum * (head + tail) + m * sum * sum;
    num as f64 / (n * n * m) as f64
}

/// Maps alphabet values to dense indices.
struct AlphabetIndex {
    alphabet: &'static [i8],
    slot: [u8; 256],
}

impl AlphabetIndex {
    fn new(kind: FunctionKind) -> Result<Self> {
        let alphabet =
            kind.alphabet().ok_or(Error::Unsupported { kind, reason: "requires a finite value alphabet" })?;
        let mut slot = [u8::MAX; 256];
        for (i, &a) in alphabet.iter().enumerate() {
            slot[a as u8 as usize] = i as u8;
        }
        Ok(Self { alphabet, slot })
    }

    fn mask(&self, subset: &[i8]) -> Result<u32> {
        subset.iter().try_fold(0u32, |mask, &x| match self.slot[x as u8 as usize] {
            u8::MAX => Err(Error::InvalidSubset(format!("{x} is outside the alphabet {:?}", self.alphabet))),
            i => Ok(mask | 1 << i),
        })
    }
}

/// Joint value counts of `(f(k), f(k + lag))` for `k in [1, n - lag]`.
struct JointCounts {
    total: u64,
    cells: [[u64; 4]; 4],
    size: usize,
}

impl JointCounts {
    fn new(v: &[i8], lag: usize, index: &AlphabetIndex) -> Self {
        let mut cells = [[0u64; 4]; 4];
        for (&a, &b) in v[..v.len() - lag].iter().zip(&v[lag..]) {
            let i = index.slot[a as u8 as usize] as usize;
            let j = index.slot[b as u8 as usize] as usize;
            cells[i][j] += 1;
        }
        Self { total: (v.len() - lag) as u64, cells, size: index.alphabet.len() }
    }

    fn gap(&self, first: u32, second: u32) -> f64 {
        let (mut joint, mut p1, mut p2) = (0u64, 0u64, 0u64);
        for i in 0..self.size {
            for j in 0..self.size {
                let c = self.cells[i][j];
                let in1 = first >> i & 1 == 1;
                let in2 = second >> j & 1 == 1;
                if in1 && in2 {
                    joint += c;
                }
                if in1 {
                    p1 += c;
                }
                if in2 {
                    p2 += c;
                }
            }
        }
        let m = self.total as f64;
        (joint as f64 / m - (p1 as f64 / m) * (p2 as f64 / m)).abs()
    }

    fn max_gap(&self) -> f64 {
        let full = (1u32 << self.size) - 1;
        let mut best = 0.0f64;
        for first in 1..full {
            for second in 1..full {
                best = best.max(self.gap(first, second));
            }
        }
        best
    }
}

fn int_prefix(table: &ValueTable, n: u64) -> Result<&[i8]> {
    table.require_prefix(n)?;
    let v =
        table.as_int().ok_or(Error::Unsupported { kind: table.kind(), reason: "requires a finite value alphabet" })?;
    Ok(&v[..n as usize])
}

/// `|P(f(k) in B1, f(k+lag) in B2) - P(f(k) in B1) P(f(k+lag) in B2)|` over `k in [1, n - lag]`.
pub fn independence_gap(table: &ValueTable, n: u64, lag: u64, b1: &[i8], b2: &[i8]) -> Result<f64> {
    let index = AlphabetIndex::new(table.kind())?;
    let v = int_prefix(table, n)?;
    if lag == 0 {
        return Err(Error::InvalidArgument("lag must be at least 1".into()));
    }
    if lag >= n {
        return Err(Error::EmptyRange);
    }
    let (m1, m2) = (index.mask(b1)?, index.mask(b2)?);
    Ok(JointCounts::new(v, lag as usize, &index).gap(m1, m2))
}

/// Largest independence gap over all nonempty proper value subsets, per lag.
pub fn alpha_hat(table: &ValueTable, n: u64, lags: &[u64]) -> Result<MixingEstimate> {
    let index = AlphabetIndex::new(table.kind())?;
    let v = int_prefix(table, n)?;
    for &lag in lags {
        if lag == 0 {
            return Err(Error::InvalidArgument("lag must be at least 1".into()));
        }
        check_lag(lag, n)?;
    }
    let alpha = lags.par_iter().map(|&lag| JointCounts::new(v, lag as usize, &index).max_gap()).collect();
    Ok(MixingEstimate { n, lags: lags.to_vec(), alpha_hat: alpha, event_family: EVENT_FAMILY.to_string() })
}

/// Partial sums of the mixing coefficients and the slope of their tail.
pub fn alpha_summability(estimate: &MixingEstimate) -> Result<Summability> {
    let contiguous = !estimate.lags.is_empty()
        && estimate.lags.iter().enumerate().all(|(i, &l)| l == i as u64 + 1)
        && estimate.lags.len() == estimate.alpha_hat.len();
    if !contiguous {
        return Err(Error::NonContiguousLags);
    }
    let partial_sums: Vec<f64> = estimate
        .alpha_hat
        .iter()
        .scan(0.0, |acc, &a| {
            *acc += a;
            Some(*acc)
        })
        .collect();
    let half = partial_sums.len() / 2;
    let xs: Vec<f64> = estimate.lags[half..].iter().map(|&l| l as f64).collect();
    let tail_slope = ols_slope(&xs, &partial_sums[half..]).unwrap_or(0.0);
    Ok(Summability { partial_sums, tail_slope })
}

/// Writes `lag,r_hat,alpha_hat` rows for the lags the two estimates share.
pub fn write_dependence_csv<W: Write>(
    cov: &CovarianceSequence,
    mixing: Option<&MixingEstimate>,
    mut w: W,
) -> Result<()> {
    writeln!(w, "lag,r_hat,alpha_hat")?;
    for (i, (&lag, &r)) in cov.lags.iter().zip(&cov.r_hat).enumerate() {
        let alpha = mixing
            .and_then(|m| m.lags.get(i).filter(|&&l| l == lag).map(|_| m.alpha_hat[i]))
            .map_or_else(String::new, format_real);
        writeln!(w, "{lag},{},{alpha}", format_real(r))?;
    }
    Ok(())
}

/// Thresholds for the wide-sense stationarity verdicts. These are
/// engineering choices, not truth claims, and are copied into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityConfig {
    /// The mean is judged constant if its tail oscillation is at most
    /// `mean_tolerance * (1 + |C|)`.
    pub mean_tolerance: f64,
    /// Lag covariances pass if `|r(h)| <= covariance_sigmas * r(0) / sqrt(n)`.
    pub covariance_sigmas: f64,
    /// Lags tested against the covariance threshold.
    pub lags: Vec<u64>,
    /// Number of equal windows compared against the global covariance.
    pub windows: u64,
}

impl Default for StationarityConfig {
    fn default() -> Self {
        Self { mean_tolerance: 0.01, covariance_sigmas: 3.0, lags: (10..=50).collect(), windows: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    pub kind: FunctionKind,
    pub n: u64,
    pub checkpoints: Vec<u64>,
    /// `S(n)/n` at each checkpoint.
    pub mean_trajectory: Vec<f64>,
    /// `C`, estimated as `S(n)/n` at the largest checkpoint.
    pub mean_limit_estimate: f64,
    /// `max |S(n)/n - C|` over the last half of the checkpoints.
    pub tail_oscillation: f64,
    /// Observed `max |f(k)|` on `[1, n]`.
    pub sup_abs_value: f64,
    /// The kind is unbounded on the naturals even though any finite table is not.
    pub unbounded: bool,
    pub covariance: CovarianceSequence,
    /// `max |r_window(h) - r(h)|` over windows and tested lags.
    pub covariance_stability: f64,
    pub constant_mean: bool,
    pub lag_only_covariance: bool,
    pub finite_variance: bool,
    pub thresholds: StationarityConfig,
    pub mean_threshold: f64,
    pub covariance_threshold: f64,
    pub note: String,
}

impl StationarityReport {
    pub fn all_pass(&self) -> bool {
        self.constant_mean && self.lag_only_covariance && self.finite_variance
    }
}

/// Sieves `kind` on `[1, n]` and evaluates the three stationarity conditions.
pub fn stationarity_report(
    kind: FunctionKind,
    n: u64,
    checkpoints: &[u64],
    config: &StationarityConfig,
) -> Result<StationarityReport> {
    let table = SieveConfig::default().sieve_table(kind, 1, n)?;
    stationarity_report_for_table(&table, n, checkpoints, config)
}

pub fn stationarity_report_for_table(
    table: &ValueTable,
    n: u64,
    checkpoints: &[u64],
    config: &StationarityConfig,
) -> Result<StationarityReport> {
    table.require_prefix(n)?;
    if checkpoints.is_empty() {
        return Err(Error::InvalidArgument("at least one checkpoint is required".into()));
    }
    if config.windows == 0 {
        return Err(Error::InvalidArgument("window count must be positive".into()));
    }
    let series = SummationSeries::from_table(table, checkpoints)?;
    let mean_trajectory: Vec<f64> = series.iter().map(|(c, s)| s / c as f64).collect();
    let c = *mean_trajectory.last().expect("nonempty");
    let tail_oscillation =
        mean_trajectory[mean_trajectory.len() / 2..].iter().map(|m| (m - c).abs()).fold(0.0, f64::max);

    let sup_abs_value = table.to_f64_vec()[..n as usize].iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let unbounded = !table.kind().is_bounded();

    let mut lags = vec![0];
    lags.extend(config.lags.iter().copied().filter(|&h| h > 0));
    let covariance = autocovariance(table, n, &lags)?;
    let r0 = covariance.r_hat[0];
    let covariance_threshold = config.covariance_sigmas * r0 / (n as f64).sqrt();
    let lag_only_covariance = covariance.r_hat[1..].iter().all(|r| r.abs() <= covariance_threshold);

    let window = n / config.windows;
    let mut covariance_stability = 0.0f64;
    if lags.len() > 1 && lags.iter().all(|&h| 2 * h < window) {
        let all = table.to_f64_vec();
        for w in 0..config.windows {
            let part = &all[(w * window) as usize..((w + 1) * window) as usize];
            let sub = match table.kind() {
                FunctionKind::VonMangoldt => ValueTable::from_real_values(table.kind(), 1, part.to_vec())?,
                kind => ValueTable::from_int_values(kind, 1, part.iter().map(|&x| x as i8).collect())?,
            };
            let local = autocovariance(&sub, window, &lags[1..])?;
            for (a, b) in local.r_hat.iter().zip(&covariance.r_hat[1..]) {
                covariance_stability = covariance_stability.max((a - b).abs());
            }
        }
    } else {
        covariance_stability = f64::NAN;
    }

    let mean_threshold = config.mean_tolerance * (1.0 + c.abs());
    Ok(StationarityReport {
        kind: table.kind(),
        n,
        checkpoints: checkpoints.to_vec(),
        mean_trajectory,
        mean_limit_estimate: c,
        tail_oscillation,
        sup_abs_value,
        unbounded,
        covariance,
        covariance_stability,
        constant_mean: tail_oscillation <= mean_threshold,
        lag_only_covariance,
        finite_variance: !unbounded && sup_abs_value.is_finite(),
        thresholds: config.clone(),
        mean_threshold,
        covariance_threshold,
        note: "thresholds are engineering choices; the verdicts are diagnostics, not proofs".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob_space::moments;
    use crate::sieve::sieve_table;

    #[test]
    fn constant_table_has_no_covariance_or_mixing() {
        let t = ValueTable::from_int_values(FunctionKind::PrimeIndicator, 1, vec![1; 200]).unwrap();
        let cov = autocovariance(&t, 200, &[0, 1, 5, 50]).unwrap();
        assert!(cov.r_hat.iter().all(|&r| r == 0.0));
        let mix = alpha_hat(&t, 200, &[1, 2, 3]).unwrap();
        assert!(mix.alpha_hat.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn lag_zero_matches_moments_exactly() {
        for kind in [FunctionKind::Moebius, FunctionKind::SignedSquarefree, FunctionKind::PrimeIndicator] {
            let t = sieve_table(kind, 1, 3000).unwrap();
            for n in [10, 999, 3000] {
                let cov = autocovariance(&t, n, &[0]).unwrap();
                assert_eq!(cov.r_hat[0], moments(&t, n).unwrap().variance);
            }
        }
    }

    #[test]
    fn full_alphabet_gives_zero_gap() {
        let t = sieve_table(FunctionKind::Moebius, 1, 1000).unwrap();
        let gap = independence_gap(&t, 1000, 3, &[-1, 0, 1], &[1]).unwrap();
        assert!(gap.abs() < 1e-15);
    }

    #[test]
    fn gap_errors() {
        let t = sieve_table(FunctionKind::PrimeIndicator, 1, 10).unwrap();
        assert!(matches!(independence_gap(&t, 10, 10, &[1], &[1]), Err(Error::EmptyRange)));
        assert!(matches!(independence_gap(&t, 10, 1, &[2], &[1]), Err(Error::InvalidSubset(_))));
        let vm = sieve_table(FunctionKind::VonMangoldt, 1, 10).unwrap();
        assert!(matches!(alpha_hat(&vm, 10, &[1]), Err(Error::Unsupported { .. })));
        assert!(matches!(autocovariance(&t, 10, &[5]), Err(Error::LagTooLarge { .. })));
    }

    #[test]
    fn alpha_dominates_every_subset_pair() {
        let t = sieve_table(FunctionKind::SignedSquarefree, 1, 5000).unwrap();
        let alpha = alpha_hat(&t, 5000, &[1, 2, 3, 4]).unwrap();
        let subsets: [&[i8]; 6] = [&[-1], &[0], &[2], &[-1, 0], &[-1, 2], &[0, 2]];
        for (i, &lag) in alpha.lags.iter().enumerate() {
            for b1 in subsets {
                for b2 in subsets {
                    let g = independence_gap(&t, 5000, lag, b1, b2).unwrap();
                    assert!(g <= alpha.alpha_hat[i]);
                }
            }
        }
    }

    #[test]
    fn summability_examples() {
        let zero = MixingEstimate {
            n: 100,
            lags: (1..=10).collect(),
            alpha_hat: vec![0.0; 10],
            event_family: EVENT_FAMILY.into(),
        };
        let s = alpha_summability(&zero).unwrap();
        assert!(s.partial_sums.iter().all(|&p| p == 0.0));
        assert_eq!(s.tail_slope, 0.0);

        let lags: Vec<u64> = (1..=200).collect();
        let slow = MixingEstimate {
            alpha_hat: lags.iter().map(|&l| 1.0 / ((l + 2) as f64).ln()).collect(),
            lags,
            ..zero.clone()
        };
        let s = alpha_summability(&slow).unwrap();
        assert!(s.partial_sums.windows(2).all(|w| w[1] > w[0]));
        assert!(s.tail_slope > 0.15, "{}", s.tail_slope);

        let gapped = MixingEstimate { lags: vec![1, 3], alpha_hat: vec![0.1, 0.1], ..zero };
        assert!(matches!(alpha_summability(&gapped), Err(Error::NonContiguousLags)));
    }

    #[test]
    fn csv_rows() {
        let t = sieve_table(FunctionKind::PrimeIndicator, 1, 100).unwrap();
        let cov = autocovariance(&t, 100, &[1, 2]).unwrap();
        let mix = alpha_hat(&t, 100, &[1, 2]).unwrap();
        let mut buf = Vec::new();
        write_dependence_csv(&cov, Some(&mix), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "lag,r_hat,alpha_hat");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,"));
    }

    #[test]
    fn von_mangoldt_fails_finite_variance() {
        let cps: Vec<u64> = (1..=10).map(|i| i * 2000).collect();
        let cfg = StationarityConfig { lags: vec![10, 11], ..Default::default() };
        let r = stationarity_report(FunctionKind::VonMangoldt, 20_000, &cps, &cfg).unwrap();
        assert!(r.unbounded);
        assert!(!r.finite_variance);
        assert!(r.sup_abs_value > 9.0);
    }
}
