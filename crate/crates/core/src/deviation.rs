//! Deviation of `S(n)` from its linear trend `n C`.
//!
//! Three bounds are checked: the counting bound `|S(n) - nC| <= 0.5 sqrt(n) Psi(n)`
//! for indicator kinds, the exponent bound `|S(n) - nC| <= n^(1/2 + xi)`, and
//! its Mertens specialization scanned densely over every `n`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::fit::ols_slope;
use crate::limit_dist::{block_sums, mean_sd, MIN_BLOCKS, MIN_BLOCK_SIZE};
use crate::output::format_real;
use crate::prob_space::density;
use crate::sieve::{FunctionKind, SieveConfig, TableValues, ValueTable};
use crate::summation::SummationSeries;
use crate::{Error, Result};

pub const TREND_NOTE: &str = "the mean of S(n) is modelled as the linear trend n*C";

/// A slowly growing function `Psi(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psi {
    Const(f64),
    /// `ln(max(n, 3))`
    Log,
    /// `ln ln(max(n, 16))`
    LogLog,
}

impl Psi {
    pub fn eval(self, n: u64) -> f64 {
        match self {
            Psi::Const(c) => c,
            Psi::Log => (n.max(3) as f64).ln(),
            Psi::LogLog => (n.max(16) as f64).ln().ln(),
        }
    }
}

impl fmt::Display for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::Const(c) => write!(f, "const:{c}"),
            Psi::Log => f.write_str("log"),
            Psi::LogLog => f.write_str("loglog"),
        }
    }
}

impl FromStr for Psi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(Psi::Log),
            "loglog" => Ok(Psi::LogLog),
            _ => s
                .strip_prefix("const:")
                .and_then(|c| c.parse::<f64>().ok())
                .filter(|c| c.is_finite() && *c > 0.0)
                .map(Psi::Const)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown psi {s:?}; expected const:<c>, log or loglog"))),
        }
    }
}

impl Serialize for Psi {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationPoint {
    pub n: u64,
    /// `S(n) - nC`
    pub deviation: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub kind: FunctionKind,
    pub n_lo: u64,
    pub n_hi: u64,
    pub trend_constant: f64,
    pub psi: Option<Psi>,
    pub xi: Option<f64>,
    pub worst_ratio: f64,
    pub argmax_n: u64,
    /// `worst_ratio <= 1`.
    pub pass: bool,
    /// Points left out by the logarithm guard `|S(n) - nC| < 1` or `n < 2`.
    pub skipped: u64,
    pub note: String,
    /// Per-checkpoint rows; for dense scans only the points setting a new maximum.
    #[serde(skip)]
    pub trajectory: Vec<DeviationPoint>,
}

impl DeviationReport {
    /// `n,deviation,ratio` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,deviation,ratio")?;
        for p in &self.trajectory {
            writeln!(w, "{},{},{}", p.n, format_real(p.deviation), format_real(p.ratio))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceBound {
    pub n: u64,
    /// `n / 4`, valid for any indicator.
    pub universal: f64,
    /// `n p (1 - p)` with the sieved density `p`.
    pub tighter: f64,
    pub density: f64,
}

/// Variance bounds for a sum of `n` independent indicators.
pub fn independent_variance_bound(kind: FunctionKind, n: u64) -> Result<VarianceBound> {
    let p = density(kind, n)?;
    let nf = n as f64;
    Ok(VarianceBound { n, universal: nf / 4.0, tighter: nf * p * (1.0 - p), density: p })
}

fn worst<I: IntoIterator<Item = DeviationPoint>>(points: I) -> (f64, u64) {
    points.into_iter().fold((0.0, 0), |(w, at), p| if p.ratio > w { (p.ratio, p.n) } else { (w, at) })
}

fn range_of(series: &SummationSeries) -> (u64, u64) {
    (series.checkpoints.first().copied().unwrap_or(0), series.checkpoints.last().copied().unwrap_or(0))
}

/// `max_n |S(n) - nC| / (0.5 sqrt(n) Psi(n))` over the checkpoints.
pub fn counting_deviation_check(series: &SummationSeries, c: f64, psi: Psi) -> Result<DeviationReport> {
    if !series.kind.is_indicator() {
        return Err(Error::NotIndicator(series.kind));
    }
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidArgument(format!("trend constant {c} outside [0, 1]")));
    }
    let trajectory: Vec<DeviationPoint> = series
        .iter()
        .map(|(n, s)| {
            let deviation = s - n as f64 * c;
            let ratio = deviation.abs() / (0.5 * (n as f64).sqrt() * psi.eval(n));
            DeviationPoint { n, deviation, ratio }
        })
        .collect();
    let (worst_ratio, argmax_n) = worst(trajectory.iter().copied());
    let (n_lo, n_hi) = range_of(series);
    Ok(DeviationReport {
        kind: series.kind,
        n_lo,
        n_hi,
        trend_constant: c,
        psi: Some(psi),
        xi: None,
        worst_ratio,
        argmax_n,
        pass: worst_ratio <= 1.0,
        skipped: 0,
        note: TREND_NOTE.to_string(),
        trajectory,
    })
}

fn check_xi(xi: f64) -> Result<()> {
    if xi >= 0.0 && xi.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("xi = {xi} must be finite and nonnegative")))
    }
}

/// `ln|dev| / ((1/2 + xi) ln n)`, or `None` under the logarithm guard.
fn exponent_ratio(n: u64, deviation: f64, xi: f64) -> Option<f64> {
    (n >= 2 && deviation.abs() >= 1.0).then(|| deviation.abs().ln() / ((0.5 + xi) * (n as f64).ln()))
}

/// `max_n ln|S(n) - nC| / ((1/2 + xi) ln n)` over the eligible checkpoints.
pub fn exponent_check(series: &SummationSeries, c: f64, xi: f64) -> Result<DeviationReport> {
    check_xi(xi)?;
    let mut skipped = 0;
    let trajectory: Vec<DeviationPoint> = series
        .iter()
        .filter_map(|(n, s)| {
            let deviation = s - n as f64 * c;
            let ratio = exponent_ratio(n, deviation, xi);
            skipped += ratio.is_none() as u64;
            ratio.map(|ratio| DeviationPoint { n, deviation, ratio })
        })
        .collect();
    if trajectory.is_empty() {
        return Err(Error::NoEligibleCheckpoints);
    }
    let (worst_ratio, argmax_n) = worst(trajectory.iter().copied());
    let (n_lo, n_hi) = range_of(series);
    Ok(DeviationReport {
        kind: series.kind,
        n_lo,
        n_hi,
        trend_constant: c,
        psi: None,
        xi: Some(xi),
        worst_ratio,
        argmax_n,
        pass: worst_ratio <= 1.0,
        skipped,
        note: TREND_NOTE.to_string(),
        trajectory,
    })
}

/// `|M(n)| <= n^(1/2 + xi)` checked at every `2 <= n <= n_max`.
pub fn mertens_riemann_check(n_max: u64, xi: f64) -> Result<DeviationReport> {
    SieveConfig::default().mertens_riemann_check(n_max, xi)
}

impl SieveConfig {
    pub fn mertens_riemann_check(&self, n_max: u64, xi: f64) -> Result<DeviationReport> {
        check_xi(xi)?;
        if n_max < 2 {
            return Err(Error::InvalidArgument("n_max must be at least 2".into()));
        }
        let mut m: i64 = 0;
        let mut skipped = 0u64;
        let mut worst_ratio = 0.0;
        let mut argmax_n = 0;
        let mut records = Vec::new();
        self.for_each_segment(FunctionKind::Moebius, 1, n_max, |start, values| {
            let TableValues::Int(v) = values else { unreachable!() };
            for (i, &mu) in v.iter().enumerate() {
                m += mu as i64;
                let n = start + i as u64;
                if n < 2 {
                    continue;
                }
                match exponent_ratio(n, m as f64, xi) {
                    None => skipped += 1,
                    Some(r) if r > worst_ratio => {
                        worst_ratio = r;
                        argmax_n = n;
                        records.push(DeviationPoint { n, deviation: m as f64, ratio: r });
                    }
                    Some(_) => {}
                }
            }
        })?;
        if argmax_n == 0 {
            return Err(Error::NoEligibleCheckpoints);
        }
        Ok(DeviationReport {
            kind: FunctionKind::Moebius,
            n_lo: 2,
            n_hi: n_max,
            trend_constant: 0.0,
            psi: None,
            xi: Some(xi),
            worst_ratio,
            argmax_n,
            pass: worst_ratio <= 1.0,
            skipped,
            note: "dense scan of every n; trajectory lists the running maxima".to_string(),
            trajectory: records,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceGrowth {
    pub kind: FunctionKind,
    pub block_size: u64,
    /// `(n, h_hat(n))` with `h_hat(n) = var(T_1..T_J) / B`, `J = n / B`.
    pub points: Vec<(u64, f64)>,
    /// Slope of `ln h_hat` on `ln n`; `None` if some `h_hat` is zero.
    pub slope: Option<f64>,
}

impl VarianceGrowth {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,h_hat")?;
        for (n, h) in &self.points {
            writeln!(w, "{n},{}", format_real(*h))?;
        }
        Ok(())
    }
}

/// Estimates `D(S_n) / n` from disjoint block sums at `J = 30, 60, 120, ...`
/// blocks, ending with every full block below `n_max`.
pub fn variance_growth(table: &ValueTable, n_max: u64, block_size: u64) -> Result<VarianceGrowth> {
    table.require_prefix(n_max)?;
    if block_size < MIN_BLOCK_SIZE {
        return Err(Error::BlockTooSmall { block: block_size, min: MIN_BLOCK_SIZE });
    }
    let j_max = n_max / block_size;
    if j_max < MIN_BLOCKS {
        return Err(Error::TooFewBlocks { blocks: j_max, required: MIN_BLOCKS });
    }
    let sums = block_sums(table, j_max, block_size);
    let mut counts: Vec<u64> =
        std::iter::successors(Some(MIN_BLOCKS), |j| Some(j * 2)).take_while(|&j| j < j_max).collect();
    counts.push(j_max);
    let points: Vec<(u64, f64)> = counts
        .iter()
        .map(|&j| {
            let (_, sd) = mean_sd(&sums[..j as usize]);
            (j * block_size, sd * sd / block_size as f64)
        })
        .collect();
    let slope = if points.iter().all(|&(_, h)| h > 0.0) {
        let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
        let ys: Vec<f64> = points.iter().map(|&(_, h)| h.ln()).collect();
        ols_slope(&xs, &ys)
    } else {
        None
    };
    Ok(VarianceGrowth { kind: table.kind(), block_size, points, slope })
}

/// [`variance_growth`] on a freshly sieved table.
pub fn variance_growth_for_kind(kind: FunctionKind, n_max: u64, block_size: u64) -> Result<VarianceGrowth> {
    let table = crate::sieve::sieve_table(kind, 1, n_max)?;
    variance_growth(&table, n_max, block_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summation::accumulate;
    use std::f64::consts::PI;

    #[test]
    fn psi_values() {
        assert_eq!(Psi::Const(2.0).eval(12345), 2.0);
        assert!((Psi::Log.eval(20) - 20f64.ln()).abs() < 1e-15);
        assert_eq!(Psi::Log.eval(1), 3f64.ln());
        assert!((Psi::LogLog.eval(1_000_000) - 2.625_791_914_476_101).abs() < 1e-12);
        assert_eq!(Psi::LogLog.eval(2), 16f64.ln().ln());
        for s in ["log", "loglog", "const:2"] {
            assert_eq!(s.parse::<Psi>().unwrap().to_string(), s);
        }
        assert!("const:-1".parse::<Psi>().is_err());
    }

    #[test]
    fn variance_bounds() {
        let b = independent_variance_bound(FunctionKind::PrimeIndicator, 100).unwrap();
        assert_eq!(b.universal, 25.0);
        assert!((b.tighter - 100.0 * 0.25 * 0.75).abs() < 1e-12);
        assert_eq!(independent_variance_bound(FunctionKind::PrimeIndicator, 1).unwrap().tighter, 0.0);
        assert!(independent_variance_bound(FunctionKind::Moebius, 100).is_err());
    }

    #[test]
    fn constant_indicator_has_zero_ratio() {
        let t = ValueTable::from_int_values(FunctionKind::SquarefreeIndicator, 1, vec![1; 1000]).unwrap();
        let s = SummationSeries::from_table(&t, &[10, 100, 1000]).unwrap();
        let r = counting_deviation_check(&s, 1.0, Psi::Const(2.0)).unwrap();
        assert_eq!(r.worst_ratio, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn prime_counting_needs_a_trend() {
        let s = accumulate(FunctionKind::PrimeIndicator, 1_000_000, &[1_000_000]).unwrap();
        let r = counting_deviation_check(&s, 0.0, Psi::Const(2.0)).unwrap();
        assert!((r.worst_ratio - 78.498).abs() < 1e-9);
        assert!(!r.pass);
        assert!(counting_deviation_check(&s, 1.5, Psi::Log).is_err());
    }

    #[test]
    fn linear_sum_has_exponent_two() {
        let t = ValueTable::from_int_values(FunctionKind::PrimeIndicator, 1, vec![1; 10_000]).unwrap();
        let s = SummationSeries::from_table(&t, &[1, 100, 10_000]).unwrap();
        let r = exponent_check(&s, 0.0, 0.0).unwrap();
        assert!((r.worst_ratio - 2.0).abs() < 1e-12);
        assert_eq!(r.skipped, 1);
        assert!(!r.pass);
        assert!(exponent_check(&s, 0.0, 0.6).unwrap().pass);
        assert!(exponent_check(&s, 0.0, -0.1).is_err());
    }

    #[test]
    fn riemann_guard_and_small_scan() {
        assert!(matches!(mertens_riemann_check(2, 0.3), Err(Error::NoEligibleCheckpoints)));
        let r = mertens_riemann_check(100_000, 0.0).unwrap();
        assert!(r.pass);
        assert!(r.worst_ratio > 0.8 && r.worst_ratio < 1.0);
        let last = r.trajectory.last().unwrap();
        assert_eq!((last.n, last.ratio), (r.argmax_n, r.worst_ratio));
    }

    #[test]
    fn signed_squarefree_exponent() {
        let cps: Vec<u64> = (1..=1000).map(|i| i * 1000).collect();
        let s = accumulate(FunctionKind::SignedSquarefree, 1_000_000, &cps).unwrap();
        assert!(exponent_check(&s, 3.0 / (PI * PI), 0.1).unwrap().pass);
    }

    #[test]
    fn growth_of_constant_table_is_flat_zero() {
        let t = ValueTable::from_int_values(FunctionKind::PrimeIndicator, 1, vec![1; 100_000]).unwrap();
        let g = variance_growth(&t, 100_000, 100).unwrap();
        assert!(g.points.iter().all(|&(_, h)| h == 0.0));
        assert_eq!(g.slope, None);
        assert_eq!(g.points.first().unwrap().0, 3000);
        assert_eq!(g.points.last().unwrap().0, 100_000);
        assert!(variance_growth(&t, 2_999, 100).is_err());
    }
}
