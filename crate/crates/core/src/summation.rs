//! Exact prefix sums `S(n) = f(1) + ... + f(n)` at checkpoints.
//!
//! Integer kinds accumulate in `i64` and are exact. The von Mangoldt kind uses
//! Neumaier-compensated summation applied in ascending `n`, which is the same
//! order whether or not the sieve runs in parallel.

use std::io::Write;

use serde::Serialize;

use crate::output::format_real;
use crate::sieve::{FunctionKind, SieveConfig, TableValues, ValueTable};
use crate::{Error, Result};

/// Above this bound only checkpoint sums are materialized.
pub const DENSE_PREFIX_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Sums {
    Int(Vec<i64>),
    Real(Vec<f64>),
}

impl Sums {
    pub fn len(&self) -> usize {
        match self {
            Sums::Int(v) => v.len(),
            Sums::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        match self {
            Sums::Int(v) => v.get(i).map(|&x| x as f64),
            Sums::Real(v) => v.get(i).copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummationSeries {
    pub kind: FunctionKind,
    pub checkpoints: Vec<u64>,
    pub sums: Sums,
}

impl SummationSeries {
    /// Prefix sums of a table that starts at 1.
    pub fn from_table(table: &ValueTable, checkpoints: &[u64]) -> Result<Self> {
        check_checkpoints(checkpoints, table.hi())?;
        if let Some(&last) = checkpoints.last() {
            table.require_prefix(last)?;
        }
        let mut acc = Accumulator::new(table.kind(), checkpoints);
        acc.feed(1, table.values());
        Ok(acc.finish())
    }

    /// Sums at every `n` in `1..=n_max`. Limited to [`DENSE_PREFIX_LIMIT`].
    pub fn dense(kind: FunctionKind, n_max: u64) -> Result<Self> {
        SieveConfig::default().dense_prefix(kind, n_max)
    }

    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    /// `(n, S(n))` pairs as reals.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.checkpoints.iter().enumerate().map(|(i, &n)| (n, self.sums.get(i).unwrap_or(f64::NAN)))
    }

    /// Exact sum at a checkpoint, for integer kinds.
    pub fn int_at(&self, n: u64) -> Option<i64> {
        let i = self.checkpoints.binary_search(&n).ok()?;
        match &self.sums {
            Sums::Int(v) => Some(v[i]),
            Sums::Real(_) => None,
        }
    }

    /// CSV with header `n,S`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,S")?;
        match &self.sums {
            Sums::Int(v) => {
                for (n, s) in self.checkpoints.iter().zip(v) {
                    writeln!(w, "{n},{s}")?;
                }
            }
            Sums::Real(v) => {
                for (n, s) in self.checkpoints.iter().zip(v) {
                    writeln!(w, "{n},{}", format_real(*s))?;
                }
            }
        }
        Ok(())
    }
}

fn check_checkpoints(checkpoints: &[u64], n_max: u64) -> Result<()> {
    if checkpoints.first() == Some(&0) || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedCheckpoints);
    }
    if let Some(&last) = checkpoints.last() {
        if last > n_max {
            return Err(Error::CheckpointBeyondLimit { checkpoint: last, n_max });
        }
    }
    Ok(())
}

/// Streams values in ascending `n`, recording the running sum at checkpoints.
struct Accumulator<'a> {
    kind: FunctionKind,
    checkpoints: &'a [u64],
    next: usize,
    int_sum: i64,
    real_sum: f64,
    compensation: f64,
    ints: Vec<i64>,
    reals: Vec<f64>,
}

impl<'a> Accumulator<'a> {
    fn new(kind: FunctionKind, checkpoints: &'a [u64]) -> Self {
        Self {
            kind,
            checkpoints,
            next: 0,
            int_sum: 0,
            real_sum: 0.0,
            compensation: 0.0,
            ints: Vec::with_capacity(checkpoints.len()),
            reals: Vec::new(),
        }
    }

    fn feed(&mut self, start: u64, values: &TableValues) {
        let mut n = start;
        match values {
            TableValues::Int(v) => {
                for &x in v {
                    if self.next == self.checkpoints.len() {
                        return;
                    }
                    self.int_sum += x as i64;
                    if n == self.checkpoints[self.next] {
                        self.ints.push(self.int_sum);
                        self.next += 1;
                    }
                    n += 1;
                }
            }
            TableValues::Real(v) => {
                for &x in v {
                    if self.next == self.checkpoints.len() {
                        return;
                    }
                    // Neumaier's variant of Kahan summation.
                    let t = self.real_sum + x;
                    if self.real_sum.abs() >= x.abs() {
                        self.compensation += (self.real_sum - t) + x;
                    } else {
                        self.compensation += (x - t) + self.real_sum;
                    }
                    self.real_sum = t;
                    if n == self.checkpoints[self.next] {
                        self.reals.push(self.real_sum + self.compensation);
                        self.next += 1;
                    }
                    n += 1;
                }
            }
        }
    }

    fn finish(self) -> SummationSeries {
        let sums = if self.kind.is_integer() { Sums::Int(self.ints) } else { Sums::Real(self.reals) };
        SummationSeries { kind: self.kind, checkpoints: self.checkpoints.to_vec(), sums }
    }
}

impl SieveConfig {
    /// Exact sums of `kind` at each checkpoint, streaming over sieve segments.
    pub fn accumulate(&self, kind: FunctionKind, n_max: u64, checkpoints: &[u64]) -> Result<SummationSeries> {
        check_checkpoints(checkpoints, n_max)?;
        self.check_range(kind, 1, n_max)?;
        let mut acc = Accumulator::new(kind, checkpoints);
        let Some(&last) = checkpoints.last() else {
            return Ok(acc.finish());
        };
        self.for_each_segment(kind, 1, last, |start, values| acc.feed(start, values))?;
        Ok(acc.finish())
    }

    pub fn dense_prefix(&self, kind: FunctionKind, n_max: u64) -> Result<SummationSeries> {
        if n_max > DENSE_PREFIX_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "dense prefix arrays are limited to n <= {DENSE_PREFIX_LIMIT}"
            )));
        }
        let checkpoints: Vec<u64> = (1..=n_max).collect();
        self.accumulate(kind, n_max, &checkpoints)
    }
}

/// Sums of `kind` at `checkpoints` with the default sieve configuration.
pub fn accumulate(kind: FunctionKind, n_max: u64, checkpoints: &[u64]) -> Result<SummationSeries> {
    SieveConfig::default().accumulate(kind, n_max, checkpoints)
}

/// The Mertens function `M(n)`.
pub fn mertens(n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::ZeroArgument);
    }
    let series = accumulate(FunctionKind::Moebius, n, &[n])?;
    Ok(series.int_at(n).expect("integer kind"))
}
