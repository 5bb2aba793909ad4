//! Segmented sieves that materialize arithmetic-function values over ranges.
//!
//! Every segment `[a, b]` is processed independently: for each base prime
//! `p <= sqrt(b)` and each power `p^e <= b`, the multiples of `p^e` in the
//! segment are marked, accumulating the number of distinct prime divisors,
//! the number with multiplicity and the product of the marked prime powers.
//! If that product falls short of `n`, the cofactor is a single prime larger
//! than `sqrt(b)`. No per-element division is needed.
//!
//! Segments are sieved concurrently in bounded batches and handed to callers
//! strictly in ascending order, so every reduction built on top of
//! [`SieveConfig::for_each_segment`] is schedule independent.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::format_real;
use crate::{Error, Result};

/// Which arithmetic function a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FunctionKind {
    PrimeIndicator,
    /// 1 iff both `n` and `n + 2` are prime.
    TwinPrimeIndicator,
    SquarefreeIndicator,
    Moebius,
    Liouville,
    /// 1 iff `n` has exactly `k` distinct prime divisors.
    OmegaEquals(u8),
    /// 2 on squarefree `n` with an even number of prime factors, -1 on
    /// squarefree `n` with an odd number, 0 elsewhere.
    SignedSquarefree,
    /// `ln p` when `n` is a power of the prime `p`, 0 otherwise.
    VonMangoldt,
}

const INDICATOR_ALPHABET: &[i8] = &[0, 1];
const MOEBIUS_ALPHABET: &[i8] = &[-1, 0, 1];
const LIOUVILLE_ALPHABET: &[i8] = &[-1, 1];
const SIGNED_SQUAREFREE_ALPHABET: &[i8] = &[-1, 0, 2];

impl FunctionKind {
    pub const ALL_FIXED: [FunctionKind; 7] = [
        FunctionKind::PrimeIndicator,
        FunctionKind::TwinPrimeIndicator,
        FunctionKind::SquarefreeIndicator,
        FunctionKind::Moebius,
        FunctionKind::Liouville,
        FunctionKind::SignedSquarefree,
        FunctionKind::VonMangoldt,
    ];

    pub fn validate(self) -> Result<Self> {
        match self {
            FunctionKind::OmegaEquals(0) => Err(Error::InvalidKind("omega_equals requires k >= 1".to_string())),
            other => Ok(other),
        }
    }

    /// Sorted value alphabet, or `None` for the real-valued von Mangoldt kind.
    pub fn alphabet(self) -> Option<&'static [i8]> {
        match self {
            FunctionKind::PrimeIndicator
            | FunctionKind::TwinPrimeIndicator
            | FunctionKind::SquarefreeIndicator
            | FunctionKind::OmegaEquals(_) => Some(INDICATOR_ALPHABET),
            FunctionKind::Moebius => Some(MOEBIUS_ALPHABET),
            FunctionKind::Liouville => Some(LIOUVILLE_ALPHABET),
            FunctionKind::SignedSquarefree => Some(SIGNED_SQUAREFREE_ALPHABET),
            FunctionKind::VonMangoldt => None,
        }
    }

    pub fn is_indicator(self) -> bool {
        self.alphabet() == Some(INDICATOR_ALPHABET)
    }

    pub fn is_integer(self) -> bool {
        self.alphabet().is_some()
    }

    /// Whether `sup |f|` over the naturals is finite.
    pub fn is_bounded(self) -> bool {
        self.is_integer()
    }

    fn value(self, n: u64, cell: &Cell, twin_ok: bool) -> i8 {
        let squarefree = cell.omega == cell.big_omega;
        match self {
            FunctionKind::PrimeIndicator => (cell.big_omega == 1) as i8,
            FunctionKind::TwinPrimeIndicator => (cell.big_omega == 1 && twin_ok) as i8,
            FunctionKind::SquarefreeIndicator => squarefree as i8,
            FunctionKind::Moebius => {
                if !squarefree {
                    0
                } else if cell.omega.is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
            FunctionKind::Liouville => {
                if cell.big_omega.is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
            FunctionKind::OmegaEquals(k) => (cell.omega == k) as i8,
            FunctionKind::SignedSquarefree => {
                if !squarefree {
                    0
                } else if cell.omega.is_multiple_of(2) {
                    2
                } else {
                    -1
                }
            }
            FunctionKind::VonMangoldt => unreachable!("von Mangoldt is real valued at {n}"),
        }
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionKind::PrimeIndicator => f.write_str("prime_indicator"),
            FunctionKind::TwinPrimeIndicator => f.write_str("twin_prime_indicator"),
            FunctionKind::SquarefreeIndicator => f.write_str("squarefree_indicator"),
            FunctionKind::Moebius => f.write_str("moebius"),
            FunctionKind::Liouville => f.write_str("liouville"),
            FunctionKind::OmegaEquals(k) => write!(f, "omega_equals:{k}"),
            FunctionKind::SignedSquarefree => f.write_str("signed_squarefree"),
            FunctionKind::VonMangoldt => f.write_str("von_mangoldt"),
        }
    }
}

impl FromStr for FunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "prime_indicator" => FunctionKind::PrimeIndicator,
            "twin_prime_indicator" => FunctionKind::TwinPrimeIndicator,
            "squarefree_indicator" => FunctionKind::SquarefreeIndicator,
            "moebius" => FunctionKind::Moebius,
            "liouville" => FunctionKind::Liouville,
            "signed_squarefree" => FunctionKind::SignedSquarefree,
            "von_mangoldt" => FunctionKind::VonMangoldt,
            other => {
                let k = other
                    .strip_prefix("omega_equals:")
                    .and_then(|k| k.parse::<u8>().ok())
                    .ok_or_else(|| Error::InvalidKind(other.to_string()))?;
                FunctionKind::OmegaEquals(k)
            }
        };
        kind.validate()
    }
}

impl Serialize for FunctionKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FunctionKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Prime-divisor counts of a single integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FactorSignature {
    pub omega: u32,
    pub big_omega: u32,
    pub squarefree: bool,
}

/// Trial-division factor signature. Slow; used as the reference for the sieve.
pub fn factor_signature(n: u64) -> Result<FactorSignature> {
    Ok(trial_factor(n)?.0)
}

fn trial_factor(mut n: u64) -> Result<(FactorSignature, Option<u64>)> {
    if n == 0 {
        return Err(Error::ZeroArgument);
    }
    let mut sig = FactorSignature { omega: 0, big_omega: 0, squarefree: true };
    let mut only_prime = None;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            sig.omega += 1;
            sig.big_omega += e;
            sig.squarefree &= e == 1;
            only_prime = Some(p);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        sig.omega += 1;
        sig.big_omega += 1;
        only_prime = Some(n);
    }
    let prime = (sig.omega == 1).then_some(only_prime).flatten();
    Ok((sig, prime))
}

/// Value of `kind` at `n` derived from trial factorization.
pub fn reference_value(kind: FunctionKind, n: u64) -> Result<f64> {
    kind.validate()?;
    let (sig, prime) = trial_factor(n)?;
    let cell = Cell { omega: sig.omega as u8, big_omega: sig.big_omega as u8, prime: prime.unwrap_or(0) };
    Ok(match kind {
        FunctionKind::VonMangoldt => prime.map_or(0.0, |p| (p as f64).ln()),
        FunctionKind::TwinPrimeIndicator => {
            let twin = sig.big_omega == 1 && factor_signature(n + 2)?.big_omega == 1;
            twin as i8 as f64
        }
        other => other.value(n, &cell, false) as f64,
    })
}

/// Per-integer values of a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TableValues {
    Int(Vec<i8>),
    Real(Vec<f64>),
}

impl TableValues {
    pub fn len(&self) -> usize {
        match self {
            TableValues::Int(v) => v.len(),
            TableValues::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        match self {
            TableValues::Int(v) => v.get(i).map(|&x| x as f64),
            TableValues::Real(v) => v.get(i).copied(),
        }
    }
}

/// Dense values of `kind` on the inclusive range `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueTable {
    kind: FunctionKind,
    lo: u64,
    hi: u64,
    values: TableValues,
}

impl ValueTable {
    /// Wraps externally produced integer values, checking the kind's alphabet.
    pub fn from_int_values(kind: FunctionKind, lo: u64, values: Vec<i8>) -> Result<Self> {
        let alphabet = kind.alphabet().ok_or_else(|| Error::InvalidKind(format!("{kind} is real valued")))?;
        if let Some(bad) = values.iter().find(|v| !alphabet.contains(v)) {
            return Err(Error::InvalidArgument(format!("value {bad} outside the {kind} alphabet")));
        }
        Self::checked(kind, lo, TableValues::Int(values))
    }

    pub fn from_real_values(kind: FunctionKind, lo: u64, values: Vec<f64>) -> Result<Self> {
        if kind != FunctionKind::VonMangoldt {
            return Err(Error::InvalidKind(format!("{kind} is integer valued")));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument("von Mangoldt values must be finite and >= 0".into()));
        }
        Self::checked(kind, lo, TableValues::Real(values))
    }

    fn checked(kind: FunctionKind, lo: u64, values: TableValues) -> Result<Self> {
        kind.validate()?;
        if lo == 0 || values.is_empty() {
            return Err(Error::InvalidRange { lo, hi: lo + values.len() as u64 });
        }
        let hi = lo + values.len() as u64 - 1;
        Ok(Self { kind, lo, hi, values })
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &TableValues {
        &self.values
    }

    pub fn as_int(&self) -> Option<&[i8]> {
        match &self.values {
            TableValues::Int(v) => Some(v),
            TableValues::Real(_) => None,
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match &self.values {
            TableValues::Real(v) => Some(v),
            TableValues::Int(_) => None,
        }
    }

    /// Value at the integer `n`, if it lies in the table's range.
    pub fn get(&self, n: u64) -> Option<f64> {
        if n < self.lo || n > self.hi {
            return None;
        }
        self.values.get((n - self.lo) as usize)
    }

    /// All values as reals, in range order.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        match &self.values {
            TableValues::Int(v) => v.iter().map(|&x| x as f64).collect(),
            TableValues::Real(v) => v.clone(),
        }
    }

    /// Errors unless the table starts at 1 and reaches `n`.
    pub fn require_prefix(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::ZeroArgument);
        }
        if self.lo != 1 || self.hi < n {
            return Err(Error::TableCoverage { lo: self.lo, hi: self.hi, n });
        }
        Ok(())
    }

    /// Writes the cache format: a `kind,lo,hi` header, the header values, then
    /// one value per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "kind,lo,hi")?;
        writeln!(w, "{},{},{}", self.kind, self.lo, self.hi)?;
        match &self.values {
            TableValues::Int(v) => {
                for x in v {
                    writeln!(w, "{x}")?;
                }
            }
            TableValues::Real(v) => {
                for &x in v {
                    writeln!(w, "{}", format_real(x))?;
                }
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next_line = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, line)) => Ok((i + 1, line?)),
                None => Err(Error::Parse { line: 0, msg: format!("missing {what}") }),
            }
        };
        let (line, header) = next_line("header")?;
        if header.trim() != "kind,lo,hi" {
            return Err(Error::Parse { line, msg: format!("unexpected header {header:?}") });
        }
        let (line, meta) = next_line("table description")?;
        let parts: Vec<&str> = meta.trim().split(',').collect();
        let bad = |msg: &str| Error::Parse { line, msg: msg.to_string() };
        if parts.len() != 3 {
            return Err(bad("expected kind,lo,hi"));
        }
        let kind: FunctionKind = parts[0].parse()?;
        let lo: u64 = parts[1].parse().map_err(|_| bad("bad lo"))?;
        let hi: u64 = parts[2].parse().map_err(|_| bad("bad hi"))?;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidRange { lo, hi });
        }
        let mut raw = Vec::with_capacity((hi - lo + 1) as usize);
        for (i, line) in lines {
            let line = line?;
            let text = line.trim();
            if !text.is_empty() {
                raw.push((i + 1, text.to_string()));
            }
        }
        if raw.len() as u64 != hi - lo + 1 {
            return Err(Error::Parse { line: 0, msg: format!("expected {} values, found {}", hi - lo + 1, raw.len()) });
        }
        let parse_err = |line: usize, text: &str| Error::Parse { line, msg: format!("bad value {text:?}") };
        if kind.is_integer() {
            let values = raw
                .iter()
                .map(|(line, t)| t.parse::<i8>().map_err(|_| parse_err(*line, t)))
                .collect::<Result<Vec<_>>>()?;
            Self::from_int_values(kind, lo, values)
        } else {
            let values = raw
                .iter()
                .map(|(line, t)| t.parse::<f64>().map_err(|_| parse_err(*line, t)))
                .collect::<Result<Vec<_>>>()?;
            Self::from_real_values(kind, lo, values)
        }
    }
}

/// Sieve limits and segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveConfig {
    /// Largest admissible upper bound.
    pub max_hi: u64,
    /// Integers per segment.
    pub segment_len: usize,
    /// Sieve segments on the rayon pool.
    pub parallel: bool,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self { max_hi: 1_000_000_000, segment_len: 1 << 20, parallel: true }
    }
}

/// Sieves `kind` on `[lo, hi]` with the default configuration.
pub fn sieve_table(kind: FunctionKind, lo: u64, hi: u64) -> Result<ValueTable> {
    SieveConfig::default().sieve_table(kind, lo, hi)
}

#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    omega: u8,
    big_omega: u8,
    /// The prime when `omega == 1`.
    prime: u64,
}

impl SieveConfig {
    pub fn check_range(&self, kind: FunctionKind, lo: u64, hi: u64) -> Result<()> {
        kind.validate()?;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidRange { lo, hi });
        }
        if hi > self.max_hi {
            return Err(Error::ExceedsMaximum { hi, max: self.max_hi });
        }
        if self.segment_len == 0 {
            return Err(Error::InvalidArgument("segment length must be positive".into()));
        }
        Ok(())
    }

    pub fn sieve_table(&self, kind: FunctionKind, lo: u64, hi: u64) -> Result<ValueTable> {
        self.check_range(kind, lo, hi)?;
        let len = (hi - lo + 1) as usize;
        let mut values = match kind {
            FunctionKind::VonMangoldt => TableValues::Real(Vec::with_capacity(len)),
            _ => TableValues::Int(Vec::with_capacity(len)),
        };
        self.for_each_segment(kind, lo, hi, |_, seg| match (&mut values, seg) {
            (TableValues::Int(all), TableValues::Int(part)) => all.extend_from_slice(part),
            (TableValues::Real(all), TableValues::Real(part)) => all.extend_from_slice(part),
            _ => unreachable!(),
        })?;
        Ok(ValueTable { kind, lo, hi, values })
    }

    /// Sieves `[lo, hi]` segment by segment and calls `visit(segment_lo, values)`
    /// in ascending segment order. At most one batch of segments is resident.
    pub fn for_each_segment<F>(&self, kind: FunctionKind, lo: u64, hi: u64, mut visit: F) -> Result<()>
    where
        F: FnMut(u64, &TableValues),
    {
        self.check_range(kind, lo, hi)?;
        let reach = if kind == FunctionKind::TwinPrimeIndicator { hi + 2 } else { hi };
        let primes = base_primes(isqrt(reach));
        let seg = self.segment_len as u64;
        let starts: Vec<u64> = (0..).map(|i| lo + i * seg).take_while(|&s| s <= hi).collect();
        let batch = if self.parallel { 2 * rayon::current_num_threads().max(1) } else { 1 };
        for chunk in starts.chunks(batch) {
            let run = |&a: &u64| {
                let b = (a + seg - 1).min(hi);
                sieve_segment(kind, a, b, &primes)
            };
            let done: Vec<TableValues> =
                if self.parallel { chunk.par_iter().map(run).collect() } else { chunk.iter().map(run).collect() };
            for (a, values) in chunk.iter().zip(&done) {
                visit(*a, values);
            }
        }
        Ok(())
    }
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Primes up to `limit` by the plain sieve of Eratosthenes.
pub fn base_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Prime-divisor statistics of every integer in `[a, b]`.
fn factor_cells(a: u64, b: u64, primes: &[u64]) -> Vec<Cell> {
    let len = (b - a + 1) as usize;
    let mut cells = vec![Cell::default(); len];
    let mut product = vec![1u64; len];
    for &p in primes {
        if p * p > b {
            break;
        }
        let mut pk = p;
        let mut first = true;
        while pk <= b {
            let mut m = a.div_ceil(pk) * pk;
            while m <= b {
                let i = (m - a) as usize;
                let cell = &mut cells[i];
                cell.big_omega += 1;
                if first {
                    cell.omega += 1;
                    cell.prime = p;
                }
                product[i] *= p;
                m += pk;
            }
            first = false;
            match pk.checked_mul(p) {
                Some(next) => pk = next,
                None => break,
            }
        }
    }
    for (i, cell) in cells.iter_mut().enumerate() {
        let n = a + i as u64;
        if product[i] < n {
            cell.omega += 1;
            cell.big_omega += 1;
            cell.prime = n / product[i];
        }
    }
    cells
}

fn sieve_segment(kind: FunctionKind, a: u64, b: u64, primes: &[u64]) -> TableValues {
    match kind {
        FunctionKind::VonMangoldt => {
            let cells = factor_cells(a, b, primes);
            TableValues::Real(cells.iter().map(|c| if c.omega == 1 { (c.prime as f64).ln() } else { 0.0 }).collect())
        }
        FunctionKind::TwinPrimeIndicator => {
            let cells = factor_cells(a, b + 2, primes);
            let len = (b - a + 1) as usize;
            TableValues::Int((0..len).map(|i| (cells[i].big_omega == 1 && cells[i + 2].big_omega == 1) as i8).collect())
        }
        _ => {
            let cells = factor_cells(a, b, primes);
            TableValues::Int(cells.iter().enumerate().map(|(i, c)| kind.value(a + i as u64, c, false)).collect())
        }
    }
}
