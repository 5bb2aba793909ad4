//! Driver for the `arisum` binary: argument model, OEIS b-file handling and
//! the dispatcher that turns a [`RunConfig`] into output artifacts.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::num::IntErrorKind;
use std::path::{Path, PathBuf};

use arisum::dependence::{
    alpha_hat, alpha_summability, autocovariance, stationarity_report_for_table, write_dependence_csv,
    StationarityConfig,
};
use arisum::deviation::{counting_deviation_check, exponent_check, variance_growth, Psi};
use arisum::ergodic::{
    ensemble_covariance, moving_average_check, mse_study, write_covariance_average_csv, MovingAverageSpec, SpectralSpec,
};
use arisum::limit_dist::normality_report;
use arisum::prob_space::{density, moments, EmpiricalMoments};
use arisum::summation::{accumulate, Sums};
use arisum::{FunctionKind, SieveConfig, SummationSeries, ValueTable};
use clap::{ArgGroup, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] arisum::Error),
    #[error("b-file line {line}: {msg}")]
    BFile { line: usize, msg: String },
    #[error("the b-file and the computed range share no index")]
    EmptyOverlap,
    #[error("{0}")]
    Usage(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// An OEIS b-file: `index value` pairs with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BFile {
    pub entries: Vec<(i64, i64)>,
}

impl BFile {
    pub fn to_text(&self) -> String {
        self.entries.iter().fold(String::new(), |mut s, (n, v)| {
            let _ = writeln!(s, "{n} {v}");
            s
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        parse_bfile(&fs::read_to_string(path)?)
    }
}

fn parse_int(token: &str, line: usize) -> Result<i64> {
    token.parse::<i64>().map_err(|e| {
        let msg = match e.kind() {
            IntErrorKind::PosOverflow | IntErrorKind::NegOverflow => format!("integer overflow in {token:?}"),
            _ => format!("not an integer: {token:?}"),
        };
        CliError::BFile { line, msg }
    })
}

/// Parses b-file text. Blank lines and lines starting with `#` are skipped.
pub fn parse_bfile(text: &str) -> Result<BFile> {
    let mut entries: Vec<(i64, i64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let [idx, val] = fields[..] else {
            return Err(CliError::BFile { line, msg: format!("expected `index value`, got {body:?}") });
        };
        let (idx, val) = (parse_int(idx, line)?, parse_int(val, line)?);
        if let Some(&(prev, _)) = entries.last() {
            if idx == prev {
                return Err(CliError::BFile { line, msg: format!("duplicate index {idx}") });
            }
            if idx < prev {
                return Err(CliError::BFile { line, msg: format!("index {idx} follows {prev}") });
            }
        }
        entries.push((idx, val));
    }
    Ok(BFile { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub n: u64,
    pub computed: i64,
    pub expected: i64,
}

/// Every disagreement between `series` and `bfile` on their common indices.
pub fn oeis_check(series: &SummationSeries, bfile: &BFile) -> Result<Vec<Mismatch>> {
    let Sums::Int(sums) = &series.sums else {
        return Err(CliError::Usage(format!("{} has no integer sums", series.kind)));
    };
    let mut overlap = 0usize;
    let mut mismatches = Vec::new();
    for &(idx, expected) in &bfile.entries {
        let Ok(n) = u64::try_from(idx) else { continue };
        if let Ok(i) = series.checkpoints.binary_search(&n) {
            overlap += 1;
            if sums[i] != expected {
                mismatches.push(Mismatch { n, computed: sums[i], expected });
            }
        }
    }
    if overlap == 0 {
        return Err(CliError::EmptyOverlap);
    }
    Ok(mismatches)
}

/// Sums of `kind` at every positive index of `bfile`, then [`oeis_check`].
pub fn oeis_check_kind(kind: FunctionKind, bfile: &BFile) -> Result<(usize, Vec<Mismatch>)> {
    let cps: Vec<u64> = bfile.entries.iter().filter_map(|&(n, _)| u64::try_from(n).ok()).filter(|&n| n > 0).collect();
    let Some(&n_max) = cps.last() else {
        return Err(CliError::EmptyOverlap);
    };
    let series = accumulate(kind, n_max, &cps)?;
    Ok((cps.len(), oeis_check(&series, bfile)?))
}

#[derive(Debug, Clone, Parser)]
#[command(name = "arisum", version, about = "Summation arithmetic functions as random sequences")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Write every artifact here instead of printing the primary one.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Reuse sieved tables stored in this directory.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Values of f on [lo, hi].
    Table {
        #[arg(long)]
        kind: FunctionKind,
        #[arg(long, default_value_t = 1)]
        lo: u64,
        #[arg(long)]
        hi: u64,
    },
    /// Prefix sums S(n) at checkpoints.
    Sum {
        #[arg(long)]
        kind: FunctionKind,
        #[arg(long)]
        n_max: u64,
        /// Comma-separated; defaults to 1, 2, 5, 10, ... and n_max.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
    },
    /// Moments and density on [1, n].
    Stats {
        #[arg(long)]
        kind: FunctionKind,
        #[arg(long)]
        n: u64,
    },
    /// Autocovariance, mixing estimate and stationarity verdicts.
    Dependence {
        #[arg(long)]
        kind: FunctionKind,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 50)]
        max_lag: u64,
        /// Also estimate the mixing coefficient.
        #[arg(long)]
        alpha: bool,
        /// Fail if the mixing estimate exceeds this at any lag.
        #[arg(long, requires = "alpha")]
        alpha_threshold: Option<f64>,
    },
    /// KS distance of standardized block sums to the normal law.
    Normality {
        #[arg(long)]
        kind: FunctionKind,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1000)]
        block_size: u64,
        #[arg(long, default_value_t = 0.15)]
        ks_threshold: f64,
    },
    /// Atomic-spectrum simulator and optional moving-average check.
    Ergodic {
        /// `lambda:sigma2` pairs, comma-separated.
        #[arg(long)]
        atoms: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mean: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 200)]
        replicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sequence length used for the ensemble covariance.
        #[arg(long, default_value_t = 1000)]
        covariance_n: u64,
        /// Real moving-average coefficients, comma-separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        ma_coefficients: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        ma_n: u64,
    },
    /// Deviation of S(n) from n*C against a counting or exponent bound.
    #[command(group(ArgGroup::new("bound").required(true).args(["psi", "xi"])))]
    Deviation {
        #[arg(long)]
        kind: FunctionKind,
        #[arg(long)]
        n_max: u64,
        /// Trend constant C.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        trend: f64,
        /// `const:<c>`, `log` or `loglog`.
        #[arg(long)]
        psi: Option<Psi>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
        /// Also estimate variance growth with this block size.
        #[arg(long)]
        block_size: Option<u64>,
    },
    /// Dense scan of |M(n)| against n^(1/2 + xi).
    RiemannCheck {
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = 0.0)]
        xi: f64,
    },
    /// Compare S(n) with an OEIS b-file.
    OeisCheck {
        #[arg(long, default_value_t = FunctionKind::Moebius)]
        kind: FunctionKind,
        #[arg(long)]
        bfile: PathBuf,
    },
}

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// False when a check ran and failed.
    pub pass: bool,
    /// The first artifact is the primary one.
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    /// Writes all artifacts into `dir`, returning their paths.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        self.artifacts
            .iter()
            .map(|a| {
                let path = dir.join(&a.name);
                fs::write(&path, &a.contents)?;
                Ok(path)
            })
            .collect()
    }

    pub fn primary(&self) -> &Artifact {
        &self.artifacts[0]
    }
}

/// `1, 2, 5, 10, 20, 50, ...` up to `n_max`, always ending at `n_max`.
pub fn default_checkpoints(n_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 1u64;
    'outer: loop {
        for m in [1, 2, 5] {
            let Some(c) = decade.checked_mul(m).filter(|&c| c < n_max) else { break 'outer };
            out.push(c);
        }
        decade = match decade.checked_mul(10) {
            Some(d) => d,
            None => break,
        };
    }
    if n_max > 0 {
        out.push(n_max);
    }
    out
}

fn csv(write: impl FnOnce(&mut Vec<u8>) -> arisum::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

fn artifact(name: &str, contents: Vec<u8>) -> Artifact {
    Artifact { name: name.to_string(), contents }
}

/// Sieves `kind` on `[lo, hi]`, going through `cache_dir` when given.
pub fn load_table(kind: FunctionKind, lo: u64, hi: u64, cache_dir: Option<&Path>) -> Result<ValueTable> {
    let Some(dir) = cache_dir else {
        return Ok(SieveConfig::default().sieve_table(kind, lo, hi)?);
    };
    let path = dir.join(format!("{}_{lo}_{hi}.csv", kind.to_string().replace(':', "-")));
    if let Ok(file) = fs::File::open(&path) {
        let table = ValueTable::read_csv(std::io::BufReader::new(file))?;
        if (table.kind(), table.lo(), table.hi()) == (kind, lo, hi) {
            return Ok(table);
        }
    }
    let table = SieveConfig::default().sieve_table(kind, lo, hi)?;
    fs::create_dir_all(dir)?;
    let mut out = std::io::BufWriter::new(fs::File::create(&path)?);
    table.write_csv(&mut out)?;
    out.flush()?;
    Ok(table)
}

fn checkpoints_or_default(given: &[u64], n_max: u64) -> Vec<u64> {
    if given.is_empty() {
        default_checkpoints(n_max)
    } else {
        given.to_vec()
    }
}

#[derive(Serialize)]
struct StatsOutput {
    kind: FunctionKind,
    moments: EmpiricalMoments,
    density: Option<f64>,
}

#[derive(Serialize)]
struct OeisOutput {
    kind: FunctionKind,
    bfile: String,
    overlap: usize,
    mismatches: usize,
    pass: bool,
}

#[derive(Serialize)]
struct ErgodicSummary {
    replicates: usize,
    seed: u64,
    covariance_max_deviation: f64,
    covariance_bound: f64,
    moving_average_within_3_se: Option<bool>,
    pass: bool,
}

/// Runs one subcommand and returns its artifacts without touching stdout.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    let cache = config.cache_dir.as_deref();
    match &config.command {
        Command::Table { kind, lo, hi } => {
            let table = load_table(*kind, *lo, *hi, cache)?;
            let mut out = String::from("n,value\n");
            for n in *lo..=*hi {
                let v = table.get(n).expect("in range");
                let _ = if kind.is_integer() {
                    writeln!(out, "{n},{}", v as i64)
                } else {
                    writeln!(out, "{n},{}", arisum::output::format_real(v))
                };
            }
            Ok(Outcome { pass: true, artifacts: vec![artifact("table.csv", out.into_bytes())] })
        }
        Command::Sum { kind, n_max, checkpoints } => {
            let series = accumulate(*kind, *n_max, &checkpoints_or_default(checkpoints, *n_max))?;
            Ok(Outcome { pass: true, artifacts: vec![artifact("sums.csv", csv(|b| series.write_csv(b))?)] })
        }
        Command::Stats { kind, n } => {
            let table = load_table(*kind, 1, *n, cache)?;
            let out = StatsOutput {
                kind: *kind,
                moments: moments(&table, *n)?,
                density: kind.is_indicator().then(|| density(*kind, *n)).transpose()?,
            };
            Ok(Outcome { pass: true, artifacts: vec![artifact("stats.json", json(&out)?)] })
        }
        Command::Dependence { kind, n, max_lag, alpha, alpha_threshold } => {
            let table = load_table(*kind, 1, *n, cache)?;
            let lags: Vec<u64> = (0..=*max_lag).collect();
            let cov = autocovariance(&table, *n, &lags)?;
            let mixing = if *alpha { Some(alpha_hat(&table, *n, &lags[1..])?) } else { None };
            let report =
                stationarity_report_for_table(&table, *n, &default_checkpoints(*n), &StationarityConfig::default())?;
            let mut pass = report.all_pass();
            let mut artifacts = vec![
                artifact("dependence.csv", csv(|b| write_dependence_csv(&cov, mixing.as_ref(), b))?),
                artifact("stationarity.json", json(&report)?),
            ];
            if let Some(m) = &mixing {
                if let Some(t) = alpha_threshold {
                    pass &= m.alpha_hat.iter().all(|a| a <= t);
                }
                artifacts.push(artifact("mixing.json", json(&(m, alpha_summability(m)?))?));
            }
            Ok(Outcome { pass, artifacts })
        }
        Command::Normality { kind, n, block_size, ks_threshold } => {
            let table = load_table(*kind, 1, *n, cache)?;
            let report = normality_report(&table, *n, *block_size)?;
            let pass = report.ks_statistic.is_some_and(|d| d <= *ks_threshold);
            Ok(Outcome {
                pass,
                artifacts: vec![
                    artifact("normality.json", json(&report)?),
                    artifact("normality.csv", csv(|b| report.write_csv(b))?),
                ],
            })
        }
        Command::Ergodic { atoms, mean, n, replicates, seed, covariance_n, ma_coefficients, ma_n } => {
            let spec = SpectralSpec::parse_atoms(atoms, *mean)?;
            let grid = default_checkpoints(*n);
            let mut artifacts =
                vec![artifact("covariance_average.csv", csv(|b| write_covariance_average_csv(&spec, &grid, b))?)];
            let study = mse_study(&spec, &grid, *replicates, *seed)?;
            artifacts.push(artifact("mse.csv", csv(|b| study.write_csv(b))?));
            let lags: Vec<u64> = (0..=10.min(covariance_n.saturating_sub(1))).collect();
            let cov = ensemble_covariance(&spec, *covariance_n, &lags, *replicates, *seed)?;
            artifacts.push(artifact("covariance.csv", csv(|b| cov.write_csv(b))?));
            let bound = 5.0 * spec.total_variance() / (*replicates as f64).sqrt();
            let mut summary = ErgodicSummary {
                replicates: *replicates,
                seed: *seed,
                covariance_max_deviation: cov.max_deviation(),
                covariance_bound: bound,
                moving_average_within_3_se: None,
                pass: cov.max_deviation() <= bound,
            };
            if !ma_coefficients.is_empty() {
                let ma = MovingAverageSpec::real(ma_coefficients, *mean)?;
                let lags: Vec<u64> = (0..=ma.order() as u64 + 1).collect();
                let check = moving_average_check(&ma, *ma_n, &lags, *seed)?;
                let ok = (0..lags.len())
                    .all(|i| (check.empirical[i] - check.theoretical[i]).norm() <= 3.0 * check.standard_error[i]);
                summary.moving_average_within_3_se = Some(ok);
                summary.pass &= ok;
                artifacts.push(artifact("ma_covariance.csv", csv(|b| check.write_csv(b))?));
            }
            artifacts.push(artifact("ergodic.json", json(&summary)?));
            Ok(Outcome { pass: summary.pass, artifacts })
        }
        Command::Deviation { kind, n_max, trend, psi, xi, checkpoints, block_size } => {
            let series = accumulate(*kind, *n_max, &checkpoints_or_default(checkpoints, *n_max))?;
            let report = match (psi, xi) {
                (Some(psi), None) => counting_deviation_check(&series, *trend, *psi)?,
                (None, Some(xi)) => exponent_check(&series, *trend, *xi)?,
                _ => return Err(CliError::Usage("give exactly one of --psi and --xi".into())),
            };
            let mut artifacts = vec![
                artifact("deviation.json", json(&report)?),
                artifact("deviation.csv", csv(|b| report.write_csv(b))?),
            ];
            if let Some(b) = block_size {
                let table = load_table(*kind, 1, *n_max, cache)?;
                let growth = variance_growth(&table, *n_max, *b)?;
                artifacts.push(artifact("variance_growth.csv", csv(|w| growth.write_csv(w))?));
                artifacts.push(artifact("variance_growth.json", json(&growth)?));
            }
            Ok(Outcome { pass: report.pass, artifacts })
        }
        Command::RiemannCheck { n_max, xi } => {
            let report = SieveConfig::default().mertens_riemann_check(*n_max, *xi)?;
            Ok(Outcome {
                pass: report.pass,
                artifacts: vec![
                    artifact("riemann.json", json(&report)?),
                    artifact("riemann.csv", csv(|b| report.write_csv(b))?),
                ],
            })
        }
        Command::OeisCheck { kind, bfile } => {
            let parsed = BFile::read(bfile)?;
            let (overlap, mismatches) = oeis_check_kind(*kind, &parsed)?;
            let mut rows = String::from("n,computed,expected\n");
            for m in &mismatches {
                let _ = writeln!(rows, "{},{},{}", m.n, m.computed, m.expected);
            }
            let summary = OeisOutput {
                kind: *kind,
                bfile: bfile.display().to_string(),
                overlap,
                mismatches: mismatches.len(),
                pass: mismatches.is_empty(),
            };
            Ok(Outcome {
                pass: summary.pass,
                artifacts: vec![artifact("oeis.json", json(&summary)?), artifact("mismatches.csv", rows.into_bytes())],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfile_examples() {
        let b = parse_bfile("1 1\n2 0\n3 -1").unwrap();
        assert_eq!(b.entries, [(1, 1), (2, 0), (3, -1)]);
        assert_eq!(parse_bfile("# comment\n1 1").unwrap().entries, [(1, 1)]);
        assert_eq!(parse_bfile("\n  \n5   7\t\n").unwrap().entries, [(5, 7)]);
    }

    #[test]
    fn bfile_errors_carry_line_numbers() {
        let line = |t: &str| match parse_bfile(t) {
            Err(CliError::BFile { line, msg }) => (line, msg),
            other => panic!("{other:?}"),
        };
        assert_eq!(line("1 1\n1 2"), (2, "duplicate index 1".to_string()));
        assert_eq!(line("# x\n3 1\n2 2").0, 3);
        assert_eq!(line("1 99999999999999999999").1, "integer overflow in \"99999999999999999999\"");
        assert_eq!(line("1 1\n\n2").0, 3);
        assert_eq!(line("1 1 1").0, 1);
        assert!(line("1 \u{2212}1").1.starts_with("not an integer"));
    }

    #[test]
    fn oeis_check_finds_faults() {
        let good = "1 1\n2 0\n3 -1\n4 -1\n5 -2\n6 -1\n7 -2\n8 -2\n9 -2\n10 -1\n";
        let b = parse_bfile(good).unwrap();
        assert_eq!(oeis_check_kind(FunctionKind::Moebius, &b).unwrap(), (10, vec![]));
        let bad = parse_bfile(&good.replace("5 -2", "5 -3")).unwrap();
        assert_eq!(
            oeis_check_kind(FunctionKind::Moebius, &bad).unwrap().1,
            [Mismatch { n: 5, computed: -2, expected: -3 }]
        );
        let series = accumulate(FunctionKind::Moebius, 10, &[1, 2, 3]).unwrap();
        let disjoint = parse_bfile("20 1\n21 1").unwrap();
        assert!(matches!(oeis_check(&series, &disjoint), Err(CliError::EmptyOverlap)));
    }

    #[test]
    fn checkpoint_grid() {
        assert_eq!(default_checkpoints(1), [1]);
        assert_eq!(default_checkpoints(10), [1, 2, 5, 10]);
        assert_eq!(default_checkpoints(120), [1, 2, 5, 10, 20, 50, 100, 120]);
    }
}
