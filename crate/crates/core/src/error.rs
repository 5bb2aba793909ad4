use crate::sieve::FunctionKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid range [{lo}, {hi}]: need 1 <= lo <= hi")]
    InvalidRange { lo: u64, hi: u64 },
    #[error("upper bound {hi} exceeds the configured maximum {max}")]
    ExceedsMaximum { hi: u64, max: u64 },
    #[error("invalid function kind: {0}")]
    InvalidKind(String),
    #[error("argument must be positive")]
    ZeroArgument,
    #[error("checkpoints must be strictly increasing and positive")]
    UnsortedCheckpoints,
    #[error("checkpoint {checkpoint} exceeds n_max {n_max}")]
    CheckpointBeyondLimit { checkpoint: u64, n_max: u64 },
    #[error("table covering [{lo}, {hi}] does not cover [1, {n}]")]
    TableCoverage { lo: u64, hi: u64, n: u64 },
    #[error("{0} is not an indicator kind")]
    NotIndicator(FunctionKind),
    #[error("{kind} is unsupported here: {reason}")]
    Unsupported { kind: FunctionKind, reason: &'static str },
    #[error("lag {lag} is too large for sample size {n}")]
    LagTooLarge { lag: u64, n: u64 },
    #[error("no observations remain after the lag shift")]
    EmptyRange,
    #[error("invalid value subset: {0}")]
    InvalidSubset(String),
    #[error("lags must be exactly 1..=L")]
    NonContiguousLags,
    #[error("block size {block} is below the minimum {min}")]
    BlockTooSmall { block: u64, min: u64 },
    #[error("only {blocks} blocks available, need at least {required}")]
    TooFewBlocks { blocks: u64, required: u64 },
    #[error("block sums have zero variance")]
    DegenerateVariance,
    #[error("{got} samples given, need at least {required}")]
    TooFewSamples { got: usize, required: usize },
    #[error("sample contains a non-finite value")]
    NonFiniteSample,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid spectral specification: {0}")]
    InvalidSpectrum(String),
    #[error("every checkpoint was skipped by the logarithm guard")]
    NoEligibleCheckpoints,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
