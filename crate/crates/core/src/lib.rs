//! Sieve-backed summation arithmetic functions and the statistics used to
//! study them as random sequences.
//!
//! An arithmetic function `f` restricted to `[1, n]` is treated as a random
//! variable on the uniform probability space over that interval. The modules
//! build up from exact tables of `f` to moments, dependence diagnostics,
//! block-sum normality tests, spectral simulators and deviation bounds for
//! the summation function `S(n) = f(1) + ... + f(n)`.
//!
//! | module        | purpose                                                    |
//! |---------------|------------------------------------------------------------|
//! | [`sieve`]     | segmented sieves producing value tables, trial-factor oracle |
//! | [`summation`] | exact prefix sums at checkpoints (Mertens, counting functions) |
//! | [`prob_space`]| empirical moments, densities and distribution functions    |
//! | [`dependence`]| autocovariance, independence gaps, mixing estimates, stationarity |
//! | [`limit_dist`]| binomial variance, block standardization, KS distance to the normal |
//! | [`ergodic`]   | atomic-spectrum and moving-average simulators, ergodic averages |
//! | [`deviation`] | square-root-order deviation checks, Mertens exponent scan  |

pub mod dependence;
pub mod deviation;
pub mod ergodic;
mod error;
mod fit;
pub mod limit_dist;
pub mod output;
pub mod prob_space;
pub mod sieve;
pub mod summation;

pub use error::{Error, Result};
pub use sieve::{FunctionKind, SieveConfig, TableValues, ValueTable};
pub use summation::SummationSeries;

/// `6 / pi^2`, the density of squarefree integers.
pub const SQUAREFREE_DENSITY: f64 = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
