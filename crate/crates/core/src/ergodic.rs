//! Simulators for wide-sense stationary sequences and their ergodic averages.
//!
//! A spectral sequence has a finite atomic spectrum:
//! `x_t = m + sum_k z_k exp(i lambda_k t)` with independent complex Gaussian
//! amplitudes `z_k`, `E z_k = 0`, `E |z_k|^2 = sigma2_k`. Its covariance is the
//! trigonometric sum `R(h) = sum_k sigma2_k exp(i lambda_k h)`, and the
//! ergodic average `(1/n) sum_{t<n} x_t` converges in mean square to the
//! amplitude sitting at frequency zero (plus `m`).
//!
//! Randomness: every draw comes from `ChaCha8Rng::seed_from_u64(seed)`.
//! Replicate `r` of a study uses the same seed with `set_stream(r)`, so each
//! replicate is reproducible on its own and independent of scheduling.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::format_real;
use crate::summation::SummationSeries;
use crate::{Error, Result};

pub const MIN_REPLICATES: usize = 100;

/// Generator for replicate `replicate` of a study seeded with `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub lambda: f64,
    pub sigma2: f64,
}

/// A finite atomic spectral measure plus an optional constant mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSpec {
    atoms: Vec<Atom>,
    mean: f64,
}

impl SpectralSpec {
    pub fn new(atoms: Vec<Atom>, mean: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidSpectrum("at least one atom is required".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(-PI..=PI).contains(&a.lambda) {
                return Err(Error::InvalidSpectrum(format!("frequency {} outside [-pi, pi]", a.lambda)));
            }
            if !(a.sigma2 > 0.0 && a.sigma2.is_finite()) {
                return Err(Error::InvalidSpectrum(format!("variance {} must be positive and finite", a.sigma2)));
            }
            if atoms[..i].iter().any(|b| b.lambda == a.lambda) {
                return Err(Error::InvalidSpectrum(format!("frequency {} repeated", a.lambda)));
            }
        }
        if !mean.is_finite() {
            return Err(Error::InvalidSpectrum("mean must be finite".into()));
        }
        Ok(Self { atoms, mean })
    }

    /// Parses `lambda:sigma2` pairs separated by commas, e.g. `"0:2,1.0471:1"`.
    pub fn parse_atoms(text: &str, mean: f64) -> Result<Self> {
        let atoms = text
            .split(',')
            .map(|pair| {
                let (l, s) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidSpectrum(format!("expected lambda:sigma2, got {pair:?}")))?;
                let parse =
                    |v: &str| v.trim().parse::<f64>().map_err(|_| Error::InvalidSpectrum(format!("bad number {v:?}")));
                Ok(Atom { lambda: parse(l)?, sigma2: parse(s)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms, mean)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn total_variance(&self) -> f64 {
        self.atoms.iter().map(|a| a.sigma2).sum()
    }

    fn zero_atom(&self) -> Option<usize> {
        self.atoms.iter().position(|a| a.lambda == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralRealization {
    pub spec: SpectralSpec,
    pub seed: u64,
    /// One amplitude per atom.
    pub z: Vec<Complex64>,
    /// `x_t` for `t = 0..n`.
    pub x: Vec<Complex64>,
}

impl SpectralRealization {
    /// Evaluates `m + sum_k z_k exp(i lambda_k t)`.
    pub fn reconstruct(&self, t: u64) -> Complex64 {
        evaluate(&self.spec, &self.z, t)
    }

    /// Limit of the ergodic average: the zero-frequency amplitude plus the mean.
    pub fn ergodic_target(&self) -> Complex64 {
        target(&self.spec, &self.z)
    }
}

fn evaluate(spec: &SpectralSpec, z: &[Complex64], t: u64) -> Complex64 {
    let tf = t as f64;
    spec.atoms.iter().zip(z).fold(Complex64::new(spec.mean, 0.0), |acc, (a, z)| acc + z * Complex64::cis(a.lambda * tf))
}

fn target(spec: &SpectralSpec, z: &[Complex64]) -> Complex64 {
    let zero = spec.zero_atom().map_or(Complex64::new(0.0, 0.0), |i| z[i]);
    zero + spec.mean
}

fn draw_amplitudes(spec: &SpectralSpec, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    spec.atoms
        .iter()
        .map(|a| {
            let scale = (a.sigma2 / 2.0).sqrt();
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(scale * re, scale * im)
        })
        .collect()
}

/// Draws amplitudes with stream 0 of `seed` and evaluates `x_0 .. x_{n-1}`.
pub fn sample_spectral(spec: &SpectralSpec, n: u64, seed: u64) -> Result<SpectralRealization> {
    if n == 0 {
        return Err(Error::ZeroArgument);
    }
    let mut rng = replicate_rng(seed, 0);
    let z = draw_amplitudes(spec, &mut rng);
    let x = (0..n).map(|t| evaluate(spec, &z, t)).collect();
    Ok(SpectralRealization { spec: spec.clone(), seed, z, x })
}

/// `R(h) = sum_k sigma2_k exp(i lambda_k h)`.
pub fn theoretical_covariance(spec: &SpectralSpec, h: i64) -> Complex64 {
    spec.atoms.iter().map(|a| a.sigma2 * Complex64::cis(a.lambda * h as f64)).sum()
}

/// `(1/n) sum_{t<n} x_t`, summed term by term.
pub fn ergodic_average(realization: &SpectralRealization) -> Complex64 {
    realization.x.iter().sum::<Complex64>() / realization.x.len() as f64
}

/// `D_n(lambda) = (1/n) sum_{t<n} exp(i lambda t)`; exactly 1 at `lambda = 0`.
pub fn averaging_kernel(lambda: f64, n: u64) -> Complex64 {
    if lambda == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    (0..n).map(|t| Complex64::cis(lambda * t as f64)).sum::<Complex64>() / n as f64
}

/// The ergodic average written per atom: `m + sum_k z_k D_n(lambda_k)`.
pub fn kernel_average(spec: &SpectralSpec, z: &[Complex64], n: u64) -> Complex64 {
    let kernels: Vec<Complex64> = spec.atoms.iter().map(|a| averaging_kernel(a.lambda, n)).collect();
    combine(spec, z, &kernels)
}

fn combine(spec: &SpectralSpec, z: &[Complex64], kernels: &[Complex64]) -> Complex64 {
    z.iter().zip(kernels).fold(Complex64::new(spec.mean, 0.0), |acc, (z, d)| acc + z * d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseStudy {
    pub n_list: Vec<u64>,
    /// Replicate average of `|A_n - target|^2` per entry of `n_list`.
    pub mse: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
}

impl MseStudy {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,mse")?;
        for (n, m) in self.n_list.iter().zip(&self.mse) {
            writeln!(w, "{n},{}", format_real(*m))?;
        }
        Ok(())
    }
}

/// Mean-square error of the ergodic average against its limit, over
/// `replicates` independent amplitude draws. Averages are evaluated per atom
/// with [`averaging_kernel`], so a zero-frequency atom contributes exactly `z_0`.
pub fn mse_study(spec: &SpectralSpec, n_list: &[u64], replicates: usize, seed: u64) -> Result<MseStudy> {
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_REPLICATES} replicates")));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::InvalidArgument("sample sizes must be positive".into()));
    }
    let kernels: Vec<Vec<Complex64>> =
        n_list.iter().map(|&n| spec.atoms.iter().map(|a| averaging_kernel(a.lambda, n)).collect()).collect();
    let per_replicate: Vec<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let z = draw_amplitudes(spec, &mut rng);
            let goal = target(spec, &z);
            kernels.iter().map(|d| (combine(spec, &z, d) - goal).norm_sqr()).collect()
        })
        .collect();
    let mse =
        (0..n_list.len()).map(|i| per_replicate.iter().map(|errs| errs[i]).sum::<f64>() / replicates as f64).collect();
    Ok(MseStudy { n_list: n_list.to_vec(), mse, replicates, seed })
}

/// `(1/n) sum_{k<n} R(k)`, which tends to the spectral mass at zero.
pub fn covariance_average(spec: &SpectralSpec, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::ZeroArgument);
    }
    let sum: Complex64 = (0..n).map(|k| theoretical_covariance(spec, k as i64)).sum();
    Ok(sum / n as f64)
}

/// Writes `n,covariance_average_re,covariance_average_im`.
pub fn write_covariance_average_csv<W: Write>(spec: &SpectralSpec, n_list: &[u64], mut w: W) -> Result<()> {
    writeln!(w, "n,covariance_average_re,covariance_average_im")?;
    for &n in n_list {
        let c = covariance_average(spec, n)?;
        writeln!(w, "{n},{},{}", format_real(c.re), format_real(c.im))?;
    }
    Ok(())
}

/// Empirical against theoretical covariance per lag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceComparison {
    pub lags: Vec<u64>,
    pub theoretical: Vec<Complex64>,
    pub empirical: Vec<Complex64>,
    pub standard_error: Vec<f64>,
}

impl CovarianceComparison {
    /// Largest `|empirical - theoretical|` over lags.
    pub fn max_deviation(&self) -> f64 {
        self.theoretical.iter().zip(&self.empirical).map(|(t, e)| (t - e).norm()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "h,r_theoretical_re,r_theoretical_im,r_empirical_re,r_empirical_im,standard_error")?;
        for i in 0..self.lags.len() {
            let (t, e) = (self.theoretical[i], self.empirical[i]);
            writeln!(
                w,
                "{},{},{},{},{},{}",
                self.lags[i],
                format_real(t.re),
                format_real(t.im),
                format_real(e.re),
                format_real(e.im),
                format_real(self.standard_error[i])
            )?;
        }
        Ok(())
    }
}

fn lagged_product_mean(x: &[Complex64], centre: Complex64, h: usize) -> Complex64 {
    let m = x.len() - h;
    x[h..].iter().zip(&x[..m]).map(|(a, b)| (a - centre) * (b - centre).conj()).sum::<Complex64>() / m as f64
}

fn mean_and_se(estimates: &[Complex64]) -> (Complex64, f64) {
    let r = estimates.len() as f64;
    let mean = estimates.iter().sum::<Complex64>() / r;
    let ss: f64 = estimates.iter().map(|e| (e - mean).norm_sqr()).sum();
    (mean, (ss / (r - 1.0)).sqrt() / r.sqrt())
}

/// Ensemble estimate of `R(h) = E[x_{t+h} conj(x_t)]`.
///
/// A single realization of an atomic spectrum only recovers
/// `sum_k |z_k|^2 exp(i lambda_k h)`, so the time averages of `replicates`
/// independent realizations (streams `0..replicates` of `seed`) are averaged.
/// The standard error is the replicate spread over `sqrt(replicates)`.
pub fn ensemble_covariance(
    spec: &SpectralSpec,
    n: u64,
    lags: &[u64],
    replicates: usize,
    seed: u64,
) -> Result<CovarianceComparison> {
    if replicates < 2 {
        return Err(Error::InvalidArgument("need at least two replicates".into()));
    }
    if let Some(&lag) = lags.iter().find(|&&h| h >= n) {
        return Err(Error::LagTooLarge { lag, n });
    }
    let centre = Complex64::new(spec.mean, 0.0);
    let per_replicate: Vec<Vec<Complex64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let z = draw_amplitudes(spec, &mut rng);
            let x: Vec<Complex64> = (0..n).map(|t| evaluate(spec, &z, t)).collect();
            lags.iter().map(|&h| lagged_product_mean(&x, centre, h as usize)).collect()
        })
        .collect();
    let mut empirical = Vec::with_capacity(lags.len());
    let mut standard_error = Vec::with_capacity(lags.len());
    for i in 0..lags.len() {
        let column: Vec<Complex64> = per_replicate.iter().map(|e| e[i]).collect();
        let (m, se) = mean_and_se(&column);
        empirical.push(m);
        standard_error.push(se);
    }
    Ok(CovarianceComparison {
        lags: lags.to_vec(),
        theoretical: lags.iter().map(|&h| theoretical_covariance(spec, h as i64)).collect(),
        empirical,
        standard_error,
    })
}

/// Finite moving average `y_t = m + sum_{k<=K} a_k xi_{t-k}` of i.i.d.
/// standard normal innovations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MovingAverageSpec {
    coefficients: Vec<Complex64>,
    mean: f64,
}

impl MovingAverageSpec {
    pub fn new(coefficients: Vec<Complex64>, mean: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("at least one coefficient is required".into()));
        }
        if coefficients.iter().any(|a| !a.is_finite()) || !mean.is_finite() {
            return Err(Error::InvalidArgument("coefficients and mean must be finite".into()));
        }
        Ok(Self { coefficients, mean })
    }

    pub fn real(coefficients: &[f64], mean: f64) -> Result<Self> {
        Self::new(coefficients.iter().map(|&a| Complex64::new(a, 0.0)).collect(), mean)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// The order `K`.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `R(h) = E[y_{t+h} conj(y_t)] = sum_j a_{j+h} conj(a_j)`.
    pub fn theoretical_covariance(&self, h: u64) -> Complex64 {
        let a = &self.coefficients;
        let h = h as usize;
        if h >= a.len() {
            return Complex64::new(0.0, 0.0);
        }
        a[h..].iter().zip(a).map(|(x, y)| x * y.conj()).sum()
    }
}

/// Draws `n` values of the moving average, innovations from stream 0 of `seed`.
pub fn sample_moving_average(spec: &MovingAverageSpec, n: u64, seed: u64) -> Result<Vec<Complex64>> {
    let k = spec.order();
    if n <= 10 * k as u64 || n == 0 {
        return Err(Error::InvalidArgument(format!("n = {n} must exceed 10 K = {}", 10 * k)));
    }
    let mut rng = replicate_rng(seed, 0);
    // xi[i] is the innovation at time i - K.
    let xi: Vec<f64> = (0..n as usize + k).map(|_| StandardNormal.sample(&mut rng)).collect();
    Ok((0..n as usize)
        .map(|t| {
            spec.coefficients
                .iter()
                .enumerate()
                .fold(Complex64::new(spec.mean, 0.0), |acc, (j, a)| acc + a * xi[t + k - j])
        })
        .collect())
}

pub const MA_BATCHES: usize = 20;

/// Sample autocovariance of a moving-average draw against `R(h)`, with
/// batch-means standard errors over [`MA_BATCHES`] contiguous batches.
pub fn moving_average_check(spec: &MovingAverageSpec, n: u64, lags: &[u64], seed: u64) -> Result<CovarianceComparison> {
    let y = sample_moving_average(spec, n, seed)?;
    let len = y.len();
    let batch = len / MA_BATCHES;
    if let Some(&lag) = lags.iter().find(|&&h| h as usize >= batch) {
        return Err(Error::LagTooLarge { lag, n });
    }
    let centre = y.iter().sum::<Complex64>() / len as f64;
    let mut empirical = Vec::with_capacity(lags.len());
    let mut standard_error = Vec::with_capacity(lags.len());
    for &h in lags {
        let h = h as usize;
        empirical.push(lagged_product_mean(&y, centre, h));
        let batches: Vec<Complex64> = (0..MA_BATCHES)
            .map(|b| {
                let lo = b * batch;
                let hi = ((b + 1) * batch).min(len - h);
                (lo..hi).map(|t| (y[t + h] - centre) * (y[t] - centre).conj()).sum::<Complex64>() / (hi - lo) as f64
            })
            .collect();
        standard_error.push(mean_and_se(&batches).1);
    }
    Ok(CovarianceComparison {
        lags: lags.to_vec(),
        theoretical: lags.iter().map(|&h| spec.theoretical_covariance(h)).collect(),
        empirical,
        standard_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicPoint {
    pub n: u64,
    /// `S(n)/n - m`.
    pub mean_deviation: f64,
    /// `(S(n) - n m) / sqrt(n)`.
    pub scaled_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicTrajectory {
    pub m: f64,
    pub points: Vec<ErgodicPoint>,
    /// `max |S(n) - n m| / sqrt(n)` over the checkpoints.
    pub max_scaled_deviation: f64,
    pub note: String,
}

impl ErgodicTrajectory {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,mean_deviation,scaled_deviation")?;
        for p in &self.points {
            writeln!(w, "{},{},{}", p.n, format_real(p.mean_deviation), format_real(p.scaled_deviation))?;
        }
        Ok(())
    }
}

/// Tracks `S(n)/n - m` and `(S(n) - n m)/sqrt(n)` along the checkpoints. No
/// convergence is asserted; for dependent sequences the trajectory is a
/// diagnostic only.
pub fn arithmetic_ergodic_check(series: &SummationSeries, m: f64) -> Result<ErgodicTrajectory> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("at least one checkpoint is required".into()));
    }
    let points: Vec<ErgodicPoint> = series
        .iter()
        .map(|(n, s)| {
            let nf = n as f64;
            let dev = s - nf * m;
            ErgodicPoint { n, mean_deviation: s / nf - m, scaled_deviation: dev / nf.sqrt() }
        })
        .collect();
    let max_scaled_deviation = points.iter().map(|p| p.scaled_deviation.abs()).fold(0.0, f64::max);
    Ok(ErgodicTrajectory {
        m,
        points,
        max_scaled_deviation,
        note: "trajectory only; convergence is not asserted for dependent sequences".to_string(),
    })
}
