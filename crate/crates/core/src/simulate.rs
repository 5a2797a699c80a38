//! Monte Carlo word-writing experiments.
//!
//! Writes random words (or image pixels) through the per-bit error channel
//! and measures the empirical squared error, so the analytic MSE used by
//! the optimizer can be checked against something that never saw the dual
//! solvers. By default the flip probabilities come from the exact failure
//! law, not the exponential proxy the optimizer minimizes, which keeps the
//! validation from being circular.
//!
//! Randomness is counter-based: draw `k` of a run is the `k`-th output of
//! splitmix64 for the configured seed, independent of execution order, so
//! a (seed, config) pair always produces bit-identical statistics and
//! sample batches could be evaluated concurrently. Per-sample squared
//! errors are integers and are accumulated exactly in 128-bit counters;
//! floating point enters only when the final mean and standard error are
//! formed, so merge order cannot perturb results at all.

use crate::error::{Error, Result};
use crate::model::{
    mse, psnr, write_failure_exact, write_failure_proxy, DeviceParams, PulseSchedule,
};
use serde::Serialize;

/// Where per-bit flip probabilities come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbabilitySource {
    /// Exact write-failure law. The default: validates the proxy-based
    /// optimizer against the model it approximates.
    #[default]
    Exact,
    /// Exponential proxy, clamped to the bit-error range.
    Proxy,
}

/// Sampling controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub samples: u64,
    pub seed: u64,
    pub probability_source: ProbabilitySource,
}

impl SimConfig {
    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidInput("sample count must be at least 1".to_string()));
        }
        Ok(SimConfig {
            samples,
            seed,
            probability_source: ProbabilitySource::default(),
        })
    }

    pub fn with_source(mut self, source: ProbabilitySource) -> Self {
        self.probability_source = source;
        self
    }
}

/// Empirical and analytic fidelity of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityStats {
    /// Mean squared error over everything written.
    pub empirical_mse: f64,
    /// Model-predicted MSE for the same schedule (or probability set).
    pub analytic_mse: f64,
    /// Sample standard deviation of the squared error divided by the
    /// square root of the write count. Zero when only one write happened.
    pub std_error: f64,
    /// Peak signal-to-noise ratios; infinite (JSON null) when error-free.
    pub psnr_empirical: f64,
    pub psnr_analytic: f64,
    /// Number of written words (pixels count individually in image mode).
    pub samples_used: u64,
}

/// splitmix64 output function: draw `counter` of the stream for `seed`.
fn stream_u64(seed: u64, counter: u64) -> u64 {
    let mut z = seed
        .wrapping_add(counter.wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Top 53 bits as a double in [0, 1).
fn unit_interval(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Per-bit flip probabilities for a schedule, clamped to [0, 1/2]: a write
/// failure flips the stored bit only when the data disagrees with the
/// cell's prior state, which random data does half the time.
pub fn schedule_flip_probabilities(
    schedule: &PulseSchedule,
    dev: &DeviceParams,
    source: ProbabilitySource,
) -> Result<Vec<f64>> {
    schedule
        .pulses()
        .iter()
        .map(|p| {
            let failure = match source {
                ProbabilitySource::Exact => write_failure_exact(p, dev)?,
                ProbabilitySource::Proxy => write_failure_proxy(p, dev)?,
            };
            Ok((0.5 * failure).clamp(0.0, 0.5))
        })
        .collect()
}

fn validate_probs(probs: &[f64]) -> Result<()> {
    if probs.is_empty() || probs.len() > 26 {
        return Err(Error::InvalidInput(format!(
            "need between 1 and 26 per-bit probabilities, got {}",
            probs.len()
        )));
    }
    for (b, &p) in probs.iter().enumerate() {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::InvalidInput(format!(
                "flip probability for bit {b} must lie in [0, 1/2], got {p}"
            )));
        }
    }
    Ok(())
}

/// Exact-integer statistics triple. Merging two accumulators is integer
/// addition, so any batch split gives identical results.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    count: u64,
    sum: u128,
    sum_sq: u128,
}

impl Accumulator {
    fn push(&mut self, squared_error: u64) {
        self.count += 1;
        self.sum += squared_error as u128;
        self.sum_sq += (squared_error as u128) * (squared_error as u128);
    }

    fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.mean();
        let variance = ((self.sum_sq as f64) / n - mean * mean) * n / (n - 1.0);
        (variance.max(0.0) / n).sqrt()
    }
}

/// Send one value through the channel. Event `event` draws flip lanes
/// `1..=bits` of the counter stream; lane 0 is reserved for payload draws.
fn write_once(value: u64, probs: &[f64], seed: u64, event: u64) -> u64 {
    let lanes = probs.len() as u64 + 1;
    let base = event * lanes;
    let mut received = value;
    for (b, &p) in probs.iter().enumerate() {
        let u = unit_interval(stream_u64(seed, base + 1 + b as u64));
        if u < p {
            received ^= 1 << b;
        }
    }
    received
}

fn squared_diff(a: u64, b: u64) -> u64 {
    let d = a.abs_diff(b);
    d * d
}

fn check_counter_capacity(events: u64, bits: usize) -> Result<()> {
    events
        .checked_mul(bits as u64 + 1)
        .ok_or_else(|| Error::InvalidInput("sample count overflows the draw counter".to_string()))
        .map(|_| ())
}

fn stats_from(acc: &Accumulator, analytic_mse: f64, bits: usize) -> FidelityStats {
    FidelityStats {
        empirical_mse: acc.mean(),
        analytic_mse,
        std_error: acc.std_error(),
        psnr_empirical: psnr(acc.mean(), bits),
        psnr_analytic: psnr(analytic_mse, bits),
        samples_used: acc.count,
    }
}

/// Write uniformly random words through a channel with the given per-bit
/// flip probabilities. The analytic reference is the weighted probability
/// sum the estimator is unbiased for.
pub fn simulate_words_with_probs(probs: &[f64], cfg: &SimConfig) -> Result<FidelityStats> {
    validate_probs(probs)?;
    if cfg.samples == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".to_string()));
    }
    check_counter_capacity(cfg.samples, probs.len())?;
    let bits = probs.len();
    let mask = (1u64 << bits) - 1;
    let lanes = bits as u64 + 1;
    let mut acc = Accumulator::default();
    for sample in 0..cfg.samples {
        let value = stream_u64(cfg.seed, sample * lanes) & mask;
        let received = write_once(value, probs, cfg.seed, sample);
        acc.push(squared_diff(value, received));
    }
    let analytic: f64 = probs
        .iter()
        .enumerate()
        .map(|(b, &p)| 4f64.powi(b as i32) * p)
        .sum();
    Ok(stats_from(&acc, analytic, bits))
}

/// Write uniformly random words through `schedule`'s channel and compare
/// the empirical squared error against the schedule's analytic MSE.
pub fn simulate_words(
    schedule: &PulseSchedule,
    dev: &DeviceParams,
    cfg: &SimConfig,
) -> Result<FidelityStats> {
    let probs = schedule_flip_probabilities(schedule, dev, cfg.probability_source)?;
    let stats = simulate_words_with_probs(&probs, cfg)?;
    Ok(FidelityStats {
        analytic_mse: mse(schedule, dev),
        psnr_analytic: psnr(mse(schedule, dev), schedule.bits()),
        ..stats
    })
}

/// Write every pixel of a raw 8-bit grayscale image through an 8-bit
/// schedule's channel, `cfg.samples` passes over the whole image. Each
/// pixel write counts as one sample in the statistics.
pub fn simulate_image(
    schedule: &PulseSchedule,
    dev: &DeviceParams,
    image: &[u8],
    cfg: &SimConfig,
) -> Result<FidelityStats> {
    if schedule.bits() != 8 {
        return Err(Error::InvalidInput(format!(
            "image mode needs an 8-bit schedule, got {} bits",
            schedule.bits()
        )));
    }
    if image.is_empty() {
        return Err(Error::InvalidInput("image payload is empty".to_string()));
    }
    if cfg.samples == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".to_string()));
    }
    let writes = cfg
        .samples
        .checked_mul(image.len() as u64)
        .ok_or_else(|| Error::InvalidInput("pass count overflows the write counter".to_string()))?;
    check_counter_capacity(writes, 8)?;
    let probs = schedule_flip_probabilities(schedule, dev, cfg.probability_source)?;
    let mut acc = Accumulator::default();
    let mut event = 0u64;
    for _pass in 0..cfg.samples {
        for &px in image {
            let received = write_once(px as u64, &probs, cfg.seed, event);
            acc.push(squared_diff(px as u64, received));
            event += 1;
        }
    }
    Ok(stats_from(&acc, mse(schedule, dev), 8))
}
