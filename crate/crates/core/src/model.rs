//! Normalized STT-MRAM write model and the metrics built on top of it.
//!
//! A write pulse is described by two dimensionless quantities: a current
//! `i = I / I_c` (normalized by the critical switching current) and a
//! duration `t = T / T_c` (normalized by the cell relaxation time). For a
//! cell with thermal stability factor `delta`, the probability that a single
//! write pulse fails to switch the free layer is
//!
//! ```text
//! p_wf(i, t) = 1 - exp( -delta * pi^2 * (i - 1) / (4 * (i * e^{2(i-1)t} - 1)) )
//! ```
//!
//! valid for `i > 1`. For pulses of practical strength the bracketed term is
//! dominated by the exponential, which motivates the proxy
//!
//! ```text
//! p~wf(i, t) = c * e^{-2(i-1)t},    c = (pi^2 / 4) * delta.
//! ```
//!
//! The proxy is intentionally left unclamped so that downstream optimization
//! works with a smooth, strictly positive objective; only the simulation
//! boundary clamps probabilities into `[0, 1/2]`.
//!
//! When a `B`-bit word is written with one pulse per bit position and the
//! data are uniform random, a failed write flips the stored bit with
//! probability 1/2, so the per-bit error rate is half the failure rate. The
//! word-level metrics used throughout this crate are
//!
//! ```text
//! energy   E(s) = sum_b i_b^2 t_b
//! latency  L(s) = max_b t_b
//! mse      M(s) = sum_b 4^b * (1/2) * p~wf(i_b, t_b) = c' * sum_b 4^b e^{-2(i_b-1)t_b}
//! ```
//!
//! with `c' = c / 2` and bit 0 the least significant. PSNR is reported
//! against the full-scale peak `2^B - 1`.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Cell parameters. `delta` is the thermal stability factor; the optional
/// `i_c` (amperes) and `t_c` (seconds) are only used to translate normalized
/// pulses back into physical units for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Thermal stability factor, `delta > 0`.
    pub delta: f64,
    /// Critical switching current in amperes, if known.
    pub i_c: Option<f64>,
    /// Relaxation time in seconds, if known.
    pub t_c: Option<f64>,
}

impl DeviceParams {
    /// Device with the given thermal stability factor.
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "thermal stability factor must be positive and finite, got {delta}"
            )));
        }
        Ok(DeviceParams {
            delta,
            i_c: None,
            t_c: None,
        })
    }

    /// Device with physical scales attached for denormalized reporting.
    pub fn with_physical(delta: f64, i_c: f64, t_c: f64) -> Result<Self> {
        if !i_c.is_finite() || i_c <= 0.0 || !t_c.is_finite() || t_c <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "physical scales must be positive and finite, got i_c={i_c}, t_c={t_c}"
            )));
        }
        let mut dev = DeviceParams::new(delta)?;
        dev.i_c = Some(i_c);
        dev.t_c = Some(t_c);
        Ok(dev)
    }

    /// Proxy prefactor `c = (pi^2 / 4) * delta`.
    pub fn c(&self) -> f64 {
        PI * PI / 4.0 * self.delta
    }

    /// Bit-error prefactor `c' = c / 2`, absorbing the 1/2 from random data.
    pub fn c_prime(&self) -> f64 {
        self.c() / 2.0
    }

    /// Translate a normalized pulse into physical units. Returns `None`
    /// unless both physical scales were provided.
    pub fn denormalize(&self, pulse: &WritePulse) -> Option<PhysicalPulse> {
        match (self.i_c, self.t_c) {
            (Some(ic), Some(tc)) => Some(PhysicalPulse {
                current_amperes: pulse.current * ic,
                duration_seconds: pulse.duration * tc,
            }),
            _ => None,
        }
    }
}

impl Default for DeviceParams {
    /// The `delta = 60` operating point used by the reference experiments.
    fn default() -> Self {
        DeviceParams::new(60.0).expect("default delta is valid")
    }
}

/// One write pulse in normalized units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WritePulse {
    /// Normalized current, `current > 1` (below the critical current the
    /// pulse cannot switch the cell at all).
    pub current: f64,
    /// Normalized duration, `duration >= 0`.
    pub duration: f64,
}

impl WritePulse {
    pub fn new(current: f64, duration: f64) -> Result<Self> {
        if !current.is_finite() || current <= 1.0 {
            return Err(Error::InvalidInput(format!(
                "normalized current must be finite and exceed 1, got {current}"
            )));
        }
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::InvalidInput(format!(
                "normalized duration must be finite and nonnegative, got {duration}"
            )));
        }
        Ok(WritePulse { current, duration })
    }
}

/// A pulse in physical units, produced by [`DeviceParams::denormalize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalPulse {
    pub current_amperes: f64,
    pub duration_seconds: f64,
}

/// Per-bit pulse assignment for a `B`-bit word, least significant bit first.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pulses: Vec<WritePulse>,
}

impl PulseSchedule {
    /// Schedule from explicit pulses; at least one bit is required.
    pub fn new(pulses: Vec<WritePulse>) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::InvalidInput(
                "a schedule needs at least one bit".to_string(),
            ));
        }
        Ok(PulseSchedule { pulses })
    }

    /// Schedule from parallel current/duration vectors.
    pub fn from_raw(currents: &[f64], durations: &[f64]) -> Result<Self> {
        if currents.len() != durations.len() {
            return Err(Error::InvalidInput(format!(
                "current and duration vectors differ in length: {} vs {}",
                currents.len(),
                durations.len()
            )));
        }
        let pulses = currents
            .iter()
            .zip(durations)
            .map(|(&i, &t)| WritePulse::new(i, t))
            .collect::<Result<Vec<_>>>()?;
        PulseSchedule::new(pulses)
    }

    /// Word width `B`.
    pub fn bits(&self) -> usize {
        self.pulses.len()
    }

    pub fn pulses(&self) -> &[WritePulse] {
        &self.pulses
    }

    pub fn currents(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.current).collect()
    }

    pub fn durations(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.duration).collect()
    }
}

/// Exact write-failure probability of a single pulse.
///
/// Evaluated as `-expm1(-arg)` to keep full precision when the probability
/// is tiny. The result always lies in `(0, 1]` for `current > 1`.
pub fn write_failure_exact(pulse: &WritePulse, dev: &DeviceParams) -> Result<f64> {
    if !(pulse.current > 1.0) {
        return Err(Error::InvalidInput(format!(
            "write failure model requires current > 1, got {}",
            pulse.current
        )));
    }
    let i = pulse.current;
    let t = pulse.duration;
    // Denominator grows like i * e^{2(i-1)t}; overflow saturates the
    // probability at 0 from above, which is the correct limit.
    let denom = i * (2.0 * (i - 1.0) * t).exp() - 1.0;
    let arg = dev.delta * PI * PI * (i - 1.0) / (4.0 * denom);
    Ok(-(-arg).exp_m1())
}

/// Exponential proxy `c * e^{-2(i-1)t}` for the write-failure probability.
///
/// Deliberately unclamped: values above 1 are meaningful to the optimizer as
/// a smooth objective even though they are not probabilities.
pub fn write_failure_proxy(pulse: &WritePulse, dev: &DeviceParams) -> Result<f64> {
    if !(pulse.current > 1.0) {
        return Err(Error::InvalidInput(format!(
            "write failure proxy requires current > 1, got {}",
            pulse.current
        )));
    }
    Ok(dev.c() * (-2.0 * (pulse.current - 1.0) * pulse.duration).exp())
}

/// Per-bit error probability for simulation: half the proxy failure rate,
/// clamped to the meaningful range `[0, 1/2]`.
pub fn bit_error_probability(pulse: &WritePulse, dev: &DeviceParams) -> Result<f64> {
    Ok(bit_error_probability_unclamped(pulse, dev)?.min(0.5))
}

/// Unclamped per-bit error term `(1/2) * proxy`, the quantity the analytic
/// MSE sums. May exceed 1/2 for very weak pulses.
pub fn bit_error_probability_unclamped(pulse: &WritePulse, dev: &DeviceParams) -> Result<f64> {
    Ok(0.5 * write_failure_proxy(pulse, dev)?)
}

/// Total write energy `sum_b i_b^2 t_b` in normalized units.
pub fn energy(schedule: &PulseSchedule) -> f64 {
    schedule
        .pulses()
        .iter()
        .map(|p| p.current * p.current * p.duration)
        .sum()
}

/// Word write latency `max_b t_b` (pulses are applied in parallel).
pub fn latency(schedule: &PulseSchedule) -> f64 {
    schedule
        .pulses()
        .iter()
        .map(|p| p.duration)
        .fold(0.0, f64::max)
}

/// Analytic mean squared error of the written word under the proxy model,
/// `sum_b 4^b * (1/2) * p~wf(i_b, t_b)`.
///
/// Summed directly over the unclamped per-bit error terms so that this value
/// and [`bit_error_probability_unclamped`] agree exactly, term by term.
pub fn mse(schedule: &PulseSchedule, dev: &DeviceParams) -> f64 {
    schedule
        .pulses()
        .iter()
        .enumerate()
        .map(|(b, p)| {
            let weight = 4f64.powi(b as i32);
            weight
                * bit_error_probability_unclamped(p, dev)
                    .expect("schedule pulses satisfy current > 1")
        })
        .sum()
}

/// Peak signal-to-noise ratio in dB for a `bits`-wide word:
/// `10 log10((2^B - 1)^2 / mse)`. An exact zero MSE maps to `+inf`.
pub fn psnr(mse_value: f64, bits: usize) -> f64 {
    assert!(bits >= 1 && bits < 53, "word width out of range: {bits}");
    if mse_value == 0.0 {
        return f64::INFINITY;
    }
    let peak = ((1u64 << bits) - 1) as f64;
    10.0 * (peak * peak / mse_value).log10()
}
