//! Optimal pulse currents for fixed durations, via the Lambert W function.
//!
//! With durations fixed, minimizing `sum_b 4^b e^{-2(i_b-1)t_b}` under
//! `sum_b i_b^2 t_b <= E` and `i_b >= 1 + epsilon` is again convex. The
//! stationarity condition for an unclamped bit equates marginal error
//! reductions per unit energy across bits:
//!
//! ```text
//! mu = 4^b e^{-2 t_b (i_b - 1)} / i_b
//! ```
//!
//! Substituting `z = 2 t_b i_b` turns this into `z e^z = 2 * 4^b t_b e^{2 t_b} / mu`,
//! so each current is a Lambert W evaluation:
//!
//! ```text
//! i_b(mu) = W0( 2 * 4^b t_b e^{2 t_b} / mu ) / (2 t_b)
//! ```
//!
//! clamped to `1 + epsilon` once `mu` exceeds the bit's marginal value at
//! the bound, `4^b e^{-2 t_b epsilon} / (1 + epsilon)`. Because each `i_b`
//! is nonincreasing in `mu`, so is the consumed energy, and the right dual
//! is found by bisecting in `log mu`. The W argument overflows f64 for long
//! pulses, so the solver hands its logarithm to
//! [`crate::numerics::lambert_w0_ln`] instead of forming it.
//!
//! Bits with `t_b = 0` spend no energy and carry no error gradient; they
//! are fixed at the minimum current `1 + epsilon` and excluded from the
//! energy accounting.

use crate::duration_opt::{Budget, DualSolveOutcome};
use crate::error::{Error, Result};
use crate::numerics::{bisect_monotone, lambert_w0_ln, BisectionConfig};
use std::f64::consts::LN_2;

/// Relative window inside which the all-clamped energy is treated as
/// exactly equal to the budget.
const CLAMP_TIE_REL: f64 = 1e-12;

/// Per-bit stationarity datum, from [`stationarity_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityEntry {
    /// Bit position (only bits with `t_b > 0` are reported).
    pub bit: usize,
    /// Marginal error reduction per unit energy,
    /// `4^b e^{-2 t_b (i_b - 1)} / i_b`.
    pub marginal: f64,
    /// Whether the current sits at the `1 + epsilon` lower bound.
    pub clamped: bool,
}

fn ln4() -> f64 {
    2.0 * LN_2
}

/// Current of one bit at dual value `exp(log_mu)`. `t` must be positive.
fn current_at_log_mu(bit: usize, t: f64, log_mu: f64, min_current: f64) -> f64 {
    let epsilon = min_current - 1.0;
    // Marginal value at the clamp boundary, in logs.
    let log_clamp = bit as f64 * ln4() - 2.0 * t * epsilon - min_current.ln();
    if log_mu >= log_clamp {
        return min_current;
    }
    let ln_arg = (2.0 * t).ln() + bit as f64 * ln4() + 2.0 * t - log_mu;
    let w = lambert_w0_ln(ln_arg).expect("W argument is finite by construction");
    w / (2.0 * t)
}

/// Currents for fixed durations under the energy budget.
///
/// At least one duration must be positive, and the budget must cover the
/// all-clamped floor `(1 + epsilon)^2 * sum_b t_b`; otherwise the problem
/// is infeasible. Returns the current vector and the dual outcome with
/// `dual_value = mu`; `capped_bits` lists active bits clamped at
/// `1 + epsilon`, and zero-duration bits appear in neither set.
pub fn optimize_currents(durations: &[f64], budget: &Budget) -> Result<(Vec<f64>, DualSolveOutcome)> {
    if durations.is_empty() {
        return Err(Error::InvalidInput(
            "current solve needs at least one bit".to_string(),
        ));
    }
    for (b, &t) in durations.iter().enumerate() {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidInput(format!(
                "duration for bit {b} must be finite and nonnegative, got {t}"
            )));
        }
    }
    let active: Vec<usize> = (0..durations.len()).filter(|&b| durations[b] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::InvalidInput(
            "current solve needs at least one positive duration".to_string(),
        ));
    }
    let min_current = budget.min_current();
    let floor_energy: f64 = active
        .iter()
        .map(|&b| min_current * min_current * durations[b])
        .sum();
    if floor_energy > budget.energy * (1.0 + CLAMP_TIE_REL) {
        return Err(Error::InfeasibleBudget(format!(
            "durations require at least {floor_energy} energy at the minimum current, \
             budget is {}",
            budget.energy
        )));
    }

    let energy_at = |log_mu: f64| -> f64 {
        active
            .iter()
            .map(|&b| {
                let i = current_at_log_mu(b, durations[b], log_mu, min_current);
                i * i * durations[b]
            })
            .sum()
    };

    // Above the largest clamp threshold every bit is pinned, so the energy
    // plateaus at the floor; seed the bracket there and expand downward.
    let log_clamp_max = active
        .iter()
        .map(|&b| {
            b as f64 * ln4() - 2.0 * durations[b] * (min_current - 1.0) - min_current.ln()
        })
        .fold(f64::NEG_INFINITY, f64::max);

    let log_mu = if floor_energy >= budget.energy * (1.0 - CLAMP_TIE_REL) {
        log_clamp_max
    } else {
        let cfg = BisectionConfig {
            abs_tol: 1e-10 * budget.energy.max(1.0),
            ..BisectionConfig::default()
        };
        bisect_monotone(energy_at, budget.energy, log_clamp_max - 2.0, log_clamp_max, &cfg)?
    };

    let mut currents = vec![min_current; durations.len()];
    for &b in &active {
        currents[b] = current_at_log_mu(b, durations[b], log_mu, min_current);
    }
    let energy: f64 = active
        .iter()
        .map(|&b| currents[b] * currents[b] * durations[b])
        .sum();
    let outcome = DualSolveOutcome {
        dual_value: log_mu.exp(),
        active_bits: active
            .iter()
            .cloned()
            .filter(|&b| currents[b] > min_current)
            .collect(),
        capped_bits: active
            .iter()
            .cloned()
            .filter(|&b| currents[b] <= min_current)
            .collect(),
        residual: (energy - budget.energy).abs(),
        budget_unreachable: false,
    };
    Ok((currents, outcome))
}

/// Marginal values `4^b e^{-2 t_b (i_b - 1)} / i_b` for every bit with
/// positive duration.
///
/// On a solution of [`optimize_currents`] with dual `mu`, unclamped bits
/// have `marginal = mu` and clamped bits have `marginal <= mu`; bits with
/// zero duration carry no gradient and are omitted.
pub fn stationarity_report(
    currents: &[f64],
    durations: &[f64],
    epsilon: f64,
) -> Vec<StationarityEntry> {
    assert_eq!(
        currents.len(),
        durations.len(),
        "current and duration vectors must align"
    );
    let min_current = 1.0 + epsilon;
    currents
        .iter()
        .zip(durations)
        .enumerate()
        .filter(|(_, (_, &t))| t > 0.0)
        .map(|(b, (&i, &t))| StationarityEntry {
            bit: b,
            marginal: 4f64.powi(b as i32) * (-2.0 * t * (i - 1.0)).exp() / i,
            clamped: i <= min_current * (1.0 + 1e-9),
        })
        .collect()
}
