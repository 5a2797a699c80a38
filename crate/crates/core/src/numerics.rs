//! Scalar numerics used by the dual solvers: the principal Lambert W branch
//! and a guarded bisection for monotone residual equations.

use crate::error::{Error, Result};
use std::f64::consts::E;

/// Halley iteration cap for [`lambert_w0`]. Convergence is cubic, so this is
/// generous; hitting it indicates a NaN-poisoned input rather than a hard
/// root.
const W_MAX_ITER: u32 = 50;

/// Principal branch `W_0(x)` for `x >= 0`, solving `w e^w = x` with `w >= 0`.
///
/// Uses Halley's method from the initial guess `ln(1 + x)` for small
/// arguments and `ln x - ln ln x` beyond `e`. Accuracy is driven to roughly
/// machine precision, comfortably inside 1e-12 relative (1e-12 absolute
/// below `x = 1`).
pub fn lambert_w0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidInput(format!(
            "lambert_w0 requires finite x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x > 1e300 {
        // Forming w e^w directly would overflow; solve in the log domain.
        return Ok(w0_from_ln(x.ln()));
    }
    let mut w = if x <= E {
        x.ln_1p()
    } else {
        let lx = x.ln();
        lx - lx.ln()
    };
    for _ in 0..W_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        // Halley step: f' = e^w (w + 1), f'' = e^w (w + 2).
        let denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * (w + 1.0));
        let step = f / denom;
        w -= step;
        if step.abs() <= 2e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// `W_0(e^lx)` without forming `e^lx`, for arguments far beyond f64 range.
///
/// The current solver needs `W` of quantities like `2 * 4^b * t * e^{2t} / mu`
/// whose logarithm is cheap to assemble but whose value overflows for long
/// pulses; this variant accepts the logarithm directly. `lx = -inf`
/// corresponds to `x = 0` and returns 0.
pub fn lambert_w0_ln(lx: f64) -> Result<f64> {
    if lx.is_nan() || lx == f64::INFINITY {
        return Err(Error::InvalidInput(format!(
            "lambert_w0_ln requires lx < +inf and not NaN, got {lx}"
        )));
    }
    if lx == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if lx <= 2.0 {
        // Small enough to exponentiate safely; reuse the direct path.
        return lambert_w0(lx.exp());
    }
    Ok(w0_from_ln(lx))
}

/// Newton iteration on `g(w) = w + ln w - lx`, valid for `lx > 1` where the
/// root satisfies `w > 1` and `g` is smooth and increasing.
fn w0_from_ln(lx: f64) -> f64 {
    let mut w = (lx - lx.ln()).max(1.0);
    for _ in 0..W_MAX_ITER {
        let g = w + w.ln() - lx;
        let step = g * w / (w + 1.0);
        w -= step;
        if step.abs() <= 2e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    w
}

/// Settings for [`bisect_monotone`].
#[derive(Debug, Clone, Copy)]
pub struct BisectionConfig {
    /// Acceptance threshold on the final residual `|f(x) - target|`.
    pub abs_tol: f64,
    /// Iteration cap for the bisection phase.
    pub max_iter: u32,
    /// Geometric factor for bracket expansion.
    pub bracket_growth: f64,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        BisectionConfig {
            abs_tol: 1e-10,
            max_iter: 200,
            bracket_growth: 2.0,
        }
    }
}

/// Expansion attempts before giving up on finding a sign change.
const MAX_EXPANSIONS: u32 = 120;

/// Solve `f(x) = target` for a continuous monotone `f` (either direction).
///
/// Starting from `[lo, hi]`, the bracket is grown geometrically on the side
/// suggested by the endpoint residuals until it straddles the target, then
/// bisected. The interval is refined all the way to floating-point
/// resolution (cheap for scalar problems and required by callers that feed
/// the root into tightly toleranced downstream checks); `abs_tol` acts as
/// the acceptance threshold on the achieved residual, not as an early-out.
pub fn bisect_monotone<F>(f: F, target: f64, lo: f64, hi: f64, cfg: &BisectionConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidInput(format!(
            "bisection needs a finite nonempty interval, got [{lo}, {hi}]"
        )));
    }
    if !(cfg.abs_tol > 0.0) || cfg.bracket_growth <= 1.0 || cfg.max_iter == 0 {
        return Err(Error::InvalidInput(
            "bisection config must have abs_tol > 0, bracket_growth > 1, max_iter >= 1"
                .to_string(),
        ));
    }
    let g = |x: f64| f(x) - target;
    let (mut lo, mut hi) = (lo, hi);
    let mut glo = g(lo);
    let mut ghi = g(hi);
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }

    let mut expansions = 0;
    while glo.signum() == ghi.signum() {
        if expansions >= MAX_EXPANSIONS {
            return Err(Error::BracketNotFound { lo, hi, expansions });
        }
        let width = (hi - lo) * (cfg.bracket_growth - 1.0);
        // Monotonicity puts the root on the side whose residual is smaller
        // in magnitude; a flat stretch gives no signal, so grow both ways.
        if ghi.abs() < glo.abs() {
            hi += width;
            ghi = g(hi);
        } else if glo.abs() < ghi.abs() {
            lo -= width;
            glo = g(lo);
        } else {
            lo -= width;
            hi += width;
            glo = g(lo);
            ghi = g(hi);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::BracketNotFound { lo, hi, expansions });
        }
        if glo == 0.0 {
            return Ok(lo);
        }
        if ghi == 0.0 {
            return Ok(hi);
        }
        expansions += 1;
    }

    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let scale = 1f64.max(lo.abs()).max(hi.abs());
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
        iterations += 1;
    }

    let root = if glo.abs() <= ghi.abs() { lo } else { hi };
    let residual = glo.abs().min(ghi.abs());
    if residual <= cfg.abs_tol {
        Ok(root)
    } else {
        Err(Error::MaxIterationsExceeded {
            iterations,
            residual,
            tolerance: cfg.abs_tol,
        })
    }
}
