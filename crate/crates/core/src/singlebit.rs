//! Closed-form optimum for writing a single bit under an energy budget.
//!
//! On the energy shell `i^2 t = E` the proxy exponent becomes
//! `2 (i - 1) t = 2 E (i - 1) / i^2`, and `g(i) = E (i - 1) / i^2` has
//! derivative `E (2 - i) / i^3`: increasing below `i = 2`, decreasing
//! above. The failure probability is therefore minimized at exactly
//! `(i, t) = (2, E/4)`, independent of the device, where the proxy value
//! is `c * e^{-E/2}`.

use crate::error::{Error, Result};
use crate::model::WritePulse;

/// The energy-optimal single-bit pulse `(2, E/4)`.
pub fn optimize_single_bit(energy_budget: f64) -> Result<WritePulse> {
    if !energy_budget.is_finite() || energy_budget <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "energy budget must be positive and finite, got {energy_budget}"
        )));
    }
    WritePulse::new(2.0, energy_budget / 4.0)
}
