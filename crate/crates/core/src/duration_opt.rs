//! Optimal pulse durations for fixed currents: water-filling on the energy
//! shell, optionally bounded above by a latency cap.
//!
//! With currents fixed, minimizing the weighted error sum
//! `sum_b 4^b e^{-2(i_b-1)t_b}` under `sum_b i_b^2 t_b <= E` is convex, and
//! its KKT conditions have a water-filling shape. Writing `L` for the log of
//! the reciprocal dual variable (`L = log nu'`, `nu' = 1/nu`), each bit has
//! a ground level
//!
//! ```text
//! g_b = log( i_b^2 / (2 * 4^b * (i_b - 1)) )
//! ```
//!
//! and receives duration `t_b = (L - g_b) / (2 (i_b - 1))` when the water
//! level `L` stands above its ground, zero otherwise. High-order bits have
//! low ground (the `4^b` weight digs them deep), so the water reaches them
//! first. The solver finds `L` by bisecting the monotone energy residual;
//! the budget constraint is always tight at the optimum because lowering
//! any duration only raises the objective.
//!
//! With a latency cap `delta` the feasible box truncates the same picture:
//! bits whose implied duration would exceed `delta` sit pinned at the cap
//! (`t_b = delta` exactly when `L >= g_b + 2 (i_b - 1) delta`). If even the
//! all-capped box cannot spend the budget, the solver returns that corner
//! flagged as `budget_unreachable` instead of erroring: the alternating
//! optimizer recovers by raising currents on the next half-step.
//!
//! Threshold ties resolve to the boundary value (`t_b = 0` at the ground
//! tie, `t_b = delta` at the cap tie).

use crate::error::{Error, Result};
use crate::numerics::{bisect_monotone, BisectionConfig};
use std::f64::consts::LN_2;

/// Relative window inside which the all-capped energy is treated as exactly
/// equal to the budget (cap-boundary tie).
const CAP_TIE_REL: f64 = 1e-12;

/// Resource limits for one word write.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    /// Total normalized energy `E > 0` to spend across all bits.
    pub energy: f64,
    /// Optional per-pulse duration cap `delta > 0`.
    pub latency_cap: Option<f64>,
    /// Lower-bound margin for currents: every current satisfies
    /// `i >= 1 + epsilon`, `0 < epsilon < 1`.
    pub epsilon: f64,
}

impl Budget {
    /// Budget with the default current margin `epsilon = 1e-3` and no cap.
    pub fn new(energy: f64) -> Result<Self> {
        if !energy.is_finite() || energy <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "energy budget must be positive and finite, got {energy}"
            )));
        }
        Ok(Budget {
            energy,
            latency_cap: None,
            epsilon: 1e-3,
        })
    }

    pub fn with_latency_cap(mut self, delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "latency cap must be positive and finite, got {delta}"
            )));
        }
        self.latency_cap = Some(delta);
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "current margin must satisfy 0 < epsilon < 1, got {epsilon}"
            )));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    /// Lowest current any bit may use.
    pub fn min_current(&self) -> f64 {
        1.0 + self.epsilon
    }
}

/// Result of solving one dual problem (durations for fixed currents, or
/// currents for fixed durations).
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolveOutcome {
    /// The dual variable itself: `nu'` for duration solves, `mu` for
    /// current solves.
    pub dual_value: f64,
    /// Bits that received a nonzero resource (for duration solves,
    /// `t_b > 0`; for current solves, bits solved above the lower bound).
    pub active_bits: Vec<usize>,
    /// Bits pinned at the box boundary: `t_b = delta` for duration solves,
    /// `i_b = 1 + epsilon` (with positive duration) for current solves.
    pub capped_bits: Vec<usize>,
    /// Achieved `|energy - budget|`.
    pub residual: f64,
    /// Set only by the capped duration solve: the budget exceeds what the
    /// all-capped box can spend, so every duration sits at the cap and the
    /// energy constraint is slack.
    pub budget_unreachable: bool,
}

/// Per-bit levels for diagnosing a duration assignment; see
/// [`water_level_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterLevel {
    /// Ground level `g_b` implied by the bit's weight and current.
    pub ground: f64,
    /// Water depth `2 (i_b - 1) t_b` standing on that ground.
    pub depth: f64,
    /// Attained level `ground + depth`; equals `log nu'` on every bit with
    /// `0 < t_b < delta`.
    pub level: f64,
}

fn ln4() -> f64 {
    2.0 * LN_2
}

fn ground_level(current: f64, bit: usize) -> f64 {
    2.0 * current.ln() - (2.0 * (current - 1.0)).ln() - bit as f64 * ln4()
}

fn validate_currents(currents: &[f64], budget: &Budget) -> Result<()> {
    if currents.is_empty() {
        return Err(Error::InvalidInput(
            "duration solve needs at least one bit".to_string(),
        ));
    }
    let floor = budget.min_current() * (1.0 - 1e-12);
    for (b, &i) in currents.iter().enumerate() {
        if !i.is_finite() || i < floor {
            return Err(Error::InvalidInput(format!(
                "current for bit {b} must be finite and at least 1 + epsilon = {}, got {i}",
                budget.min_current()
            )));
        }
    }
    Ok(())
}

/// Duration of one bit at water level `level`, honoring an optional cap.
/// The case tests mirror the optimality conditions so that ties land
/// exactly on the boundary values.
fn duration_at_level(current: f64, ground: f64, level: f64, cap: Option<f64>) -> f64 {
    if level <= ground {
        return 0.0;
    }
    if let Some(delta) = cap {
        if level >= ground + 2.0 * (current - 1.0) * delta {
            return delta;
        }
    }
    (level - ground) / (2.0 * (current - 1.0))
}

fn assemble(
    currents: &[f64],
    grounds: &[f64],
    level: f64,
    cap: Option<f64>,
    budget: &Budget,
    budget_unreachable: bool,
) -> (Vec<f64>, DualSolveOutcome) {
    let durations: Vec<f64> = currents
        .iter()
        .zip(grounds)
        .map(|(&i, &g)| duration_at_level(i, g, level, cap))
        .collect();
    let energy: f64 = currents
        .iter()
        .zip(&durations)
        .map(|(&i, &t)| i * i * t)
        .sum();
    let active_bits = durations
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 0.0)
        .map(|(b, _)| b)
        .collect();
    let capped_bits = match cap {
        Some(delta) => durations
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == delta)
            .map(|(b, _)| b)
            .collect(),
        None => Vec::new(),
    };
    let outcome = DualSolveOutcome {
        dual_value: level.exp(),
        active_bits,
        capped_bits,
        residual: (energy - budget.energy).abs(),
        budget_unreachable,
    };
    (durations, outcome)
}

fn solve_levels(
    currents: &[f64],
    grounds: &[f64],
    cap: Option<f64>,
    budget: &Budget,
    hi_seed: f64,
) -> Result<f64> {
    let energy_at = |level: f64| -> f64 {
        currents
            .iter()
            .zip(grounds)
            .map(|(&i, &g)| i * i * duration_at_level(i, g, level, cap))
            .sum()
    };
    let lo = grounds.iter().cloned().fold(f64::INFINITY, f64::min);
    let cfg = BisectionConfig {
        abs_tol: 1e-10 * budget.energy.max(1.0),
        ..BisectionConfig::default()
    };
    bisect_monotone(energy_at, budget.energy, lo, hi_seed, &cfg)
}

/// Durations for fixed currents under the energy budget alone.
///
/// Returns the duration vector together with the dual outcome; the energy
/// constraint is tight to within the bisection tolerance. Any latency cap
/// on the budget is ignored here; use [`cavefill_durations`] to honor it.
pub fn waterfill_durations(currents: &[f64], budget: &Budget) -> Result<(Vec<f64>, DualSolveOutcome)> {
    validate_currents(currents, budget)?;
    let grounds: Vec<f64> = currents
        .iter()
        .enumerate()
        .map(|(b, &i)| ground_level(i, b))
        .collect();
    let hi_seed = grounds.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let level = solve_levels(currents, &grounds, None, budget, hi_seed)?;
    Ok(assemble(currents, &grounds, level, None, budget, false))
}

/// Durations for fixed currents under both the energy budget and the
/// latency cap carried by `budget`.
///
/// When the budget exceeds the energy of the all-capped corner, that corner
/// is returned with `budget_unreachable` set (with the dual at `+inf`,
/// since the water stands above every cap); an exact tie resolves to the
/// same corner with the constraint counted as tight.
pub fn cavefill_durations(currents: &[f64], budget: &Budget) -> Result<(Vec<f64>, DualSolveOutcome)> {
    let delta = budget.latency_cap.ok_or_else(|| {
        Error::InvalidInput("cavefill_durations requires a latency cap on the budget".to_string())
    })?;
    validate_currents(currents, budget)?;
    let grounds: Vec<f64> = currents
        .iter()
        .enumerate()
        .map(|(b, &i)| ground_level(i, b))
        .collect();

    // If the unconstrained water line already respects the cap, it is the
    // capped optimum as well; solving the relaxation first keeps an
    // inactive cap bit-identical to the plain waterfill.
    let hi_seed = grounds.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let relaxed_level = solve_levels(currents, &grounds, None, budget, hi_seed)?;
    let cap_feasible = currents
        .iter()
        .zip(&grounds)
        .all(|(&i, &g)| duration_at_level(i, g, relaxed_level, None) <= delta);
    if cap_feasible {
        return Ok(assemble(
            currents,
            &grounds,
            relaxed_level,
            Some(delta),
            budget,
            false,
        ));
    }

    let cap_energy: f64 = currents.iter().map(|&i| i * i * delta).sum();
    let all_cap_level = currents
        .iter()
        .zip(&grounds)
        .map(|(&i, &g)| g + 2.0 * (i - 1.0) * delta)
        .fold(f64::NEG_INFINITY, f64::max);

    if cap_energy <= budget.energy * (1.0 + CAP_TIE_REL) {
        let unreachable = cap_energy < budget.energy * (1.0 - CAP_TIE_REL);
        let level = if unreachable {
            f64::INFINITY
        } else {
            all_cap_level
        };
        let durations = vec![delta; currents.len()];
        let outcome = DualSolveOutcome {
            dual_value: level.exp(),
            active_bits: (0..currents.len()).collect(),
            capped_bits: (0..currents.len()).collect(),
            residual: (cap_energy - budget.energy).abs(),
            budget_unreachable: unreachable,
        };
        return Ok((durations, outcome));
    }

    let level = solve_levels(currents, &grounds, Some(delta), budget, all_cap_level)?;
    Ok(assemble(currents, &grounds, level, Some(delta), budget, false))
}

/// Per-bit (ground, depth, level) triples for a current/duration assignment.
///
/// On a solution of [`waterfill_durations`] or [`cavefill_durations`], every
/// bit with `0 < t_b < delta` attains the common water level `log nu'`;
/// inactive bits show their ground standing above it and capped bits sit
/// below it by their remaining headroom.
pub fn water_level_report(currents: &[f64], durations: &[f64]) -> Vec<WaterLevel> {
    assert_eq!(
        currents.len(),
        durations.len(),
        "current and duration vectors must align"
    );
    currents
        .iter()
        .zip(durations)
        .enumerate()
        .map(|(b, (&i, &t))| {
            let ground = ground_level(i, b);
            let depth = 2.0 * (i - 1.0) * t;
            WaterLevel {
                ground,
                depth,
                level: ground + depth,
            }
        })
        .collect()
}
