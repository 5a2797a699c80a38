//! Write-pulse shaping for multi-bit MRAM words.
//!
//! Storing a `B`-bit word puts one write pulse on every bit line. Each pulse
//! has a normalized current and duration; stronger or longer pulses fail
//! less often but cost quadratic energy and linear time. Because a flipped
//! high-order bit corrupts the stored value `4^b` times more (in squared
//! error) than the low-order one, uniform pulses waste most of their budget
//! protecting bits that barely matter.
//!
//! This crate models the failure physics ([`model`]), solves the two convex
//! halves of the pulse-shaping problem in closed dual form
//! ([`duration_opt`], [`current_opt`]), alternates them to a KKT point
//! ([`iwf`]), and validates the result against brute-force search
//! ([`oracle`]) and Monte Carlo word-writing experiments ([`simulate`]).
//!
//! ```
//! use mramwf::{duration_opt::Budget, iwf, model::DeviceParams};
//!
//! let dev = DeviceParams::default();
//! let budget = Budget::new(160.0).unwrap();
//! let report = iwf::optimize_word(8, &budget, &dev, &iwf::IwfConfig::default()).unwrap();
//! assert!(report.converged);
//! // The shaped schedule beats the uniform split by more than 20x in MSE.
//! assert!(report.reduction_ratio < 0.05);
//! ```

pub mod current_opt;
pub mod duration_opt;
pub mod error;
pub mod iwf;
pub mod model;
pub mod notes;
pub mod numerics;
pub mod oracle;
pub mod simulate;
pub mod singlebit;

pub use error::{Error, Result};
pub use model::{DeviceParams, PhysicalPulse, PulseSchedule, WritePulse};
