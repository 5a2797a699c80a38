//! Serializable report documents and their file formats.
//!
//! The schedule document is the interchange format between subcommands:
//! `optimize` writes it, `simulate` reads it back. Serialization uses
//! shortest-round-trip float encoding, so a document survives a write/read
//! cycle with every value bit-identical.

use mramwf::duration_opt::Budget;
use mramwf::iwf::OptimizationReport;
use mramwf::model::{psnr, DeviceParams, PulseSchedule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseDoc {
    pub bit: usize,
    pub current: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualsDoc {
    /// Water-level dual of the duration solve; `null` when unbounded.
    pub nu_prime: Option<f64>,
    /// Energy-price dual of the current solve.
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalPulseDoc {
    pub bit: usize,
    pub current_amperes: f64,
    pub duration_seconds: f64,
}

/// Lab-unit view of the schedule; present only when the caller supplied
/// the normalization scales (they play no part in the optimization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalDoc {
    pub critical_current: f64,
    pub relaxation_time: f64,
    pub pulses: Vec<PhysicalPulseDoc>,
}

/// Full optimizer report for one word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub bits: usize,
    pub energy_budget: f64,
    pub latency_cap: Option<f64>,
    pub delta: f64,
    pub epsilon: f64,
    pub pulses: Vec<PulseDoc>,
    pub mse_analytic: f64,
    pub duals: DualsDoc,
    pub iterations: usize,
    pub converged: bool,
    /// Optimized-to-uniform MSE ratio.
    pub gamma: f64,
    pub mse_uniform: f64,
    pub psnr_analytic: f64,
    /// MSE after each optimizer sweep.
    pub mse_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub physical: Option<PhysicalDoc>,
}

impl ScheduleDoc {
    pub fn from_report(
        bits: usize,
        budget: &Budget,
        dev: &DeviceParams,
        report: &OptimizationReport,
    ) -> Self {
        let pulses = report
            .schedule
            .pulses()
            .iter()
            .enumerate()
            .map(|(bit, p)| PulseDoc {
                bit,
                current: p.current,
                duration: p.duration,
            })
            .collect();
        let duals = report
            .dual_trace
            .last()
            .map(|d| DualsDoc {
                nu_prime: Some(d.nu_prime).filter(|v| v.is_finite()),
                mu: d.mu,
            })
            .expect("optimizer always runs at least one sweep");
        let physical = match (dev.i_c, dev.t_c) {
            (Some(critical_current), Some(relaxation_time)) => Some(PhysicalDoc {
                critical_current,
                relaxation_time,
                pulses: report
                    .schedule
                    .pulses()
                    .iter()
                    .enumerate()
                    .map(|(bit, p)| {
                        let phys = dev.denormalize(p).expect("both scales are set");
                        PhysicalPulseDoc {
                            bit,
                            current_amperes: phys.current_amperes,
                            duration_seconds: phys.duration_seconds,
                        }
                    })
                    .collect(),
            }),
            _ => None,
        };
        ScheduleDoc {
            bits,
            energy_budget: budget.energy,
            latency_cap: budget.latency_cap,
            delta: dev.delta,
            epsilon: budget.epsilon,
            pulses,
            mse_analytic: report.final_mse,
            duals,
            iterations: report.iterations,
            converged: report.converged,
            gamma: report.reduction_ratio,
            mse_uniform: report.uniform_mse,
            psnr_analytic: psnr(report.final_mse, bits),
            mse_trace: report.mse_trace.clone(),
            physical,
        }
    }

    /// Rebuild the pulse schedule, checking the document's shape.
    pub fn to_schedule(&self) -> Result<PulseSchedule, String> {
        if self.pulses.len() != self.bits {
            return Err(format!(
                "schedule document claims {} bits but lists {} pulses",
                self.bits,
                self.pulses.len()
            ));
        }
        for (k, p) in self.pulses.iter().enumerate() {
            if p.bit != k {
                return Err(format!(
                    "pulse list must be ordered by bit: position {k} holds bit {}",
                    p.bit
                ));
            }
        }
        let currents: Vec<f64> = self.pulses.iter().map(|p| p.current).collect();
        let durations: Vec<f64> = self.pulses.iter().map(|p| p.duration).collect();
        PulseSchedule::from_raw(&currents, &durations).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Pulse table alone, for spreadsheet use.
    pub fn pulse_csv(&self) -> String {
        let mut out = String::from("bit,current,duration\n");
        for p in &self.pulses {
            out.push_str(&format!("{},{},{}\n", p.bit, p.current, p.duration));
        }
        out
    }
}

/// Result of the grid-search cross-check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleDoc {
    pub bits: usize,
    pub energy_budget: f64,
    pub resolution: usize,
    pub oracle_mse: f64,
    pub optimizer_mse: f64,
    /// `(oracle_mse - optimizer_mse) / optimizer_mse`; nonnegative up to
    /// grid discretization when the optimizer is doing its job.
    pub relative_gap: f64,
    pub resolution_warning: bool,
    pub oracle_pulses: Vec<PulseDoc>,
    pub optimizer_pulses: Vec<PulseDoc>,
}

impl OracleDoc {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

pub fn pulse_docs(schedule: &PulseSchedule) -> Vec<PulseDoc> {
    schedule
        .pulses()
        .iter()
        .enumerate()
        .map(|(bit, p)| PulseDoc {
            bit,
            current: p.current,
            duration: p.duration,
        })
        .collect()
}
