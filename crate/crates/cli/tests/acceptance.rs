//! Acceptance suite: one test per project-level claim, each printing a
//! PASS/FAIL verdict line (run with `--nocapture` to see the PASS lines).
//!
//! Tolerances are pinned in this file, next to the checks they guard.
//! Criterion 8 is known to fail and is kept failing on purpose: it demands
//! that exact-law Monte Carlo agree with the proxy-based analytic MSE
//! within 5%, but the optimized schedules run at current 2, where the
//! exact failure law sits at half the proxy (the ratio of the two laws
//! tends to (i-1)/i for long pulses). The test reports the measured gap
//! rather than papering over it; see the verification notes in docs/.

use mramwf::duration_opt::{waterfill_durations, water_level_report, Budget};
use mramwf::current_opt::stationarity_report;
use mramwf::iwf::{
    closed_form_first_halfstep, optimize_word, reduction_ratio_bound, IwfConfig, StartCurrents,
};
use mramwf::model::{energy, latency, psnr, DeviceParams};
use mramwf::oracle::{grid_search_single_bit, grid_search_word};
use mramwf::simulate::{simulate_words, SimConfig};
use mramwf::singlebit::optimize_single_bit;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::LN_2;
use std::process::Command;

fn verdict(number: u32, label: &str, ok: bool) -> bool {
    println!(
        "[acceptance] criterion {number} ({label}): {}",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

fn dev() -> DeviceParams {
    DeviceParams::default()
}

#[test]
fn criterion_1_single_bit_optimum() {
    let mut ok = true;
    for e in [4.0, 40.0, 160.0] {
        let pulse = optimize_single_bit(e).unwrap();
        ok &= pulse.current == 2.0 && pulse.duration == e / 4.0;

        let budget = Budget::new(e).unwrap();
        let grid = grid_search_single_bit(&budget, 100_000).unwrap();
        let step = (20.0 - budget.min_current()) / 99_999.0;
        if (grid.current - 2.0).abs() > step {
            println!("  E={e}: grid current {} off by more than one step {step}", grid.current);
            ok = false;
        }
    }
    assert!(verdict(1, "single-bit closed form, grid agreement", ok));
}

#[test]
fn criterion_2_half_step_closed_form() {
    let mut ok = true;
    for bits in [2usize, 4, 8] {
        let b = bits as f64;
        let e = 4.0 * b * (b - 1.0) * LN_2;
        let budget = Budget::new(e).unwrap();
        let (expected, _) = closed_form_first_halfstep(bits, &budget, &dev()).unwrap();
        let (solved, _) = waterfill_durations(&vec![2.0; bits], &budget).unwrap();
        for k in 0..bits {
            if (expected[k] - solved[k]).abs() > 1e-8 {
                println!("  B={bits} bit {k}: solver {} vs formula {}", solved[k], expected[k]);
                ok = false;
            }
        }
        let spent: f64 = solved.iter().map(|t| 4.0 * t).sum();
        if (spent - e).abs() > 1e-8 {
            println!("  B={bits}: energy {spent} vs budget {e}");
            ok = false;
        }
    }
    assert!(verdict(2, "half-step durations match the closed form", ok));
}

#[test]
fn criterion_3_mse_reduction_ratio() {
    let mut ok = true;

    let report8 = optimize_word(8, &Budget::new(160.0).unwrap(), &dev(), &IwfConfig::default())
        .unwrap();
    let target8 = 0.0469 * (1.0 + 1e-4);
    if !(report8.converged && report8.reduction_ratio <= target8) {
        println!("  B=8: gamma {} vs target {target8}", report8.reduction_ratio);
        ok = false;
    }

    // No budget is pinned for the 16-bit case; 400 keeps every bit active
    // (the regime needs E > 2*16*15*ln 2 ~ 332.7).
    let report16 = optimize_word(16, &Budget::new(400.0).unwrap(), &dev(), &IwfConfig::default())
        .unwrap();
    if !(report16.converged && report16.reduction_ratio <= 3.7e-4) {
        println!("  B=16: gamma {} vs target 3.7e-4", report16.reduction_ratio);
        ok = false;
    }
    // Both land on the regime bound itself.
    ok &= report8.reduction_ratio <= reduction_ratio_bound(8) * (1.0 + 1e-9);
    ok &= report16.reduction_ratio <= reduction_ratio_bound(16) * (1.0 + 1e-9);

    assert!(verdict(3, "at least 21x MSE reduction at B=8, bound at B=16", ok));
}

#[test]
fn criterion_4_psnr_energy_saving() {
    // PSNR is exactly linear in the budget while every bit stays active,
    // so linear interpolation between sweep rows recovers the 40 dB
    // crossings without bias.
    let bits = 8usize;
    let cfg = IwfConfig::default();
    let step = 4.0;
    let energies: Vec<f64> = (0..34).map(|k| 120.0 + k as f64 * step).collect();
    let mut uniform_psnr = Vec::new();
    let mut opt_psnr = Vec::new();
    for &e in &energies {
        let report = optimize_word(bits, &Budget::new(e).unwrap(), &dev(), &cfg).unwrap();
        uniform_psnr.push(psnr(report.uniform_mse, bits));
        opt_psnr.push(psnr(report.final_mse, bits));
    }
    let crossing = |values: &[f64]| -> Option<f64> {
        for k in 0..values.len() - 1 {
            if values[k] < 40.0 && values[k + 1] >= 40.0 {
                let f = (40.0 - values[k]) / (values[k + 1] - values[k]);
                return Some(energies[k] + f * step);
            }
        }
        None
    };
    let ok = match (crossing(&uniform_psnr), crossing(&opt_psnr)) {
        (Some(e_uniform), Some(e_opt)) => {
            let saving = 1.0 - e_opt / e_uniform;
            let ok = (0.20..=0.30).contains(&saving);
            if !ok {
                println!("  40 dB at uniform {e_uniform}, optimized {e_opt}: saving {saving}");
            }
            ok
        }
        other => {
            println!("  sweep did not bracket 40 dB: {other:?}");
            false
        }
    };
    assert!(verdict(4, "energy saving at 40 dB PSNR within [20%, 30%]", ok));
}

#[test]
fn criterion_5_kkt_residuals_at_convergence() {
    // Matrix spans plain, cap-active, bit-inactive, and mixed regimes.
    let cases: &[(usize, f64, Option<f64>)] = &[
        (2, 8.0, None),
        (4, 30.0, None),
        (8, 160.0, None),
        (8, 160.0, Some(3.0)),
        (4, 5.0, None),
        (3, 10.0, Some(1.0)),
    ];
    let mut ok = true;
    for &(bits, e, cap) in cases {
        let mut budget = Budget::new(e).unwrap();
        if let Some(d) = cap {
            budget = budget.with_latency_cap(d).unwrap();
        }
        let report = optimize_word(bits, &budget, &dev(), &IwfConfig::default()).unwrap();
        let tag = format!("B={bits}, E={e}, cap={cap:?}");
        if !report.converged {
            println!("  {tag}: did not converge");
            ok = false;
            continue;
        }
        let schedule = &report.schedule;
        let currents = schedule.currents();
        let durations = schedule.durations();
        let duals = report.dual_trace.last().unwrap();

        let spent = energy(schedule);
        if (spent - e).abs() > 1e-8 * e {
            println!("  {tag}: energy residual {}", (spent - e).abs());
            ok = false;
        }
        if let Some(d) = cap {
            if latency(schedule) > d + 1e-12 {
                println!("  {tag}: latency {} above cap {d}", latency(schedule));
                ok = false;
            }
        }

        // Interior bits (positive duration, strictly under any cap) must
        // share the water level ln(nu') to 1e-8.
        let target_level = duals.nu_prime.ln();
        for (b, (&t, level)) in durations
            .iter()
            .zip(water_level_report(&currents, &durations))
            .enumerate()
        {
            let interior = t > 0.0 && cap.map_or(true, |d| t < d * (1.0 - 1e-9));
            if interior && (level.level - target_level).abs() > 1e-8 {
                println!(
                    "  {tag}: bit {b} water level {} vs ln nu' {target_level}",
                    level.level
                );
                ok = false;
            }
        }

        // Unclamped active bits must share the energy price mu to 1e-8.
        for entry in stationarity_report(&currents, &durations, budget.epsilon) {
            if !entry.clamped && (entry.marginal / duals.mu - 1.0).abs() > 1e-8 {
                println!(
                    "  {tag}: bit {} marginal {} vs mu {}",
                    entry.bit, entry.marginal, duals.mu
                );
                ok = false;
            }
        }
    }
    assert!(verdict(5, "KKT residuals below 1e-8 at convergence", ok));
}

// Instance distribution: budgets up to 16 units per bit (covering dry-bit
// regimes through comfortably long pulses) and per-bit starting currents in
// [1.002, 5). Far above that budget scale the alternation still descends
// monotonically but creeps toward its fixed point at O(sweeps) proportional
// to the mean pulse duration, so a 1000-sweep ceiling stops being an
// algorithmic statement and becomes a timeout. Measured worst case over
// 4000 draws at the top corner of this distribution: 804 sweeps.
#[test]
fn criterion_6_monotone_convergence_on_random_instances() {
    let mut rng = StdRng::seed_from_u64(0x2026_0814);
    let mut ok = true;
    let mut worst = 0usize;
    for trial in 0..100 {
        let bits = rng.gen_range(1..=8usize);
        let e = rng.gen_range(1.0..16.0 * bits as f64);
        let start: Vec<f64> = (0..bits).map(|_| rng.gen_range(1.002..5.0)).collect();
        let cfg = IwfConfig {
            start_currents: StartCurrents::PerBit(start.clone()),
            ..IwfConfig::default()
        };
        let report = match optimize_word(bits, &Budget::new(e).unwrap(), &dev(), &cfg) {
            Ok(r) => r,
            Err(err) => {
                println!("  trial {trial} (B={bits}, E={e:.3}, start {start:?}): {err}");
                ok = false;
                continue;
            }
        };
        if !report.converged || report.iterations > 1000 {
            println!("  trial {trial} (B={bits}, E={e:.3}): {} sweeps, converged={}",
                report.iterations, report.converged);
            ok = false;
        }
        worst = worst.max(report.iterations);
        for w in report.mse_trace.windows(2) {
            if w[1] > w[0] * (1.0 + 1e-12) {
                println!("  trial {trial} (B={bits}, E={e:.3}): trace rose {} -> {}", w[0], w[1]);
                ok = false;
            }
        }
    }
    println!("  worst sweep count over 100 trials: {worst}");
    assert!(verdict(6, "monotone convergence on 100 random instances", ok));
}

#[test]
fn criterion_7_oracle_equivalence() {
    let cases: &[(usize, [f64; 3], usize)] = &[
        (1, [4.0, 40.0, 160.0], 201),
        (2, [4.0, 8.0, 20.0], 41),
        (3, [6.0, 12.0, 30.0], 17),
    ];
    let mut ok = true;
    for &(bits, budgets, resolution) in cases {
        for e in budgets {
            let budget = Budget::new(e).unwrap();
            let grid = grid_search_word(bits, &budget, &dev(), resolution).unwrap();
            let report = optimize_word(bits, &budget, &dev(), &IwfConfig::default()).unwrap();
            let gap = (grid.mse - report.final_mse).abs() / report.final_mse;
            if gap > 0.01 {
                println!("  B={bits}, E={e}: grid {} vs optimizer {} (gap {gap})",
                    grid.mse, report.final_mse);
                ok = false;
            }
            if grid.mse < report.final_mse * (1.0 - 1e-9) {
                println!("  B={bits}, E={e}: optimizer lost to the grid");
                ok = false;
            }
        }
    }
    assert!(verdict(7, "grid search within 1% of the optimizer for B <= 3", ok));
}

#[test]
fn criterion_8_monte_carlo_consistency() {
    let report = optimize_word(8, &Budget::new(160.0).unwrap(), &dev(), &IwfConfig::default())
        .unwrap();
    let cfg = SimConfig::new(10_000_000, 0x2026_0814).unwrap();
    let stats = simulate_words(&report.schedule, &dev(), &cfg).unwrap();
    let gap = (stats.empirical_mse - stats.analytic_mse).abs();
    let within_band = gap <= 3.0 * stats.std_error;
    let within_five_percent = gap <= 0.05 * stats.analytic_mse;
    let ok = within_band && within_five_percent;
    if !ok {
        println!(
            "  empirical {} vs proxy analytic {}: gap {gap} ({} std errors, {:.1}% relative)",
            stats.empirical_mse,
            stats.analytic_mse,
            gap / stats.std_error,
            100.0 * gap / stats.analytic_mse
        );
        println!(
            "  expected: the exact law runs at ~(i-1)/i = 1/2 of the proxy at current 2, \
             so exact-sourced sampling cannot match the proxy prediction to 5%"
        );
    }
    assert!(verdict(8, "exact-law Monte Carlo within 3 sigma and 5% of proxy MSE", ok));
}

#[test]
fn criterion_9_byte_identical_reruns() {
    let bin = env!("CARGO_BIN_EXE_mramwf");
    let runs: &[&[&str]] = &[
        &["optimize", "--bits", "8", "--energy", "160"],
        &["sweep", "--bits", "4", "--energy-start", "20", "--energy-end", "60",
          "--energy-step", "8"],
        &["oracle", "--bits", "2", "--energy", "8", "--resolution", "21"],
    ];
    let mut ok = true;
    for args in runs {
        let a = Command::new(bin).args(*args).output().unwrap();
        let b = Command::new(bin).args(*args).output().unwrap();
        if !(a.status.success() && a.stdout == b.stdout) {
            println!("  {args:?} differed across reruns or failed");
            ok = false;
        }
    }
    // Simulation needs the schedule file round trip as well.
    let dir = std::env::temp_dir().join(format!("mramwf-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("determinism.json");
    let opt = Command::new(bin)
        .args(["optimize", "--bits", "8", "--energy", "160", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    ok &= opt.status.success();
    let sim_args = ["simulate", "--schedule", path.to_str().unwrap(),
        "--samples", "100000", "--seed", "9"];
    let a = Command::new(bin).args(sim_args).output().unwrap();
    let b = Command::new(bin).args(sim_args).output().unwrap();
    if !(a.status.success() && a.stdout == b.stdout) {
        println!("  simulate reruns differed");
        ok = false;
    }
    assert!(verdict(9, "identical seeds and flags give byte-identical output", ok));
}
