//! Subcommand dispatch: turns a validated [`RunConfig`] into artifacts on
//! disk. All randomness flows from the single config seed, so reruns with the
//! same config are bit-identical.

use std::path::{Path, PathBuf};

use crate::characterize::{characterize, local_gradient_alpha, resonance_height, transverse_frequency};
use crate::condensate::{dimensionality_report, GasSpec};
use crate::config::RunConfig;
use crate::constants::PhysicalConstants;
use crate::dynamics::{
    dipole_resonance_scan, sample_shell_equilibrium, sample_thermal_cloud,
    simulate_holding_heating, EnsembleDynamics, IntegrationOptions, Snapshot,
};
use crate::error::{ConfigError, Error, Result};
use crate::noise::{heating_rate_from_position_noise, position_sensitivity};
use crate::output::{fmt, write_csv, write_json, Metadata};
use crate::schedule::RfSchedule;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Characterize,
    Sweep,
    Load,
    Resonance,
    Noise,
    Estimate,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Characterize => "characterize",
            Subcommand::Sweep => "sweep",
            Subcommand::Load => "load",
            Subcommand::Resonance => "resonance",
            Subcommand::Noise => "noise",
            Subcommand::Estimate => "estimate",
        }
    }
}

/// Run one subcommand, writing its artifact into `out_dir`. Returns the path
/// of the written file.
pub fn run(cfg: &RunConfig, sub: Subcommand, out_dir: &Path) -> Result<PathBuf> {
    let c = PhysicalConstants::rb87();
    c.validate()?;
    match sub {
        Subcommand::Characterize | Subcommand::Sweep => run_characterize(cfg, sub, out_dir, &c),
        Subcommand::Load => run_load(cfg, out_dir, &c),
        Subcommand::Resonance => run_resonance(cfg, out_dir, &c),
        Subcommand::Noise => run_noise(cfg, out_dir, &c),
        Subcommand::Estimate => run_estimate(cfg, out_dir, &c),
    }
}

/// The (delta, omega_rabi) grid of a characterize/sweep run, rad/s.
fn drive_grid(cfg: &RunConfig, v0: f64, c: &PhysicalConstants) -> Result<Vec<(f64, f64)>> {
    match cfg.sweep.parameter.as_deref() {
        None => Ok(vec![(cfg.rf.delta(v0, c)?, cfg.rf.omega_rabi(c)?)]),
        Some("delta_mhz") => {
            let omega = cfg.rf.omega_rabi(c)?;
            Ok(cfg
                .sweep
                .values
                .iter()
                .map(|&d| (TWO_PI * d * 1e6, omega))
                .collect())
        }
        Some("rabi_khz") => {
            let delta = cfg.rf.delta(v0, c)?;
            Ok(cfg
                .sweep
                .values
                .iter()
                .map(|&r| (delta, TWO_PI * r * 1e3))
                .collect())
        }
        Some(other) => Err(Error::Config(vec![ConfigError::new(
            None,
            format!("unsupported sweep parameter \"{other}\""),
        )])),
    }
}

fn emit_table(
    cfg: &RunConfig,
    out_dir: &Path,
    meta: Metadata,
    columns: &[&str],
    rows: Vec<Vec<String>>,
) -> Result<PathBuf> {
    let name = meta.subcommand.clone();
    if cfg.output.format == "json" {
        let path = out_dir.join(format!("{name}.json"));
        let data: Vec<serde_json::Value> = rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| {
                        let value = v
                            .parse::<f64>()
                            .map(serde_json::Value::from)
                            .unwrap_or_else(|_| serde_json::Value::String(v.clone()));
                        (k.to_string(), value)
                    })
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        write_json(&path, &meta, serde_json::json!({ "rows": data }))?;
        Ok(path)
    } else {
        let path = out_dir.join(format!("{name}.csv"));
        write_csv(&path, &meta, columns, &rows)?;
        Ok(path)
    }
}

fn run_characterize(
    cfg: &RunConfig,
    sub: Subcommand,
    out_dir: &Path,
    c: &PhysicalConstants,
) -> Result<PathBuf> {
    let trap = cfg.field.build_trap(c)?;
    let grid = drive_grid(cfg, trap.v0(), c)?;
    let columns = [
        "delta_mhz",
        "rabi_khz",
        "z0_um",
        "alpha_si",
        "f_trans_hz",
        "f1_hz",
        "f2_hz",
        "f_hess_1_hz",
        "f_hess_2_hz",
        "f_hess_3_hz",
        "sag_um",
        "gap_uk",
    ];
    let mut rows = Vec::with_capacity(grid.len());
    for (delta, omega) in grid {
        let ch = characterize(&trap, delta, omega)?;
        rows.push(vec![
            fmt(delta / TWO_PI / 1e6),
            fmt(omega / TWO_PI / 1e3),
            fmt(ch.z0 * 1e6),
            fmt(ch.alpha),
            fmt(ch.omega_trans / TWO_PI),
            fmt(ch.omega_1 / TWO_PI),
            fmt(ch.omega_2 / TWO_PI),
            fmt(ch.hessian_freqs[0] / TWO_PI),
            fmt(ch.hessian_freqs[1] / TWO_PI),
            fmt(ch.hessian_freqs[2] / TWO_PI),
            fmt(ch.sag * 1e6),
            fmt(ch.shell_gap / c.k_b * 1e6),
        ]);
    }
    let meta = Metadata::new(sub.name(), cfg.ensemble.seed).with("rows", rows.len());
    emit_table(cfg, out_dir, meta, &columns, rows)
}

const SNAPSHOT_COLUMNS: [&str; 14] = [
    "t_ms",
    "survival",
    "x_um",
    "y_um",
    "z_um",
    "sx_um",
    "sy_um",
    "sz_um",
    "tx_uk",
    "ty_uk",
    "tz_uk",
    "kx_uk",
    "ky_uk",
    "kz_uk",
];

fn snapshot_rows(snapshots: &[Snapshot]) -> Vec<Vec<String>> {
    snapshots
        .iter()
        .map(|s| {
            vec![
                fmt(s.t * 1e3),
                fmt(s.surviving_fraction),
                fmt(s.center.x * 1e6),
                fmt(s.center.y * 1e6),
                fmt(s.center.z * 1e6),
                fmt(s.rms.x * 1e6),
                fmt(s.rms.y * 1e6),
                fmt(s.rms.z * 1e6),
                fmt(s.temps.x * 1e6),
                fmt(s.temps.y * 1e6),
                fmt(s.temps.z * 1e6),
                fmt(s.kinetic_temps.x * 1e6),
                fmt(s.kinetic_temps.y * 1e6),
                fmt(s.kinetic_temps.z * 1e6),
            ]
        })
        .collect()
}

fn run_load(cfg: &RunConfig, out_dir: &Path, c: &PhysicalConstants) -> Result<PathBuf> {
    let trap = cfg.field.build_trap(c)?;
    let delta = cfg.rf.delta(trap.v0(), c)?;
    let omega = cfg.rf.omega_rabi(c)?;
    let (omega_x, omega_radial) = trap.quic_frequencies(2);
    let cloud = sample_thermal_cloud(
        [omega_x, omega_radial, omega_radial],
        &nalgebra::Vector3::zeros(),
        cfg.ensemble.temperature_uk * 1e-6,
        cfg.ensemble.n_particles,
        cfg.ensemble.seed,
        c,
    )?;
    let steps = if cfg.schedule.kind == "staircase" {
        cfg.schedule.staircase_steps
    } else {
        None
    };
    let loading = RfSchedule::loading_with_ramp(
        delta,
        omega,
        trap.v0(),
        c,
        cfg.schedule.ramp_ms * 1e-3,
        steps,
    )?;
    let hold = cfg.schedule.hold_ms * 1e-3;
    let mut schedule = match (cfg.schedule.phase_jump_rad, cfg.schedule.jump_time_ms) {
        (Some(jump), Some(t_ms)) => {
            let t_jump = t_ms * 1e-3;
            let full = loading.then_hold(hold);
            let t_switch = full.duration() - (hold - t_jump);
            let end = full.sample(full.duration());
            let tail = RfSchedule::constant(hold - t_jump, end.omega_rf, end.omega_rabi)?;
            full.with_phase_jump(&tail, t_switch, jump)?
        }
        (Some(_), None) | (None, Some(_)) => {
            return Err(Error::Config(vec![ConfigError::new(
                None,
                "phase_jump_rad and jump_time_ms must be given together",
            )]));
        }
        (None, None) => loading.then_hold(hold),
    };
    let probe = EnsembleDynamics::new(&trap, &schedule, 2, true);
    let dt = probe.default_dt();
    if let Some(model) = cfg.noise.build(cfg.ensemble.seed)? {
        schedule = schedule.with_noise(&model, dt);
    }
    let dynamics = EnsembleDynamics::new(&trap, &schedule, 2, true);
    let opts = IntegrationOptions {
        dt,
        t_end: schedule.duration(),
        snapshot_stride: Some(cfg.output.snapshot_stride),
    };
    let (_, snapshots, diagnostics) = dynamics.integrate(&cloud, &opts)?;
    let meta = Metadata::new("load", cfg.ensemble.seed)
        .with("schedule_kind", &cfg.schedule.kind)
        .with("duration_ms", fmt(schedule.duration() * 1e3))
        .with("shell_crossings", diagnostics.shell_crossings)
        .with("escaped", diagnostics.escaped);
    emit_table(cfg, out_dir, meta, &SNAPSHOT_COLUMNS, snapshot_rows(&snapshots))
}

fn run_resonance(cfg: &RunConfig, out_dir: &Path, c: &PhysicalConstants) -> Result<PathBuf> {
    let trap = cfg.field.build_trap(c)?;
    let delta = cfg.rf.delta(trap.v0(), c)?;
    let omega = cfg.rf.omega_rabi(c)?;
    let z0 = resonance_height(&trap, delta)?;
    let alpha = local_gradient_alpha(&trap, z0)?;
    let f_pred = transverse_frequency(alpha, omega, c)? / TWO_PI;
    let f_start = cfg.resonance.f_start_hz.unwrap_or(0.7 * f_pred);
    let f_stop = cfg.resonance.f_stop_hz.unwrap_or(1.3 * f_pred);
    let n = cfg.resonance.n_points;
    let freqs: Vec<f64> = (0..n)
        .map(|i| f_start + (f_stop - f_start) * i as f64 / (n - 1) as f64)
        .collect();
    let cloud = sample_shell_equilibrium(
        &trap,
        delta,
        omega,
        cfg.ensemble.temperature_uk * 1e-6,
        cfg.ensemble.n_particles,
        cfg.ensemble.seed,
    )?;
    let scan = dipole_resonance_scan(
        &trap,
        delta,
        omega,
        TWO_PI * cfg.resonance.mod_depth_khz * 1e3,
        &freqs,
        cfg.resonance.excite_ms * 1e-3,
        cfg.resonance.tof_ms * 1e-3,
        &cloud,
    )?;
    let rows: Vec<Vec<String>> = scan
        .points
        .iter()
        .map(|(f, rms)| vec![fmt(*f), fmt(rms * 1e6)])
        .collect();
    let meta = Metadata::new("resonance", cfg.ensemble.seed)
        .with("peak_hz", fmt(scan.peak_hz))
        .with("predicted_f_trans_hz", fmt(f_pred));
    emit_table(cfg, out_dir, meta, &["drive_hz", "rms_z_um"], rows)
}

fn run_noise(cfg: &RunConfig, out_dir: &Path, c: &PhysicalConstants) -> Result<PathBuf> {
    let trap = cfg.field.build_trap(c)?;
    let delta = cfg.rf.delta(trap.v0(), c)?;
    let omega = cfg.rf.omega_rabi(c)?;
    let Some(model) = cfg.noise.build(cfg.ensemble.seed)? else {
        return Err(Error::Config(vec![ConfigError::new(
            None,
            "the noise subcommand needs noise_kind != \"none\"",
        )]));
    };
    let cloud = sample_shell_equilibrium(
        &trap,
        delta,
        omega,
        cfg.ensemble.temperature_uk * 1e-6,
        cfg.ensemble.n_particles,
        cfg.ensemble.seed,
    )?;
    let trace = simulate_holding_heating(
        &cloud,
        &trap,
        delta,
        omega,
        &model,
        cfg.schedule.hold_ms * 1e-3,
        cfg.output.snapshot_stride,
    )?;
    // Analytic expectation for the vertical axis: frequency noise shakes the
    // shell bottom by dz0/df, pumping the transverse mode.
    let z0 = resonance_height(&trap, delta)?;
    let alpha = local_gradient_alpha(&trap, z0)?;
    let w_trans = transverse_frequency(alpha, omega, c)?;
    let schedule = RfSchedule::constant(1.0, trap.v0() / c.hbar + delta, omega)?;
    let dt = EnsembleDynamics::new(&trap, &schedule, 2, true).default_dt();
    let s_f = model.psd_at(w_trans / TWO_PI, dt);
    let s_z = s_f * position_sensitivity(alpha, c)?.powi(2);
    let predicted = heating_rate_from_position_noise(s_z, w_trans, c)?;
    let meta = Metadata::new("noise", cfg.ensemble.seed)
        .with("noise_kind", &cfg.noise.noise_kind)
        .with("rate_x_uk_per_s", fmt(trace.energy_rates.x / c.k_b * 1e6))
        .with("rate_y_uk_per_s", fmt(trace.energy_rates.y / c.k_b * 1e6))
        .with("rate_z_uk_per_s", fmt(trace.energy_rates.z / c.k_b * 1e6))
        .with("predicted_rate_z_uk_per_s", fmt(predicted / c.k_b * 1e6))
        .with("f_trans_hz", fmt(w_trans / TWO_PI));
    emit_table(
        cfg,
        out_dir,
        meta,
        &SNAPSHOT_COLUMNS,
        snapshot_rows(&trace.snapshots),
    )
}

fn run_estimate(cfg: &RunConfig, out_dir: &Path, c: &PhysicalConstants) -> Result<PathBuf> {
    let e = &cfg.estimate;
    let spec = GasSpec::new(
        e.n_atoms,
        [TWO_PI * e.f1_hz, TWO_PI * e.f2_hz, TWO_PI * e.f3_hz],
        e.temperature_nk.map(|t| t * 1e-9),
        *c,
    )?;
    let omega_trans = TWO_PI * e.f1_hz.max(e.f2_hz).max(e.f3_hz);
    let report = dimensionality_report(&spec, omega_trans)?;
    let row = vec![
        fmt(e.n_atoms),
        fmt(e.f1_hz),
        fmt(e.f2_hz),
        fmt(e.f3_hz),
        fmt(report.mu / c.h),
        fmt(report.t_c * 1e9),
        fmt(report.hbar_omega_trans / c.k_b * 1e9),
        (report.thermal_2d as u8).to_string(),
        (report.bec_2d as u8).to_string(),
    ];
    let meta = Metadata::new("estimate", cfg.ensemble.seed);
    emit_table(
        cfg,
        out_dir,
        meta,
        &[
            "n_atoms",
            "f1_hz",
            "f2_hz",
            "f3_hz",
            "mu_hz",
            "tc_nk",
            "hbar_wtrans_nk",
            "thermal_2d",
            "bec_2d",
        ],
        vec![row],
    )
}
