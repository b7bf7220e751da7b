//! Classical Monte Carlo ensemble dynamics: thermal-cloud sampling, a
//! fourth-order symplectic integrator over time-dependent dressed potentials,
//! Landau-Zener survival weights, time-of-flight readout, dipolar resonance
//! scans, and noise-driven holding/heating runs.
//!
//! Per-particle trajectories are independent; each particle draws from its own
//! counter-derived random stream, so results are identical for any worker
//! count.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::characterize::{
    hessian_frequencies, local_gradient_alpha, resonance_height, transverse_frequency,
    trap_minimum,
};
use crate::constants::PhysicalConstants;
use crate::dressed::{DressedPotentialEvaluator, RfDrive};
use crate::error::{Error, Result};
use crate::field::{IoffePritchardField, TrapPotentialEvaluator};
use crate::noise::FrequencyNoiseModel;
use crate::schedule::{RfSchedule, Segment};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// One classical test particle. Losses decay `weight`; particles are never
/// removed, so the ensemble size is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub weight: f64,
}

/// Ensemble of classical particles with adiabatic-survival weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudState {
    pub particles: Vec<Particle>,
    pub time: f64,
    pub master_seed: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Random stream for one particle, derived from the master seed so results do
/// not depend on how particles are partitioned over workers.
pub fn particle_stream(master_seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ splitmix64(index as u64 + 1)))
}

/// Sample a classical Boltzmann equilibrium of a 3D harmonic trap.
pub fn sample_thermal_cloud(
    omega: [f64; 3],
    center: &Vector3<f64>,
    temperature: f64,
    n: usize,
    seed: u64,
    constants: &PhysicalConstants,
) -> Result<CloudState> {
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be > 0, got {temperature} K"
        )));
    }
    if n < 1 {
        return Err(Error::Domain("ensemble needs n >= 1 particles".into()));
    }
    for w in omega {
        if !(w > 0.0) {
            return Err(Error::Domain("trap frequencies must be > 0".into()));
        }
    }
    let sigma_v = (constants.k_b * temperature / constants.m_atom).sqrt();
    let unit = Normal::new(0.0, 1.0).unwrap();
    let particles = (0..n)
        .map(|i| {
            let mut rng = particle_stream(seed, i);
            let mut position = *center;
            let mut velocity = Vector3::zeros();
            for axis in 0..3 {
                position[axis] += sigma_v / omega[axis] * unit.sample(&mut rng);
            }
            for axis in 0..3 {
                velocity[axis] = sigma_v * unit.sample(&mut rng);
            }
            Particle {
                position,
                velocity,
                weight: 1.0,
            }
        })
        .collect();
    Ok(CloudState {
        particles,
        time: 0.0,
        master_seed: seed,
    })
}

/// Two-level nonadiabatic probability for one shell crossing at normal
/// velocity `v_normal`: P_na = exp(-pi hbar Omega^2 / (2 alpha |v_normal|)).
pub fn landau_zener_p_na(
    v_normal: f64,
    alpha: f64,
    omega_rabi: f64,
    constants: &PhysicalConstants,
) -> f64 {
    if v_normal == 0.0 {
        return 0.0;
    }
    (-std::f64::consts::PI * constants.hbar * omega_rabi * omega_rabi
        / (2.0 * alpha * v_normal.abs()))
    .exp()
}

/// Survival probability of the stretched m_F = 2 state through one shell
/// passage: four adjacent avoided crossings treated as independent two-level
/// events, (1 - P_na)^4.
pub fn landau_zener_survival(
    v_normal: f64,
    alpha: f64,
    omega_rabi: f64,
    constants: &PhysicalConstants,
) -> f64 {
    let p = landau_zener_p_na(v_normal, alpha, omega_rabi, constants);
    (1.0 - p).powi(4)
}

/// Options for one ensemble integration.
#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Record a [`Snapshot`] every this many steps (and at both endpoints).
    pub snapshot_stride: Option<usize>,
}

/// Ensemble summary at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub center: Vector3<f64>,
    pub rms: Vector3<f64>,
    /// k_B T_i = m Var(v_i), K.
    pub temps: Vector3<f64>,
    /// k_B T_i = m <v_i^2>, K; includes center-of-mass motion, which is what
    /// noise and staircase kicks pump in a collisionless gas.
    pub kinetic_temps: Vector3<f64>,
    pub surviving_fraction: f64,
}

/// Counters from one integration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Resonance-shell crossings summed over particles.
    pub shell_crossings: u64,
    /// Particles that left the validity box (weight zeroed).
    pub escaped: u64,
}

/// Time-dependent dressed dynamics of one m_F level over an rf schedule.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleDynamics<'a> {
    pub trap: &'a TrapPotentialEvaluator,
    pub schedule: &'a RfSchedule,
    pub m_f: i32,
    pub include_gravity: bool,
}

// Omelyan/Forest-Ruth "position extended" coefficients, fourth order.
const PEFRL_XI: f64 = 0.178_617_895_844_809_1;
const PEFRL_LAMBDA: f64 = -0.212_341_831_062_605_4;
const PEFRL_CHI: f64 = -0.066_264_582_669_818_49;

impl<'a> EnsembleDynamics<'a> {
    pub fn new(
        trap: &'a TrapPotentialEvaluator,
        schedule: &'a RfSchedule,
        m_f: i32,
        include_gravity: bool,
    ) -> Self {
        Self {
            trap,
            schedule,
            m_f,
            include_gravity,
        }
    }

    fn v0(&self) -> f64 {
        self.trap.v0()
    }

    /// Acceleration at fixed drive values (hbar Delta, hbar Omega in J).
    #[inline]
    fn accel(&self, r: &Vector3<f64>, hbar_delta: f64, hbar_omega: f64) -> Vector3<f64> {
        let c = &self.trap.constants;
        let v_trap = self.trap.potential_unchecked(r);
        let a = v_trap - hbar_delta;
        let v_ad = (a * a + hbar_omega * hbar_omega).sqrt();
        let mut acc = if v_ad > 0.0 && self.m_f != 0 {
            self.trap.gradient(r) * (-(self.m_f as f64) * a / (v_ad * c.m_atom))
        } else {
            Vector3::zeros()
        };
        if self.include_gravity {
            acc.z -= c.g_grav;
        }
        acc
    }

    /// Largest instantaneous transverse frequency along the schedule, Hz.
    /// Used to validate the time step.
    pub fn max_transverse_frequency(&self) -> f64 {
        let c = &self.trap.constants;
        let v0 = self.v0();
        let (_, omega_radial) = self.trap.quic_frequencies(self.m_f.abs().max(1));
        let mut f_max: f64 = omega_radial / TWO_PI;
        let n = 256;
        let duration = self.schedule.duration();
        for k in 0..=n {
            let s = self.schedule.sample(duration * k as f64 / n as f64);
            let delta = s.omega_rf - v0 / c.hbar;
            if delta <= 0.0 || s.omega_rabi <= 0.0 {
                continue;
            }
            let Ok(z0) = resonance_height(self.trap, delta) else {
                continue;
            };
            let Ok(alpha) = local_gradient_alpha(self.trap, z0) else {
                continue;
            };
            if let Ok(w) = transverse_frequency(alpha, s.omega_rabi, c) {
                f_max = f_max.max(w / TWO_PI);
            }
        }
        f_max
    }

    /// Default time step 1/(100 f_trans,max).
    pub fn default_dt(&self) -> f64 {
        1.0 / (100.0 * self.max_transverse_frequency())
    }

    /// Advance the ensemble to `opts.t_end` with the PEFRL symplectic scheme.
    /// Schedule values are frozen at each step midpoint. Returns the final
    /// cloud, any requested snapshots, and loss diagnostics.
    pub fn integrate(
        &self,
        cloud: &CloudState,
        opts: &IntegrationOptions,
    ) -> Result<(CloudState, Vec<Snapshot>, Diagnostics)> {
        let span = opts.t_end - cloud.time;
        if !(span > 0.0) {
            return Err(Error::Domain(format!(
                "t_end = {} s is not after the cloud time {} s",
                opts.t_end, cloud.time
            )));
        }
        let dt_limit = 1.0 / (50.0 * self.max_transverse_frequency());
        if opts.dt > dt_limit {
            return Err(Error::StepSize {
                dt: opts.dt,
                limit: dt_limit,
            });
        }
        let n_steps = (span / opts.dt).round().max(1.0) as usize;
        let dt = span / n_steps as f64;

        let c = self.trap.constants;
        let v0 = self.v0();
        let hbar = c.hbar;
        let stride = opts.snapshot_stride.unwrap_or(usize::MAX);

        // Precompute the drive at each step midpoint and the phase-jump steps.
        let mid_drive: Vec<(f64, f64)> = (0..n_steps)
            .map(|k| {
                let t_mid = cloud.time + (k as f64 + 0.5) * dt;
                let s = self.schedule.sample(t_mid);
                (hbar * s.omega_rf - v0, hbar * s.omega_rabi)
            })
            .collect();
        let jump_factors: Vec<(usize, f64)> = self
            .schedule
            .phase_jumps
            .iter()
            .filter(|(t, _)| *t > cloud.time && *t <= cloud.time + span)
            .map(|(t, jump)| {
                let k = (((t - cloud.time) / dt).ceil() as usize).clamp(1, n_steps) - 1;
                (k, (0.5 * jump).cos().powi(2))
            })
            .collect();

        struct Track {
            particle: Particle,
            samples: Vec<Particle>,
            crossings: u64,
            escaped: bool,
        }

        let tracks: Vec<Track> = cloud
            .particles
            .par_iter()
            .map(|&p0| {
                let mut p = p0;
                let mut samples = Vec::new();
                if stride != usize::MAX {
                    samples.push(p);
                }
                let mut crossings = 0u64;
                let mut escaped = false;
                let mut sign_prev = {
                    let (hd, _) = mid_drive[0];
                    (self.trap.potential_unchecked(&p.position) - hd) >= 0.0
                };
                for k in 0..n_steps {
                    let (hd, ho) = mid_drive[k];
                    if p.weight > 0.0 && !escaped {
                        let h = dt;
                        let r = &mut p.position;
                        let v = &mut p.velocity;
                        *r += *v * (PEFRL_XI * h);
                        *v += self.accel(r, hd, ho) * ((1.0 - 2.0 * PEFRL_LAMBDA) * 0.5 * h);
                        *r += *v * (PEFRL_CHI * h);
                        *v += self.accel(r, hd, ho) * (PEFRL_LAMBDA * h);
                        *r += *v * ((1.0 - 2.0 * (PEFRL_CHI + PEFRL_XI)) * h);
                        *v += self.accel(r, hd, ho) * (PEFRL_LAMBDA * h);
                        *r += *v * (PEFRL_CHI * h);
                        *v += self.accel(r, hd, ho) * ((1.0 - 2.0 * PEFRL_LAMBDA) * 0.5 * h);
                        *r += *v * (PEFRL_XI * h);

                        if !IoffePritchardField::in_box(&p.position) {
                            p.weight = 0.0;
                            escaped = true;
                        } else {
                            let sign_now =
                                (self.trap.potential_unchecked(&p.position) - hd) >= 0.0;
                            if sign_now != sign_prev {
                                crossings += 1;
                                let grad = self.trap.gradient(&p.position);
                                let alpha = grad.norm();
                                if alpha > 0.0 {
                                    let v_normal = p.velocity.dot(&grad) / alpha;
                                    p.weight *= landau_zener_survival(
                                        v_normal,
                                        alpha,
                                        ho / hbar,
                                        &c,
                                    );
                                }
                            }
                            sign_prev = sign_now;
                        }
                    }
                    for &(jk, factor) in &jump_factors {
                        if jk == k {
                            p.weight *= factor;
                        }
                    }
                    if stride != usize::MAX && ((k + 1) % stride == 0 || k + 1 == n_steps) {
                        samples.push(p);
                    }
                }
                Track {
                    particle: p,
                    samples,
                    crossings,
                    escaped,
                }
            })
            .collect();

        let final_cloud = CloudState {
            particles: tracks.iter().map(|t| t.particle).collect(),
            time: cloud.time + span,
            master_seed: cloud.master_seed,
        };
        let diagnostics = Diagnostics {
            shell_crossings: tracks.iter().map(|t| t.crossings).sum(),
            escaped: tracks.iter().filter(|t| t.escaped).count() as u64,
        };

        let mut snapshots = Vec::new();
        if stride != usize::MAX {
            let n_samples = tracks[0].samples.len();
            let mut sample_steps: Vec<usize> = vec![0];
            let mut k = stride;
            while k < n_steps {
                sample_steps.push(k);
                k += stride;
            }
            sample_steps.push(n_steps);
            debug_assert_eq!(sample_steps.len(), n_samples);
            for (si, &step) in sample_steps.iter().enumerate() {
                let particles: Vec<Particle> = tracks.iter().map(|t| t.samples[si]).collect();
                let snap_cloud = CloudState {
                    particles,
                    time: cloud.time + step as f64 * dt,
                    master_seed: cloud.master_seed,
                };
                if let Ok(report) = cloud_statistics(&snap_cloud) {
                    snapshots.push(report.into_snapshot(snap_cloud.time));
                }
            }
        }
        Ok((final_cloud, snapshots, diagnostics))
    }

    /// Total energy of one particle at the schedule values of time `t`.
    pub fn total_energy(&self, p: &Particle, t: f64) -> f64 {
        let c = &self.trap.constants;
        let s = self.schedule.sample(t);
        let drive = RfDrive {
            omega_rf: s.omega_rf,
            omega_rabi: s.omega_rabi,
            phase: 0.0,
        };
        let dressed = DressedPotentialEvaluator {
            trap: *self.trap,
            drive,
            m_f: self.m_f,
            include_gravity: self.include_gravity,
        };
        0.5 * c.m_atom * p.velocity.norm_squared()
            + dressed.total_potential_unchecked(&p.position)
    }
}

/// Ballistic expansion: r -> r + v t - g t^2/2 z_hat, v_z -> v_z - g t.
pub fn time_of_flight(
    cloud: &CloudState,
    t_tof: f64,
    constants: &PhysicalConstants,
) -> Result<CloudState> {
    if t_tof < 0.0 {
        return Err(Error::Domain(format!(
            "time of flight must be >= 0, got {t_tof} s"
        )));
    }
    let g = constants.g_grav;
    let particles = cloud
        .particles
        .iter()
        .map(|p| {
            let mut q = *p;
            q.position += p.velocity * t_tof;
            q.position.z -= 0.5 * g * t_tof * t_tof;
            q.velocity.z -= g * t_tof;
            q
        })
        .collect();
    Ok(CloudState {
        particles,
        time: cloud.time + t_tof,
        master_seed: cloud.master_seed,
    })
}

/// Weighted ensemble statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudReport {
    pub center: Vector3<f64>,
    pub rms: Vector3<f64>,
    /// k_B T_i = m Var(v_i), reported in K.
    pub temps: Vector3<f64>,
    /// k_B T_i = m <v_i^2> about zero, in K (includes center-of-mass motion).
    pub kinetic_temps: Vector3<f64>,
    pub surviving_fraction: f64,
    pub mass: f64,
    pub k_b: f64,
}

impl CloudReport {
    fn into_snapshot(self, t: f64) -> Snapshot {
        Snapshot {
            t,
            center: self.center,
            rms: self.rms,
            temps: self.temps,
            kinetic_temps: self.kinetic_temps,
            surviving_fraction: self.surviving_fraction,
        }
    }
}

/// Weight-averaged center, rms sizes, per-axis temperatures, and surviving
/// fraction. Sums run in particle-index order, so results do not depend on
/// the worker count.
pub fn cloud_statistics(cloud: &CloudState) -> Result<CloudReport> {
    // The constants only enter through m/k_B; use the 87Rb set.
    cloud_statistics_with(cloud, &PhysicalConstants::rb87())
}

pub fn cloud_statistics_with(
    cloud: &CloudState,
    constants: &PhysicalConstants,
) -> Result<CloudReport> {
    let w_total: f64 = cloud.particles.iter().map(|p| p.weight).sum();
    if !(w_total > 0.0) {
        return Err(Error::EmptyCloud);
    }
    let n_total = cloud.particles.len() as f64;
    let mut center = Vector3::zeros();
    let mut v_mean = Vector3::zeros();
    for p in &cloud.particles {
        center += p.position * p.weight;
        v_mean += p.velocity * p.weight;
    }
    center /= w_total;
    v_mean /= w_total;
    let mut r_var = Vector3::zeros();
    let mut v_var = Vector3::zeros();
    let mut v_sq = Vector3::zeros();
    for p in &cloud.particles {
        for i in 0..3 {
            r_var[i] += p.weight * (p.position[i] - center[i]).powi(2);
            v_var[i] += p.weight * (p.velocity[i] - v_mean[i]).powi(2);
            v_sq[i] += p.weight * p.velocity[i].powi(2);
        }
    }
    r_var /= w_total;
    v_var /= w_total;
    v_sq /= w_total;
    let scale = constants.m_atom / constants.k_b;
    Ok(CloudReport {
        center,
        rms: r_var.map(f64::sqrt),
        temps: v_var * scale,
        kinetic_temps: v_sq * scale,
        surviving_fraction: w_total / n_total,
        mass: constants.m_atom,
        k_b: constants.k_b,
    })
}

/// Result of a dipolar resonance scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceScan {
    /// (drive frequency Hz, vertical rms size after TOF m).
    pub points: Vec<(f64, f64)>,
    /// Quadratic-fit peak center, Hz.
    pub peak_hz: f64,
}

/// Excite the vertical dipole mode by modulating the detuning at each listed
/// frequency, hold for `t_excite`, release for `t_tof`, and record the
/// vertical rms size.
#[allow(clippy::too_many_arguments)]
pub fn dipole_resonance_scan(
    trap: &TrapPotentialEvaluator,
    delta0: f64,
    omega_rabi: f64,
    mod_depth: f64,
    drive_freqs: &[f64],
    t_excite: f64,
    t_tof: f64,
    cloud: &CloudState,
) -> Result<ResonanceScan> {
    if drive_freqs.is_empty() {
        return Err(Error::Domain("resonance scan needs drive frequencies".into()));
    }
    if mod_depth.abs() >= delta0 {
        return Err(Error::Domain(
            "modulation depth must stay small compared to the detuning".into(),
        ));
    }
    let c = &trap.constants;
    let omega_center = trap.v0() / c.hbar + delta0;
    let mut points = Vec::with_capacity(drive_freqs.len());
    for &f in drive_freqs {
        let schedule = RfSchedule::from_segments(vec![Segment::SineModulated {
            duration: t_excite,
            omega_center,
            mod_depth,
            drive_freq: f,
            omega_rabi,
        }])?;
        let dynamics = EnsembleDynamics::new(trap, &schedule, 2, true);
        let opts = IntegrationOptions {
            dt: dynamics.default_dt(),
            t_end: t_excite,
            snapshot_stride: None,
        };
        let (excited, _, _) = dynamics.integrate(cloud, &opts)?;
        let released = time_of_flight(&excited, t_tof, c)?;
        let report = cloud_statistics_with(&released, c)?;
        points.push((f, report.rms.z));
    }
    Ok(ResonanceScan {
        peak_hz: fit_peak(&points),
        points,
    })
}

/// Vertex of the quadratic through the maximum point and its neighbors.
fn fit_peak(points: &[(f64, f64)]) -> f64 {
    let i_max = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    if i_max == 0 || i_max + 1 == points.len() {
        return points[i_max].0;
    }
    let (x0, y0) = points[i_max - 1];
    let (x1, y1) = points[i_max];
    let (x2, y2) = points[i_max + 1];
    // Lagrange quadratic vertex for possibly nonuniform spacing.
    let d0 = y0 / ((x0 - x1) * (x0 - x2));
    let d1 = y1 / ((x1 - x0) * (x1 - x2));
    let d2 = y2 / ((x2 - x0) * (x2 - x1));
    let a = d0 + d1 + d2;
    let b = -(d0 * (x1 + x2) + d1 * (x0 + x2) + d2 * (x0 + x1));
    if a >= 0.0 {
        return x1;
    }
    -b / (2.0 * a)
}

/// Least-squares line through (x, y); returns (slope, intercept).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Equilibrium cloud in the harmonic approximation of the static shell trap,
/// used as the pre-relaxed initial condition of holding runs.
pub fn sample_shell_equilibrium(
    trap: &TrapPotentialEvaluator,
    delta: f64,
    omega_rabi: f64,
    temperature: f64,
    n: usize,
    seed: u64,
) -> Result<CloudState> {
    let c = &trap.constants;
    let drive = RfDrive::from_detuning(delta, omega_rabi, trap.v0(), c)?;
    let dressed = DressedPotentialEvaluator::new(*trap, drive, 2, true)?;
    let r_min = trap_minimum(&dressed)?;
    let freqs = hessian_frequencies(&dressed, &r_min)?;
    // Hessian frequencies come back ascending (x softest for the cigar);
    // map them onto axes by magnitude: x, y, z.
    sample_thermal_cloud(
        [freqs[0], freqs[1], freqs[2]],
        &r_min,
        temperature,
        n,
        seed,
        c,
    )
}

/// Temperature evolution during a noisy hold.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatingTrace {
    pub snapshots: Vec<Snapshot>,
    /// Linear-fit growth rates of m <v_i^2> per axis, J/s.
    pub energy_rates: Vector3<f64>,
}

/// Hold a pre-relaxed cloud at constant drive with rf frequency noise and
/// fit the per-axis energy growth. The vertical axis couples to the noise
/// through the shell position; the horizontal axes do not.
#[allow(clippy::too_many_arguments)]
pub fn simulate_holding_heating(
    cloud: &CloudState,
    trap: &TrapPotentialEvaluator,
    delta: f64,
    omega_rabi: f64,
    noise: &FrequencyNoiseModel,
    t_hold: f64,
    snapshot_stride: usize,
) -> Result<HeatingTrace> {
    let c = &trap.constants;
    let base = RfSchedule::constant(t_hold, trap.v0() / c.hbar + delta, omega_rabi)?;
    let probe = EnsembleDynamics::new(trap, &base, 2, true);
    let dt = probe.default_dt();
    let schedule = base.with_noise(noise, dt);
    let dynamics = EnsembleDynamics::new(trap, &schedule, 2, true);
    let opts = IntegrationOptions {
        dt,
        t_end: cloud.time + t_hold,
        snapshot_stride: Some(snapshot_stride),
    };
    let (_, snapshots, _) = dynamics.integrate(cloud, &opts)?;
    let times: Vec<f64> = snapshots.iter().map(|s| s.t).collect();
    let mut energy_rates = Vector3::zeros();
    for axis in 0..3 {
        let energies: Vec<f64> = snapshots
            .iter()
            .map(|s| s.kinetic_temps[axis] * c.k_b)
            .collect();
        energy_rates[axis] = linear_fit(&times, &energies).0;
    }
    Ok(HeatingTrace {
        snapshots,
        energy_rates,
    })
}
