//! Shell-trap characterization: resonance height z0, local gradient alpha,
//! the analytic oscillation frequencies of the dressed trap, and their
//! numerical cross-check through a finite-difference Hessian.

use nalgebra::{Matrix3, Vector3};

use crate::constants::PhysicalConstants;
use crate::dressed::DressedPotentialEvaluator;
use crate::error::{Error, Result};
use crate::field::{TrapPotentialEvaluator, BOX_RHO, BOX_X};

/// Characterization bundle for one (field, Delta, Omega).
#[derive(Debug, Clone, PartialEq)]
pub struct TrapCharacterization {
    /// Height of the occupied shell bottom, m (negative).
    pub z0: f64,
    /// |dV_trap/dz| at z0, per unit m_F, J/m.
    pub alpha: f64,
    /// Transverse frequency from alpha and Omega, rad/s.
    pub omega_trans: f64,
    /// Pendulum frequency along x, rad/s.
    pub omega_1: f64,
    /// Pendulum frequency along y, rad/s.
    pub omega_2: f64,
    /// Numerical Hessian eigenfrequencies, ascending, rad/s.
    pub hessian_freqs: [f64; 3],
    /// Gravitational sag of the minimum below the resonance shell, m (positive).
    pub sag: f64,
    /// Energy gap between upper and lower shell stationary points, J.
    pub shell_gap: f64,
    /// Location of the total-potential minimum, m. The axial curvature makes
    /// the iso-|B| shell egg-shaped, so the minimum sits off-axis in x.
    pub r_min: Vector3<f64>,
}

/// Root z0 < 0 of V_trap(0, 0, z) = hbar Delta, to better than 1 nm.
pub fn resonance_height(trap: &TrapPotentialEvaluator, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::NoShell(delta));
    }
    let target = trap.constants.hbar * delta;
    let v = |z: f64| trap.potential_unchecked(&Vector3::new(0.0, 0.0, z)) - target;
    let z_edge = -BOX_RHO * 0.999;
    if v(z_edge) < 0.0 {
        return Err(Error::Domain(format!(
            "resonance shell for Delta/2pi = {:.3} MHz lies outside the validity box",
            delta / (2.0 * std::f64::consts::PI) / 1e6
        )));
    }
    // V_trap(0,0,z) increases monotonically with |z|; bisect on [z_edge, 0].
    let mut lo = z_edge; // v(lo) >= 0
    let mut hi = 0.0; // v(hi) < 0
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if v(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Central-difference |dV_trap/dz| at (0, 0, z0), step 100 nm.
pub fn local_gradient_alpha(trap: &TrapPotentialEvaluator, z0: f64) -> Result<f64> {
    const STEP: f64 = 1e-7;
    if z0.abs() + 3.0 * STEP > BOX_RHO {
        return Err(Error::Domain(format!(
            "z0 = {z0:.3e} m is within 3 steps of the validity box edge"
        )));
    }
    let v = |z: f64| trap.potential_unchecked(&Vector3::new(0.0, 0.0, z));
    Ok(((v(z0 + STEP) - v(z0 - STEP)) / (2.0 * STEP)).abs())
}

/// omega_trans = |alpha| sqrt(2 / (m hbar Omega)).
pub fn transverse_frequency(
    alpha: f64,
    omega_rabi: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if !(omega_rabi > 0.0) {
        return Err(Error::Domain(format!(
            "transverse frequency needs Omega > 0, got {omega_rabi} rad/s"
        )));
    }
    if alpha < 0.0 {
        return Err(Error::Domain(format!("alpha must be >= 0, got {alpha}")));
    }
    Ok(alpha * (2.0 / (constants.m_atom * constants.hbar * omega_rabi)).sqrt())
}

/// Pendulum frequencies of the shell bottom:
/// omega_2 = sqrt(g / |z0|) along y, omega_1 = omega_2 * omega_x / omega_z along x.
pub fn pendulum_frequencies(
    z0: f64,
    omega_x: f64,
    omega_z: f64,
    constants: &PhysicalConstants,
) -> Result<(f64, f64)> {
    if z0 == 0.0 {
        return Err(Error::SingularPendulum);
    }
    if z0 > 0.0 {
        return Err(Error::Domain(format!("z0 must be < 0, got {z0} m")));
    }
    if !(omega_z > 0.0) {
        return Err(Error::Domain("omega_z must be > 0".into()));
    }
    let omega_2 = (constants.g_grav / z0.abs()).sqrt();
    Ok((omega_2 * omega_x / omega_z, omega_2))
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Locate a local minimum of `f` on [lo, hi] by coarse scan plus golden
/// section. Returns the scanned profile on failure.
fn line_minimum(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n_scan: usize,
    tol: f64,
) -> Result<f64> {
    let step = (hi - lo) / n_scan as f64;
    let mut best = (lo, f(lo));
    let mut profile = Vec::with_capacity(n_scan + 1);
    for i in 0..=n_scan {
        let z = lo + step * i as f64;
        let v = f(z);
        profile.push((z, v));
        if v < best.1 {
            best = (z, v);
        }
    }
    let i_best = ((best.0 - lo) / step).round() as usize;
    if i_best == 0 || i_best == n_scan {
        return Err(Error::Characterization {
            message: "failed to bracket a potential minimum".into(),
            profile,
        });
    }
    Ok(golden_section_min(f, best.0 - step, best.0 + step, tol))
}

/// Global minimum of the total potential, located on the x = y = 0 line and
/// polished by per-axis line minimization.
pub fn trap_minimum(dressed: &DressedPotentialEvaluator) -> Result<Vector3<f64>> {
    if dressed.m_f != 2 {
        return Err(Error::Domain(format!(
            "trap_minimum expects the trapped stretched state m_F = 2, got {}",
            dressed.m_f
        )));
    }
    if !(dressed.drive.omega_rabi > 0.0) {
        return Err(Error::Domain("trap_minimum needs Omega > 0".into()));
    }
    let u = |z: f64| dressed.total_potential_unchecked(&Vector3::new(0.0, 0.0, z));
    let z = line_minimum(&u, -BOX_RHO * 0.999, -1e-9, 4000, 1e-11)?;
    // Polish with damped Newton steps on the analytic force. The axial
    // curvature breaks the x -> -x symmetry, so the true minimum sits
    // slightly off-axis in x.
    let c = &dressed.trap.constants;
    let mut r = Vector3::new(0.0, 0.0, z);
    let tol = 1e-6 * c.m_atom * c.g_grav;
    let steps = [1e-6, 1e-6, 5e-8];
    let mut converged = false;
    for _ in 0..200 {
        let f = dressed.force_unchecked(&r);
        if f.norm() < tol {
            converged = true;
            break;
        }
        let mut h = Matrix3::zeros();
        for j in 0..3 {
            let mut rp = r;
            let mut rm = r;
            rp[j] += steps[j];
            rm[j] -= steps[j];
            let df =
                (dressed.force_unchecked(&rp) - dressed.force_unchecked(&rm)) / (2.0 * steps[j]);
            for i in 0..3 {
                h[(i, j)] = -df[i];
            }
        }
        // Pin directions with no curvature (e.g. x when b'' = 0 makes the
        // potential translation invariant) instead of failing the solve.
        let diag_max = h[(0, 0)].abs().max(h[(1, 1)].abs()).max(h[(2, 2)].abs());
        let mut f_active = f;
        for j in 0..3 {
            if h[(j, j)].abs() <= 1e-12 * diag_max {
                for i in 0..3 {
                    h[(i, j)] = 0.0;
                    h[(j, i)] = 0.0;
                }
                h[(j, j)] = 1.0;
                f_active[j] = 0.0;
            }
        }
        let Some(step) = h.lu().solve(&f_active) else {
            return Err(Error::Characterization {
                message: "singular Hessian while polishing the trap minimum".into(),
                profile: Vec::new(),
            });
        };
        let cap = 5e-5;
        let step = if step.norm() > cap {
            step * (cap / step.norm())
        } else {
            step
        };
        r += step;
    }
    if !converged {
        return Err(Error::Characterization {
            message: "trap-minimum polish did not converge".into(),
            profile: Vec::new(),
        });
    }
    Ok(r)
}

/// Finite-difference steps of the Hessian, per axis (m).
pub const HESSIAN_STEPS: [f64; 3] = [10e-6, 1e-6, 50e-9];

/// Eigenfrequencies sqrt(lambda_i / m) of the second-difference Hessian of an
/// arbitrary potential at `r_min`, ascending.
pub fn hessian_frequencies_of(
    potential: &dyn Fn(&Vector3<f64>) -> f64,
    r_min: &Vector3<f64>,
    steps: [f64; 3],
    mass: f64,
) -> Result<[f64; 3]> {
    let mut h = Matrix3::zeros();
    let u0 = potential(r_min);
    for i in 0..3 {
        let mut rp = *r_min;
        let mut rm = *r_min;
        rp[i] += steps[i];
        rm[i] -= steps[i];
        h[(i, i)] = (potential(&rp) - 2.0 * u0 + potential(&rm)) / (steps[i] * steps[i]);
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            let mut rpp = *r_min;
            let mut rpm = *r_min;
            let mut rmp = *r_min;
            let mut rmm = *r_min;
            rpp[i] += steps[i];
            rpp[j] += steps[j];
            rpm[i] += steps[i];
            rpm[j] -= steps[j];
            rmp[i] -= steps[i];
            rmp[j] += steps[j];
            rmm[i] -= steps[i];
            rmm[j] -= steps[j];
            let v = (potential(&rpp) - potential(&rpm) - potential(&rmp) + potential(&rmm))
                / (4.0 * steps[i] * steps[j]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let eigen = nalgebra::SymmetricEigen::new(h);
    let mut lambdas: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (index, &value) in lambdas.iter().enumerate() {
        if value <= 0.0 {
            return Err(Error::SaddlePoint { index, value });
        }
    }
    Ok([
        (lambdas[0] / mass).sqrt(),
        (lambdas[1] / mass).sqrt(),
        (lambdas[2] / mass).sqrt(),
    ])
}

/// Numerical Hessian eigenfrequencies of the dressed total potential.
pub fn hessian_frequencies(
    dressed: &DressedPotentialEvaluator,
    r_min: &Vector3<f64>,
) -> Result<[f64; 3]> {
    let c = dressed.trap.constants;
    let force = dressed.force_unchecked(r_min);
    if force.norm() > 1e-2 * c.m_atom * c.g_grav {
        return Err(Error::Domain(format!(
            "hessian_frequencies: r_min is not a stationary point (|F| = {:.3e} N)",
            force.norm()
        )));
    }
    let u = |r: &Vector3<f64>| dressed.total_potential_unchecked(r);
    hessian_frequencies_of(&u, r_min, HESSIAN_STEPS, c.m_atom)
}

/// Sample of the resonance shell surface.
#[derive(Debug, Clone)]
pub struct ShellSample {
    pub points: Vec<Vector3<f64>>,
    /// Number of requested directions along which the shell leaves the
    /// validity box (partial-surface warning when nonzero).
    pub clipped: usize,
}

/// Sample `n` points on the iso-B resonance shell V_trap(r) = hbar Delta,
/// parameterized by directions from the trap center; the two z extremes are
/// always included.
pub fn shell_surface_sample(
    trap: &TrapPotentialEvaluator,
    delta: f64,
    n: usize,
) -> Result<ShellSample> {
    if !(delta > 0.0) {
        return Err(Error::NoShell(delta));
    }
    if n < 1 {
        return Err(Error::Domain("shell sample needs n >= 1".into()));
    }
    let target = trap.constants.hbar * delta;
    let tol_v = trap.constants.hbar * 2.0 * std::f64::consts::PI * 10.0;

    let mut directions = Vec::with_capacity(n);
    directions.push(Vector3::new(0.0, 0.0, -1.0));
    if n > 1 {
        directions.push(Vector3::new(0.0, 0.0, 1.0));
    }
    // Deterministic Fibonacci-sphere spread for the remaining directions.
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let extra = n.saturating_sub(2);
    for k in 0..extra {
        let t = (k as f64 + 0.5) / extra as f64;
        let cos_polar = 1.0 - 2.0 * t;
        let sin_polar = (1.0 - cos_polar * cos_polar).sqrt();
        let azim = golden * k as f64;
        directions.push(Vector3::new(
            sin_polar * azim.cos(),
            sin_polar * azim.sin(),
            cos_polar,
        ));
    }

    let mut points = Vec::with_capacity(n);
    let mut clipped = 0usize;
    for u in directions {
        // Distance to the validity box along u.
        let t_x = if u.x.abs() > 0.0 { BOX_X / u.x.abs() } else { f64::INFINITY };
        let u_rho = (u.y * u.y + u.z * u.z).sqrt();
        let t_rho = if u_rho > 0.0 { BOX_RHO / u_rho } else { f64::INFINITY };
        let t_max = t_x.min(t_rho) * 0.999;
        let v_at = |t: f64| trap.potential_unchecked(&(u * t)) - target;
        if v_at(t_max) < 0.0 {
            clipped += 1;
            continue;
        }
        let mut lo = 0.0;
        let mut hi = t_max;
        let mut mid = 0.5 * (lo + hi);
        while v_at(mid).abs() > tol_v {
            if v_at(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            mid = 0.5 * (lo + hi);
        }
        points.push(u * mid);
    }
    Ok(ShellSample { points, clipped })
}

/// Energy difference between the upper and lower stationary points of the
/// z-cut of the total potential (top versus bottom of the shell).
pub fn shell_gap(dressed: &DressedPotentialEvaluator) -> Result<f64> {
    let u = |z: f64| dressed.total_potential_unchecked(&Vector3::new(0.0, 0.0, z));
    let z_low = line_minimum(&u, -BOX_RHO * 0.999, -1e-9, 4000, 1e-11)?;
    let z_high = line_minimum(&u, 1e-9, BOX_RHO * 0.999, 4000, 1e-11)?;
    Ok(u(z_high) - u(z_low))
}

/// Full characterization for one (Delta, Omega) at m_F = 2 with gravity.
pub fn characterize(
    trap: &TrapPotentialEvaluator,
    delta: f64,
    omega_rabi: f64,
) -> Result<TrapCharacterization> {
    let c = trap.constants;
    let z0 = resonance_height(trap, delta)?;
    let alpha = local_gradient_alpha(trap, z0)?;
    let omega_trans = transverse_frequency(alpha, omega_rabi, &c)?;
    let (omega_x, omega_z) = trap.quic_frequencies(2);
    let (omega_1, omega_2) = pendulum_frequencies(z0, omega_x, omega_z, &c)?;
    let drive = crate::dressed::RfDrive::from_detuning(delta, omega_rabi, trap.v0(), &c)?;
    let dressed = DressedPotentialEvaluator::new(*trap, drive, 2, true)?;
    let r_min = trap_minimum(&dressed)?;
    let sag = z0 - r_min.z;
    let hessian_freqs = hessian_frequencies(&dressed, &r_min)?;
    let gap = shell_gap(&dressed)?;
    Ok(TrapCharacterization {
        z0,
        alpha,
        omega_trans,
        omega_1,
        omega_2,
        hessian_freqs,
        sag,
        shell_gap: gap,
        r_min,
    })
}
