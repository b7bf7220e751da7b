//! Rf-dressed adiabatic potentials: the avoided-crossing energy
//! sqrt((V_trap - hbar Delta)^2 + (hbar Omega)^2), the total potential with
//! gravity, dressed-state mixing angles, and analytic forces.
//!
//! Sign convention: the local detuning is Delta_local(r) = Delta - V_trap(r)/hbar,
//! so resonance (the shell) is Delta_local = 0 and points deep inside the shell
//! have Delta_local > 0.

use nalgebra::Vector3;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::{IoffePritchardField, TrapPotentialEvaluator};

/// A monochromatic rf drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfDrive {
    /// Rf angular frequency, rad/s.
    pub omega_rf: f64,
    /// Rabi frequency, rad/s.
    pub omega_rabi: f64,
    /// Rf phase at t = 0, rad.
    pub phase: f64,
}

impl RfDrive {
    pub fn new(omega_rf: f64, omega_rabi: f64) -> Result<Self> {
        if !(omega_rf > 0.0) {
            return Err(Error::Domain(format!(
                "omega_rf must be > 0, got {omega_rf} rad/s"
            )));
        }
        if !(omega_rabi >= 0.0) {
            return Err(Error::Domain(format!(
                "Rabi frequency must be >= 0, got {omega_rabi} rad/s"
            )));
        }
        Ok(Self {
            omega_rf,
            omega_rabi,
            phase: 0.0,
        })
    }

    /// Construct the drive from a detuning instead of an absolute frequency:
    /// hbar Delta = hbar omega_rf - V0.
    pub fn from_detuning(delta: f64, omega_rabi: f64, v0: f64, constants: &PhysicalConstants) -> Result<Self> {
        Self::new(v0 / constants.hbar + delta, omega_rabi)
    }

    /// Detuning Delta = omega_rf - V0/hbar, rad/s (may be negative).
    pub fn detuning(&self, v0: f64, constants: &PhysicalConstants) -> f64 {
        self.omega_rf - v0 / constants.hbar
    }
}

/// Adiabatic dressed energy per unit m_F.
pub fn adiabatic_energy(v_trap: f64, delta: f64, omega_rabi: f64, constants: &PhysicalConstants) -> f64 {
    let a = v_trap - constants.hbar * delta;
    let b = constants.hbar * omega_rabi;
    (a * a + b * b).sqrt()
}

/// Dressed-state mixing angle (cos theta, sin theta) at local detuning
/// `delta_local` = Delta - V_trap(r)/hbar.
pub fn mixing_angle(delta_local: f64, omega_rabi: f64) -> Result<(f64, f64)> {
    let norm = (delta_local * delta_local + omega_rabi * omega_rabi).sqrt();
    if norm == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    Ok((-delta_local / norm, omega_rabi / norm))
}

/// Rabi frequency from the rf field amplitude: Omega = g_F mu_B B1 / (2 hbar).
pub fn rabi_from_field_amplitude(b1: f64, constants: &PhysicalConstants) -> Result<f64> {
    if b1 < 0.0 {
        return Err(Error::Domain(format!("B1 must be >= 0, got {b1} T")));
    }
    Ok(constants.zeeman_per_tesla() * b1 / (2.0 * constants.hbar))
}

/// Inverse of [`rabi_from_field_amplitude`].
pub fn field_amplitude_from_rabi(omega_rabi: f64, constants: &PhysicalConstants) -> f64 {
    2.0 * constants.hbar * omega_rabi / constants.zeeman_per_tesla()
}

/// Evaluator for the total potential m_F V(r) (+ m g z) of one dressed level.
#[derive(Debug, Clone, Copy)]
pub struct DressedPotentialEvaluator {
    pub trap: TrapPotentialEvaluator,
    pub drive: RfDrive,
    pub m_f: i32,
    pub include_gravity: bool,
}

impl DressedPotentialEvaluator {
    pub fn new(trap: TrapPotentialEvaluator, drive: RfDrive, m_f: i32, include_gravity: bool) -> Result<Self> {
        if m_f < -2 || m_f > 2 {
            return Err(Error::Domain(format!("m_F must be in -2..=2, got {m_f}")));
        }
        Ok(Self {
            trap,
            drive,
            m_f,
            include_gravity,
        })
    }

    pub fn detuning(&self) -> f64 {
        self.drive.detuning(self.trap.v0(), &self.trap.constants)
    }

    /// Total potential m_F V(r) + m g z (gravity optional), J.
    pub fn total_potential(&self, r: &Vector3<f64>) -> Result<f64> {
        IoffePritchardField::check_in_box(r)?;
        Ok(self.total_potential_unchecked(r))
    }

    pub fn total_potential_unchecked(&self, r: &Vector3<f64>) -> f64 {
        let c = &self.trap.constants;
        let v = adiabatic_energy(
            self.trap.potential_unchecked(r),
            self.detuning(),
            self.drive.omega_rabi,
            c,
        );
        let mut total = self.m_f as f64 * v;
        if self.include_gravity {
            total += c.m_atom * c.g_grav * r.z;
        }
        total
    }

    /// Force -grad(total potential), N. Checked: rejects the degenerate
    /// gradient at the Omega = 0 kink on the resonance shell.
    pub fn force(&self, r: &Vector3<f64>) -> Result<Vector3<f64>> {
        IoffePritchardField::check_in_box(r)?;
        if self.drive.omega_rabi == 0.0 {
            let c = &self.trap.constants;
            let off_resonance =
                self.trap.potential_unchecked(r) - c.hbar * self.detuning();
            // Within roughly one 100 nm grid step of the shell the kink makes
            // the gradient ill-defined.
            let step = 1e-7 * self.trap.gradient(r).norm();
            if off_resonance.abs() <= step {
                return Err(Error::DegenerateGradient);
            }
        }
        Ok(self.force_unchecked(r))
    }

    pub fn force_unchecked(&self, r: &Vector3<f64>) -> Vector3<f64> {
        let c = &self.trap.constants;
        let v_trap = self.trap.potential_unchecked(r);
        let a = v_trap - c.hbar * self.detuning();
        let b = c.hbar * self.drive.omega_rabi;
        let v = (a * a + b * b).sqrt();
        let mut force = if v > 0.0 {
            -(self.m_f as f64) * (a / v) * self.trap.gradient(r)
        } else {
            Vector3::zeros()
        };
        if self.include_gravity {
            force.z -= c.m_atom * c.g_grav;
        }
        force
    }

    /// Energies m_F V(r) of the five dressed levels, ordered m_F = -2..=+2,
    /// gravity excluded.
    pub fn dressed_manifold(&self, r: &Vector3<f64>) -> Result<[f64; 5]> {
        IoffePritchardField::check_in_box(r)?;
        let c = &self.trap.constants;
        let v = adiabatic_energy(
            self.trap.potential_unchecked(r),
            self.detuning(),
            self.drive.omega_rabi,
            c,
        );
        Ok([-2.0 * v, -v, 0.0, v, 2.0 * v])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{gauss, gauss_per_cm, PhysicalConstants};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn measured_trap() -> TrapPotentialEvaluator {
        let c = PhysicalConstants::rb87();
        let field = IoffePritchardField::new(gauss(1.8), gauss_per_cm(225.0), 0.0).unwrap();
        TrapPotentialEvaluator::new(field, c)
    }

    #[test]
    fn adiabatic_energy_examples() {
        let c = PhysicalConstants::rb87();
        // Resonance minimum.
        let delta = TWO_PI * 1e6;
        let omega = TWO_PI * 0.17e6;
        assert_relative_eq!(
            adiabatic_energy(c.hbar * delta, delta, omega, &c),
            c.hbar * omega,
            max_relative = 1e-14
        );
        // Undressed limit.
        let v = 2.0e-28;
        assert_relative_eq!(
            adiabatic_energy(v, delta, 0.0, &c),
            (v - c.hbar * delta).abs(),
            max_relative = 1e-14
        );
        // V_trap/h = 2 MHz, Delta/2pi = 1 MHz, Omega/2pi = 0.17 MHz.
        let e = adiabatic_energy(c.h * 2e6, TWO_PI * 1e6, TWO_PI * 0.17e6, &c);
        assert_relative_eq!(e / c.h / 1e6, (1.0f64 + 0.17f64.powi(2)).sqrt(), max_relative = 1e-12);
        assert!((e / c.h / 1e6 - 1.0143).abs() < 1e-4);
    }

    #[test]
    fn mixing_angle_limits() {
        let omega = TWO_PI * 1e5;
        let (c1, s1) = mixing_angle(1e6 * omega, omega).unwrap();
        assert!((c1 + 1.0).abs() < 1e-6 && s1.abs() < 1e-5);
        let (c2, s2) = mixing_angle(-1e6 * omega, omega).unwrap();
        assert!((c2 - 1.0).abs() < 1e-6 && s2.abs() < 1e-5);
        let (c3, s3) = mixing_angle(0.0, omega).unwrap();
        assert_eq!((c3, s3), (0.0, 1.0));
        let (c4, s4) = mixing_angle(omega, omega).unwrap();
        assert_relative_eq!(c4, -std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-14);
        assert_relative_eq!(s4, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-14);
        assert!(mixing_angle(0.0, 0.0).is_err());
    }

    #[test]
    fn rabi_calibration() {
        let c = PhysicalConstants::rb87();
        assert_eq!(rabi_from_field_amplitude(0.0, &c).unwrap(), 0.0);
        assert!(rabi_from_field_amplitude(-1e-5, &c).is_err());
        // Omega/2pi = 180 kHz corresponds to B1 = 0.514 G.
        let b1 = field_amplitude_from_rabi(TWO_PI * 180e3, &c);
        assert!((b1 / gauss(0.514) - 1.0).abs() < 2e-3, "B1 = {} G", b1 / 1e-4);
        // Linearity: doubling B1 doubles Omega.
        let o = rabi_from_field_amplitude(gauss(1.028), &c).unwrap();
        assert!((o / (TWO_PI * 360e3) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn total_potential_gravity_only_for_mf0() {
        let c = PhysicalConstants::rb87();
        let drive = RfDrive::new(TWO_PI * 2e6, TWO_PI * 180e3).unwrap();
        let ev = DressedPotentialEvaluator::new(measured_trap(), drive, 0, true).unwrap();
        let r = Vector3::new(0.0, 1e-4, -2e-4);
        assert_relative_eq!(
            ev.total_potential(&r).unwrap(),
            c.m_atom * c.g_grav * r.z,
            max_relative = 1e-14
        );
    }

    #[test]
    fn on_shell_value_is_doubled_rabi_floor() {
        let c = PhysicalConstants::rb87();
        let trap = measured_trap();
        let delta = TWO_PI * 2e6;
        let omega = TWO_PI * 180e3;
        let drive = RfDrive::from_detuning(delta, omega, trap.v0(), &c).unwrap();
        let ev = DressedPotentialEvaluator::new(trap, drive, 2, false).unwrap();
        // Find a point on the shell along -z by bisection on V_trap = hbar Delta.
        let z0 = crate::characterize::resonance_height(&trap, delta).unwrap();
        let r = Vector3::new(0.0, 0.0, z0);
        let v = ev.total_potential(&r).unwrap();
        assert!((v / (2.0 * c.hbar * omega) - 1.0).abs() < 1e-6);
        assert!((v / (c.h * 360e3) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn manifold_ordering_and_gap() {
        let c = PhysicalConstants::rb87();
        let trap = measured_trap();
        let omega = TWO_PI * 180e3;
        let drive = RfDrive::from_detuning(TWO_PI * 2e6, omega, trap.v0(), &c).unwrap();
        let ev = DressedPotentialEvaluator::new(trap, drive, 2, false).unwrap();
        let z0 = crate::characterize::resonance_height(&trap, TWO_PI * 2e6).unwrap();
        let levels = ev.dressed_manifold(&Vector3::new(0.0, 0.0, z0)).unwrap();
        for w in levels.windows(2) {
            assert!(w[1] - w[0] >= c.hbar * omega * (1.0 - 1e-9));
        }
        assert!((levels[4] / (2.0 * c.hbar * omega) - 1.0).abs() < 1e-6);
        assert_eq!(levels[2], 0.0);
    }

    #[test]
    fn force_vanishes_at_minimum_and_mirrors_in_y() {
        let c = PhysicalConstants::rb87();
        let trap = measured_trap();
        let drive = RfDrive::from_detuning(TWO_PI * 2e6, TWO_PI * 180e3, trap.v0(), &c).unwrap();
        let ev = DressedPotentialEvaluator::new(trap, drive, 2, true).unwrap();
        let r_min = crate::characterize::trap_minimum(&ev).unwrap();
        // Polished to better than 1e-6 of the gravitational force.
        assert!(ev.force(&r_min).unwrap().norm() < 2e-30);
        let rp = Vector3::new(0.0, 2e-4, -3e-4);
        let rm = Vector3::new(0.0, -2e-4, -3e-4);
        let fp = ev.force(&rp).unwrap();
        let fm = ev.force(&rm).unwrap();
        assert_relative_eq!(fp.y, -fm.y, max_relative = 1e-12);
        assert_relative_eq!(fp.z, fm.z, max_relative = 1e-12);
    }

    #[test]
    fn asymptotic_vertical_force_below_shell() {
        // Far below the shell V_trap >> hbar Delta: the dressed slope is
        // 2 alpha, so the net restoring force is 2 alpha - m g upward.
        let c = PhysicalConstants::rb87();
        let trap = measured_trap();
        let drive = RfDrive::from_detuning(TWO_PI * 1e6, TWO_PI * 180e3, trap.v0(), &c).unwrap();
        let ev = DressedPotentialEvaluator::new(trap, drive, 2, true).unwrap();
        let r = Vector3::new(0.0, 0.0, -4e-3);
        let f = ev.force(&r).unwrap();
        let alpha = c.zeeman_per_tesla() * trap.field.b_prime;
        let expected = 2.0 * alpha - c.m_atom * c.g_grav;
        assert!((f.z / expected - 1.0).abs() < 0.01, "f_z = {}", f.z);
        assert!(f.x.abs() < expected * 1e-9);
    }

    #[test]
    fn degenerate_gradient_on_kink() {
        let c = PhysicalConstants::rb87();
        let trap = measured_trap();
        let delta = TWO_PI * 2e6;
        let drive = RfDrive::from_detuning(delta, 0.0, trap.v0(), &c).unwrap();
        let ev = DressedPotentialEvaluator::new(trap, drive, 2, false).unwrap();
        let z0 = crate::characterize::resonance_height(&trap, delta).unwrap();
        assert!(matches!(
            ev.force(&Vector3::new(0.0, 0.0, z0)),
            Err(Error::DegenerateGradient)
        ));
        // Off the shell the force is fine even for Omega = 0.
        assert!(ev.force(&Vector3::new(0.0, 0.0, z0 - 1e-4)).is_ok());
    }

    proptest! {
        #[test]
        fn adiabatic_energy_floor_and_monotonicity(
            v_mhz in -5.0f64..10.0,
            delta_mhz in -5.0f64..10.0,
            omega_khz in 0.0f64..500.0,
        ) {
            let c = PhysicalConstants::rb87();
            let v = c.h * v_mhz * 1e6;
            let delta = TWO_PI * delta_mhz * 1e6;
            let omega = TWO_PI * omega_khz * 1e3;
            let e = adiabatic_energy(v, delta, omega, &c);
            prop_assert!(e >= c.hbar * omega - 1e-40);
            // Nonincreasing below resonance, nondecreasing above.
            let dv = c.h * 1e3;
            let e_up = adiabatic_energy(v + dv, delta, omega, &c);
            if v + dv <= c.hbar * delta {
                prop_assert!(e_up <= e + 1e-40);
            }
            if v >= c.hbar * delta {
                prop_assert!(e_up >= e - 1e-40);
            }
        }

        #[test]
        fn mixing_angle_is_normalized(
            delta in -1e7f64..1e7,
            omega in 1.0f64..1e7,
        ) {
            let (cos_t, sin_t) = mixing_angle(delta, omega).unwrap();
            prop_assert!((cos_t * cos_t + sin_t * sin_t - 1.0).abs() < 1e-12);
        }
    }
}
