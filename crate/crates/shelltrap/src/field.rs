//! Static magnetic field models: symmetric Ioffe-Pritchard expansion of the
//! QUIC trap, the bare magnetic trapping potential, and the calibration of the
//! field parameters from measured trap frequencies.

use nalgebra::Vector3;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Validity box: |x| <= 1 cm along the trap axis.
pub const BOX_X: f64 = 1e-2;
/// Validity box: transverse radius rho = sqrt(y^2 + z^2) <= 5 mm.
pub const BOX_RHO: f64 = 5e-3;

/// Symmetric Ioffe-Pritchard field with axis along x.
///
/// B = (B0 + q/2 (x^2 - rho^2/2)) x_hat + (b' y - q/2 x y) y_hat
///     + (-b' z - q/2 x z) z_hat,   q = b''.
///
/// Divergence- and curl-free; |B(0)| = B0; harmonic expansion at the origin
/// gives axial curvature b'' and radial curvature b'^2/B0 - b''/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IoffePritchardField {
    /// Offset field at the minimum, T.
    pub b0: f64,
    /// Radial gradient, T/m.
    pub b_prime: f64,
    /// Axial curvature, T/m^2.
    pub b_dprime: f64,
}

impl IoffePritchardField {
    pub fn new(b0: f64, b_prime: f64, b_dprime: f64) -> Result<Self> {
        if !(b0 > 0.0) {
            return Err(Error::Domain(format!("B0 must be > 0, got {b0} T")));
        }
        if !(b_prime > 0.0) {
            return Err(Error::Domain(format!("b' must be > 0, got {b_prime} T/m")));
        }
        if !(b_dprime >= 0.0) {
            return Err(Error::Domain(format!(
                "b'' must be >= 0, got {b_dprime} T/m^2"
            )));
        }
        Ok(Self {
            b0,
            b_prime,
            b_dprime,
        })
    }

    /// Reconstruct the field parameters from the measured QUIC oscillation
    /// frequencies for the state `m_f`:
    ///   b'' = m omega_x^2 / (g_F m_F mu_B)
    ///   b'^2 = B0 (m omega_radial^2 / (g_F m_F mu_B) + b''/2)
    pub fn calibrate_from_quic(
        omega_x: f64,
        omega_radial: f64,
        b0: f64,
        m_f: i32,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        if !(omega_x > 0.0) || !(omega_radial > 0.0) {
            return Err(Error::Domain(
                "calibration frequencies must be > 0".into(),
            ));
        }
        if m_f != 1 && m_f != 2 {
            return Err(Error::Domain(format!(
                "m_F must be 1 or 2 (trapped states), got {m_f}"
            )));
        }
        if !(b0 > 0.0) {
            return Err(Error::Domain(format!("B0 must be > 0, got {b0} T")));
        }
        let mu_eff = constants.zeeman_per_tesla() * m_f as f64;
        let b_dprime = constants.m_atom * omega_x * omega_x / mu_eff;
        let b_prime_sq =
            b0 * (constants.m_atom * omega_radial * omega_radial / mu_eff + b_dprime / 2.0);
        if b_prime_sq <= 0.0 {
            return Err(Error::InfeasibleCalibration(format!(
                "omega_radial too small for B0 = {b0} T: b'^2 = {b_prime_sq} <= 0"
            )));
        }
        Self::new(b0, b_prime_sq.sqrt(), b_dprime)
    }

    /// Check that `r` lies inside the validity box.
    pub fn check_in_box(r: &Vector3<f64>) -> Result<()> {
        if r.x.abs() > BOX_X {
            return Err(Error::OutOfBox {
                coord: "x",
                value: r.x,
                limit: BOX_X,
            });
        }
        let rho = (r.y * r.y + r.z * r.z).sqrt();
        if rho > BOX_RHO {
            return Err(Error::OutOfBox {
                coord: "rho",
                value: rho,
                limit: BOX_RHO,
            });
        }
        Ok(())
    }

    pub fn in_box(r: &Vector3<f64>) -> bool {
        Self::check_in_box(r).is_ok()
    }

    /// Field vector at `r`, no box check.
    pub fn b_vector(&self, r: &Vector3<f64>) -> Vector3<f64> {
        let q = self.b_dprime;
        let rho_sq = r.y * r.y + r.z * r.z;
        Vector3::new(
            self.b0 + 0.5 * q * (r.x * r.x - 0.5 * rho_sq),
            self.b_prime * r.y - 0.5 * q * r.x * r.y,
            -self.b_prime * r.z - 0.5 * q * r.x * r.z,
        )
    }

    /// |B(r)|, checked against the validity box.
    pub fn norm(&self, r: &Vector3<f64>) -> Result<f64> {
        Self::check_in_box(r)?;
        Ok(self.norm_unchecked(r))
    }

    pub fn norm_unchecked(&self, r: &Vector3<f64>) -> f64 {
        self.b_vector(r).norm()
    }

    /// Analytic gradient of |B| at `r`.
    pub fn norm_gradient(&self, r: &Vector3<f64>) -> Vector3<f64> {
        let q = self.b_dprime;
        let b = self.b_vector(r);
        let norm = b.norm();
        // Columns of the Jacobian dB_j/dx_i contracted with B_j.
        let dx = b.x * q * r.x + b.y * (-0.5 * q * r.y) + b.z * (-0.5 * q * r.z);
        let dy = b.x * (-0.5 * q * r.y) + b.y * (self.b_prime - 0.5 * q * r.x);
        let dz = b.x * (-0.5 * q * r.z) + b.z * (-self.b_prime - 0.5 * q * r.x);
        Vector3::new(dx, dy, dz) / norm
    }
}

/// Bare magnetic trapping potential per unit m_F:
/// V_trap(r) = g_F mu_B (|B(r)| - B0), zero at the trap bottom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapPotentialEvaluator {
    pub field: IoffePritchardField,
    pub constants: PhysicalConstants,
}

impl TrapPotentialEvaluator {
    pub fn new(field: IoffePritchardField, constants: PhysicalConstants) -> Self {
        Self { field, constants }
    }

    /// V0 = g_F mu_B B0, the rf resonance energy at the trap center.
    pub fn v0(&self) -> f64 {
        self.constants.zeeman_per_tesla() * self.field.b0
    }

    /// V_trap(r) in joules, checked.
    pub fn potential(&self, r: &Vector3<f64>) -> Result<f64> {
        IoffePritchardField::check_in_box(r)?;
        Ok(self.potential_unchecked(r))
    }

    pub fn potential_unchecked(&self, r: &Vector3<f64>) -> f64 {
        self.constants.zeeman_per_tesla() * (self.field.norm_unchecked(r) - self.field.b0)
    }

    /// Analytic gradient of V_trap, J/m.
    pub fn gradient(&self, r: &Vector3<f64>) -> Vector3<f64> {
        self.constants.zeeman_per_tesla() * self.field.norm_gradient(r)
    }

    /// Harmonic trap frequencies at the origin for the state `m_f`,
    /// (omega_x, omega_radial) in rad/s.
    pub fn quic_frequencies(&self, m_f: i32) -> (f64, f64) {
        let mu_eff = self.constants.zeeman_per_tesla() * m_f as f64;
        let m = self.constants.m_atom;
        let omega_x = (mu_eff * self.field.b_dprime / m).max(0.0).sqrt();
        let radial_curv =
            self.field.b_prime * self.field.b_prime / self.field.b0 - self.field.b_dprime / 2.0;
        let omega_radial = (mu_eff * radial_curv / m).max(0.0).sqrt();
        (omega_x, omega_radial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{gauss, gauss_per_cm};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn measured_field() -> IoffePritchardField {
        IoffePritchardField::new(gauss(1.8), gauss_per_cm(225.0), 0.0).unwrap()
    }

    #[test]
    fn norm_at_origin_equals_offset() {
        let f = measured_field();
        assert_relative_eq!(
            f.norm(&Vector3::zeros()).unwrap(),
            gauss(1.8),
            max_relative = 1e-15
        );
    }

    #[test]
    fn norm_hand_evaluation_at_450_um() {
        // sqrt(1.8^2 + (225 * 0.045)^2) G = 10.28 G
        let f = measured_field();
        let r = Vector3::new(0.0, 0.0, -450e-6);
        let expected = gauss((1.8f64.powi(2) + (225.0 * 0.045f64).powi(2)).sqrt());
        assert_relative_eq!(f.norm(&r).unwrap(), expected, max_relative = 1e-12);
        assert!((f.norm(&r).unwrap() / gauss(10.28) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn asymptotic_slope_at_large_z() {
        let f = measured_field();
        let z = -2e-3;
        let dz = 1e-6;
        let slope = (f.norm_unchecked(&Vector3::new(0.0, 0.0, z - dz))
            - f.norm_unchecked(&Vector3::new(0.0, 0.0, z + dz)))
            / (2.0 * dz);
        assert!((slope / f.b_prime - 1.0).abs() < 0.01);
    }

    #[test]
    fn out_of_box_names_offending_coordinate() {
        let f = measured_field();
        let err = f.norm(&Vector3::new(2e-2, 0.0, 0.0)).unwrap_err();
        assert!(err.to_string().contains("x"));
        let err = f.norm(&Vector3::new(0.0, 6e-3, 0.0)).unwrap_err();
        assert!(err.to_string().contains("rho"));
    }

    #[test]
    fn trap_potential_examples() {
        let c = PhysicalConstants::rb87();
        let trap = TrapPotentialEvaluator::new(measured_field(), c);
        assert_eq!(trap.potential(&Vector3::zeros()).unwrap(), 0.0);
        // V0/h = 1.26 MHz for B0 = 1.8 G (often rounded to 1.3 MHz).
        let v0_mhz = trap.v0() / c.h / 1e6;
        assert!((v0_mhz - 1.26).abs() < 0.01, "V0/h = {v0_mhz} MHz");
        // |B| - B0 = 9.574 G maps to V_trap/h = 6.70 MHz.
        let v_mhz = c.zeeman_per_tesla() * gauss(9.574) / c.h / 1e6;
        assert!((v_mhz - 6.70).abs() < 0.01, "V_trap/h = {v_mhz} MHz");
    }

    #[test]
    fn calibration_reproduces_quic_frequencies() {
        let c = PhysicalConstants::rb87();
        let omega_x = 2.0 * std::f64::consts::PI * 21.0;
        let omega_r = 2.0 * std::f64::consts::PI * 200.0;
        let field =
            IoffePritchardField::calibrate_from_quic(omega_x, omega_r, gauss(1.8), 2, &c).unwrap();
        // b'' = m omega_x^2 / mu_B (g_F m_F = 1) = 271 G/cm^2.
        let expected_bdp = c.m_atom * omega_x * omega_x / c.mu_b;
        assert_relative_eq!(field.b_dprime, expected_bdp, max_relative = 1e-12);
        assert!((field.b_dprime / 270.9 - 1.0).abs() < 0.01, "{}", field.b_dprime);
        // b' ~ 211 G/cm.
        assert!(
            (field.b_prime / gauss_per_cm(211.0) - 1.0).abs() < 0.005,
            "b' = {} G/cm",
            field.b_prime / gauss_per_cm(1.0)
        );
        let trap = TrapPotentialEvaluator::new(field, c);
        let (wx, wr) = trap.quic_frequencies(2);
        assert_relative_eq!(wx, omega_x, max_relative = 1e-9);
        assert_relative_eq!(wr, omega_r, max_relative = 1e-3);
    }

    #[test]
    fn forward_check_radial_frequency_with_measured_gradient() {
        // b' = 225 G/cm, B0 = 1.8 G, b'' from omega_x: radial frequency 213 Hz.
        let c = PhysicalConstants::rb87();
        let omega_x = 2.0 * std::f64::consts::PI * 21.0;
        let b_dprime = c.m_atom * omega_x * omega_x / c.mu_b;
        let field = IoffePritchardField::new(gauss(1.8), gauss_per_cm(225.0), b_dprime).unwrap();
        let trap = TrapPotentialEvaluator::new(field, c);
        let (_, wr) = trap.quic_frequencies(2);
        let f_r = wr / (2.0 * std::f64::consts::PI);
        assert!((f_r - 213.0).abs() < 1.5, "f_radial = {f_r} Hz");
    }

    #[test]
    fn asymptotic_gradient_of_trap_potential() {
        let c = PhysicalConstants::rb87();
        let trap = TrapPotentialEvaluator::new(measured_field(), c);
        let z_far = -10.0 * trap.field.b0 / trap.field.b_prime;
        let g = trap.gradient(&Vector3::new(0.0, 0.0, z_far));
        let asymptote = c.zeeman_per_tesla() * trap.field.b_prime;
        assert!((g.z.abs() / asymptote - 1.0).abs() < 0.005);
    }

    proptest! {
        #[test]
        fn analytic_gradient_matches_finite_differences(
            x in -5e-3f64..5e-3,
            y in -3e-3f64..3e-3,
            z in -3e-3f64..3e-3,
            bdp in 0.0f64..300.0,
        ) {
            let f = IoffePritchardField::new(gauss(1.8), gauss_per_cm(225.0), bdp).unwrap();
            let r = Vector3::new(x, y, z);
            let analytic = f.norm_gradient(&r);
            let h = 1e-8;
            for i in 0..3 {
                let mut rp = r;
                let mut rm = r;
                rp[i] += h;
                rm[i] -= h;
                let fd = (f.norm_unchecked(&rp) - f.norm_unchecked(&rm)) / (2.0 * h);
                let scale = analytic.norm().max(f.b_prime * 1e-3);
                prop_assert!((analytic[i] - fd).abs() / scale < 1e-5);
            }
        }

        #[test]
        fn potential_even_under_reflections(
            y in -3e-3f64..3e-3,
            z in -3e-3f64..3e-3,
        ) {
            let c = PhysicalConstants::rb87();
            let trap = TrapPotentialEvaluator::new(measured_field(), c);
            let v = trap.potential_unchecked(&Vector3::new(0.0, y, z));
            let v_my = trap.potential_unchecked(&Vector3::new(0.0, -y, z));
            let v_mz = trap.potential_unchecked(&Vector3::new(0.0, y, -z));
            prop_assert!((v - v_my).abs() <= 1e-12 * v.abs().max(1e-40));
            prop_assert!((v - v_mz).abs() <= 1e-12 * v.abs().max(1e-40));
            prop_assert!(v >= 0.0);
        }
    }
}
