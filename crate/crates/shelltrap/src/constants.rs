use crate::error::{Error, Result};

/// Fundamental and atom-specific constants used throughout the simulator.
///
/// All values are SI. `g_f` is the Lande factor of the trapped hyperfine
/// manifold (F = 2 of 87Rb), so the Zeeman shift per unit m_F is
/// `g_f * mu_b * |B|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Planck constant, J s.
    pub h: f64,
    /// Bohr magneton, J/T.
    pub mu_b: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Atomic mass, kg.
    pub m_atom: f64,
    /// Gravitational acceleration, m/s^2.
    pub g_grav: f64,
    /// Lande g-factor, dimensionless.
    pub g_f: f64,
    /// s-wave scattering length, m.
    pub a_s: f64,
    /// Riemann zeta(3), used by the ideal-gas critical temperature.
    pub zeta3: f64,
}

impl PhysicalConstants {
    /// Constants for 87Rb in F = 2 (g_F = +1/2).
    pub fn rb87() -> Self {
        let hbar = 1.054_571_817e-34;
        Self {
            hbar,
            h: 2.0 * std::f64::consts::PI * hbar,
            mu_b: 9.274_010_078e-24,
            k_b: 1.380_649e-23,
            m_atom: 1.443_2e-25,
            g_grav: 9.81,
            g_f: 0.5,
            a_s: 5.24e-9,
            zeta3: 1.202_06,
        }
    }

    /// Zeeman shift per unit m_F and per tesla, J/T.
    pub fn zeeman_per_tesla(&self) -> f64 {
        self.g_f * self.mu_b
    }

    /// Resonance-frequency-to-field conversion g_F mu_B / h, Hz/T.
    pub fn hz_per_tesla(&self) -> f64 {
        self.g_f * self.mu_b / self.h
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hbar", self.hbar),
            ("h", self.h),
            ("mu_b", self.mu_b),
            ("k_b", self.k_b),
            ("m_atom", self.m_atom),
            ("g_grav", self.g_grav),
            ("g_f", self.g_f),
            ("a_s", self.a_s),
            ("zeta3", self.zeta3),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "constant {name} must be strictly positive, got {v}"
                )));
            }
        }
        let h_expected = 2.0 * std::f64::consts::PI * self.hbar;
        if ((self.h - h_expected) / h_expected).abs() > 1e-12 {
            return Err(Error::Domain("h and hbar are inconsistent".into()));
        }
        // g_F mu_B / h should be ~0.70 MHz/G for F = 2 of 87Rb.
        let mhz_per_gauss = self.hz_per_tesla() * 1e-4 / 1e6;
        if ((mhz_per_gauss - 0.70) / 0.70).abs() > 0.01 {
            return Err(Error::Domain(format!(
                "g_F mu_B / h = {mhz_per_gauss:.4} MHz/G is not within 1% of 0.70 MHz/G"
            )));
        }
        Ok(())
    }
}

/// Gauss to tesla.
pub fn gauss(g: f64) -> f64 {
    g * 1e-4
}

/// Gauss/cm to tesla/m.
pub fn gauss_per_cm(g: f64) -> f64 {
    g * 1e-2
}

/// Gauss/cm^2 to tesla/m^2.
pub fn gauss_per_cm2(g: f64) -> f64 {
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rb87_constants_are_consistent() {
        let c = PhysicalConstants::rb87();
        c.validate().unwrap();
        assert!((c.hz_per_tesla() * 1e-4 - 0.69985e6).abs() / 0.69985e6 < 1e-3);
    }

    #[test]
    fn unit_conversions() {
        assert_eq!(gauss(1.8), 1.8e-4);
        assert_eq!(gauss_per_cm(225.0), 2.25);
        assert_eq!(gauss_per_cm2(27.0), 27.0);
    }

    #[test]
    fn validation_rejects_bad_h() {
        let mut c = PhysicalConstants::rb87();
        c.h *= 1.001;
        assert!(c.validate().is_err());
    }
}
