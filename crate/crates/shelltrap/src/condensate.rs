//! Static quantum-gas estimators: Thomas-Fermi chemical potential, ideal-gas
//! critical temperature, and the 2D-regime flags for clouds in the shell trap.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// A harmonically trapped gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasSpec {
    pub n_atoms: f64,
    /// Trap angular frequencies, rad/s.
    pub omega: [f64; 3],
    /// Temperature, K (optional; only the dimensionality report uses it).
    pub temperature: Option<f64>,
    pub constants: PhysicalConstants,
}

impl GasSpec {
    pub fn new(
        n_atoms: f64,
        omega: [f64; 3],
        temperature: Option<f64>,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        if !(n_atoms >= 1.0) {
            return Err(Error::Domain(format!(
                "atom count must be >= 1, got {n_atoms}"
            )));
        }
        for w in omega {
            if !(w > 0.0) {
                return Err(Error::Domain(format!(
                    "trap frequencies must be > 0, got {w} rad/s"
                )));
            }
        }
        if let Some(t) = temperature {
            if !(t > 0.0) {
                return Err(Error::Domain(format!(
                    "temperature must be > 0, got {t} K"
                )));
            }
        }
        Ok(Self {
            n_atoms,
            omega,
            temperature,
            constants,
        })
    }

    /// Geometric-mean frequency, rad/s.
    pub fn omega_bar(&self) -> f64 {
        (self.omega[0] * self.omega[1] * self.omega[2]).cbrt()
    }

    /// Mean oscillator length a_bar = sqrt(hbar / (m omega_bar)), m.
    pub fn a_bar(&self) -> f64 {
        (self.constants.hbar / (self.constants.m_atom * self.omega_bar())).sqrt()
    }

    /// Thomas-Fermi validity parameter N a_s / a_bar; the TF result is only
    /// trustworthy when this is large.
    pub fn tf_parameter(&self) -> f64 {
        self.n_atoms * self.constants.a_s / self.a_bar()
    }
}

/// 3D Thomas-Fermi chemical potential,
/// mu = (hbar omega_bar / 2) (15 N a_s / a_bar)^{2/5}, in J.
pub fn tf_chemical_potential(spec: &GasSpec) -> f64 {
    0.5 * spec.constants.hbar
        * spec.omega_bar()
        * (15.0 * spec.n_atoms * spec.constants.a_s / spec.a_bar()).powf(0.4)
}

/// Ideal-gas 3D critical temperature,
/// T_c = (hbar omega_bar / k_B) (N / zeta(3))^{1/3}, in K. No finite-size or
/// interaction shift is applied.
pub fn critical_temperature(spec: &GasSpec) -> f64 {
    spec.constants.hbar * spec.omega_bar() / spec.constants.k_b
        * (spec.n_atoms / spec.constants.zeta3).cbrt()
}

/// Dimensionality flags of a gas against the tight vertical confinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalityReport {
    /// k_B T, J (zero if no temperature was given).
    pub thermal_energy: f64,
    /// Thomas-Fermi chemical potential, J.
    pub mu: f64,
    /// hbar omega_trans, J.
    pub hbar_omega_trans: f64,
    /// Ideal-gas critical temperature, K.
    pub t_c: f64,
    /// True iff k_B T < hbar omega_trans.
    pub thermal_2d: bool,
    /// True iff mu < hbar omega_trans.
    pub bec_2d: bool,
}

/// Compare the thermal energy and chemical potential against the vertical
/// level spacing `hbar * omega_trans`. With no temperature given, the
/// critical temperature is used for the thermal comparison.
pub fn dimensionality_report(spec: &GasSpec, omega_trans: f64) -> Result<DimensionalityReport> {
    if !(omega_trans > 0.0) {
        return Err(Error::Domain(format!(
            "omega_trans must be > 0, got {omega_trans} rad/s"
        )));
    }
    let c = &spec.constants;
    let t_c = critical_temperature(spec);
    let t = spec.temperature.unwrap_or(t_c);
    let thermal_energy = c.k_b * t;
    let mu = tf_chemical_potential(spec);
    let hbar_omega_trans = c.hbar * omega_trans;
    Ok(DimensionalityReport {
        thermal_energy,
        mu,
        hbar_omega_trans,
        t_c,
        thermal_2d: thermal_energy < hbar_omega_trans,
        bec_2d: mu < hbar_omega_trans,
    })
}
