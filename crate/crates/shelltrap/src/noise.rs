//! Rf-source imperfection models: white and Ornstein-Uhlenbeck frequency
//! noise, the position sensitivity of the shell bottom, and the parametric
//! heating rate from trap-position noise.
//!
//! Spectral convention: all power spectral densities are one-sided.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// FWHM of a Gaussian to its standard deviation.
pub fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (8.0 * std::f64::consts::LN_2).sqrt()
}

/// Frequency-noise process on the rf signal, seeded for reproducibility.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyNoiseModel {
    pub kind: NoiseKind,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseKind {
    /// White noise with fixed one-sided PSD (Hz^2/Hz); the sample variance
    /// then depends on the sampling step.
    WhitePsd { psd_hz2_per_hz: f64 },
    /// White noise calibrated so the 1 s frequency histogram has the target
    /// FWHM; the PSD then depends on the sampling step.
    WhiteFwhm { fwhm_hz: f64 },
    /// Ornstein-Uhlenbeck process with stationary variance (Hz^2) and
    /// correlation time (s).
    OrnsteinUhlenbeck {
        variance_hz2: f64,
        correlation_time: f64,
    },
}

impl FrequencyNoiseModel {
    pub fn white_from_psd(psd_hz2_per_hz: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::WhitePsd { psd_hz2_per_hz },
            seed,
        }
    }

    /// Calibrate white noise to a target FWHM of the frequency histogram.
    pub fn calibrate_to_fwhm(fwhm_hz: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::WhiteFwhm { fwhm_hz },
            seed,
        }
    }

    pub fn ornstein_uhlenbeck(variance_hz2: f64, correlation_time: f64, seed: u64) -> Result<Self> {
        if !(correlation_time > 0.0) {
            return Err(Error::Domain(format!(
                "OU correlation time must be > 0, got {correlation_time} s"
            )));
        }
        if variance_hz2 < 0.0 {
            return Err(Error::Domain("OU variance must be >= 0".into()));
        }
        Ok(Self {
            kind: NoiseKind::OrnsteinUhlenbeck {
                variance_hz2,
                correlation_time,
            },
            seed,
        })
    }

    /// OU process calibrated to a target histogram FWHM.
    pub fn ou_from_fwhm(fwhm_hz: f64, correlation_time: f64, seed: u64) -> Result<Self> {
        Self::ornstein_uhlenbeck(fwhm_to_sigma(fwhm_hz).powi(2), correlation_time, seed)
    }

    /// Standard deviation of one sample at step `dt`.
    pub fn sigma_at(&self, dt: f64) -> f64 {
        match self.kind {
            NoiseKind::WhitePsd { psd_hz2_per_hz } => (psd_hz2_per_hz / (2.0 * dt)).sqrt(),
            NoiseKind::WhiteFwhm { fwhm_hz } => fwhm_to_sigma(fwhm_hz),
            NoiseKind::OrnsteinUhlenbeck { variance_hz2, .. } => variance_hz2.sqrt(),
        }
    }

    /// One-sided PSD (Hz^2/Hz) at frequency `f`, for samples on step `dt`.
    pub fn psd_at(&self, f: f64, dt: f64) -> f64 {
        match self.kind {
            NoiseKind::WhitePsd { psd_hz2_per_hz } => psd_hz2_per_hz,
            NoiseKind::WhiteFwhm { fwhm_hz } => 2.0 * fwhm_to_sigma(fwhm_hz).powi(2) * dt,
            NoiseKind::OrnsteinUhlenbeck {
                variance_hz2,
                correlation_time,
            } => {
                let w_tau = 2.0 * std::f64::consts::PI * f * correlation_time;
                4.0 * variance_hz2 * correlation_time / (1.0 + w_tau * w_tau)
            }
        }
    }

    /// A realization of `n` samples on step `dt`, Hz.
    pub fn sample_path(&self, dt: f64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let sigma = self.sigma_at(dt);
        if sigma == 0.0 {
            return vec![0.0; n];
        }
        let normal = Normal::new(0.0, sigma).unwrap();
        match self.kind {
            NoiseKind::WhitePsd { .. } | NoiseKind::WhiteFwhm { .. } => {
                (0..n).map(|_| normal.sample(&mut rng)).collect()
            }
            NoiseKind::OrnsteinUhlenbeck {
                correlation_time, ..
            } => {
                // Exact stationary discretization.
                let decay = (-dt / correlation_time).exp();
                let kick = sigma * (1.0 - decay * decay).sqrt();
                let unit = Normal::new(0.0, 1.0).unwrap();
                let mut x = normal.sample(&mut rng);
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    out.push(x);
                    x = x * decay + kick * unit.sample(&mut rng);
                }
                out
            }
        }
    }
}

/// dz0/df = h / alpha: conversion from rf frequency offset to displacement of
/// the shell bottom, m/Hz.
pub fn position_sensitivity(alpha: f64, constants: &PhysicalConstants) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!(
            "position sensitivity is singular for alpha = {alpha}"
        )));
    }
    Ok(constants.h / alpha)
}

/// Parametric heating rate from trap-position noise:
/// Edot = m omega_trans^4 S_z(omega_trans) / 4, with S_z one-sided (m^2/Hz).
pub fn heating_rate_from_position_noise(
    s_z: f64,
    omega_trans: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if s_z < 0.0 {
        return Err(Error::Domain("position-noise PSD must be >= 0".into()));
    }
    Ok(constants.m_atom * omega_trans.powi(4) * s_z / 4.0)
}
