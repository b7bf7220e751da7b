//! Time-dependent rf drives: piecewise schedules of (omega_rf, Omega), the
//! loading chirp, DDS staircase ramps, phase jumps at synthesizer hand-off,
//! and additive frequency-noise decoration.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::noise::FrequencyNoiseModel;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// One schedule segment; times are local to the segment.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    Constant {
        duration: f64,
        omega_rf: f64,
        omega_rabi: f64,
    },
    /// Rabi frequency ramps linearly at fixed rf frequency.
    RabiRamp {
        duration: f64,
        omega_rf: f64,
        rabi_from: f64,
        rabi_to: f64,
    },
    /// Rf frequency ramps linearly at fixed Rabi frequency.
    FreqRamp {
        duration: f64,
        omega_from: f64,
        omega_to: f64,
        omega_rabi: f64,
    },
    /// Piecewise-constant DDS ramp with equal treads. Tread i holds the
    /// midpoint value omega_from + (i + 1/2) * step, so the time average
    /// equals the linear ramp average exactly.
    Staircase {
        duration: f64,
        omega_from: f64,
        omega_to: f64,
        n_steps: usize,
        omega_rabi: f64,
    },
    /// Sinusoidal modulation of the rf frequency around a center value.
    SineModulated {
        duration: f64,
        omega_center: f64,
        mod_depth: f64,
        drive_freq: f64,
        omega_rabi: f64,
    },
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match self {
            Segment::Constant { duration, .. }
            | Segment::RabiRamp { duration, .. }
            | Segment::FreqRamp { duration, .. }
            | Segment::Staircase { duration, .. }
            | Segment::SineModulated { duration, .. } => *duration,
        }
    }

    fn sample(&self, t: f64) -> DriveSample {
        match *self {
            Segment::Constant {
                omega_rf,
                omega_rabi,
                ..
            } => DriveSample {
                omega_rf,
                omega_rabi,
            },
            Segment::RabiRamp {
                duration,
                omega_rf,
                rabi_from,
                rabi_to,
            } => {
                let s = (t / duration).clamp(0.0, 1.0);
                DriveSample {
                    omega_rf,
                    omega_rabi: rabi_from + (rabi_to - rabi_from) * s,
                }
            }
            Segment::FreqRamp {
                duration,
                omega_from,
                omega_to,
                omega_rabi,
            } => {
                let s = (t / duration).clamp(0.0, 1.0);
                DriveSample {
                    omega_rf: omega_from + (omega_to - omega_from) * s,
                    omega_rabi,
                }
            }
            Segment::Staircase {
                duration,
                omega_from,
                omega_to,
                n_steps,
                omega_rabi,
            } => {
                let step = (omega_to - omega_from) / n_steps as f64;
                let i = ((t / duration * n_steps as f64).floor() as usize).min(n_steps - 1);
                DriveSample {
                    omega_rf: omega_from + (i as f64 + 0.5) * step,
                    omega_rabi,
                }
            }
            Segment::SineModulated {
                omega_center,
                mod_depth,
                drive_freq,
                omega_rabi,
                ..
            } => DriveSample {
                omega_rf: omega_center + mod_depth * (TWO_PI * drive_freq * t).sin(),
                omega_rabi,
            },
        }
    }

    /// Left part of the segment after cutting at local time `at`, preserving
    /// the sampled values.
    fn split_left(&self, at: f64) -> Vec<Segment> {
        match *self {
            Segment::Constant {
                omega_rf,
                omega_rabi,
                ..
            } => vec![Segment::Constant {
                duration: at,
                omega_rf,
                omega_rabi,
            }],
            Segment::RabiRamp {
                duration,
                omega_rf,
                rabi_from,
                rabi_to,
            } => vec![Segment::RabiRamp {
                duration: at,
                omega_rf,
                rabi_from,
                rabi_to: rabi_from + (rabi_to - rabi_from) * at / duration,
            }],
            Segment::FreqRamp {
                duration,
                omega_from,
                omega_to,
                omega_rabi,
            } => vec![Segment::FreqRamp {
                duration: at,
                omega_from,
                omega_to: omega_from + (omega_to - omega_from) * at / duration,
                omega_rabi,
            }],
            Segment::Staircase {
                duration,
                omega_from,
                omega_to,
                n_steps,
                omega_rabi,
            } => {
                // Expand the played treads into explicit constants.
                let step = (omega_to - omega_from) / n_steps as f64;
                let tread = duration / n_steps as f64;
                let mut out = Vec::new();
                let mut remaining = at;
                let mut i = 0usize;
                while remaining > 0.0 && i < n_steps {
                    out.push(Segment::Constant {
                        duration: remaining.min(tread),
                        omega_rf: omega_from + (i as f64 + 0.5) * step,
                        omega_rabi,
                    });
                    remaining -= tread;
                    i += 1;
                }
                out
            }
            Segment::SineModulated {
                omega_center,
                mod_depth,
                drive_freq,
                omega_rabi,
                ..
            } => vec![Segment::SineModulated {
                duration: at,
                omega_center,
                mod_depth,
                drive_freq,
                omega_rabi,
            }],
        }
    }
}

/// Instantaneous drive values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSample {
    pub omega_rf: f64,
    pub omega_rabi: f64,
}

/// Frequency-noise realization sampled on a uniform grid, held constant over
/// each step (zero-order hold). Values in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub dt: f64,
    pub offsets_hz: Vec<f64>,
}

impl NoisePath {
    fn offset_hz(&self, t: f64) -> f64 {
        if self.offsets_hz.is_empty() {
            return 0.0;
        }
        let i = ((t / self.dt).floor().max(0.0) as usize).min(self.offsets_hz.len() - 1);
        self.offsets_hz[i]
    }
}

/// Piecewise rf schedule over [0, duration], with optional noise decoration
/// and declared phase jumps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RfSchedule {
    pub segments: Vec<Segment>,
    pub noise: Option<NoisePath>,
    /// (time, jump angle) pairs; the phase is continuous elsewhere.
    pub phase_jumps: Vec<(f64, f64)>,
}

/// Specification of a DDS staircase sweep, frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaircaseSpec {
    pub f_start: f64,
    pub f_end: f64,
    pub n_steps: usize,
    pub duration: f64,
}

impl RfSchedule {
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        let sched = Self {
            segments,
            noise: None,
            phase_jumps: Vec::new(),
        };
        sched.validate()?;
        Ok(sched)
    }

    pub fn constant(duration: f64, omega_rf: f64, omega_rabi: f64) -> Result<Self> {
        Self::from_segments(vec![Segment::Constant {
            duration,
            omega_rf,
            omega_rabi,
        }])
    }

    fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Schedule("schedule has no segments".into()));
        }
        for seg in &self.segments {
            if !(seg.duration() > 0.0) {
                return Err(Error::Schedule("segment duration must be > 0".into()));
            }
        }
        let n = 512;
        let dur = self.duration();
        for k in 0..=n {
            let s = self.sample(dur * k as f64 / n as f64);
            if !(s.omega_rf > 0.0) {
                return Err(Error::Schedule(
                    "omega_rf must stay > 0 on the whole support".into(),
                ));
            }
            if s.omega_rabi < 0.0 {
                return Err(Error::Schedule("Omega must stay >= 0".into()));
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    /// Drive values at time `t`; clamped to the endpoints outside the support.
    pub fn sample(&self, t: f64) -> DriveSample {
        let t = t.clamp(0.0, self.duration());
        let mut local = t;
        let mut sample = None;
        for seg in &self.segments {
            if local <= seg.duration() || std::ptr::eq(seg, self.segments.last().unwrap()) {
                sample = Some(seg.sample(local.min(seg.duration())));
                break;
            }
            local -= seg.duration();
        }
        let mut s = sample.expect("validated schedule has segments");
        if let Some(noise) = &self.noise {
            s.omega_rf += TWO_PI * noise.offset_hz(t);
        }
        s
    }

    /// Append a constant hold at the final drive values.
    pub fn then_hold(mut self, duration: f64) -> Self {
        let end = self.sample(self.duration());
        self.segments.push(Segment::Constant {
            duration,
            omega_rf: end.omega_rf,
            omega_rabi: end.omega_rabi,
        });
        self
    }

    /// The standard loading sequence: Omega switches on linearly in 2 ms at
    /// a fixed rf frequency 300 kHz below the center resonance, then the rf is
    /// chirped linearly from 1 MHz to V0/hbar + delta_target in 150 ms.
    pub fn loading(
        delta_target: f64,
        omega_rabi_max: f64,
        v0: f64,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        Self::loading_with_ramp(delta_target, omega_rabi_max, v0, constants, 0.150, None)
    }

    /// Loading sequence with configurable chirp duration; `staircase_steps`
    /// replaces the linear chirp by a DDS staircase.
    pub fn loading_with_ramp(
        delta_target: f64,
        omega_rabi_max: f64,
        v0: f64,
        constants: &PhysicalConstants,
        ramp_duration: f64,
        staircase_steps: Option<usize>,
    ) -> Result<Self> {
        if !(delta_target > 0.0) || delta_target > TWO_PI * 10e6 {
            return Err(Error::Schedule(format!(
                "loading target detuning must be in (0, 10] MHz, got {:.3} MHz",
                delta_target / TWO_PI / 1e6
            )));
        }
        let v0_over_hbar = v0 / constants.hbar;
        let omega_end = v0_over_hbar + delta_target;
        if omega_end <= v0_over_hbar {
            return Err(Error::Schedule("chirp target is below V0/hbar".into()));
        }
        let switch_on = Segment::RabiRamp {
            duration: 2e-3,
            omega_rf: v0_over_hbar - TWO_PI * 300e3,
            rabi_from: 0.0,
            rabi_to: omega_rabi_max,
        };
        let omega_start = TWO_PI * 1e6;
        let chirp = match staircase_steps {
            None => Segment::FreqRamp {
                duration: ramp_duration,
                omega_from: omega_start,
                omega_to: omega_end,
                omega_rabi: omega_rabi_max,
            },
            Some(n) => {
                if n == 0 {
                    return Err(Error::Schedule("staircase needs n_steps >= 1".into()));
                }
                Segment::Staircase {
                    duration: ramp_duration,
                    omega_from: omega_start,
                    omega_to: omega_end,
                    n_steps: n,
                    omega_rabi: omega_rabi_max,
                }
            }
        };
        Self::from_segments(vec![switch_on, chirp])
    }

    /// Truncate at `t_switch` and continue with `next` (its clock restarted),
    /// recording the uncontrolled phase discontinuity `jump` at the switch.
    pub fn with_phase_jump(&self, next: &RfSchedule, t_switch: f64, jump: f64) -> Result<Self> {
        if !(t_switch > 0.0) || t_switch >= self.duration() {
            return Err(Error::Schedule(format!(
                "t_switch = {t_switch} s is outside the first schedule's support"
            )));
        }
        let mut segments = Vec::new();
        let mut remaining = t_switch;
        for seg in &self.segments {
            if remaining >= seg.duration() {
                segments.push(seg.clone());
                remaining -= seg.duration();
                if remaining == 0.0 {
                    break;
                }
            } else {
                segments.extend(seg.split_left(remaining));
                break;
            }
        }
        segments.extend(next.segments.iter().cloned());
        let mut out = Self::from_segments(segments)?;
        out.noise = self.noise.clone();
        out.phase_jumps = self.phase_jumps.clone();
        out.phase_jumps.push((t_switch, jump));
        Ok(out)
    }

    /// Add a frequency-noise realization sampled on the integrator grid `dt`.
    /// A zero-amplitude model leaves the schedule unchanged.
    pub fn with_noise(mut self, model: &FrequencyNoiseModel, dt: f64) -> Self {
        let n = (self.duration() / dt).ceil() as usize + 2;
        let offsets_hz = model.sample_path(dt, n);
        if offsets_hz.iter().all(|&x| x == 0.0) {
            return self;
        }
        self.noise = Some(NoisePath { dt, offsets_hz });
        self
    }
}

/// Standalone piecewise-constant sweep from a DDS spec.
pub fn staircase_schedule(spec: &StaircaseSpec, omega_rabi: f64) -> Result<RfSchedule> {
    if spec.n_steps == 0 {
        return Err(Error::Schedule("staircase needs n_steps >= 1".into()));
    }
    if !(spec.duration > 0.0) {
        return Err(Error::Schedule("staircase duration must be > 0".into()));
    }
    RfSchedule::from_segments(vec![Segment::Staircase {
        duration: spec.duration,
        omega_from: TWO_PI * spec.f_start,
        omega_to: TWO_PI * spec.f_end,
        n_steps: spec.n_steps,
        omega_rabi,
    }])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::FrequencyNoiseModel;

    #[test]
    fn loading_schedule_shape() {
        let c = PhysicalConstants::rb87();
        let v0 = c.zeeman_per_tesla() * 1.8e-4;
        let omega_max = TWO_PI * 180e3;
        let sched = RfSchedule::loading(TWO_PI * 3e6, omega_max, v0, &c).unwrap();
        assert!((sched.duration() - 0.152).abs() < 1e-12);
        // Final frequency: V0/h + 3 MHz = 4.26 MHz.
        let end = sched.sample(sched.duration());
        let f_end_mhz = end.omega_rf / TWO_PI / 1e6;
        assert!((f_end_mhz - 4.26).abs() < 0.01, "f_end = {f_end_mhz} MHz");
        // Omega continuous at the segment boundary.
        let before = sched.sample(2e-3 - 1e-9);
        let after = sched.sample(2e-3 + 1e-9);
        assert!((before.omega_rabi - after.omega_rabi).abs() < omega_max * 1e-6);
        assert_eq!(after.omega_rabi, omega_max);
        // Switch-on sits 300 kHz below V0/hbar while Omega ramps from zero.
        let start = sched.sample(0.0);
        assert_eq!(start.omega_rabi, 0.0);
        assert!((start.omega_rf - (v0 / c.hbar - TWO_PI * 300e3)).abs() < 1.0);
        // Target below V0/hbar rejected.
        assert!(RfSchedule::loading(-TWO_PI * 1e6, omega_max, v0, &c).is_err());
    }

    #[test]
    fn staircase_average_and_refinement() {
        let spec = StaircaseSpec {
            f_start: 1e6,
            f_end: 3e6,
            n_steps: 1500,
            duration: 0.150,
        };
        let sched = staircase_schedule(&spec, TWO_PI * 180e3).unwrap();
        let n = 30000;
        let mean: f64 = (0..n)
            .map(|i| sched.sample(spec.duration * (i as f64 + 0.5) / n as f64).omega_rf)
            .sum::<f64>()
            / n as f64;
        assert!((mean / (TWO_PI * 2e6) - 1.0).abs() < 1e-9);

        // Single tread: midpoint convention.
        let one = staircase_schedule(
            &StaircaseSpec {
                n_steps: 1,
                ..spec
            },
            TWO_PI * 180e3,
        )
        .unwrap();
        assert!((one.sample(0.05).omega_rf - TWO_PI * 2e6).abs() < 1.0);

        // Refinement: many steps approach the linear ramp.
        let fine = staircase_schedule(
            &StaircaseSpec {
                n_steps: 1_000_000,
                ..spec
            },
            TWO_PI * 180e3,
        )
        .unwrap();
        let step = TWO_PI * 2e6 / 1e6;
        for k in 0..200 {
            let t = spec.duration * k as f64 / 200.0;
            let linear = TWO_PI * (1e6 + 2e6 * t / spec.duration);
            assert!((fine.sample(t).omega_rf - linear).abs() < 2.0 * step);
        }

        assert!(staircase_schedule(
            &StaircaseSpec {
                n_steps: 0,
                ..spec
            },
            0.0
        )
        .is_err());
    }

    #[test]
    fn phase_jump_concatenation() {
        let a = RfSchedule::constant(0.1, TWO_PI * 3e6, TWO_PI * 100e3).unwrap();
        let b = RfSchedule::constant(0.2, TWO_PI * 3e6, TWO_PI * 100e3).unwrap();
        let joined = a.with_phase_jump(&b, 0.05, std::f64::consts::PI).unwrap();
        assert!((joined.duration() - 0.25).abs() < 1e-12);
        assert_eq!(joined.phase_jumps, vec![(0.05, std::f64::consts::PI)]);
        // Zero jump is representable too.
        let smooth = a.with_phase_jump(&b, 0.05, 0.0).unwrap();
        assert_eq!(smooth.phase_jumps, vec![(0.05, 0.0)]);
        assert!(a.with_phase_jump(&b, 0.5, 0.0).is_err());
    }

    #[test]
    fn splitting_a_staircase_preserves_samples() {
        let spec = StaircaseSpec {
            f_start: 1e6,
            f_end: 2e6,
            n_steps: 7,
            duration: 0.07,
        };
        let sched = staircase_schedule(&spec, TWO_PI * 1e3).unwrap();
        let tail = RfSchedule::constant(0.01, TWO_PI * 2e6, TWO_PI * 1e3).unwrap();
        let cut = sched.with_phase_jump(&tail, 0.033, 0.1).unwrap();
        for k in 0..100 {
            let t = 0.033 * k as f64 / 100.0;
            assert_eq!(cut.sample(t).omega_rf, sched.sample(t).omega_rf, "t = {t}");
        }
    }

    #[test]
    fn zero_noise_leaves_schedule_unchanged() {
        let sched = RfSchedule::constant(1.0, TWO_PI * 3e6, TWO_PI * 100e3).unwrap();
        let model = FrequencyNoiseModel::white_from_psd(0.0, 7);
        let decorated = sched.clone().with_noise(&model, 1e-5);
        assert_eq!(decorated, sched);
    }

    #[test]
    fn rejects_nonpositive_rf_frequency() {
        assert!(RfSchedule::constant(1.0, -1.0, 0.0).is_err());
        assert!(RfSchedule::from_segments(vec![Segment::FreqRamp {
            duration: 1.0,
            omega_from: TWO_PI * 1e6,
            omega_to: -TWO_PI * 1e6,
            omega_rabi: 0.0,
        }])
        .is_err());
    }
}
