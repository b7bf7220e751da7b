//! Run configuration: a small TOML dialect with strict unknown-key rejection.
//! Parsing collects every problem it can find (with line numbers) instead of
//! stopping at the first.

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::constants::{gauss, gauss_per_cm, gauss_per_cm2, PhysicalConstants};
use crate::error::{ConfigError, Error, Result};
use crate::field::{IoffePritchardField, TrapPotentialEvaluator};
use crate::noise::FrequencyNoiseModel;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Static field block. Either the field parameters are given directly, or
/// `calibrate = true` reconstructs them from the measured trap frequencies
/// (an explicit `b_prime_gauss_per_cm` then overrides the calibrated
/// gradient).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub b0_gauss: f64,
    pub b_prime_gauss_per_cm: Option<f64>,
    pub b_dprime_gauss_per_cm2: Option<f64>,
    pub omega_x_hz: Option<f64>,
    pub omega_radial_hz: Option<f64>,
    pub calibrate: bool,
}

impl Default for FieldConfig {
    fn default() -> Self {
        // The reference setup: measured gradient plus axial curvature
        // calibrated from the measured oscillation frequencies.
        Self {
            b0_gauss: 1.8,
            b_prime_gauss_per_cm: Some(225.0),
            b_dprime_gauss_per_cm2: None,
            omega_x_hz: Some(21.0),
            omega_radial_hz: Some(200.0),
            calibrate: true,
        }
    }
}

impl FieldConfig {
    pub fn build_trap(&self, constants: &PhysicalConstants) -> Result<TrapPotentialEvaluator> {
        let field = if self.calibrate {
            let (Some(fx), Some(fr)) = (self.omega_x_hz, self.omega_radial_hz) else {
                return Err(Error::Config(vec![ConfigError::new(
                    None,
                    "calibrate = true needs omega_x_hz and omega_radial_hz",
                )]));
            };
            let mut f = IoffePritchardField::calibrate_from_quic(
                TWO_PI * fx,
                TWO_PI * fr,
                gauss(self.b0_gauss),
                2,
                constants,
            )?;
            if let Some(bp) = self.b_prime_gauss_per_cm {
                f = IoffePritchardField::new(f.b0, gauss_per_cm(bp), f.b_dprime)?;
            }
            f
        } else {
            let Some(bp) = self.b_prime_gauss_per_cm else {
                return Err(Error::Config(vec![ConfigError::new(
                    None,
                    "field needs b_prime_gauss_per_cm (or calibrate = true)",
                )]));
            };
            IoffePritchardField::new(
                gauss(self.b0_gauss),
                gauss_per_cm(bp),
                gauss_per_cm2(self.b_dprime_gauss_per_cm2.unwrap_or(0.0)),
            )?
        };
        Ok(TrapPotentialEvaluator::new(field, *constants))
    }
}

/// Rf drive block. Exactly one of `delta_mhz` / `omega_rf_mhz`; the coupling
/// from `rabi_khz` or `b1_gauss`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RfConfig {
    pub delta_mhz: Option<f64>,
    pub omega_rf_mhz: Option<f64>,
    pub rabi_khz: Option<f64>,
    pub b1_gauss: Option<f64>,
}

impl RfConfig {
    /// Detuning in rad/s given the trap's center resonance energy V0.
    pub fn delta(&self, v0: f64, constants: &PhysicalConstants) -> Result<f64> {
        match (self.delta_mhz, self.omega_rf_mhz) {
            (Some(d), None) => Ok(TWO_PI * d * 1e6),
            (None, Some(f)) => Ok(TWO_PI * f * 1e6 - v0 / constants.hbar),
            _ => Err(Error::Config(vec![ConfigError::new(
                None,
                "rf needs exactly one of delta_mhz / omega_rf_mhz",
            )])),
        }
    }

    /// Rabi frequency in rad/s.
    pub fn omega_rabi(&self, constants: &PhysicalConstants) -> Result<f64> {
        match (self.rabi_khz, self.b1_gauss) {
            (Some(r), None) => Ok(TWO_PI * r * 1e3),
            (None, Some(b1)) => crate::dressed::rabi_from_field_amplitude(gauss(b1), constants),
            (None, None) => Err(Error::Config(vec![ConfigError::new(
                None,
                "rf needs rabi_khz or b1_gauss",
            )])),
            _ => Err(Error::Config(vec![ConfigError::new(
                None,
                "rf takes rabi_khz or b1_gauss, not both",
            )])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_particles: usize,
    pub temperature_uk: f64,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_particles: 1000,
            temperature_uk: 1.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    /// "smooth" linear chirp or "staircase" DDS ramp.
    pub kind: String,
    pub ramp_ms: f64,
    pub hold_ms: f64,
    pub staircase_steps: Option<usize>,
    pub phase_jump_rad: Option<f64>,
    /// Time of the synthesizer hand-off, measured from the start of the hold.
    pub jump_time_ms: Option<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            kind: "smooth".into(),
            ramp_ms: 150.0,
            hold_ms: 100.0,
            staircase_steps: None,
            phase_jump_rad: None,
            jump_time_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// "none", "white_fwhm", "white_psd", or "ou".
    pub noise_kind: String,
    pub target_fwhm_hz: Option<f64>,
    pub psd_hz2_per_hz: Option<f64>,
    pub ou_tau_s: Option<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            noise_kind: "none".into(),
            target_fwhm_hz: None,
            psd_hz2_per_hz: None,
            ou_tau_s: None,
        }
    }
}

impl NoiseConfig {
    pub fn build(&self, seed: u64) -> Result<Option<FrequencyNoiseModel>> {
        let need = |opt: Option<f64>, key: &str| {
            opt.ok_or_else(|| {
                Error::Config(vec![ConfigError::new(
                    None,
                    format!("noise_kind = \"{}\" needs {key}", self.noise_kind),
                )])
            })
        };
        match self.noise_kind.as_str() {
            "none" => Ok(None),
            "white_fwhm" => Ok(Some(FrequencyNoiseModel::calibrate_to_fwhm(
                need(self.target_fwhm_hz, "target_fwhm_hz")?,
                seed,
            ))),
            "white_psd" => Ok(Some(FrequencyNoiseModel::white_from_psd(
                need(self.psd_hz2_per_hz, "psd_hz2_per_hz")?,
                seed,
            ))),
            "ou" => Ok(Some(FrequencyNoiseModel::ou_from_fwhm(
                need(self.target_fwhm_hz, "target_fwhm_hz")?,
                need(self.ou_tau_s, "ou_tau_s")?,
                seed,
            )?)),
            other => Err(Error::Config(vec![ConfigError::new(
                None,
                format!("unknown noise_kind \"{other}\""),
            )])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepConfig {
    /// "delta_mhz" or "rabi_khz".
    pub parameter: Option<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub snapshot_stride: usize,
    /// "csv" or "json".
    pub format: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            snapshot_stride: 200,
            format: "csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceConfig {
    pub mod_depth_khz: f64,
    pub f_start_hz: Option<f64>,
    pub f_stop_hz: Option<f64>,
    pub n_points: usize,
    pub excite_ms: f64,
    pub tof_ms: f64,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        Self {
            mod_depth_khz: 5.0,
            f_start_hz: None,
            f_stop_hz: None,
            n_points: 13,
            excite_ms: 150.0,
            tof_ms: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub n_atoms: f64,
    pub f1_hz: f64,
    pub f2_hz: f64,
    pub f3_hz: f64,
    pub temperature_nk: Option<f64>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            n_atoms: 1e5,
            f1_hz: 600.0,
            f2_hz: 21.0,
            f3_hz: 2.0,
            temperature_nk: None,
        }
    }
}

/// Fully validated run configuration; every block has defaults, so an empty
/// file is valid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    pub field: FieldConfig,
    pub rf: RfConfig,
    pub ensemble: EnsembleConfig,
    pub schedule: ScheduleConfig,
    pub noise: NoiseConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
    pub resonance: ResonanceConfig,
    pub estimate: EstimateConfig,
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Config(vec![ConfigError::new(None, e.to_string())]))
    }
}

/// Collects configuration errors with best-effort line attribution by
/// scanning the raw text for `key =` occurrences.
struct Parser<'a> {
    text: &'a str,
    errors: Vec<ConfigError>,
}

impl<'a> Parser<'a> {
    fn line_of_key(&self, key: &str) -> Option<usize> {
        self.text
            .lines()
            .position(|l| {
                let t = l.trim_start();
                t.starts_with(key) && t[key.len()..].trim_start().starts_with('=')
            })
            .map(|i| i + 1)
    }

    fn line_of_block(&self, block: &str) -> Option<usize> {
        let header = format!("[{block}]");
        self.text
            .lines()
            .position(|l| l.trim() == header)
            .map(|i| i + 1)
    }

    fn err_key(&mut self, key: &str, message: impl Into<String>) {
        self.errors
            .push(ConfigError::new(self.line_of_key(key), message));
    }

    fn number(&mut self, table: &Table, key: &str, out: &mut Option<f64>) {
        match table.get(key) {
            None => {}
            Some(Value::Integer(i)) => *out = Some(*i as f64),
            Some(Value::Float(f)) if f.is_finite() => *out = Some(*f),
            Some(Value::Float(f)) => {
                self.err_key(key, format!("{key} must be finite, got {f}"));
            }
            Some(v) => self.err_key(key, format!("{key} must be a number, got {}", v.type_str())),
        }
    }

    fn number_required(&mut self, table: &Table, key: &str, out: &mut f64) {
        let mut v = None;
        self.number(table, key, &mut v);
        if let Some(v) = v {
            *out = v;
        }
    }

    fn positive(&mut self, key: &str, value: f64) {
        if !(value > 0.0) {
            self.err_key(key, format!("{key} must be > 0, got {value}"));
        }
    }

    fn integer(&mut self, table: &Table, key: &str, out: &mut Option<u64>) {
        match table.get(key) {
            None => {}
            Some(Value::Integer(i)) if *i >= 0 => *out = Some(*i as u64),
            Some(Value::Integer(i)) => {
                self.err_key(key, format!("{key} must be >= 0, got {i}"));
            }
            Some(v) => {
                self.err_key(key, format!("{key} must be an integer, got {}", v.type_str()));
            }
        }
    }

    fn string(&mut self, table: &Table, key: &str, out: &mut String) {
        match table.get(key) {
            None => {}
            Some(Value::String(s)) => *out = s.clone(),
            Some(v) => self.err_key(key, format!("{key} must be a string, got {}", v.type_str())),
        }
    }

    fn boolean(&mut self, table: &Table, key: &str, out: &mut bool) {
        match table.get(key) {
            None => {}
            Some(Value::Boolean(b)) => *out = *b,
            Some(v) => self.err_key(key, format!("{key} must be a boolean, got {}", v.type_str())),
        }
    }

    fn check_keys(&mut self, table: &Table, block: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                let line = self.line_of_key(key).or_else(|| self.line_of_block(block));
                self.errors.push(ConfigError::new(
                    line,
                    format!("unknown key \"{key}\" in [{block}]"),
                ));
            }
        }
    }

    fn block<'t>(&mut self, root: &'t Table, name: &str) -> Option<&'t Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(v) => {
                self.errors.push(ConfigError::new(
                    self.line_of_key(name),
                    format!("[{name}] must be a table, got {}", v.type_str()),
                ));
                None
            }
        }
    }
}

/// Parse and validate the TOML run configuration, reporting all problems.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e.span().map(|span| text[..span.start].lines().count());
        Error::Config(vec![ConfigError::new(line, e.message().to_string())])
    })?;

    let mut p = Parser {
        text,
        errors: Vec::new(),
    };
    let mut cfg = RunConfig::default();

    const BLOCKS: [&str; 9] = [
        "field",
        "rf",
        "ensemble",
        "schedule",
        "noise",
        "sweep",
        "output",
        "resonance",
        "estimate",
    ];
    for key in root.keys() {
        if !BLOCKS.contains(&key.as_str()) {
            let line = p.line_of_block(key).or_else(|| p.line_of_key(key));
            p.errors
                .push(ConfigError::new(line, format!("unknown block [{key}]")));
        }
    }

    if let Some(t) = p.block(&root, "field") {
        p.check_keys(
            t,
            "field",
            &[
                "B0_gauss",
                "b_prime_gauss_per_cm",
                "b_dprime_gauss_per_cm2",
                "omega_x_hz",
                "omega_radial_hz",
                "calibrate",
            ],
        );
        p.number_required(t, "B0_gauss", &mut cfg.field.b0_gauss);
        p.positive("B0_gauss", cfg.field.b0_gauss);
        p.number(t, "b_prime_gauss_per_cm", &mut cfg.field.b_prime_gauss_per_cm);
        if let Some(v) = cfg.field.b_prime_gauss_per_cm {
            p.positive("b_prime_gauss_per_cm", v);
        }
        p.number(
            t,
            "b_dprime_gauss_per_cm2",
            &mut cfg.field.b_dprime_gauss_per_cm2,
        );
        if let Some(v) = cfg.field.b_dprime_gauss_per_cm2 {
            if v < 0.0 {
                p.err_key(
                    "b_dprime_gauss_per_cm2",
                    format!("b_dprime_gauss_per_cm2 must be >= 0, got {v}"),
                );
            }
        }
        p.number(t, "omega_x_hz", &mut cfg.field.omega_x_hz);
        p.number(t, "omega_radial_hz", &mut cfg.field.omega_radial_hz);
        p.boolean(t, "calibrate", &mut cfg.field.calibrate);
        if cfg.field.calibrate
            && (cfg.field.omega_x_hz.is_none() || cfg.field.omega_radial_hz.is_none())
        {
            let line = p.line_of_key("calibrate");
            p.errors.push(ConfigError::new(
                line,
                "calibrate = true needs omega_x_hz and omega_radial_hz",
            ));
        }
        if !cfg.field.calibrate && cfg.field.b_prime_gauss_per_cm.is_none() {
            let line = p.line_of_block("field");
            p.errors.push(ConfigError::new(
                line,
                "field needs b_prime_gauss_per_cm (or calibrate = true)",
            ));
        }
    }

    if let Some(t) = p.block(&root, "rf") {
        p.check_keys(t, "rf", &["delta_mhz", "omega_rf_mhz", "rabi_khz", "b1_gauss"]);
        p.number(t, "delta_mhz", &mut cfg.rf.delta_mhz);
        p.number(t, "omega_rf_mhz", &mut cfg.rf.omega_rf_mhz);
        p.number(t, "rabi_khz", &mut cfg.rf.rabi_khz);
        p.number(t, "b1_gauss", &mut cfg.rf.b1_gauss);
        if cfg.rf.delta_mhz.is_some() && cfg.rf.omega_rf_mhz.is_some() {
            let line = p.line_of_key("omega_rf_mhz");
            p.errors.push(ConfigError::new(
                line,
                "delta_mhz and omega_rf_mhz are mutually exclusive",
            ));
        }
        if cfg.rf.rabi_khz.is_some() && cfg.rf.b1_gauss.is_some() {
            let line = p.line_of_key("b1_gauss");
            p.errors.push(ConfigError::new(
                line,
                "rabi_khz and b1_gauss are mutually exclusive",
            ));
        }
        for (key, v) in [("rabi_khz", cfg.rf.rabi_khz), ("b1_gauss", cfg.rf.b1_gauss)] {
            if let Some(v) = v {
                if v < 0.0 {
                    p.err_key(key, format!("{key} must be >= 0, got {v}"));
                }
            }
        }
    }

    if let Some(t) = p.block(&root, "ensemble") {
        p.check_keys(t, "ensemble", &["n_particles", "temperature_uk", "seed"]);
        let mut n = None;
        p.integer(t, "n_particles", &mut n);
        if let Some(n) = n {
            if n == 0 {
                p.err_key("n_particles", "n_particles must be >= 1");
            } else {
                cfg.ensemble.n_particles = n as usize;
            }
        }
        p.number_required(t, "temperature_uk", &mut cfg.ensemble.temperature_uk);
        p.positive("temperature_uk", cfg.ensemble.temperature_uk);
        let mut seed = None;
        p.integer(t, "seed", &mut seed);
        if let Some(s) = seed {
            cfg.ensemble.seed = s;
        }
    }

    if let Some(t) = p.block(&root, "schedule") {
        p.check_keys(
            t,
            "schedule",
            &[
                "kind",
                "ramp_ms",
                "hold_ms",
                "staircase_steps",
                "phase_jump_rad",
                "jump_time_ms",
            ],
        );
        p.string(t, "kind", &mut cfg.schedule.kind);
        if !["smooth", "staircase"].contains(&cfg.schedule.kind.as_str()) {
            p.err_key(
                "kind",
                format!(
                    "schedule kind must be \"smooth\" or \"staircase\", got \"{}\"",
                    cfg.schedule.kind
                ),
            );
        }
        p.number_required(t, "ramp_ms", &mut cfg.schedule.ramp_ms);
        p.positive("ramp_ms", cfg.schedule.ramp_ms);
        p.number_required(t, "hold_ms", &mut cfg.schedule.hold_ms);
        p.positive("hold_ms", cfg.schedule.hold_ms);
        let mut steps = None;
        p.integer(t, "staircase_steps", &mut steps);
        if let Some(s) = steps {
            if s == 0 {
                p.err_key("staircase_steps", "staircase_steps must be >= 1");
            } else {
                cfg.schedule.staircase_steps = Some(s as usize);
            }
        }
        p.number(t, "phase_jump_rad", &mut cfg.schedule.phase_jump_rad);
        p.number(t, "jump_time_ms", &mut cfg.schedule.jump_time_ms);
        if let Some(v) = cfg.schedule.jump_time_ms {
            if !(v > 0.0) || v >= cfg.schedule.hold_ms {
                p.err_key(
                    "jump_time_ms",
                    format!("jump_time_ms must lie inside the hold (0, {})", cfg.schedule.hold_ms),
                );
            }
        }
        if cfg.schedule.kind == "staircase" && cfg.schedule.staircase_steps.is_none() {
            let line = p.line_of_key("kind");
            p.errors.push(ConfigError::new(
                line,
                "schedule kind \"staircase\" needs staircase_steps",
            ));
        }
    }

    if let Some(t) = p.block(&root, "noise") {
        p.check_keys(
            t,
            "noise",
            &["noise_kind", "target_fwhm_hz", "psd_hz2_per_hz", "ou_tau_s"],
        );
        p.string(t, "noise_kind", &mut cfg.noise.noise_kind);
        if !["none", "white_fwhm", "white_psd", "ou"].contains(&cfg.noise.noise_kind.as_str()) {
            p.err_key(
                "noise_kind",
                format!(
                    "noise_kind must be one of none/white_fwhm/white_psd/ou, got \"{}\"",
                    cfg.noise.noise_kind
                ),
            );
        }
        p.number(t, "target_fwhm_hz", &mut cfg.noise.target_fwhm_hz);
        p.number(t, "psd_hz2_per_hz", &mut cfg.noise.psd_hz2_per_hz);
        p.number(t, "ou_tau_s", &mut cfg.noise.ou_tau_s);
        for (key, v) in [
            ("target_fwhm_hz", cfg.noise.target_fwhm_hz),
            ("psd_hz2_per_hz", cfg.noise.psd_hz2_per_hz),
            ("ou_tau_s", cfg.noise.ou_tau_s),
        ] {
            if let Some(v) = v {
                if v < 0.0 {
                    p.err_key(key, format!("{key} must be >= 0, got {v}"));
                }
            }
        }
    }

    if let Some(t) = p.block(&root, "sweep") {
        p.check_keys(t, "sweep", &["parameter", "values"]);
        let mut param = String::new();
        p.string(t, "parameter", &mut param);
        if !param.is_empty() {
            if !["delta_mhz", "rabi_khz"].contains(&param.as_str()) {
                p.err_key(
                    "parameter",
                    format!("sweep parameter must be delta_mhz or rabi_khz, got \"{param}\""),
                );
            } else {
                cfg.sweep.parameter = Some(param);
            }
        }
        match t.get("values") {
            None => {}
            Some(Value::Array(arr)) => {
                let mut values = Vec::with_capacity(arr.len());
                for v in arr {
                    match v {
                        Value::Integer(i) => values.push(*i as f64),
                        Value::Float(f) if f.is_finite() => values.push(*f),
                        other => p.err_key(
                            "values",
                            format!("sweep values must be numbers, got {}", other.type_str()),
                        ),
                    }
                }
                cfg.sweep.values = values;
            }
            Some(v) => p.err_key(
                "values",
                format!("sweep values must be an array, got {}", v.type_str()),
            ),
        }
        if cfg.sweep.parameter.is_some() && cfg.sweep.values.is_empty() {
            p.err_key("parameter", "sweep with a parameter needs nonempty values");
        }
    }

    if let Some(t) = p.block(&root, "output") {
        p.check_keys(t, "output", &["snapshot_stride", "format"]);
        let mut stride = None;
        p.integer(t, "snapshot_stride", &mut stride);
        if let Some(s) = stride {
            if s == 0 {
                p.err_key("snapshot_stride", "snapshot_stride must be >= 1");
            } else {
                cfg.output.snapshot_stride = s as usize;
            }
        }
        p.string(t, "format", &mut cfg.output.format);
        if !["csv", "json"].contains(&cfg.output.format.as_str()) {
            p.err_key(
                "format",
                format!("output format must be csv or json, got \"{}\"", cfg.output.format),
            );
        }
    }

    if let Some(t) = p.block(&root, "resonance") {
        p.check_keys(
            t,
            "resonance",
            &[
                "mod_depth_khz",
                "f_start_hz",
                "f_stop_hz",
                "n_points",
                "excite_ms",
                "tof_ms",
            ],
        );
        p.number_required(t, "mod_depth_khz", &mut cfg.resonance.mod_depth_khz);
        p.positive("mod_depth_khz", cfg.resonance.mod_depth_khz);
        p.number(t, "f_start_hz", &mut cfg.resonance.f_start_hz);
        p.number(t, "f_stop_hz", &mut cfg.resonance.f_stop_hz);
        if let (Some(a), Some(b)) = (cfg.resonance.f_start_hz, cfg.resonance.f_stop_hz) {
            if !(b > a && a > 0.0) {
                p.err_key("f_stop_hz", "need 0 < f_start_hz < f_stop_hz");
            }
        }
        let mut n = None;
        p.integer(t, "n_points", &mut n);
        if let Some(n) = n {
            if n < 3 {
                p.err_key("n_points", "n_points must be >= 3");
            } else {
                cfg.resonance.n_points = n as usize;
            }
        }
        p.number_required(t, "excite_ms", &mut cfg.resonance.excite_ms);
        p.positive("excite_ms", cfg.resonance.excite_ms);
        p.number_required(t, "tof_ms", &mut cfg.resonance.tof_ms);
        if cfg.resonance.tof_ms < 0.0 {
            p.err_key("tof_ms", "tof_ms must be >= 0");
        }
    }

    if let Some(t) = p.block(&root, "estimate") {
        p.check_keys(
            t,
            "estimate",
            &["n_atoms", "f1_hz", "f2_hz", "f3_hz", "temperature_nk"],
        );
        p.number_required(t, "n_atoms", &mut cfg.estimate.n_atoms);
        if !(cfg.estimate.n_atoms >= 1.0) {
            p.err_key("n_atoms", format!("n_atoms must be >= 1, got {}", cfg.estimate.n_atoms));
        }
        p.number_required(t, "f1_hz", &mut cfg.estimate.f1_hz);
        p.number_required(t, "f2_hz", &mut cfg.estimate.f2_hz);
        p.number_required(t, "f3_hz", &mut cfg.estimate.f3_hz);
        for (key, v) in [
            ("f1_hz", cfg.estimate.f1_hz),
            ("f2_hz", cfg.estimate.f2_hz),
            ("f3_hz", cfg.estimate.f3_hz),
        ] {
            p.positive(key, v);
        }
        p.number(t, "temperature_nk", &mut cfg.estimate.temperature_nk);
        if let Some(v) = cfg.estimate.temperature_nk {
            p.positive("temperature_nk", v);
        }
    }

    if p.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(p.errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.ensemble.n_particles, 1000);
        assert_eq!(cfg.field.b_prime_gauss_per_cm, Some(225.0));
    }

    #[test]
    fn minimal_characterize_config() {
        let cfg = parse_config(
            "[rf]\ndelta_mhz = 2.0\nrabi_khz = 180\n",
        )
        .unwrap();
        assert_eq!(cfg.rf.delta_mhz, Some(2.0));
        assert_eq!(cfg.rf.rabi_khz, Some(180.0));
        let c = PhysicalConstants::rb87();
        let trap = cfg.field.build_trap(&c).unwrap();
        let delta = cfg.rf.delta(trap.v0(), &c).unwrap();
        assert!((delta / (TWO_PI * 2e6) - 1.0).abs() < 1e-12);
        assert!(
            (cfg.rf.omega_rabi(&c).unwrap() / (TWO_PI * 180e3) - 1.0).abs() < 1e-12
        );
    }

    #[test]
    fn mutual_exclusion_and_unknown_keys_are_all_reported() {
        let text = "\
[rf]
delta_mhz = 2.0
omega_rf_mhz = 3.26
rabi_khz = 180
typo_key = 1

[ensemble]
n_particles = 0
";
        let err = parse_config(text).unwrap_err();
        let Error::Config(errors) = err else {
            panic!("expected config error")
        };
        let messages: Vec<&str> = errors.iter().map(|e| e.message.as_str()).collect();
        assert!(messages.iter().any(|m| m.contains("mutually exclusive")));
        assert!(messages.iter().any(|m| m.contains("typo_key")));
        assert!(messages.iter().any(|m| m.contains("n_particles")));
        assert_eq!(errors.len(), 3);
        // Lines attributed.
        let typo = errors.iter().find(|e| e.message.contains("typo_key")).unwrap();
        assert_eq!(typo.line, Some(5));
        let excl = errors
            .iter()
            .find(|e| e.message.contains("mutually exclusive"))
            .unwrap();
        assert_eq!(excl.line, Some(3));
    }

    #[test]
    fn unknown_block_rejected() {
        let err = parse_config("[fields]\nB0_gauss = 1.8\n").unwrap_err();
        assert!(err.to_string().contains("unknown block"));
    }

    #[test]
    fn type_and_range_errors() {
        let text = "\
[field]
B0_gauss = \"strong\"

[noise]
noise_kind = \"pink\"

[schedule]
kind = \"staircase\"
";
        let Error::Config(errors) = parse_config(text).unwrap_err() else {
            panic!()
        };
        let joined = errors
            .iter()
            .map(|e| e.message.clone())
            .collect::<Vec<_>>()
            .join("; ");
        assert!(joined.contains("B0_gauss must be a number"));
        assert!(joined.contains("noise_kind"));
        assert!(joined.contains("staircase_steps"));
    }

    #[test]
    fn omega_rf_instead_of_delta() {
        let cfg = parse_config("[rf]\nomega_rf_mhz = 3.26\nrabi_khz = 180\n").unwrap();
        let c = PhysicalConstants::rb87();
        let trap = cfg.field.build_trap(&c).unwrap();
        let delta = cfg.rf.delta(trap.v0(), &c).unwrap();
        // 3.26 MHz - 1.26 MHz = 2.0 MHz.
        assert!((delta / (TWO_PI * 2e6) - 1.0).abs() < 0.01);
    }

    #[test]
    fn b1_gauss_sets_rabi() {
        let cfg = parse_config("[rf]\ndelta_mhz = 2\nb1_gauss = 0.514\n").unwrap();
        let c = PhysicalConstants::rb87();
        let omega = cfg.rf.omega_rabi(&c).unwrap();
        assert!((omega / (TWO_PI * 180e3) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn calibrated_field_block() {
        let cfg = parse_config(
            "[field]\nB0_gauss = 1.8\nomega_x_hz = 21\nomega_radial_hz = 200\ncalibrate = true\nb_prime_gauss_per_cm = 225\n",
        )
        .unwrap();
        let c = PhysicalConstants::rb87();
        let trap = cfg.field.build_trap(&c).unwrap();
        assert!((trap.field.b_prime / 2.25 - 1.0).abs() < 1e-12);
        assert!(trap.field.b_dprime > 0.0);
    }

    #[test]
    fn json_round_trip() {
        let cfg = parse_config(
            "[rf]\ndelta_mhz = 2.0\nrabi_khz = 180\n[ensemble]\nseed = 99\n[sweep]\nparameter = \"delta_mhz\"\nvalues = [1.7, 6.7, 8.7]\n",
        )
        .unwrap();
        let json = cfg.to_json();
        let back = RunConfig::from_json(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn syntax_error_carries_line() {
        let err = parse_config("[rf\ndelta_mhz = 2\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
