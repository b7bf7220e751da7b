use thiserror::Error;

/// Errors produced by the physics and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("position outside validity box: {coord} = {value:.6e} m exceeds |{coord}| <= {limit:.6e} m")]
    OutOfBox {
        coord: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible calibration: {0}")]
    InfeasibleCalibration(String),

    #[error("no resonance shell: detuning must be positive, got Delta = {0:.6e} rad/s")]
    NoShell(f64),

    #[error("mixing angle undefined: local detuning and Rabi frequency are both zero")]
    UndefinedAngle,

    #[error("degenerate gradient: Omega = 0 within one step of the resonance shell")]
    DegenerateGradient,

    #[error("singular pendulum: z0 = 0")]
    SingularPendulum,

    #[error("saddle point: Hessian eigenvalue {index} is {value:.6e} <= 0")]
    SaddlePoint { index: usize, value: f64 },

    #[error("characterization failed: {message}")]
    Characterization { message: String, profile: Vec<(f64, f64)> },

    #[error("time step too large: dt = {dt:.3e} s exceeds 1/(50 f_trans_max) = {limit:.3e} s")]
    StepSize { dt: f64, limit: f64 },

    #[error("empty cloud: total survival weight is zero")]
    EmptyCloud,

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("configuration errors:\n{}", format_config_errors(.0))]
    Config(Vec<ConfigError>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One configuration problem, with the line it was found on when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

fn format_config_errors(errors: &[ConfigError]) -> String {
    errors
        .iter()
        .map(|e| match e.line {
            Some(n) => format!("  line {}: {}", n, e.message),
            None => format!("  {}", e.message),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub type Result<T> = std::result::Result<T, Error>;
