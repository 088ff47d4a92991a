use thiserror::Error;

/// Unified error type for the whole pipeline.
///
/// Variants map onto the CLI exit codes: parse errors exit 4, profile
/// rejections exit 3, numeric failures exit 5.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {span:?}: {message}")]
    Parse { message: String, span: (usize, usize) },

    #[error("config error: {0}")]
    Config(String),

    #[error("profile is not periodic: residual {residual:.3e} exceeds tolerance for every candidate period")]
    NonPeriodic { residual: f64 },

    #[error("degenerate zero of f near x = {x}: |f'| = {slope:.3e} below margin")]
    DegenerateZero { x: f64, slope: f64 },

    #[error("domain error evaluating profile at x = {x}: {message}")]
    Domain { x: f64, message: String },

    #[error("no tangency: C^2 = {c2} is not strictly below the band supremum {sup}")]
    NoTangency { c2: f64, sup: f64 },

    #[error("integration horizon {t_max} exceeded before turning/asymptote")]
    HorizonExceeded { t_max: f64 },

    #[error("regular y'-branch singular: |eps*C + x'| = {value:.3e} below threshold")]
    BranchSingular { value: f64 },

    #[error("point {x} outside the open band ({lo}, {hi})")]
    OutOfBand { x: f64, lo: f64, hi: f64 },

    #[error("solution span exhausted before the requested zero (span {span})")]
    SpanExhausted { span: f64 },

    #[error("trace is not periodic; operation needs a 4-omega period")]
    NotPeriodic,

    #[error("check not applicable: {0}")]
    NotApplicable(String),

    #[error("quadrature failed to converge on [{a}, {b}] (best error {err:.3e})")]
    QuadratureFailed { a: f64, b: f64, err: f64 },

    #[error("singular quadrature: integrand loses integrability inside ({a}, {b})")]
    QuadratureSingular { a: f64, b: f64 },

    #[error("ODE step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("conserved quantity drifted to {drift:.3e} at t = {t}; aborting trace")]
    ConservationDrift { t: f64, drift: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code for this error per the report contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Config(_) => 4,
            Error::NonPeriodic { .. } | Error::DegenerateZero { .. } => 3,
            _ => 5,
        }
    }
}
