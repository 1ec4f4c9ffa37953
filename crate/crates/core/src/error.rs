use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature tolerance not met: value {value}, error estimate {estimate}")]
    ToleranceNotMet { value: f64, estimate: f64 },

    #[error("finite-difference grid too small: need at least {needed} nodes per axis, got {got}")]
    GridTooSmall { needed: usize, got: usize },

    #[error("degenerate pulse: {0}")]
    DegeneratePulse(String),

    #[error("invalid pulse parameters: {0}")]
    InvalidPulse(String),

    #[error("integrator step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("packet overlaps the pulse at t_in (tail mass {tail_mass:.3e}); use L >= {suggested_l:.6e}")]
    OverlapViolation { tail_mass: f64, suggested_l: f64 },

    #[error("coordinate box too small: tail mass {tail_mass:.3e} after widening to half-width {half_width:.6e}")]
    BoxTooSmall { tail_mass: f64, half_width: f64 },

    #[error("momentum grid too coarse: discrete norm deviates from 1 by {norm_error:.3e}")]
    GridTooCoarse { norm_error: f64 },

    #[error("Pryce operator is undefined at zero momentum")]
    ZeroMomentum,

    #[error("representation mismatch: {0}")]
    RepresentationMismatch(String),

    #[error("field is not constant over the packet (overlap {overlap:.3e})")]
    FieldNotConstant { overlap: f64 },

    #[error("boost rest-frame spin has no single matrix form; use rest_frame_spin")]
    NoMatrixForm,

    #[error("config error: {0}")]
    Config(String),

    #[error("at {point}: {source}")]
    AtPoint { point: String, source: Box<Error> },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn at(self, point: impl Into<String>) -> Error {
        Error::AtPoint { point: point.into(), source: Box::new(self) }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
