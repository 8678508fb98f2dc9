use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("decay rate {0} outside the underdamped range [0, 2)")]
    GammaOutOfRange(f64),

    #[error("duration must be positive and finite, got {0}")]
    InvalidDuration(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("duration {duration} too short: a singular arc needs T > {minimum}")]
    DurationTooShort { duration: f64, minimum: f64 },

    #[error("malformed control segment: {0}")]
    MalformedSegment(String),

    #[error("no sign change of the {what} residual in ({lo}, {hi})")]
    NoSignChange {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("switching times out of order: t1 = {t1}, t2 = {t2}")]
    SwitchOrdering { t1: f64, t2: f64 },

    #[error("sequence element {name} = {value} is not positive")]
    NegativeElement { name: &'static str, value: f64 },

    #[error("adjoint coefficient {0} is singular (sine of the free interval vanishes)")]
    SingularCoefficient(&'static str),

    #[error("control area {area} differs from pi/2 by more than {tolerance}")]
    AreaMismatch { area: f64, tolerance: f64 },

    #[error("polynomial degree {0} outside the supported range 7..=12")]
    DegreeOutOfRange(usize),

    #[error("at least {minimum} steps required, got {steps}")]
    TooFewSteps { steps: usize, minimum: usize },
}

impl Error {
    /// Short machine-readable code used in CSV outputs.
    /// Errors caused by out-of-range inputs rather than by the physics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::GammaOutOfRange(_)
                | Error::InvalidDuration(_)
                | Error::InvalidParameter(_)
                | Error::DegreeOutOfRange(_)
                | Error::TooFewSteps { .. }
                | Error::MalformedSegment(_)
        )
    }

    pub fn code(&self) -> &'static str {
        match self {
            Error::GammaOutOfRange(_) => "gamma_out_of_range",
            Error::InvalidDuration(_) => "invalid_duration",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DurationTooShort { .. } => "duration_too_short",
            Error::MalformedSegment(_) => "malformed_segment",
            Error::NoSignChange { .. } => "no_sign_change",
            Error::SwitchOrdering { .. } => "switch_ordering",
            Error::NegativeElement { .. } => "negative_element",
            Error::SingularCoefficient(_) => "singular_coefficient",
            Error::AreaMismatch { .. } => "area_mismatch",
            Error::DegreeOutOfRange(_) => "degree_out_of_range",
            Error::TooFewSteps { .. } => "too_few_steps",
        }
    }
}
