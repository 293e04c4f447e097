use thiserror::Error;

pub type Result<T, E = KdfError> = std::result::Result<T, E>;

/// Errors raised by the library.
///
/// Variants that concern a single input carry a `parameter` path (for example
/// `lower_joint[1]` or `params.e`) so callers can report which value is at fault.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KdfError {
    #[error("pole at {parameter} = {value}")]
    Pole { parameter: String, value: f64 },

    #[error("invalid shape: {parameter}: {reason}")]
    Shape { parameter: String, reason: String },

    #[error("domain error: {parameter}: {reason}")]
    Domain { parameter: String, reason: String },

    #[error("series diverges at ({x}, {y}): diagonal magnitudes grew for {diagonals} consecutive diagonals")]
    Divergence { x: f64, y: f64, diagonals: usize },

    #[error("degenerate solution: {0}")]
    Degenerate(String),

    #[error("monomial action produces power x^{x_power} y^{y_power}, below the representable range")]
    NegativePower { x_power: i64, y_power: i64 },

    #[error("invalid parameter: {parameter}: {reason}")]
    Parameter { parameter: String, reason: String },
}

impl KdfError {
    pub(crate) fn domain(parameter: impl Into<String>, reason: impl Into<String>) -> Self {
        KdfError::Domain {
            parameter: parameter.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn shape(parameter: impl Into<String>, reason: impl Into<String>) -> Self {
        KdfError::Shape {
            parameter: parameter.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn parameter(parameter: impl Into<String>, reason: impl Into<String>) -> Self {
        KdfError::Parameter {
            parameter: parameter.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            KdfError::Pole { .. } => "PoleError",
            KdfError::Shape { .. } => "ShapeError",
            KdfError::Domain { .. } => "DomainError",
            KdfError::Divergence { .. } => "DivergenceError",
            KdfError::Degenerate(_) => "DegenerateError",
            KdfError::NegativePower { .. } => "NegativePowerError",
            KdfError::Parameter { .. } => "ParameterError",
        }
    }

    /// Offending parameter path, when the error concerns a single input.
    pub fn parameter_path(&self) -> Option<&str> {
        match self {
            KdfError::Pole { parameter, .. }
            | KdfError::Shape { parameter, .. }
            | KdfError::Domain { parameter, .. }
            | KdfError::Parameter { parameter, .. } => Some(parameter),
            _ => None,
        }
    }

    /// Prefix the parameter path, e.g. `e` becomes `params.e`.
    pub fn with_path_prefix(self, prefix: &str) -> Self {
        let join = |p: String| format!("{prefix}.{p}");
        match self {
            KdfError::Pole { parameter, value } => KdfError::Pole {
                parameter: join(parameter),
                value,
            },
            KdfError::Shape { parameter, reason } => KdfError::Shape {
                parameter: join(parameter),
                reason,
            },
            KdfError::Domain { parameter, reason } => KdfError::Domain {
                parameter: join(parameter),
                reason,
            },
            KdfError::Parameter { parameter, reason } => KdfError::Parameter {
                parameter: join(parameter),
                reason,
            },
            other => other,
        }
    }
}
