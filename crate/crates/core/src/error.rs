use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant to a stable exit
/// code and a machine-readable reason string (see [`GfhError::reason`]).
#[derive(Debug, Error)]
pub enum GfhError {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("coefficient field {field} is not valid for weights {weights:?}: characteristic divides a weight")]
    FieldGate { field: String, weights: Vec<u32> },

    #[error("factor too large: factor {index} has an eigenvalue at distance {distance:.3e} from -1")]
    FactorTooLarge { index: usize, distance: f64 },

    #[error("quadratic form is not elementary: fiber block is singular")]
    NotElementary,

    #[error("{what} = {value} out of range (bound {bound})")]
    OutOfRange { what: &'static str, value: f64, bound: f64 },

    #[error("non-isolated fixed points at action {action} (fixed subspace of complex dimension {dimension})")]
    NonIsolated { action: f64, dimension: usize },

    #[error("degenerate fixed point at action {action}: Hessian kernel has dimension {kernel}")]
    Degenerate { action: f64, kernel: usize },

    #[error("t = {t} is a spectral parameter of the family; use a perturbed value")]
    SpectralParameter { t: f64 },

    #[error("numerical accuracy not reached: {0}")]
    Accuracy(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("periodicity violation: {0}")]
    Periodicity(String),

    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("window endpoint {value} collides with a bar endpoint; perturb the window")]
    EndpointCollision { value: f64 },

    #[error("invariance violated: {0}")]
    InvariantViolation(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("matching failure: {0}")]
    Matching(String),

    #[error("scene error: {0}")]
    Scene(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GfhError {
    /// Short machine-readable reason tag.
    pub fn reason(&self) -> &'static str {
        match self {
            GfhError::InvalidWeights(_) => "invalid_weights",
            GfhError::InvalidPoint(_) => "invalid_point",
            GfhError::FieldGate { .. } => "field_gate",
            GfhError::FactorTooLarge { .. } => "factor_too_large",
            GfhError::NotElementary => "not_elementary",
            GfhError::OutOfRange { .. } => "out_of_range",
            GfhError::NonIsolated { .. } => "non_isolated",
            GfhError::Degenerate { .. } => "degenerate",
            GfhError::SpectralParameter { .. } => "spectral_parameter",
            GfhError::Accuracy(_) => "accuracy",
            GfhError::Structural(_) => "structural",
            GfhError::Periodicity(_) => "periodicity_violation",
            GfhError::TheoremViolation(_) => "theorem_violation",
            GfhError::EndpointCollision { .. } => "endpoint_collision",
            GfhError::InvariantViolation(_) => "invariance_violation",
            GfhError::Unsupported(_) => "unsupported",
            GfhError::Matching(_) => "matching_failure",
            GfhError::Scene(_) => "scene",
            GfhError::Io(_) => "io",
            GfhError::Json(_) => "json",
        }
    }

    /// Stable status code shared by the CLI exit status and the C ABI:
    /// 2 invalid input or field gate, 3 theorem alarm, 4 I/O, 5 numerical.
    pub fn code(&self) -> u8 {
        use GfhError::*;
        match self {
            TheoremViolation(_) | Periodicity(_) => 3,
            Io(_) | Json(_) => 4,
            Accuracy(_) | Structural(_) | Matching(_) => 5,
            _ => 2,
        }
    }

    /// True for errors that signal a violated theorem rather than bad input.
    pub fn is_alarm(&self) -> bool {
        matches!(self, GfhError::TheoremViolation(_))
    }
}

pub type Result<T> = std::result::Result<T, GfhError>;
