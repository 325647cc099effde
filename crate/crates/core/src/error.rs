use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular metric: |det g| = {det:e} is below the degeneracy threshold")]
    SingularMetric { det: f64 },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("point {point:?} lies outside the domain of chart `{chart}`: {reason}")]
    OutsideDomain {
        chart: String,
        point: [f64; 4],
        reason: String,
    },

    #[error("non-finite value encountered while evaluating {0}")]
    NonFinite(String),

    #[error("expected a 1-form, found grades {0:?}")]
    NotOneForm(Vec<usize>),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("unknown vector field `{field}` in scenario `{scenario}`")]
    UnknownField { scenario: String, field: String },

    #[error("scenario `{scenario}` failed validation: {reason}")]
    InvalidScenario { scenario: String, reason: String },

    #[error("scenario `{0}` declares no energy-momentum tensor")]
    MissingEnergyMomentum(String),

    #[error("charts cannot be unified: {0}")]
    ChartMismatch(String),

    #[error("coframe is not orthonormal: η reconstruction residual {0:e}")]
    NotOrthonormal(f64),

    #[error("fluid postulate violated: curl of d = {curl:e} exceeds {tolerance:e}")]
    PostulateViolated { curl: f64, tolerance: f64 },

    #[error("radius extrapolation diverges: {0}")]
    Convergence(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse expression `{expr}`: {reason}")]
    Expression { expr: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
