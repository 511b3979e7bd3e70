use thiserror::Error;

use crate::model::VehicleKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid fleet: {0}")]
    InvalidFleet(String),

    #[error("expected a {expected} sortie, got {found}")]
    KindMismatch {
        expected: VehicleKind,
        found: VehicleKind,
    },

    #[error("robot speed must be positive (gait factor is singular at zero speed)")]
    SingularGait,

    #[error("invalid charging event: {0}")]
    InvalidEvent(String),

    #[error("insufficient energy: need {required}, have {available}")]
    InsufficientEnergy { required: f64, available: f64 },

    #[error("model too large: {sorties} sortie variables exceed the budget of {budget}")]
    ModelTooLarge { sorties: usize, budget: usize },

    #[error("big_M = {big_m} is below the required bound {required}")]
    BigMTooSmall { big_m: f64, required: f64 },

    #[error("LP name collision after sanitization: {0}")]
    NameCollision(String),

    #[error("LP parse error on line {line}: {msg}")]
    LpParse { line: usize, msg: String },

    #[error("malformed plan: {0}")]
    MalformedPlan(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no feasible plan: customers {0:?} cannot be served")]
    Unservable(Vec<usize>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
