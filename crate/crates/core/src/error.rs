use thiserror::Error;

use crate::enumerate::Census;
use crate::frac::Frac12;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("denominator of {numer}/{denom} does not divide 12")]
    NotTwelfths { numer: i64, denom: i64 },

    #[error("zero denominator")]
    ZeroDenominator,

    #[error("cannot parse fraction {0:?}")]
    BadFraction(String),

    #[error("marking {0} is not a slicing value of any Kodaira type")]
    MarkingNotInTable(Frac12),

    #[error("({0}, {1}) is not an allowed slicing pair")]
    BadSlicingPair(Frac12, Frac12),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),

    #[error("total weight {0} is not positive; pruning cannot reach a stable tree")]
    NonPositiveTotalWeight(Frac12),

    #[error("pruning leaf {leaf} yields marking {t}, outside the Kodaira table")]
    MarkingOutsideTable { leaf: String, t: Frac12 },

    #[error("pruning stalled: internal vertex {0} has non-positive weight but no leaf can be pruned")]
    StalledPruning(String),

    #[error("invalid pruning order: {0}")]
    InvalidOrder(String),

    #[error("cannot flip a curve with A^2 = {0}")]
    DegenerateCurve(String),

    #[error("height {n} is too small (need n >= {min})")]
    HeightTooSmall { n: i64, min: i64 },

    #[error("epsilon {eps} outside (0, {upper})")]
    EpsilonOutOfRange { eps: String, upper: String },

    #[error("enumeration cap exceeded: {reason}")]
    CapExceeded { reason: String, partial: Box<Census> },

    #[error("point {0} is not log canonical")]
    NotLC(String),

    #[error("inconsistent vanishing orders: {0}")]
    InconsistentOrders(String),

    #[error("invalid Weierstrass profile: {0}")]
    InvalidProfile(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable name used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotTwelfths { .. } => "NotTwelfths",
            Error::ZeroDenominator => "ZeroDenominator",
            Error::BadFraction(_) => "BadFraction",
            Error::MarkingNotInTable(_) => "MarkingNotInTable",
            Error::BadSlicingPair(..) => "BadSlicingPair",
            Error::InvalidTree(_) => "InvalidTree",
            Error::UnknownVertex(_) => "UnknownVertex",
            Error::NonPositiveTotalWeight(_) => "NonPositiveTotalWeight",
            Error::MarkingOutsideTable { .. } => "MarkingOutsideTable",
            Error::StalledPruning(_) => "StalledPruning",
            Error::InvalidOrder(_) => "InvalidOrder",
            Error::DegenerateCurve(_) => "DegenerateCurve",
            Error::HeightTooSmall { .. } => "HeightTooSmall",
            Error::EpsilonOutOfRange { .. } => "EpsilonOutOfRange",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::NotLC(_) => "NotLC",
            Error::InconsistentOrders(_) => "InconsistentOrders",
            Error::InvalidProfile(_) => "InvalidProfile",
            Error::Json(_) => "Json",
            Error::Io(_) => "Io",
        }
    }
}
