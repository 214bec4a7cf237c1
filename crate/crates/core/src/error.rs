use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("operands live over different fields: {0}")]
    MixedFields(String),
    #[error("{0} is not a supported prime modulus")]
    NotPrime(u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("polynomial of degree {degree} exceeds the factorization limit {limit}")]
    DegreeLimit { degree: usize, limit: usize },
    #[error("polynomial has zero constant term")]
    ZeroConstantTerm,
    #[error("polynomial is not self-dual: {0}")]
    NotSelfDual(String),
    #[error("polynomial has odd degree")]
    OddDegree,
    #[error("polynomial has odd-degree terms")]
    NotEvenPolynomial,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("characteristic {characteristic} does not exceed dimension {dimension}")]
    SmallCharacteristic { characteristic: u64, dimension: usize },
    #[error("summands do not form a dual pair: {0}")]
    NotDualPair(String),
    #[error("block size {size} forbids a non-degenerate {symmetry} form")]
    ParityViolation { size: usize, symmetry: &'static str },
    #[error("map has eigenvalue {0}")]
    EigenvalueObstruction(String),
    #[error("no invariant form exists: {0}")]
    DecisionFalse(String),
    #[error("map is not unipotent up to sign: {0}")]
    NotUnipotentType(String),
    #[error("map is not unipotent")]
    NotUnipotent,
    #[error("form failed verification: {0}")]
    UnverifiedForm(String),
    #[error("operation is not supported over the rationals")]
    RationalsUnsupported,
    #[error("form is degenerate")]
    Degenerate,
    #[error("group of order {0} is too large for exhaustive search")]
    GroupTooLarge(u128),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroInverse => "ZeroInverse",
            Error::MixedFields(_) => "MixedFields",
            Error::NotPrime(_) => "NotPrime",
            Error::Parse(_) => "Parse",
            Error::DegreeLimit { .. } => "DegreeLimit",
            Error::ZeroConstantTerm => "ZeroConstantTerm",
            Error::NotSelfDual(_) => "NotSelfDual",
            Error::OddDegree => "OddDegree",
            Error::NotEvenPolynomial => "NotEvenPolynomial",
            Error::NotSquare { .. } => "NotSquare",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::Singular => "Singular",
            Error::SmallCharacteristic { .. } => "SmallCharacteristic",
            Error::NotDualPair(_) => "NotDualPair",
            Error::ParityViolation { .. } => "ParityViolation",
            Error::EigenvalueObstruction(_) => "EigenvalueObstruction",
            Error::DecisionFalse(_) => "DecisionFalse",
            Error::NotUnipotentType(_) => "NotUnipotentType",
            Error::NotUnipotent => "NotUnipotent",
            Error::UnverifiedForm(_) => "UnverifiedForm",
            Error::RationalsUnsupported => "RationalsUnsupported",
            Error::Degenerate => "Degenerate",
            Error::GroupTooLarge(_) => "GroupTooLarge",
            Error::Internal(_) => "Internal",
        }
    }

    /// Errors that describe a capability boundary rather than bad input.
    pub fn is_capability(&self) -> bool {
        matches!(
            self,
            Error::DegreeLimit { .. }
                | Error::RationalsUnsupported
                | Error::SmallCharacteristic { .. }
                | Error::GroupTooLarge(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
