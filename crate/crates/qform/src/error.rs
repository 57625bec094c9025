use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ring of order {size} exceeds the bound {bound}")]
    OversizeRing { size: usize, bound: usize },
    #[error("malformed specification: {0}")]
    MalformedSpec(String),
    #[error("invalid unitary ring: {0}")]
    InvalidUnitaryRing(String),
    #[error("element is not idempotent modulo the radical")]
    NotIdempotentModJ,
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("element is not a unit")]
    NotAUnit,
    #[error("idempotent is not fixed by sigma")]
    NotSymmetricIdempotent,
    #[error("idempotent is not full: AeA != A")]
    NotFullIdempotent,
    #[error("vector does not lie in the module")]
    NotInModule,
    #[error("spaces live on different modules")]
    ModuleMismatch,
    #[error("enumeration of {what} exceeds the bound {bound}")]
    EnumerationBoundExceeded { what: String, bound: u64 },
    #[error("spaces live over different unitary rings")]
    RingMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not a summand: {0}")]
    NotASummand(String),
    #[error("invalid reflection parameter: {0}")]
    InvalidC(String),
    #[error("element is not (e,f)-invertible")]
    NotEFInvertible,
    #[error("idempotents are not orthogonal")]
    IdempotentsNotOrthogonal,
    #[error("no transvection found")]
    NoTransvectionFound,
    #[error("condition violation: {0}")]
    ConditionViolation(String),
    #[error("precondition violation: {0}")]
    PreconditionViolation(String),
    #[error("base space is not unimodular")]
    NotUnimodularBase,
    #[error("not a decomposition: {0}")]
    NotADecomposition(String),
    #[error("factor has the wrong type for this operation")]
    WrongFactorType,
    #[error("factor {0} is not split-orthogonal")]
    NotSplitOrthogonal(usize),
    #[error("space is not unimodular")]
    NotUnimodular,
    #[error("hypothesis violated at factor {factor}: {reason}")]
    HypothesisViolation { factor: usize, reason: String },
    #[error("map is not an isometry")]
    NotAnIsometry,
}

impl Error {
    /// Input problems map to exit code 2, mathematical failures to 1.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedSpec(_)
                | Error::OversizeRing { .. }
                | Error::InvalidUnitaryRing(_)
                | Error::ShapeMismatch(_)
                | Error::NotInModule
                | Error::RingMismatch
                | Error::ModuleMismatch
                | Error::NotASummand(_)
                | Error::EnumerationBoundExceeded { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
