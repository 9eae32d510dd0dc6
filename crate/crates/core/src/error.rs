use thiserror::Error;

/// Errors surfaced by any layer of the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u64),
    #[error("modulus is reducible over GF({p})")]
    ReducibleModulus { p: u64 },
    #[error("field order {order} exceeds the supported maximum 2^20")]
    FieldTooLarge { order: u128 },
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("division by zero in a finite field")]
    DivisionByZero,
    #[error("trace subfield degree {sub_degree} does not divide extension degree {k}")]
    NonDivisorDegree { sub_degree: u32, k: u32 },
    #[error("invalid element index {index} for field of order {order}")]
    InvalidElement { index: u64, order: u64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("enumeration of {size} objects exceeds the cap {cap}")]
    EnumerationTooLarge { size: u128, cap: u128 },

    #[error("field incompatible with the requested form family: {0}")]
    IncompatibleField(String),
    #[error("operation requires a form of a different kind: {0}")]
    KindMismatch(String),
    #[error("the polarity is degenerate; perp is undefined")]
    DegeneratePolarity,
    #[error("invalid form: {0}")]
    InvalidForm(String),

    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("subspace is not a generator of the polar space")]
    NotAGenerator,

    #[error("dual arc members are heterogeneous: {0}")]
    HeterogeneousMembers(String),
    #[error("dual arc contains a duplicate member")]
    DuplicateMember,
    #[error("dual arc must contain at least one member")]
    EmptyArc,
    #[error("the family failed dual-arc verification")]
    NotADualArc,
    #[error("h = {h} is not coprime to n = {n}")]
    NotCoprime { h: i64, n: u32 },
    #[error("the bound derivation requires an even rank, got {0}")]
    OddRank(u32),
    #[error("beta map images are linearly dependent; the map is not injective")]
    BetaNotInjective,
    #[error("reference form must be nondegenerate symmetric bilinear")]
    DegenerateReferenceForm,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
