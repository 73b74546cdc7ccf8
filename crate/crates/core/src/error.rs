use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus must be prime > N (got {0})")]
    NotPrime(u32),
    #[error("modulus must be prime > N (q = {q}, N = {n})")]
    ModulusTooSmall { q: u32, n: usize },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("evaluation points must be distinct")]
    InvalidPoints,
    #[error("code multipliers must be nonzero")]
    ZeroMultiplier,
    #[error("N must be ≥ M+T (N = {n}, M = {m}, T = {t})")]
    TooFewServers { n: usize, m: usize, t: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("selection matrix violates contract {contract}: {detail}")]
    SelectionInvalid { contract: &'static str, detail: String },
    #[error("enumeration of {events} elementary events exceeds the ceiling of {ceiling}")]
    EnumerationTooLarge { events: u128, ceiling: u128 },
    #[error("secrecy bound undefined for N < M+T")]
    InvalidRegime,
    #[error("transcript is incomplete: {0}")]
    IncompleteTranscript(String),
    #[error("malformed frame: {0}")]
    MalformedFrame(String),
    #[error("unknown message kind {0}")]
    UnknownKind(u8),
    #[error("element {value} out of range for modulus {modulus}")]
    ElementOutOfRange { value: u32, modulus: u32 },
    #[error("transport failure: {0}")]
    TransportFailure(String),
    #[error("decode failure: {0}")]
    DecodeFailure(String),
}
