use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-invertible zero")]
    NonInvertibleZero,

    #[error("unsupported transform size {0}")]
    UnsupportedTransformSize(usize),

    #[error("throughput must be a power of two in [2, N], got {throughput} for N = {size}")]
    InvalidThroughput { throughput: usize, size: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("padding overflow: phase decodes to slot {slot} of {slots}")]
    PaddingOverflow { slot: u64, slots: u64 },

    #[error("reserved opcode")]
    ReservedOpcode,

    #[error("bad instruction length: expected {expected} bytes, got {actual}")]
    BadInstructionLength { expected: usize, actual: usize },

    #[error("unmapped address {0:#x}")]
    UnmappedAddress(u64),

    #[error("object type mismatch at {addr:#x}: expected {expected}, found {found}")]
    TypeMismatch {
        addr: u64,
        expected: &'static str,
        found: &'static str,
    },

    #[error("DFR exponent must be negative, got {0}")]
    NonNegativeDfrExponent(f64),

    #[error("invalid cost-model input: {0}")]
    InvalidModelInput(String),

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
