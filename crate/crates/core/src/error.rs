use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("extension degree {0} is outside the supported range 2..=16")]
    UnsupportedDegree(u32),
    #[error("polynomial {poly:#x} rejected for degree {m}: {reason}")]
    RejectedPolynomial { poly: u32, m: u32, reason: &'static str },
    #[error("zero has no multiplicative order")]
    ZeroHasNoOrder,
    #[error("GF(2^{k}) is not a subfield of GF(2^{m})")]
    NotASubfield { k: u32, m: u32 },
    #[error("value {value:#x} is not an element of GF(2^{m})")]
    InvalidElement { value: u32, m: u32 },
    #[error("lookup table has {len} entries, expected {expected}")]
    LutLength { len: usize, expected: usize },
    #[error("map is not F2-linear")]
    NotLinear,
    #[error("map is not bijective")]
    NotBijective,
    #[error("functions are defined over different fields")]
    FieldMismatch,
    #[error("function is not APN")]
    NotApn,
    #[error("group algebra element is zero")]
    EmptyElement,
    #[error("dense rank oracle limited to group rank <= {max}, got {rank}")]
    TooLarge { rank: u32, max: u32 },
    #[error("ideal dimension exceeded the cap of {0}")]
    DimensionCap(usize),
    #[error("construction requires GF(2^{expected}), got GF(2^{got})")]
    WrongField { expected: u32, got: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("exponents must differ modulo 2^m - 1")]
    DegenerateExponents,
}

pub type Result<T> = std::result::Result<T, Error>;
