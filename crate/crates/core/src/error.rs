use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,
    #[error("alphabet has a single symbol")]
    DegenerateAlphabet,
    #[error("byte 0x{0:02x} is not part of the alphabet")]
    AlphabetMismatch(u8),
    #[error("stream of {len} symbols is too short to train with context {context}")]
    TooShortForTraining { len: usize, context: usize },
    #[error("alphabet of {symbols} symbols does not fit in {precision}-bit probabilities")]
    PrecisionTooLow { symbols: usize, precision: u32 },
    #[error("non-finite value in {0}")]
    Numeric(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("corrupt archive: {0}")]
    CorruptArchive(String),
    #[error("unsupported archive version {0}")]
    UnsupportedVersion(u8),
}

pub type Result<T> = std::result::Result<T, Error>;
