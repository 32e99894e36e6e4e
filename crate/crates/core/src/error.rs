use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("XML error at line {line}: {message}")]
    Xml { line: u32, message: String },

    #[error("MXL container error: {0}")]
    Container(String),

    #[error("structural error: {0}")]
    Structure(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("invalid time signature {numerator}/{denominator}")]
    TimeSignature { numerator: u32, denominator: u32 },

    #[error("MIDI {midi} is not playable on this fretboard")]
    NotPlayable { midi: i32 },

    #[error("encode error: {0}")]
    Encode(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("score has no pitched events")]
    NoPitchedEvents,

    #[error("score is empty")]
    EmptyScore,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("technique dictionary: {0}")]
    Dictionary(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
