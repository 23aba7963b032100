use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Param(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("uniform stream exhausted after {consumed} draws ({needed} needed)")]
    StreamExhausted { consumed: u64, needed: u64 },
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("label of length {needed} exceeds truncation depth {depth}")]
    DepthOverflow { needed: usize, depth: usize },
    #[error("event cap of {cap} firings reached before the horizon")]
    EventCap { cap: u64 },
    #[error("two clocks fired at the same instant {time}")]
    ClockTie { time: f64 },
    #[error("outcome is undecided")]
    Undecided,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
