use thiserror::Error;

/// Errors produced by game construction, graph building, sampling, and the
/// exhaustive oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape has {vertices} vertices, exceeding the cap of {cap}")]
    ShapeTooLarge { vertices: u128, cap: u64 },

    #[error("invalid action profile: coordinate {player} is {value}, action count is {bound}")]
    InvalidProfile { player: usize, value: u32, bound: u32 },

    #[error("invalid line id: {0}")]
    InvalidLine(String),

    #[error("line {line} has an invalid ranking (must be a permutation of 0..{arity})")]
    InvalidRanking { line: u64, arity: u32 },

    #[error("explicit storage needs {vertices} vertices but the cap is {cap}; use implicit mode")]
    UseImplicit { vertices: u64, cap: u64 },

    #[error("conditioned sampler exceeded {rejections} rejections; the condition may be near-null")]
    ConditioningTimeout { rejections: u64 },

    #[error("enumeration would visit {total} objects, exceeding the cap of {cap}")]
    EnumerationTooLarge { total: u128, cap: u64 },

    #[error("graph has {vertices} vertices, over the limit of {limit} for this operation")]
    SizeExceeded { vertices: u64, limit: u64 },

    #[error("invalid dynamic parameters: {0}")]
    InvalidParams(String),

    #[error("malformed game file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
