use thiserror::Error;

/// Errors produced by the library. Constraint violations that are data
/// (metric axiom failures, threshold counterexamples, non-isomorphism) are
/// reported through their own result types, not through this enum.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape specification: {0}")]
    InvalidSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("generator {index} is not a permutation of 0..{n}")]
    NotPermutation { index: usize, n: usize },

    #[error("group closure exceeded the cap of {cap} elements")]
    GroupTooLarge { cap: usize },

    #[error("size mismatch: action acts on {action} points, space has {space}")]
    SizeMismatch { action: usize, space: usize },

    #[error("index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("action is not isometric: element {g} moves pair ({x}, {y}) by {delta:e}")]
    NotIsometric { g: usize, x: usize, y: usize, delta: f64 },

    #[error("simplex budget of {budget} exceeded while enumerating dimension {dim}")]
    BudgetExceeded { dim: usize, budget: usize },

    #[error("instance too large for the dense oracle: {simplices} simplices (limit {limit})")]
    InstanceTooLarge { simplices: usize, limit: usize },

    #[error("induced action is not simplicial: element {g} maps simplex {simplex:?} outside the complex")]
    NotSimplicial { g: usize, simplex: Vec<u32> },

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("k_max must be at least 1")]
    InvalidKMax,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
