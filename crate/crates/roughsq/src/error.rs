use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value {value} at node x = {x}")]
    NonFinite { x: f64, value: f64 },
    #[error("invalid norm exponent: {0}")]
    InvalidNorm(String),
    #[error("transform size {0} not supported (max 2^26 points)")]
    TransformSize(usize),
    #[error("mean mode {0:e} too large for a negative-order Riesz multiplier")]
    MeanMode(f64),
    #[error("dyadic index k = {k} outside grid band [{lo}, {hi}]")]
    BandLimit { k: i32, lo: i32, hi: i32 },
    #[error("grid spacing {h} does not resolve scale 2^-{k} (need h <= {need})")]
    UnderResolved { k: i32, h: f64, need: f64 },
    #[error("degenerate point set: {0}")]
    Degenerate(String),
    #[error("evaluation point {0} needs samples outside the grid")]
    OutsideGrid(f64),
    #[error("parameter out of range: {0}")]
    Param(String),
    #[error("unknown catalogue id `{0}`")]
    UnknownFunction(String),
    #[error("unknown parameter `{key}` for `{id}`")]
    UnknownParam { id: String, key: String },
    #[error("construction constraint violated: {0}")]
    Constraint(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
