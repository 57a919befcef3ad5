use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symplectic form is degenerate (|det| = {det:e})")]
    DegenerateForm { det: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("one-form is not closed (|dα|∞ = {residual:e})")]
    NotClosed { residual: f64 },

    #[error("Poisson right-hand side has nonzero mean {mean:e}")]
    NonZeroMean { mean: f64 },

    #[error("map is not an immersion (min Gram determinant {min_gram:e})")]
    NotImmersed { min_gram: f64 },

    #[error("not a positively oriented symplectic surface (min pullback density {min_density:e})")]
    NotSymplecticSurface { min_density: f64 },

    #[error("grid map folds (min Jacobian determinant {min_jacobian:e}); reduce the step size")]
    MeshFolding { min_jacobian: f64 },

    #[error("total areas differ: pullback {pullback}, target {target}")]
    AreaMismatch { pullback: f64, target: f64 },

    #[error("interpolated area forms leave the positive cone (min density {min_density:e})")]
    NonPositivePath { min_density: f64 },

    #[error("integer matrix is not unimodular (det = {det})")]
    NotUnimodular { det: i64 },

    #[error("ambient map does not preserve the base symplectic form")]
    NotSymplecticMap,

    #[error("scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
