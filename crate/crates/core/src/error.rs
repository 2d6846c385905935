use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("polynomial degree {degree} exceeds the configured bound {bound}")]
    DegreeOverflow { degree: u32, bound: u32 },

    #[error("degenerate tetrad: |det e| = {det:.3e} at {point:?}")]
    DegenerateTetrad { det: f64, point: [f64; 4] },

    #[error("singular metric at {0:?}")]
    SingularMetric([f64; 4]),

    #[error("series square root needs a positive real scalar leading coefficient, got {0}")]
    NonPositiveLeading(String),

    #[error("the {0} basis needs a spin connection")]
    MissingSpinConnection(&'static str),

    #[error("{what} residual {residual:.3e} exceeds {tolerance:.1e}")]
    ResidualTooLarge { what: &'static str, residual: f64, tolerance: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
