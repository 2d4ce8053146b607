use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("{what} overflows double precision at x = {x}")]
    Overflow { what: &'static str, x: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coincident points: the real part of G diverges at r = r'")]
    Coincident,

    #[error("kernel caustic at T = {time} (within {tolerance} of a multiple of the cyclotron period)")]
    Caustic { time: f64, tolerance: f64 },

    #[error("{what} did not converge: partial value {value}, estimated error {est_error:e}")]
    NonConvergence {
        what: &'static str,
        value: Complex64,
        est_error: f64,
    },

    #[error("point at distance {distance} is inside the near-field zone (need at least {required})")]
    OutsideFarField { distance: f64, required: f64 },

    #[error("grid too coarse: 2nd- and 4th-order derivatives differ by {mismatch:.3} (limit 0.05)")]
    GridTooCoarse { mismatch: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("point {index} lies within the source standoff ({distance} < {standoff})")]
    InsideStandoff {
        index: usize,
        distance: f64,
        standoff: f64,
    },

    #[error("surface leaves the valid grid region: {0}")]
    SurfaceOutsideGrid(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("no natural scale: all fields vanish and no explicit scales were given")]
    NoNaturalScale,

    #[error("unsupported dimension tag {0}")]
    UnsupportedDimension(String),
}
