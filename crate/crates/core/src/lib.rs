pub mod cli;
pub mod error;
pub mod geom;
pub mod greens;
pub mod interference;
pub mod observables;
pub mod propagators;
pub mod quad;
pub mod scales;
pub mod sources;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
