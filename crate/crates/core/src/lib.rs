pub mod basis;
pub mod cluster;
pub mod error;
pub mod gallery;
pub mod geometry;
pub mod numerics;
pub mod nystrom;
pub mod quadrature;
pub mod ratfit;
pub mod solver;

pub use error::{Error, Result};
pub use num_complex::Complex64;
