//! Dense numerical kernels shared by the solver: pivoted least squares,
//! eigenvalues, polynomial roots, Chebyshev series and adaptive quadrature.

pub mod cheb;
pub mod eig;
pub mod integrate;
pub mod lsq;
pub mod roots;

pub use eig::{eigenvalues, hessenberg_eigs};
pub use lsq::{lsq_colpivot, LsqOptions, LsqSolution};
pub use roots::{cheb_roots, pair_conjugates, poly_roots};
