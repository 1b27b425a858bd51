//! Deterministically sketched Krylov methods.
//!
//! This crate implements sketched variants of FOM, GMRES and Rayleigh-Ritz
//! (dsFOM, dsGMRES, dsRR) where the sketch is a deterministic row subset
//! chosen greedily from a k-truncated Arnoldi basis, plus the supporting
//! pieces: dense kernels, CSR sparse matrices, test problem generators,
//! row-selection strategies (DEIM, Q-DEIM, MPE, GappyPOD+E) and distortion
//! diagnostics. A seeded sparse-sign random sketch is included as the
//! randomized baseline.
//!
//! All numerics are generic over the scalar type via [`scalar::Real`];
//! the `f64` instantiations used by the CLI have aliases at the crate root.

pub mod dense;
pub mod error;
pub mod io;
pub mod krylov;
pub mod la;
pub mod problems;
pub mod rowselect;
pub mod scalar;
pub mod sketch;
pub mod solvers;
pub mod sparse;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use scalar::Real;
pub use sparse::SparseMatrix;

/// `f64` dense matrix, the instantiation the CLI and experiments run on.
pub type DMat = DenseMatrix<f64>;
/// `f32` dense matrix.
pub type DMat32 = DenseMatrix<f32>;
/// `f64` CSR matrix.
pub type CsrMat = SparseMatrix<f64>;
