//! Dense linear algebra kernels: QR (plain and pivoted), one-sided Jacobi
//! SVD, Francis QR eigensolver, matrix exponential and the secular solver
//! for rank-one diagonal updates. Everything downstream (whitening, greedy
//! row selection, the solvers) is built on these.

pub mod eig;
pub mod expm;
pub mod qr;
pub mod secular;
pub mod svd;

pub use eig::{dense_eig, EigenPairs};
pub use expm::expm;
pub use qr::{back_substitute, back_substitute_right, pivoted_qr, solve_square, thin_qr, QrFactors};
pub use secular::secular_smallest_eig;
pub use svd::{singular_values, thin_svd, SvdFactors};
