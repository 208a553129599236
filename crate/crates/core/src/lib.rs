//! Verification laboratory for zero modes of the Euclidean Dirac operator.
//!
//! The library builds explicit magnetic fields and spinors on R^d for which
//! the Dirac equation gamma.(-i grad - A) psi = 0 has an exact solution, and
//! then certifies, numerically and algebraically, every identity those fields
//! are supposed to satisfy: the sharp constant that separates trivial from
//! nontrivial kernels, the regularized integral identity behind it, the
//! twistor characterization of the equality case, and the classification of
//! all optimizers up to symmetry.
//!
//! Modules:
//! - [`clifford`]: gamma matrices, vacuum spinors, and spin lifts of rotations.
//! - [`fields`]: closed-form spinor and vector fields, exact derivatives, and
//!   the symmetry transformations that act on them.
//! - [`calculus`]: quadrature over R^d, Lp norms, regularized moduli, and
//!   finite-difference cross checks.
//! - [`verify`]: claim-by-claim verification suites producing structured
//!   reports.

pub mod calculus;
pub mod clifford;
pub mod fields;
pub mod verify;

mod linalg;

pub use num_complex::Complex64;

/// Complex column vector used for spinors.
pub type CVector = nalgebra::DVector<Complex64>;
/// Complex dense matrix used for gamma matrices and lifts.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Real column vector used for points and real parameters.
pub type RVector = nalgebra::DVector<f64>;
/// Real dense matrix used for rotations and skew parameter matrices.
pub type RMatrix = nalgebra::DMatrix<f64>;
