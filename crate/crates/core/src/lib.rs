//! Finite-rank laboratory for a hypercyclic rank-one perturbation of a unitary
//! operator.
//!
//! The construction runs in stages, each in its own module:
//!
//! * [`carleson`]: perfect Carleson sets `E` on the circle given by their
//!   complementary arcs, their entropy, and node families `{λ_j} ⊂ E`.
//! * [`outer`]: the boundary weight `|φ| = dist(·, E)^p` and the outer function
//!   `φ` it determines.
//! * [`hstar`]: the span of Cauchy kernels `1/(z − λ_j)` with the weighted norm
//!   `‖f‖ = ‖fφ‖_{H²}`, realized through its Gram matrix.
//! * [`operator`]: the backward shift on that span, its codimension-one
//!   subspaces, the unitary `U` and rank-one defect `R` with `S* = U + R`, the
//!   resolvent and the spectrum.
//! * [`grivaux`]: quantitative checks of the eigenvector criterion for
//!   hypercyclicity.
//! * [`clark`]: Clark measures of finite Blaschke products.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the command
//! line live in the companion `hypercyclic-lab` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod carleson;
pub mod clark;
mod error;
mod fft;
pub mod grivaux;
pub mod hstar;
pub mod operator;
pub mod outer;
mod unit;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use unit::{chordal_distance, normalize_angle, unimodular};

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex vector used throughout.
pub type CVector = nalgebra::DVector<Complex64>;
