//! Numerics for weakly coupled negative eigenvalues of `-Δ - εV` on the plane.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides
//!
//! * [`specfun`]: the modified Bessel functions `K0`, `K1`, the free resolvent
//!   kernel `K0(α|x-y|)/(2π)` and its cell-averaged diagonal,
//! * [`potential`]: potentials, their integrals and numerical checks of the
//!   integrability hypotheses,
//! * [`grid`]: Nyström quadrature grids,
//! * [`bsop`]: the discretized Birman–Schwinger operator `Q(α)`, its split
//!   `Q = L + M` and the scalar characteristic function `Λ_ε(α)`,
//! * [`weakcoupling`]: root location of `Λ_ε` in the logarithmic coordinate
//!   `t`, the asymptotic predictor and ε-sweeps,
//! * [`fd`]: an independent finite-difference eigensolver used as an oracle.
//!
//! [`linalg`] and [`quad`] hold the dense linear algebra and adaptive
//! quadrature the modules above are built on.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bsop;
pub mod fd;
pub mod grid;
pub mod linalg;
pub mod math;
pub mod potential;
pub mod quad;
pub mod specfun;
pub mod weakcoupling;

pub use bsop::{BsKind, BsMatrix, BsOperator, Discretization, SpectralSummary};
pub use grid::{Grid2D, Point2, Scheme};
pub use potential::{Potential, PotentialError};
pub use weakcoupling::{EigenSolveResult, SolveStatus, SweepRecord};
