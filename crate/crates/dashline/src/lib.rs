//! Numerical laboratory for the dashed-line Galerkin truncation of the
//! two-dimensional Euler equation.
//!
//! The dashed-line model lives on a single class of Fourier modes
//! `khat + n*p` coupled to the pump mode `p`, with the coupling across
//! every fifth mode gated by a homotopy parameter `eps` in `[0, 1]`.
//! At `eps = 0` the line decouples into five-mode blocks and the `j = 0`
//! block carries an explicit family of perverted heteroclinic orbits.
//!
//! The crate provides:
//!
//! * [`coefficients`] — exact-rational interaction coefficients and the
//!   model coefficient tables,
//! * [`spectra`] — linearized/homotopy operators, dense eigensolves and
//!   the chopped-block spectra,
//! * [`model`] — the nonlinear dashed-line system, its `f + eps*g` split,
//!   conserved quantities and a fixed-step RK4 integrator,
//! * [`orbit`] — the closed-form heteroclinic orbit family and its
//!   invariants,
//! * [`melnikov`] — first/second/third-order Melnikov integrals with the
//!   variational ODE hierarchy behind them,
//! * [`numerics`] — shared kernels (RK4, trapezoid, dense eigensolution,
//!   biquadratic roots),
//! * [`cli`] — the `dashline` command-line front end.

pub mod cli;
pub mod coefficients;
pub mod error;
pub mod melnikov;
pub mod model;
pub mod numerics;
pub mod orbit;
pub mod spectra;

pub use error::{Error, Result};
