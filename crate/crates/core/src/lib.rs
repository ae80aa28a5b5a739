//! Exact electromagnetic Casimir interaction energy between a perfectly
//! conducting elliptic cylinder (down to the zero-thickness strip) and a
//! perfectly conducting plane.
//!
//! The energy per unit length is the `p`-integral of `log det(1 - T U)`,
//! where `T` holds the diagonal scattering amplitudes of the cylinder in the
//! Mathieu basis and `U` is the plane-mediated translation kernel. The crate
//! is `no_std` with `alloc`; IO, caching across calls, and thread pools
//! live in the `ecyl` companion crate, which plugs in through [`Executor`].
//!
//! Module map:
//! - [`bessel`]: integer-order modified Bessel sequences in log form.
//! - [`mathieu`]: angular and modified radial Mathieu functions.
//! - [`scattering`]: T-matrix elements of the cylinder and the plane.
//! - [`translation`]: the `u`-integral kernel matrix at fixed momentum.
//! - [`energy`]: log-determinant integrand, `p` integration, extrapolation.
//! - [`reference`]: PFA, circular-cylinder oracle, identity validators.

#![no_std]
// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bessel;
pub mod energy;
mod error;
pub mod exec;
pub mod linalg;
pub mod mathieu;
pub mod quadrature;
pub mod reference;
pub mod scattering;
pub mod translation;

pub use error::{Error, Result};
pub use exec::{Executor, Serial};
