//! Numerics for holomorphic cubic differentials, Wang's equation and the
//! convex RP² structures they induce through hyperbolic affine spheres.
//!
//! The crate is `no_std` and only needs `alloc`. All floating point math goes
//! through `num-traits` with its `libm` backend.
#![no_std]
// Whenever std ends up in the build graph (tests, dev-dependency feature
// unification) the inherent float methods shadow the `num_traits` imports.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod connection;
pub mod develop;
pub mod differentials;
pub mod error;
pub mod field;
pub mod linalg;
pub mod projective;
pub mod vortex;

pub use error::{Error, Result};
pub use linalg::Mat3;
pub use num_complex::Complex64;
pub use projective::{ProjPoint, ProjSegment};
