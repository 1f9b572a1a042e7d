//! Complex scaling for the Dirichlet Laplacian in a planar waveguide whose end
//! is an analytic deformation of the half-strip `(0, ∞) × (0, 1)`.
//!
//! The crate assembles the deformed operator as a complex-symmetric finite
//! element pencil `(K, M)` in semicylinder coordinates, computes its spectrum,
//! classifies eigenvalues against the rotated essential-spectrum rays, and
//! evaluates resolvent matrix elements over Gaussian-polynomial analytic
//! vectors so that their continuation across the cut can be checked.
//!
//! Module map:
//!
//! - [`geometry`]: cross-section thresholds and the analytic end maps.
//! - [`scaling`]: the scaling profile `v`, the parameter disc, the deformed metric.
//! - [`assembly`]: Q1 assembly of the pencil, fiber operator, pairing, shifted solves.
//! - [`eigen`]: dense and shift-invert Arnoldi eigensolvers.
//! - [`spectral`]: rays, classification, resonance detection, sector and quasimode checks.
//! - [`analytic`]: analytic vectors, resolvent elements, continuation scans, mollifier.
//! - [`io`]: run configuration, result files, SVG portraits, Matrix Market.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod assembly;
pub mod eigen;
mod error;
pub mod geometry;
pub mod io;
pub mod quadrature;
pub mod scaling;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Max-entry norm `max |a_lm|` of a 2×2 complex matrix.
pub fn max_entry_norm(a: &[[C64; 2]; 2]) -> f64 {
    a.iter()
        .flat_map(|row| row.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
