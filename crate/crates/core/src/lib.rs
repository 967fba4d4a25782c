//! Uniformly convex sequences with large lattice intersections.
//!
//! This crate builds finite convex sequences `a_1, ..., a_N` whose first and
//! second differences sit in the windows `[1/(4N), 4/N]` and `[1/(4N²), 4/N²]`
//! while hitting the lattice `N^{-α}ℤ` unusually often, and evaluates the
//! exponential sums `f(x, t) = Σ b_n e(x ξ_n + t η_n)` built from them.
//!
//! The pieces, bottom-up:
//!
//! - [`rational`]: exact fractions, bounded-denominator enumeration, mediants.
//! - [`interp`]: strictly convex C¹/C² interpolation through `(x, y, f′)` knots.
//! - [`convexseq`]: the sequence type, the convexity validator, lattice hit
//!   counting and the two constructions.
//! - [`expsum`]: point evaluation of the exponential sum with phase reduction,
//!   row kernels for grid sweeps, dyadic level bookkeeping.
//! - [`regress`]: log-log least squares for scaling exponents.
//!
//! The crate is `no_std` and only needs `alloc`. Parallel grid sweeps, FFTs,
//! file formats and the command line live in the `uniconvex-lab` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod convexseq;
mod error;
pub mod expsum;
pub mod interp;
pub mod lattice;
pub mod rational;
pub mod regress;

pub use error::{Error, Result};
