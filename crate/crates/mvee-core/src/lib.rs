//! Minimum-volume circumscribing ellipsoids and their applications.
//!
//! The crate computes Löwner–John (minimum volume enclosing) ellipsoids of
//! polytopes and quadratically constrained sets via a tractable semidefinite
//! restriction built from generalized-copositive containment certificates,
//! next to exact and approximate baselines (scaled inscribed ellipsoid,
//! S-procedure, KTT containment conditions, point-set rounding, constraint
//! generation). Two applications are included: piecewise-linear decision
//! rules for two-stage distributionally robust optimization, and outer
//! ellipsoidal approximation of reachable sets of linear systems.
//!
//! All optimization runs on a self-contained dense log-det barrier solver
//! ([`sdp`]); no external solver is required. The crate is `no_std`
//! compatible (with `alloc`); disable the default `std` feature for
//! embedded use.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod dro;
mod fp;
pub mod geometry;
pub mod instances;
pub mod linalg;
pub mod mve;
pub mod reach;
pub mod rng;
pub mod sdp;

pub use geometry::{Ellipsoid, PartitionFamily, Polytope, QuadSet};
pub use mve::Certificate;
