//! Finite-sample laboratory for dentability of maps on convex sets.
//!
//! A map `f` is sampled on a finite [`PointCloud`] in `R^d` and takes values in
//! a metric space (`R^m` with an `l_p` norm, or an explicit distance table).
//! The crate computes slices and their oscillations, the epsilon-derivation and
//! dentability index, strongly slicing functionals, Moreau-type delta-convex
//! approximants, the renorming function built from derivation chains, and the
//! tree and martingale constructions that witness non-dentability.
//!
//! Modules:
//! - [`geometry`]: functionals, slices, oscillation, convex-hull membership
//!   with separation certificates, covering numbers.
//! - [`dentability`]: denting tests, the derivation, `Dz`, Lancien's bound,
//!   the continuity modulus and simultaneous slices for several maps.
//! - [`slicing`]: slicing profiles, the perturbation search producing nearby
//!   strongly slicing functionals, and the density scan.
//! - [`dcapprox`]: envelopes `f_n`, their convex splits, control-function
//!   certificates and the renorming function.
//! - [`generators`]: standard clouds, separated trees, the norm-one map, the
//!   separating metric and the martingale run.
//! - [`oracle`]: exact rational and brute-force reference routines used to
//!   check the floating-point paths.
//! - [`io`]: the JSON cloud format.

pub mod dcapprox;
pub mod dentability;
pub mod error;
pub mod generators;
pub mod geometry;
pub mod io;
pub mod oracle;
pub mod slicing;

mod par;

pub use error::{Error, Result};
pub use geometry::{
    Functional, HullMembership, LpNorm, Metric, PointCloud, ScoredMap, Slice, Tolerances, Vector,
};
