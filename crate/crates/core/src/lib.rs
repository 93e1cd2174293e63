//! Numerical invariants of two-dimensional minimal and α-minimal surfaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: parametric charts, the classical catalog, curvature and gradients.
//! - [`levelset`]: level curves and superlevel components of scalar fields on a chart.
//! - [`spectra`]: weighted fundamental frequencies of one-dimensional level sets.
//! - [`energy`]: Dirichlet integrals, flows, capacities and the singular terms of tubular ends.
//! - [`tracts`]: asymptotic tracts, hump counts and the growth inequalities built on them.
//! - [`invariants`]: projective volume, projection multiplicity, critical points and indices.
//! - [`harness`]: run configuration, suite orchestration and reports.

// Negated comparisons reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod bound;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod invariants;
pub mod levelset;
pub mod spectra;
pub mod tracts;
pub mod util;

pub use bound::{BoundCheck, Relation};
pub use error::{Error, Result};
pub use geometry::{catalog_surface, ParamGrid, ScalarField, SurfaceChart, Vec3};
