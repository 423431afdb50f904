//! Bound states of a sharply bent two-dimensional waveguide with Dirichlet
//! walls, computed three independent ways:
//!
//! * an oblique-mode expansion whose corner-corrected WKB treatment reduces
//!   the bend to an energy-dependent delta interaction ([`oblique`]),
//! * a conformal corner map that straightens the guide and leaves a
//!   one-dimensional mode potential, quantized through a corner phase shift
//!   ([`conformal`], [`potentials`], [`spectrum`]),
//! * a brute-force finite-difference Helmholtz eigensolver on the bent
//!   polygon, the ground truth the analytic pipelines are checked against
//!   ([`oracle`]).

pub mod conformal;
pub mod error;
pub mod geometry;
pub mod oblique;
pub mod quad;

pub use error::{Error, Result};
pub use geometry::Geometry;
