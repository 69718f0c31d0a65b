//! Closed curves of prescribed geodesic curvature on conformally round spheres.
//!
//! A metric `g_t = e^{tφ} g_can` on the unit sphere is deformed from the round
//! metric, and a closed curve solving `κ_g = s·c` is tracked along the
//! deformation by a predictor–corrector continuation.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod continuation;
pub mod curve;
pub mod error;
pub mod geometry;
pub mod harmonics;
pub mod real;
pub mod solver;
pub mod verify;

pub use curve::DiscreteCurve;
pub use error::{Error, Result};
pub use geometry::{ConformalMetric, HarmonicSum, HarmonicTerm};
