//! Directional statistics meets frame theory.
//!
//! Uniformity tests on the sphere (Rayleigh, Bingham), finite and
//! probabilistic tight frames with their potentials, Watson axial
//! distributions and mixtures, and the planar nematic order parameter.
//!
//! The thread running through the crate is that a probability measure whose
//! second-moment matrix is `I/d` (a probabilistic unit norm tight frame) is
//! invisible to the Bingham test even when it is strongly multimodal, e.g. a
//! Watson mixture whose directors form a tight frame.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod em;
pub mod error;
pub mod frames;
pub mod linalg;
pub mod numerics;
pub mod order;
pub mod quadrature;
pub mod rng;
pub mod sphere;
pub mod uniformity;
pub mod watson;

pub use error::{Error, Result};
pub use linalg::SymMatrix;
pub use sphere::{DiscreteMeasure, MomentSummary, SampleSet, UnitVector};
