//! 2D rigid image registration driven by a joint saliency map.
//!
//! Classic mutual-information registration treats every overlapping pixel
//! pair as one vote in the joint histogram. Structures that exist in only
//! one of the two images (a resected tumor, a surgical tool, background
//! clutter) then smear the histogram and create local or even biased global
//! maxima. This crate instead weights each pixel pair's histogram deposit by
//! a *joint saliency map* (JSM): the agreement of the two images' local
//! structure orientations at that position.
//!
//! The pipeline:
//!
//! 1. A multiscale intensity-contrast saliency map is computed per image
//!    ([`saliency::multiscale_saliency`]).
//! 2. Principal-axis analysis of the saliency distribution around each pixel
//!    yields a *regional saliency vector* (RSV), a unit vector along the
//!    dominant local structure ([`saliency::build_rsv_field`]).
//! 3. For the current transform, the JSM weight at each overlap pixel is
//!    |cos θ| between the two RSVs ([`jsm::compute_jsm`]).
//! 4. The weighted joint histogram ([`histogram::build_weighted_histogram`])
//!    feeds mutual information ([`similarity`]), maximized by a Nelder-Mead
//!    simplex over (tx, ty, β) in a coarse-to-fine pyramid
//!    ([`registration::register`]).
//!
//! An unweighted normalized-MI registrar is included as the baseline the
//! weighted measure is compared against, along with a seeded synthetic
//! test-pair generator ([`synth`]), a benchmark runner ([`bench`]), and
//! similarity-surface / edge-overlay export tooling.
//!
//! See the `examples/` directory for one runnable example per capability;
//! the `jsmreg` binary exposes the same operations as subcommands.

pub mod bench;
pub mod config;
pub mod edges;
pub mod histogram;
pub mod img;
pub mod io;
pub mod jsm;
pub mod optimizer;
pub mod registration;
pub mod saliency;
pub mod similarity;
pub mod synth;
pub mod transform;

pub use histogram::{Interpolation, JointHistogram};
pub use img::{GaussianPyramid, Image};
pub use jsm::{CosinePolicy, JointSaliencyMap};
pub use registration::{
    register, similarity_surface, MeasureSpec, RegistrationConfig, RegistrationResult,
};
pub use saliency::{RsvField, SaliencyMap};
pub use transform::RigidTransform;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("unsupported or malformed file: {0}")]
    Format(String),
    #[error("empty overlap: no pixel pair received any histogram mass")]
    EmptyOverlap,
    #[error("degenerate overlap: start transform leaves less than 1% of pixels in overlap")]
    DegenerateOverlap,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
