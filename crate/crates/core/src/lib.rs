//! Consistent two-dimensional maps of software systems derived from the
//! vocabulary of their source files.
//!
//! The pipeline runs corpus ingestion, term weighting, latent semantic
//! indexing, multidimensional scaling, shaded-relief rasterization, label
//! placement, thematic overlays and finally SVG/PNG rendering.

pub mod config;
pub mod corpus;
pub mod error;
pub mod fixture;
pub mod labeling;
pub mod lsi;
pub mod matrix;
pub mod mds;
pub mod pipeline;
pub mod relief;
pub mod render;
pub mod sidecar;
pub mod thematic;

pub use error::{Error, Result};
