//! Wavelet-based surface-defect inspection for grayscale tile images.
//!
//! The pipeline decomposes a tile image with a multilevel 2-D Haar
//! transform, keeps the level-k approximation, and measures the Euclidean
//! distance between a reference tile and a test tile in that coefficient
//! space. Identical surfaces collapse to distance zero while localized
//! defects survive the repeated averaging, so a threshold on the distance
//! separates good tiles from defective ones.
//!
//! Modules:
//! - [`wavelet`]: 1-D / 2-D Haar analysis and synthesis, multilevel pyramids.
//! - [`inspect`]: distance, verdicts, and coefficient-space defect maps.
//! - [`metrics`]: confusion counts, classification accuracy, calibration.
//! - [`imageio`]: PGM images, pyramid files, and manifest CSV codecs.
//! - [`synth`]: deterministic synthetic tile corpora with injected defects.

pub mod imageio;
pub mod inspect;
pub mod metrics;
pub mod synth;
pub mod wavelet;
