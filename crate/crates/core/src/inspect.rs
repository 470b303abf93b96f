//! Reference-vs-test comparison in approximation space.
//!
//! Both images are decomposed to the same level; the Euclidean distance
//! between the two approximation matrices is the inspection statistic.
//! Identical surfaces give distance zero, and perturbations confined to
//! detail subbands are invisible by construction, so a small threshold on
//! the distance separates OK tiles from defective ones. An optional
//! coefficient-space defect map marks which approximation cells moved.

use std::fmt;
use std::str::FromStr;

use crate::wavelet::{self, Image, Pyramid, WaveletError};

/// Default decision threshold: an epsilon guard over "distance is zero".
pub const DEFAULT_DISTANCE_THRESHOLD: f64 = 1e-9;

/// Default level count for inspection decompositions.
pub const DEFAULT_LEVELS: usize = 3;

/// Inspection outcome for one tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Ok,
    Defective,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Ok => "OK",
            Verdict::Defective => "DEFECTIVE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Error for strings that name no verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseVerdictError;

impl fmt::Display for ParseVerdictError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("verdict must be \"ok\" or \"defective\"")
    }
}

impl std::error::Error for ParseVerdictError {}

impl FromStr for Verdict {
    type Err = ParseVerdictError;

    /// Case-insensitive: `ok` and `defective` in any casing.
    fn from_str(s: &str) -> Result<Verdict, ParseVerdictError> {
        if s.eq_ignore_ascii_case("ok") {
            Ok(Verdict::Ok)
        } else if s.eq_ignore_ascii_case("defective") {
            Ok(Verdict::Defective)
        } else {
            Err(ParseVerdictError)
        }
    }
}

/// Knobs for one inspection run.
#[derive(Debug, Clone, PartialEq)]
pub struct InspectConfig {
    /// Decomposition depth; the comparison happens at this level.
    pub levels: usize,
    /// Distances at or below this classify as OK.
    pub distance_threshold: f64,
    /// When set, defect maps are produced with this per-coefficient
    /// threshold.
    pub map_coeff_threshold: Option<f64>,
    /// Pad images whose dimensions are not divisible by `2^levels`.
    pub pad_enabled: bool,
}

impl Default for InspectConfig {
    fn default() -> InspectConfig {
        InspectConfig {
            levels: DEFAULT_LEVELS,
            distance_threshold: DEFAULT_DISTANCE_THRESHOLD,
            map_coeff_threshold: None,
            pad_enabled: false,
        }
    }
}

/// Errors from inspection operations.
#[derive(Debug, Clone, PartialEq)]
pub enum InspectError {
    /// Compared images or matrices do not share a shape.
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    /// A distance passed to classification was negative.
    NegativeDistance { distance: f64 },
    /// Defect-map upscale factors must be nonzero powers of two.
    InvalidUpscale { factor: usize },
    /// Decomposition of an input failed.
    Wavelet(WaveletError),
}

impl fmt::Display for InspectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InspectError::DimensionMismatch { expected, got } => write!(
                f,
                "shape mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            InspectError::NegativeDistance { distance } => {
                write!(f, "distance {distance} is negative")
            }
            InspectError::InvalidUpscale { factor } => {
                write!(f, "upscale factor {factor} is not a power of two")
            }
            InspectError::Wavelet(e) => write!(f, "decomposition failed: {e}"),
        }
    }
}

impl std::error::Error for InspectError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            InspectError::Wavelet(e) => Some(e),
            _ => None,
        }
    }
}

impl From<WaveletError> for InspectError {
    fn from(e: WaveletError) -> InspectError {
        InspectError::Wavelet(e)
    }
}

/// Everything one inspection produces.
#[derive(Debug, Clone, PartialEq)]
pub struct InspectionResult {
    pub distance: f64,
    pub verdict: Verdict,
    /// Coefficient-space defect map, present when
    /// [`InspectConfig::map_coeff_threshold`] is set. Cells are 1.0 where
    /// the approximation moved more than the threshold, else 0.0.
    pub defect_map: Option<Image>,
    /// The defect map upsampled to source resolution (nearest neighbor).
    pub defect_map_fullres: Option<Image>,
}

/// Decomposes per the config: padded when `pad_enabled`, strict otherwise.
pub fn decompose_with(image: &Image, config: &InspectConfig) -> Result<Pyramid, WaveletError> {
    if config.pad_enabled {
        wavelet::decompose_padded(image, config.levels)
    } else {
        wavelet::decompose(image, config.levels)
    }
}

/// Euclidean distance between two equally shaped coefficient matrices:
/// the square root of the sum of squared elementwise differences.
pub fn euclidean_distance(reference: &Image, test: &Image) -> Result<f64, InspectError> {
    if reference.rows() != test.rows() || reference.cols() != test.cols() {
        return Err(InspectError::DimensionMismatch {
            expected: (reference.rows(), reference.cols()),
            got: (test.rows(), test.cols()),
        });
    }
    let sum: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(&a, &b)| {
            let d = a - b;
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

/// Thresholds a distance into a verdict: OK iff
/// `distance <= config.distance_threshold`.
pub fn classify(distance: f64, config: &InspectConfig) -> Result<Verdict, InspectError> {
    if distance < 0.0 {
        return Err(InspectError::NegativeDistance { distance });
    }
    Ok(if distance <= config.distance_threshold {
        Verdict::Ok
    } else {
        Verdict::Defective
    })
}

/// Builds the coefficient-space defect map and its upsampled counterpart.
///
/// The map holds 1.0 where `|reference - test| > coeff_threshold`, else
/// 0.0; the second image repeats each cell `upscale` times in both axes.
pub fn defect_map(
    reference_ll: &Image,
    test_ll: &Image,
    coeff_threshold: f64,
    upscale: usize,
) -> Result<(Image, Image), InspectError> {
    if reference_ll.rows() != test_ll.rows() || reference_ll.cols() != test_ll.cols() {
        return Err(InspectError::DimensionMismatch {
            expected: (reference_ll.rows(), reference_ll.cols()),
            got: (test_ll.rows(), test_ll.cols()),
        });
    }
    if !upscale.is_power_of_two() {
        return Err(InspectError::InvalidUpscale { factor: upscale });
    }
    let map = Image::from_fn(reference_ll.rows(), reference_ll.cols(), |r, c| {
        if (reference_ll[(r, c)] - test_ll[(r, c)]).abs() > coeff_threshold {
            1.0
        } else {
            0.0
        }
    });
    let full = Image::from_fn(map.rows() * upscale, map.cols() * upscale, |r, c| {
        map[(r / upscale, c / upscale)]
    });
    Ok((map, full))
}

/// Full pipeline for one reference/test pair: decompose both, measure the
/// approximation distance, classify, and optionally build defect maps.
pub fn inspect_pair(
    reference: &Image,
    test: &Image,
    config: &InspectConfig,
) -> Result<InspectionResult, InspectError> {
    if reference.rows() != test.rows() || reference.cols() != test.cols() {
        return Err(InspectError::DimensionMismatch {
            expected: (reference.rows(), reference.cols()),
            got: (test.rows(), test.cols()),
        });
    }
    let ref_pyramid = decompose_with(reference, config)?;
    let test_pyramid = decompose_with(test, config)?;
    let distance = euclidean_distance(&ref_pyramid.approximation, &test_pyramid.approximation)?;
    let verdict = classify(distance, config)?;

    let (defect_map, defect_map_fullres) = match config.map_coeff_threshold {
        Some(coeff_threshold) => {
            let upscale = 1usize << config.levels;
            let (map, full) = self::defect_map(
                &ref_pyramid.approximation,
                &test_pyramid.approximation,
                coeff_threshold,
                upscale,
            )?;
            // The upsampled map covers the padded extent; crop to source.
            let full = if ref_pyramid.is_padded() {
                full.crop(reference.rows(), reference.cols())
            } else {
                full
            };
            (Some(map), Some(full))
        }
        None => (None, None),
    };

    Ok(InspectionResult {
        distance,
        verdict,
        defect_map,
        defect_map_fullres,
    })
}
