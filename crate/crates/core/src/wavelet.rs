//! Orthonormal Haar wavelet analysis and synthesis.
//!
//! The 1-D step maps adjacent sample pairs to one approximation and one
//! detail coefficient, both scaled by 1/sqrt(2) so the transform preserves
//! energy. The 2-D step applies the 1-D step to every row and then to every
//! column of each half, producing the four subbands `ll`, `lh`, `hl`, `hh`.
//! Repeating the 2-D step on `ll` builds a multilevel [`Pyramid`].

use std::fmt;

/// Scaling factor shared by analysis and synthesis: 1/sqrt(2).
pub const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Errors from wavelet analysis and synthesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WaveletError {
    /// 1-D analysis needs an even number of samples.
    OddLength { len: usize },
    /// 1-D analysis needs at least two samples.
    TooShort { len: usize },
    /// 1-D synthesis needs approximation and detail of equal length.
    LengthMismatch { approx: usize, detail: usize },
    /// 2-D analysis needs even row and column counts.
    OddDimension { rows: usize, cols: usize },
    /// Subbands fed to synthesis must share one shape.
    DimensionMismatch,
    /// Image dimensions cannot be halved `levels` times.
    NotDivisible {
        rows: usize,
        cols: usize,
        levels: usize,
    },
    /// Decomposition needs at least one level.
    InvalidLevels { levels: usize },
    /// Stored pyramid structure is internally inconsistent.
    CorruptPyramid { reason: &'static str },
}

impl fmt::Display for WaveletError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveletError::OddLength { len } => {
                write!(f, "signal length {len} is odd; analysis needs sample pairs")
            }
            WaveletError::TooShort { len } => {
                write!(
                    f,
                    "signal length {len} is too short; need at least 2 samples"
                )
            }
            WaveletError::LengthMismatch { approx, detail } => write!(
                f,
                "approximation length {approx} does not match detail length {detail}"
            ),
            WaveletError::OddDimension { rows, cols } => {
                write!(f, "image is {rows}x{cols}; both dimensions must be even")
            }
            WaveletError::DimensionMismatch => {
                write!(f, "subbands do not share a single shape")
            }
            WaveletError::NotDivisible { rows, cols, levels } => write!(
                f,
                "image is {rows}x{cols}; dimensions are not divisible by 2^{levels}"
            ),
            WaveletError::InvalidLevels { levels } => {
                write!(f, "level count {levels} is invalid; need at least 1")
            }
            WaveletError::CorruptPyramid { reason } => {
                write!(f, "corrupt pyramid: {reason}")
            }
        }
    }
}

impl std::error::Error for WaveletError {}

/// Dense row-major grayscale image with `f64` samples.
///
/// Invariant: `rows * cols >= 1` and `data.len() == rows * cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Image {
    /// Zero-filled image. Panics if either dimension is zero.
    pub fn new(rows: usize, cols: usize) -> Image {
        assert!(rows > 0 && cols > 0, "image dimensions must be nonzero");
        Image {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Image {
        assert!(rows > 0 && cols > 0, "image dimensions must be nonzero");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Image { rows, cols, data }
    }

    /// Wraps an existing row-major buffer. Panics if the length is wrong
    /// or either dimension is zero.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Image {
        assert!(rows > 0 && cols > 0, "image dimensions must be nonzero");
        assert_eq!(
            data.len(),
            rows * cols,
            "buffer length does not match dimensions"
        );
        Image { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major sample buffer.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// One row as a contiguous slice.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// New image with `f` applied to every sample.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Top-left crop. Panics if the target exceeds the source.
    pub fn crop(&self, rows: usize, cols: usize) -> Image {
        assert!(
            rows <= self.rows && cols <= self.cols,
            "crop target exceeds source dimensions"
        );
        Image::from_fn(rows, cols, |r, c| self[(r, c)])
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|&v| v * v).sum()
    }
}

impl std::ops::Index<(usize, usize)> for Image {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Image {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// The four subbands of one 2-D analysis step, each half-size in both axes.
///
/// `lh` carries horizontal detail (row high-pass, column low-pass) and `hl`
/// vertical detail (row low-pass, column high-pass).
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet {
    pub ll: Image,
    pub lh: Image,
    pub hl: Image,
    pub hh: Image,
}

/// Detail subbands of one pyramid level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailBands {
    pub lh: Image,
    pub hl: Image,
    pub hh: Image,
}

impl DetailBands {
    fn energy(&self) -> f64 {
        self.lh.energy() + self.hl.energy() + self.hh.energy()
    }
}

/// Multilevel decomposition: one approximation plus `levels` detail band
/// triples, `3 * levels + 1` matrices in total.
///
/// `details[0]` is the finest level (the first analysis step); the
/// approximation has the source dimensions divided by `2^levels`, after
/// padding if the source was not divisible.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    pub levels: usize,
    pub approximation: Image,
    pub details: Vec<DetailBands>,
    /// Dimensions of the original image, before any padding.
    pub source_rows: usize,
    pub source_cols: usize,
}

impl Pyramid {
    /// Number of stored matrices: `3 * levels + 1`.
    pub fn matrix_count(&self) -> usize {
        3 * self.levels + 1
    }

    /// Row count of the (possibly padded) image the transform actually ran on.
    pub fn transform_rows(&self) -> usize {
        self.approximation.rows() << self.levels
    }

    /// Column count of the (possibly padded) image the transform actually ran on.
    pub fn transform_cols(&self) -> usize {
        self.approximation.cols() << self.levels
    }

    /// True when the source was padded before decomposition.
    pub fn is_padded(&self) -> bool {
        self.transform_rows() != self.source_rows || self.transform_cols() != self.source_cols
    }

    /// Sum of squared coefficients across all `3 * levels + 1` matrices.
    pub fn total_energy(&self) -> f64 {
        self.approximation.energy() + self.detail_energy()
    }

    /// Sum of squared coefficients across the detail bands only.
    pub fn detail_energy(&self) -> f64 {
        self.details.iter().map(DetailBands::energy).sum()
    }

    /// Checks the structural invariants relating levels, band shapes, and
    /// source dimensions.
    pub fn validate(&self) -> Result<(), WaveletError> {
        if self.levels == 0 {
            return Err(WaveletError::CorruptPyramid {
                reason: "level count is zero",
            });
        }
        if self.details.len() != self.levels {
            return Err(WaveletError::CorruptPyramid {
                reason: "detail band count does not match level count",
            });
        }
        if self.levels >= usize::BITS as usize {
            return Err(WaveletError::CorruptPyramid {
                reason: "level count exceeds addressable shifts",
            });
        }
        let (tr, tc) = (self.transform_rows(), self.transform_cols());
        let factor = 1usize << self.levels;
        if tr != next_multiple(self.source_rows, factor)
            || tc != next_multiple(self.source_cols, factor)
        {
            return Err(WaveletError::CorruptPyramid {
                reason: "approximation shape does not match source dimensions",
            });
        }
        for (j, bands) in self.details.iter().enumerate() {
            // details[j] holds level j + 1, at transform dims / 2^(j + 1).
            let er = tr >> (j + 1);
            let ec = tc >> (j + 1);
            for band in [&bands.lh, &bands.hl, &bands.hh] {
                if band.rows() != er || band.cols() != ec {
                    return Err(WaveletError::CorruptPyramid {
                        reason: "detail band shape does not match its level",
                    });
                }
            }
        }
        Ok(())
    }
}

/// Smallest multiple of `factor` that is >= `n`. `factor` must be a power of two.
fn next_multiple(n: usize, factor: usize) -> usize {
    debug_assert!(factor.is_power_of_two());
    (n + factor - 1) & !(factor - 1)
}

/// One 1-D analysis step.
///
/// For each pair `(x[2i], x[2i+1])` produces approximation
/// `(x[2i] + x[2i+1]) / sqrt(2)` and detail `(x[2i] - x[2i+1]) / sqrt(2)`.
/// Returns `(approximation, detail)`, each of half length.
pub fn haar_analysis_1d(signal: &[f64]) -> Result<(Vec<f64>, Vec<f64>), WaveletError> {
    let len = signal.len();
    if len < 2 {
        return Err(WaveletError::TooShort { len });
    }
    if !len.is_multiple_of(2) {
        return Err(WaveletError::OddLength { len });
    }
    let half = len / 2;
    let mut approx = Vec::with_capacity(half);
    let mut detail = Vec::with_capacity(half);
    for i in 0..half {
        let a = signal[2 * i];
        let b = signal[2 * i + 1];
        approx.push((a + b) * INV_SQRT2);
        detail.push((a - b) * INV_SQRT2);
    }
    Ok((approx, detail))
}

/// One 1-D synthesis step, the exact inverse of [`haar_analysis_1d`].
pub fn haar_synthesis_1d(approx: &[f64], detail: &[f64]) -> Result<Vec<f64>, WaveletError> {
    if approx.len() != detail.len() {
        return Err(WaveletError::LengthMismatch {
            approx: approx.len(),
            detail: detail.len(),
        });
    }
    if approx.is_empty() {
        return Err(WaveletError::TooShort { len: 0 });
    }
    let mut signal = Vec::with_capacity(2 * approx.len());
    for i in 0..approx.len() {
        signal.push((approx[i] + detail[i]) * INV_SQRT2);
        signal.push((approx[i] - detail[i]) * INV_SQRT2);
    }
    Ok(signal)
}

/// One 2-D analysis step: 1-D analysis over every row, then over every
/// column of the two half-width results.
pub fn dwt2(image: &Image) -> Result<SubbandSet, WaveletError> {
    let (rows, cols) = (image.rows(), image.cols());
    if rows % 2 != 0 || cols % 2 != 0 {
        return Err(WaveletError::OddDimension { rows, cols });
    }
    let (hr, hc) = (rows / 2, cols / 2);

    // Row pass: split each row into low and high halves.
    let mut low = Image::new(rows, hc);
    let mut high = Image::new(rows, hc);
    for r in 0..rows {
        let row = image.row(r);
        for j in 0..hc {
            let a = row[2 * j];
            let b = row[2 * j + 1];
            low[(r, j)] = (a + b) * INV_SQRT2;
            high[(r, j)] = (a - b) * INV_SQRT2;
        }
    }

    // Column pass on each half.
    let mut ll = Image::new(hr, hc);
    let mut hl = Image::new(hr, hc);
    let mut lh = Image::new(hr, hc);
    let mut hh = Image::new(hr, hc);
    for i in 0..hr {
        for c in 0..hc {
            let a = low[(2 * i, c)];
            let b = low[(2 * i + 1, c)];
            ll[(i, c)] = (a + b) * INV_SQRT2;
            hl[(i, c)] = (a - b) * INV_SQRT2;
            let a = high[(2 * i, c)];
            let b = high[(2 * i + 1, c)];
            lh[(i, c)] = (a + b) * INV_SQRT2;
            hh[(i, c)] = (a - b) * INV_SQRT2;
        }
    }
    Ok(SubbandSet { ll, lh, hl, hh })
}

/// One 2-D synthesis step, the exact inverse of [`dwt2`].
pub fn idwt2(subbands: &SubbandSet) -> Result<Image, WaveletError> {
    idwt2_parts(&subbands.ll, &subbands.lh, &subbands.hl, &subbands.hh)
}

fn idwt2_parts(ll: &Image, lh: &Image, hl: &Image, hh: &Image) -> Result<Image, WaveletError> {
    let (hr, hc) = (ll.rows(), ll.cols());
    for band in [lh, hl, hh] {
        if band.rows() != hr || band.cols() != hc {
            return Err(WaveletError::DimensionMismatch);
        }
    }

    // Column synthesis: rebuild the row-pass low and high halves.
    let mut low = Image::new(2 * hr, hc);
    let mut high = Image::new(2 * hr, hc);
    for i in 0..hr {
        for c in 0..hc {
            low[(2 * i, c)] = (ll[(i, c)] + hl[(i, c)]) * INV_SQRT2;
            low[(2 * i + 1, c)] = (ll[(i, c)] - hl[(i, c)]) * INV_SQRT2;
            high[(2 * i, c)] = (lh[(i, c)] + hh[(i, c)]) * INV_SQRT2;
            high[(2 * i + 1, c)] = (lh[(i, c)] - hh[(i, c)]) * INV_SQRT2;
        }
    }

    // Row synthesis.
    let mut out = Image::new(2 * hr, 2 * hc);
    for r in 0..2 * hr {
        for j in 0..hc {
            out[(r, 2 * j)] = (low[(r, j)] + high[(r, j)]) * INV_SQRT2;
            out[(r, 2 * j + 1)] = (low[(r, j)] - high[(r, j)]) * INV_SQRT2;
        }
    }
    Ok(out)
}

/// Multilevel decomposition. Dimensions must be divisible by `2^levels`;
/// use [`decompose_padded`] otherwise.
pub fn decompose(image: &Image, levels: usize) -> Result<Pyramid, WaveletError> {
    decompose_impl(image, levels, false)
}

/// Multilevel decomposition that first pads the image, by replicating the
/// last row and column, up to the next multiple of `2^levels` in each axis.
/// [`reconstruct`] crops the padding back off.
pub fn decompose_padded(image: &Image, levels: usize) -> Result<Pyramid, WaveletError> {
    decompose_impl(image, levels, true)
}

fn decompose_impl(image: &Image, levels: usize, pad: bool) -> Result<Pyramid, WaveletError> {
    if levels == 0 {
        return Err(WaveletError::InvalidLevels { levels });
    }
    let (rows, cols) = (image.rows(), image.cols());
    let factor = match 1usize.checked_shl(levels as u32) {
        Some(f) if levels < usize::BITS as usize => f,
        _ => return Err(WaveletError::NotDivisible { rows, cols, levels }),
    };

    let (tr, tc) = if pad {
        (next_multiple(rows, factor), next_multiple(cols, factor))
    } else {
        if rows % factor != 0 || cols % factor != 0 {
            return Err(WaveletError::NotDivisible { rows, cols, levels });
        }
        (rows, cols)
    };

    let mut current = if (tr, tc) != (rows, cols) {
        // Replicate the last row/column into the padded margin.
        Image::from_fn(tr, tc, |r, c| image[(r.min(rows - 1), c.min(cols - 1))])
    } else {
        image.clone()
    };

    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let bands = dwt2(&current)?;
        details.push(DetailBands {
            lh: bands.lh,
            hl: bands.hl,
            hh: bands.hh,
        });
        current = bands.ll;
    }
    Ok(Pyramid {
        levels,
        approximation: current,
        details,
        source_rows: rows,
        source_cols: cols,
    })
}

/// Inverts [`decompose`] / [`decompose_padded`]: synthesizes level by level
/// from coarsest to finest, then crops any padding back to the source
/// dimensions.
pub fn reconstruct(pyramid: &Pyramid) -> Result<Image, WaveletError> {
    pyramid.validate()?;
    let mut current = pyramid.approximation.clone();
    for bands in pyramid.details.iter().rev() {
        current = idwt2_parts(&current, &bands.lh, &bands.hl, &bands.hh)?;
    }
    if pyramid.is_padded() {
        current = current.crop(pyramid.source_rows, pyramid.source_cols);
    }
    Ok(current)
}
