//! Deterministic synthetic tile corpora.
//!
//! Corpus generation is reproducible down to the byte from a single u64
//! seed, on any platform: the generator below is fully specified here, all
//! texture parameters are frozen constants, and every pixel is quantized
//! to an integer before leaving this module.

use std::f64::consts::TAU;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::imageio::{save_manifest, save_pgm, Manifest, ManifestEntry};
use crate::inspect::Verdict;
use crate::wavelet::Image;

/// SplitMix64 pseudo-random generator.
///
/// State update: `state += 0x9E3779B97F4A7C15` (wrapping). Output mix of
/// the updated state `z`:
/// `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`,
/// `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`,
/// result `z ^ (z >> 31)`, all wrapping. The sequence for a given seed is
/// part of this crate's compatibility contract: corpora regenerate
/// byte-identically across platforms and releases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1): the top 53 bits scaled by 2^-53.
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform in 0..n via modulo. The bias is below 2^-32 for any n that
    /// fits corpus geometry, and determinism matters more here than
    /// perfect uniformity. Panics if n is zero.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below needs a nonzero bound");
        self.next_u64() % n
    }

    /// Standard normal deviate via the Box-Muller cosine branch. Consumes
    /// exactly two generator outputs: u1 in (0, 1] (top 53 bits plus one,
    /// scaled) and u2 in [0, 1); returns `sqrt(-2 ln u1) * cos(2 pi u2)`.
    pub fn next_gaussian(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * SCALE;
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }
}

/// Errors from synthesis.
#[derive(Debug)]
pub enum SynthError {
    /// Tile side must be a power of two, at least 8.
    BadSize { size: usize },
    /// Defect ratios live in [0, 1].
    BadRatio { ratio: f64 },
    /// Noise sigma must be finite and nonnegative.
    BadSigma { sigma: f64 },
    /// Defect amplitudes must be nonzero and finite.
    BadAmplitude { amplitude: f64 },
    /// The defect footprint does not fit the image.
    ExtentTooLarge {
        extent: usize,
        rows: usize,
        cols: usize,
    },
    /// Writing corpus files failed.
    Io(std::io::Error),
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::BadSize { size } => {
                write!(
                    f,
                    "tile size {size} invalid; need a power of two, at least 8"
                )
            }
            SynthError::BadRatio { ratio } => {
                write!(f, "defect ratio {ratio} is outside [0, 1]")
            }
            SynthError::BadSigma { sigma } => {
                write!(f, "noise sigma {sigma} must be finite and nonnegative")
            }
            SynthError::BadAmplitude { amplitude } => {
                write!(f, "defect amplitude {amplitude} must be nonzero and finite")
            }
            SynthError::ExtentTooLarge { extent, rows, cols } => {
                write!(
                    f,
                    "defect extent {extent} does not fit a {rows}x{cols} image"
                )
            }
            SynthError::Io(e) => write!(f, "io failure: {e}"),
        }
    }
}

impl std::error::Error for SynthError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SynthError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for SynthError {
    fn from(e: std::io::Error) -> SynthError {
        SynthError::Io(e)
    }
}

/// Base gray level every tile is built on.
pub const TILE_BASE_LEVEL: f64 = 128.0;

/// Frozen grating family as `(cycles_x, cycles_y, amplitude)` triples.
/// Only the phases vary between corpora, so two corpora with the same
/// texture seed share their texture exactly.
pub const GRATING_FAMILY: [(f64, f64, f64); 3] =
    [(1.0, 2.0, 18.0), (3.0, 1.0, 12.0), (2.0, 5.0, 8.0)];

/// One sinusoidal texture component.
#[derive(Debug, Clone, PartialEq)]
pub struct Grating {
    /// Horizontal cycles across the tile width.
    pub cycles_x: f64,
    /// Vertical cycles across the tile height.
    pub cycles_y: f64,
    pub amplitude: f64,
    /// Phase offset in radians.
    pub phase: f64,
}

/// Instantiates [`GRATING_FAMILY`] with phases drawn from `texture_seed`
/// (one uniform draw in [0, 2 pi) per grating, in family order).
pub fn seeded_gratings(texture_seed: u64) -> Vec<Grating> {
    let mut rng = SplitMix64::new(texture_seed);
    GRATING_FAMILY
        .iter()
        .map(|&(cycles_x, cycles_y, amplitude)| Grating {
            cycles_x,
            cycles_y,
            amplitude,
            phase: rng.next_f64() * TAU,
        })
        .collect()
}

/// Tile sides are powers of two so every dyadic level divides cleanly;
/// the floor of 8 keeps the default three-level pipeline applicable.
fn check_size(size: usize) -> Result<(), SynthError> {
    if size < 8 || !size.is_power_of_two() {
        return Err(SynthError::BadSize { size });
    }
    Ok(())
}

/// Renders one tile: base level plus the gratings, plus one Gaussian noise
/// deviate per pixel in row-major order (scaled by `noise_sigma`), each
/// pixel rounded half-to-even and clamped to [0, 255]. The result is
/// integer-valued, so saving as PGM and loading back is lossless.
pub fn render_tile(
    size: usize,
    gratings: &[Grating],
    noise_sigma: f64,
    noise_seed: u64,
) -> Result<Image, SynthError> {
    check_size(size)?;
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(SynthError::BadSigma { sigma: noise_sigma });
    }
    let mut rng = SplitMix64::new(noise_seed);
    let inv_size = 1.0 / size as f64;
    Ok(Image::from_fn(size, size, |y, x| {
        let mut v = TILE_BASE_LEVEL;
        for g in gratings {
            let angle = TAU * (g.cycles_x * x as f64 + g.cycles_y * y as f64) * inv_size + g.phase;
            v += g.amplitude * angle.cos();
        }
        v += noise_sigma * rng.next_gaussian();
        v.round_ties_even().clamp(0.0, 255.0)
    }))
}

/// Defect shapes the injector can stamp into a tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DefectKind {
    /// Filled disc at a seeded interior position.
    Spot,
    /// Random-walk polyline, one to two pixels wide.
    Crack,
    /// Quarter disc bitten out of a seeded corner.
    EdgeChip,
    /// Disc with a harmonically perturbed boundary radius.
    Blob,
}

impl DefectKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DefectKind::Spot => "spot",
            DefectKind::Crack => "crack",
            DefectKind::EdgeChip => "edge_chip",
            DefectKind::Blob => "blob",
        }
    }
}

impl fmt::Display for DefectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Order in which corpus generation cycles defect kinds over the
/// defective images.
pub const KIND_ROTATION: [DefectKind; 4] = [
    DefectKind::Spot,
    DefectKind::Crack,
    DefectKind::EdgeChip,
    DefectKind::Blob,
];

/// One defect to stamp: shape, signed intensity change, footprint scale,
/// and the seed for its geometry stream.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectSpec {
    pub kind: DefectKind,
    /// Added to every pixel inside the footprint; must be nonzero.
    pub amplitude: f64,
    /// Footprint scale in pixels: disc radius, walk length, or chip radius.
    pub extent: usize,
    pub seed: u64,
}

impl DefectSpec {
    /// Frozen per-kind defaults, scaled to the tile side. The amplitudes
    /// were tuned so each kind lands an order of magnitude above the
    /// sensor-noise distance floor at sigma 2 while staying inside the
    /// 8-bit range on the frozen texture.
    pub fn default_for(kind: DefectKind, size: usize, seed: u64) -> DefectSpec {
        let (amplitude, extent) = match kind {
            DefectKind::Spot => (60.0, (size / 32).max(3)),
            DefectKind::Crack => (-70.0, (size / 4).max(8)),
            DefectKind::EdgeChip => (-60.0, (size / 24).max(3)),
            DefectKind::Blob => (55.0, (size / 28).max(3)),
        };
        DefectSpec {
            kind,
            amplitude,
            extent,
            seed,
        }
    }
}

/// Stamps `spec` into a copy of `image`. Affected pixels get
/// `amplitude` added, then are re-quantized (round half to even, clamp to
/// [0, 255]) so defective tiles stay integer-valued like clean ones.
pub fn inject_defect(image: &Image, spec: &DefectSpec) -> Result<Image, SynthError> {
    if spec.amplitude == 0.0 || !spec.amplitude.is_finite() {
        return Err(SynthError::BadAmplitude {
            amplitude: spec.amplitude,
        });
    }
    let (rows, cols) = (image.rows(), image.cols());
    let e = spec.extent;
    let fits = match spec.kind {
        // Disc-shaped footprints (diameter 2e + 1) must fit inside the tile.
        DefectKind::Spot | DefectKind::Blob => e >= 1 && 2 * e < rows.min(cols),
        DefectKind::Crack | DefectKind::EdgeChip => e >= 1 && e <= rows.min(cols),
    };
    if !fits {
        return Err(SynthError::ExtentTooLarge {
            extent: e,
            rows,
            cols,
        });
    }

    let mut rng = SplitMix64::new(spec.seed);
    let mut mask = vec![false; rows * cols];
    match spec.kind {
        DefectKind::Spot => {
            let cy = e + rng.next_below((rows - 2 * e) as u64) as usize;
            let cx = e + rng.next_below((cols - 2 * e) as u64) as usize;
            stamp_disc(&mut mask, cols, rows, cy, cx, |dy, dx| {
                dy * dy + dx * dx <= (e * e) as f64
            });
        }
        DefectKind::Crack => {
            const DIRS: [(i64, i64); 8] = [
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ];
            let mut y = rng.next_below(rows as u64) as usize;
            let mut x = rng.next_below(cols as u64) as usize;
            for _ in 0..e {
                mask[y * cols + x] = true;
                // Half the steps widen the crack to two pixels.
                if rng.next_f64() < 0.5 {
                    mask[y * cols + (x + 1).min(cols - 1)] = true;
                }
                let (dy, dx) = DIRS[rng.next_below(8) as usize];
                y = (y as i64 + dy).clamp(0, rows as i64 - 1) as usize;
                x = (x as i64 + dx).clamp(0, cols as i64 - 1) as usize;
            }
        }
        DefectKind::EdgeChip => {
            let (cy, cx) = match rng.next_below(4) {
                0 => (0, 0),
                1 => (0, cols - 1),
                2 => (rows - 1, 0),
                _ => (rows - 1, cols - 1),
            };
            stamp_disc(&mut mask, cols, rows, cy, cx, |dy, dx| {
                dy * dy + dx * dx <= (e * e) as f64
            });
        }
        DefectKind::Blob => {
            let cy = e + rng.next_below((rows - 2 * e) as u64) as usize;
            let cx = e + rng.next_below((cols - 2 * e) as u64) as usize;
            let phi1 = rng.next_f64() * TAU;
            let phi2 = rng.next_f64() * TAU;
            let radius = e as f64;
            stamp_disc(&mut mask, cols, rows, cy, cx, |dy, dx| {
                let theta = dy.atan2(dx);
                let rho = radius
                    * (0.7 + 0.2 * (2.0 * theta + phi1).sin() + 0.1 * (5.0 * theta + phi2).sin());
                dy * dy + dx * dx <= rho * rho
            });
        }
    }

    Ok(Image::from_fn(rows, cols, |r, c| {
        let v = image[(r, c)];
        if mask[r * cols + c] {
            (v + spec.amplitude).round_ties_even().clamp(0.0, 255.0)
        } else {
            v
        }
    }))
}

/// Marks every pixel whose offset from `(cy, cx)` satisfies `inside`,
/// scanning the full image so footprints may be clipped by the borders.
fn stamp_disc(
    mask: &mut [bool],
    cols: usize,
    rows: usize,
    cy: usize,
    cx: usize,
    inside: impl Fn(f64, f64) -> bool,
) {
    for r in 0..rows {
        for c in 0..cols {
            let dy = r as f64 - cy as f64;
            let dx = c as f64 - cx as f64;
            if inside(dy, dx) {
                mask[r * cols + c] = true;
            }
        }
    }
}

/// Parameters of one synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    /// Tile side length; power of two, at least 8.
    pub size: usize,
    /// Number of test images (the reference is written in addition).
    pub count: usize,
    /// Fraction of test images that receive a defect, rounded to the
    /// nearest whole image.
    pub defect_ratio: f64,
    /// Standard deviation of per-pixel Gaussian sensor noise.
    pub noise_sigma: f64,
    /// Root seed; all randomness derives from it.
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> CorpusSpec {
        CorpusSpec {
            size: 256,
            count: 85,
            defect_ratio: 0.5,
            noise_sigma: 2.0,
            seed: 1,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        check_size(self.size)?;
        if !self.defect_ratio.is_finite() || !(0.0..=1.0).contains(&self.defect_ratio) {
            return Err(SynthError::BadRatio {
                ratio: self.defect_ratio,
            });
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(SynthError::BadSigma {
                sigma: self.noise_sigma,
            });
        }
        Ok(())
    }

    /// Number of test images that receive a defect.
    pub fn defective_count(&self) -> usize {
        ((self.count as f64 * self.defect_ratio).round() as usize).min(self.count)
    }
}

/// Root-seed stream layout shared by [`generate_base_tile`] and
/// [`generate_corpus`].
struct CorpusStreams {
    texture_seed: u64,
    assignment_seed: u64,
    reference_noise_seed: u64,
    root: SplitMix64,
}

impl CorpusStreams {
    fn new(seed: u64) -> CorpusStreams {
        let mut root = SplitMix64::new(seed);
        CorpusStreams {
            texture_seed: root.next_u64(),
            assignment_seed: root.next_u64(),
            reference_noise_seed: root.next_u64(),
            root,
        }
    }

    /// One noise seed per test image, then one defect seed per test image.
    fn per_image(mut self, count: usize) -> (CorpusStreams, Vec<u64>, Vec<u64>) {
        let noise: Vec<u64> = (0..count).map(|_| self.root.next_u64()).collect();
        let defect: Vec<u64> = (0..count).map(|_| self.root.next_u64()).collect();
        (self, noise, defect)
    }
}

/// Renders the defect-free reference tile for `spec`: the frozen grating
/// family with phases from the texture stream, plus reference sensor
/// noise. `generate_corpus` writes exactly this image as `ref.pgm`.
pub fn generate_base_tile(spec: &CorpusSpec) -> Result<Image, SynthError> {
    spec.validate()?;
    let streams = CorpusStreams::new(spec.seed);
    let gratings = seeded_gratings(streams.texture_seed);
    render_tile(
        spec.size,
        &gratings,
        spec.noise_sigma,
        streams.reference_noise_seed,
    )
}

/// Generates a corpus under `out_dir`: `ref.pgm`, `test_NNNN.pgm` for each
/// test image, and `manifest.csv` listing the test images with truth
/// labels. Returns the manifest.
///
/// Seed derivation: a root SplitMix64 stream seeded with `spec.seed`
/// yields, in order, the texture-phase seed, the defect-assignment seed,
/// the reference noise seed, then one noise seed per test image, then one
/// defect-geometry seed per test image. Which images are defective is a
/// seeded shuffle; defect kinds rotate through [`KIND_ROTATION`] over the
/// defective images in index order. Everything is a pure function of
/// `spec`, so reruns produce byte-identical files.
pub fn generate_corpus(spec: &CorpusSpec, out_dir: &Path) -> Result<Manifest, SynthError> {
    spec.validate()?;
    fs::create_dir_all(out_dir)?;

    let (streams, noise_seeds, defect_seeds) = CorpusStreams::new(spec.seed).per_image(spec.count);
    let gratings = seeded_gratings(streams.texture_seed);

    let reference = render_tile(
        spec.size,
        &gratings,
        spec.noise_sigma,
        streams.reference_noise_seed,
    )?;
    fs::write(out_dir.join("ref.pgm"), save_pgm(&reference, true))?;

    // Fisher-Yates shuffle of image indices; the first defective_count
    // positions of the shuffled order receive defects.
    let mut order: Vec<usize> = (0..spec.count).collect();
    let mut assign_rng = SplitMix64::new(streams.assignment_seed);
    for i in (1..order.len()).rev() {
        let j = assign_rng.next_below((i + 1) as u64) as usize;
        order.swap(i, j);
    }
    let mut defective = vec![false; spec.count];
    for &idx in order.iter().take(spec.defective_count()) {
        defective[idx] = true;
    }

    let mut entries = Vec::with_capacity(spec.count);
    let mut defect_no = 0usize;
    for i in 0..spec.count {
        let mut tile = render_tile(spec.size, &gratings, spec.noise_sigma, noise_seeds[i])?;
        let label = if defective[i] {
            let kind = KIND_ROTATION[defect_no % KIND_ROTATION.len()];
            defect_no += 1;
            let dspec = DefectSpec::default_for(kind, spec.size, defect_seeds[i]);
            tile = inject_defect(&tile, &dspec)?;
            Verdict::Defective
        } else {
            Verdict::Ok
        };
        let name = format!("test_{i:04}.pgm");
        fs::write(out_dir.join(&name), save_pgm(&tile, true))?;
        entries.push(ManifestEntry { path: name, label });
    }

    let manifest = Manifest { entries };
    fs::write(out_dir.join("manifest.csv"), save_manifest(&manifest))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::load_pgm;

    #[test]
    fn splitmix_produces_the_published_sequence_for_seed_zero() {
        // First outputs of SplitMix64 with seed 0, as published for the
        // reference implementation.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(rng.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn splitmix_streams_are_reproducible_and_seed_sensitive() {
        let a: Vec<u64> = {
            let mut rng = SplitMix64::new(99);
            (0..8).map(|_| rng.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut rng = SplitMix64::new(99);
            (0..8).map(|_| rng.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut rng = SplitMix64::new(100);
            (0..8).map(|_| rng.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_doubles_stay_in_the_unit_interval() {
        let mut rng = SplitMix64::new(12345);
        for _ in 0..10_000 {
            let v = rng.next_f64();
            assert!((0.0..1.0).contains(&v));
        }
    }

    #[test]
    fn gaussian_moments_look_standard_normal() {
        let mut rng = SplitMix64::new(777);
        let n = 50_000;
        let samples: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "variance {var}");
    }

    #[test]
    fn flat_texture_without_noise_is_constant() {
        let tile = render_tile(32, &[], 0.0, 4).unwrap();
        assert!(tile.data().iter().all(|&v| v == TILE_BASE_LEVEL));
    }

    #[test]
    fn rendered_tiles_are_integer_valued_eight_bit() {
        let gratings = seeded_gratings(21);
        let tile = render_tile(64, &gratings, 2.0, 22).unwrap();
        for &v in tile.data() {
            assert!((0.0..=255.0).contains(&v));
            assert_eq!(v, v.round());
        }
    }

    #[test]
    fn rendering_is_deterministic_per_seed() {
        let gratings = seeded_gratings(5);
        let a = render_tile(32, &gratings, 2.0, 9).unwrap();
        let b = render_tile(32, &gratings, 2.0, 9).unwrap();
        let c = render_tile(32, &gratings, 2.0, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn render_rejects_bad_parameters() {
        assert!(matches!(
            render_tile(12, &[], 0.0, 1),
            Err(SynthError::BadSize { size: 12 })
        ));
        assert!(matches!(
            render_tile(4, &[], 0.0, 1),
            Err(SynthError::BadSize { size: 4 })
        ));
        assert!(matches!(
            render_tile(32, &[], -1.0, 1),
            Err(SynthError::BadSigma { .. })
        ));
    }

    #[test]
    fn every_defect_kind_changes_pixels_deterministically() {
        let gratings = seeded_gratings(31);
        let clean = render_tile(64, &gratings, 0.0, 32).unwrap();
        for (i, kind) in KIND_ROTATION.iter().enumerate() {
            let spec = DefectSpec::default_for(*kind, 64, 1000 + i as u64);
            let bad = inject_defect(&clean, &spec).unwrap();
            let again = inject_defect(&clean, &spec).unwrap();
            assert_eq!(bad, again, "{kind} not deterministic");
            let changed = clean
                .data()
                .iter()
                .zip(bad.data())
                .filter(|(a, b)| a != b)
                .count();
            assert!(changed > 0, "{kind} changed no pixels");
            for (&a, &b) in clean.data().iter().zip(bad.data()) {
                assert!((a - b).abs() <= spec.amplitude.abs() + 0.5);
            }
        }
    }

    #[test]
    fn defects_stay_integer_valued() {
        let gratings = seeded_gratings(41);
        let clean = render_tile(32, &gratings, 2.0, 42).unwrap();
        let spec = DefectSpec {
            kind: DefectKind::Spot,
            amplitude: 33.25,
            extent: 4,
            seed: 43,
        };
        let bad = inject_defect(&clean, &spec).unwrap();
        for &v in bad.data() {
            assert_eq!(v, v.round());
            assert!((0.0..=255.0).contains(&v));
        }
    }

    #[test]
    fn inject_rejects_bad_specs() {
        let clean = render_tile(32, &[], 0.0, 1).unwrap();
        let zero_amp = DefectSpec {
            kind: DefectKind::Spot,
            amplitude: 0.0,
            extent: 3,
            seed: 1,
        };
        assert!(matches!(
            inject_defect(&clean, &zero_amp),
            Err(SynthError::BadAmplitude { .. })
        ));
        let too_big = DefectSpec {
            kind: DefectKind::Spot,
            amplitude: 50.0,
            extent: 16,
            seed: 1,
        };
        assert!(matches!(
            inject_defect(&clean, &too_big),
            Err(SynthError::ExtentTooLarge { .. })
        ));
        let zero_extent = DefectSpec {
            kind: DefectKind::Crack,
            amplitude: 50.0,
            extent: 0,
            seed: 1,
        };
        assert!(matches!(
            inject_defect(&clean, &zero_extent),
            Err(SynthError::ExtentTooLarge { .. })
        ));
    }

    #[test]
    fn corpus_spec_validation_catches_bad_fields() {
        let spec = CorpusSpec {
            size: 100,
            ..CorpusSpec::default()
        };
        assert!(matches!(spec.validate(), Err(SynthError::BadSize { .. })));
        let spec = CorpusSpec {
            defect_ratio: 1.5,
            ..CorpusSpec::default()
        };
        assert!(matches!(spec.validate(), Err(SynthError::BadRatio { .. })));
        let spec = CorpusSpec {
            noise_sigma: -0.1,
            ..CorpusSpec::default()
        };
        assert!(matches!(spec.validate(), Err(SynthError::BadSigma { .. })));
        assert!(CorpusSpec::default().validate().is_ok());
    }

    #[test]
    fn defective_count_rounds_to_nearest_image() {
        let spec = CorpusSpec {
            count: 85,
            defect_ratio: 0.5,
            ..CorpusSpec::default()
        };
        assert_eq!(spec.defective_count(), 43);
        let spec = CorpusSpec {
            count: 10,
            defect_ratio: 0.24,
            ..CorpusSpec::default()
        };
        assert_eq!(spec.defective_count(), 2);
        let spec = CorpusSpec {
            count: 7,
            defect_ratio: 1.0,
            ..CorpusSpec::default()
        };
        assert_eq!(spec.defective_count(), 7);
    }

    #[test]
    fn generated_corpus_matches_its_manifest_and_base_tile() {
        let dir = tempfile::tempdir().unwrap();
        let spec = CorpusSpec {
            size: 32,
            count: 9,
            defect_ratio: 0.5,
            noise_sigma: 2.0,
            seed: 7,
        };
        let manifest = generate_corpus(&spec, dir.path()).unwrap();
        assert_eq!(manifest.entries.len(), 9);
        let defective = manifest
            .entries
            .iter()
            .filter(|e| e.label == Verdict::Defective)
            .count();
        // 9 * 0.5 rounds to 5 (away from zero at the half).
        assert_eq!(defective, 5);

        let ref_bytes = std::fs::read(dir.path().join("ref.pgm")).unwrap();
        let base = generate_base_tile(&spec).unwrap();
        assert_eq!(load_pgm(&ref_bytes).unwrap(), base);

        let manifest_bytes = std::fs::read(dir.path().join("manifest.csv")).unwrap();
        assert_eq!(
            crate::imageio::load_manifest(&manifest_bytes).unwrap(),
            manifest
        );

        for entry in &manifest.entries {
            let bytes = std::fs::read(dir.path().join(&entry.path)).unwrap();
            let img = load_pgm(&bytes).unwrap();
            assert_eq!(img.rows(), 32);
            assert_eq!(img.cols(), 32);
        }
    }

    #[test]
    fn corpus_generation_is_byte_deterministic() {
        let spec = CorpusSpec {
            size: 32,
            count: 6,
            defect_ratio: 0.5,
            noise_sigma: 2.0,
            seed: 11,
        };
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        generate_corpus(&spec, dir_a.path()).unwrap();
        generate_corpus(&spec, dir_b.path()).unwrap();
        for name in ["ref.pgm", "manifest.csv", "test_0000.pgm", "test_0005.pgm"] {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn defect_kinds_rotate_over_defective_images() {
        let dir = tempfile::tempdir().unwrap();
        let spec = CorpusSpec {
            size: 32,
            count: 4,
            defect_ratio: 1.0,
            noise_sigma: 0.0,
            seed: 13,
        };
        let manifest = generate_corpus(&spec, dir.path()).unwrap();
        assert!(manifest
            .entries
            .iter()
            .all(|e| e.label == Verdict::Defective));
        // With every image defective and a kind rotation of length four,
        // the four tiles must all differ from each other.
        let tiles: Vec<Image> = manifest
            .entries
            .iter()
            .map(|e| load_pgm(&std::fs::read(dir.path().join(&e.path)).unwrap()).unwrap())
            .collect();
        for i in 0..tiles.len() {
            for j in (i + 1)..tiles.len() {
                assert_ne!(tiles[i], tiles[j], "tiles {i} and {j} are identical");
            }
        }
    }
}
