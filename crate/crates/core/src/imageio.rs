//! Byte-level codecs: PGM images, pyramid files, and manifest CSVs.
//!
//! All functions work on in-memory byte buffers; file access lives in the
//! CLI layer. Every save is deterministic, and every load validates before
//! allocating in proportion to the header's claims.

use std::collections::HashSet;
use std::fmt;

use crate::inspect::Verdict;
use crate::wavelet::{DetailBands, Image, Pyramid, WaveletError};

/// Leading bytes of a pyramid file.
pub const PYRAMID_MAGIC: [u8; 4] = *b"HDWT";

/// Pyramid file format version written by [`save_pyramid`].
pub const PYRAMID_VERSION: u8 = 1;

/// Errors from decoding or validating serialized data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormatError {
    /// The buffer does not start with a known magic.
    BadMagic,
    /// An image header field is missing or unreadable.
    MalformedHeader { reason: &'static str },
    /// Only 8-bit images (maxval <= 255) are supported.
    MaxvalUnsupported { maxval: u32 },
    /// The buffer ends before the promised payload does.
    TruncatedData,
    /// A pixel sample exceeds the header's maxval.
    SampleOutOfRange { value: u32, maxval: u16 },
    /// A textual pixel sample is not a number.
    MalformedSample,
    /// The pyramid file version is not supported.
    VersionUnsupported { version: u8 },
    /// Payload structure contradicts the header.
    LengthMismatch { reason: &'static str },
    /// The manifest does not start with the `path,label` header.
    BadHeader,
    /// A manifest record is malformed or carries an unknown label.
    BadLabel { line: usize },
    /// A manifest lists the same path twice.
    DuplicatePath { path: String },
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::BadMagic => f.write_str("unrecognized magic bytes"),
            FormatError::MalformedHeader { reason } => write!(f, "malformed header: {reason}"),
            FormatError::MaxvalUnsupported { maxval } => {
                write!(f, "maxval {maxval} unsupported; this codec is 8-bit only")
            }
            FormatError::TruncatedData => f.write_str("data ends before the promised payload"),
            FormatError::SampleOutOfRange { value, maxval } => {
                write!(f, "sample {value} exceeds maxval {maxval}")
            }
            FormatError::MalformedSample => f.write_str("non-numeric pixel sample"),
            FormatError::VersionUnsupported { version } => {
                write!(f, "pyramid file version {version} unsupported")
            }
            FormatError::LengthMismatch { reason } => {
                write!(f, "payload does not match header: {reason}")
            }
            FormatError::BadHeader => f.write_str("manifest must start with \"path,label\""),
            FormatError::BadLabel { line } => {
                write!(f, "manifest line {line}: malformed record or unknown label")
            }
            FormatError::DuplicatePath { path } => {
                write!(f, "manifest lists \"{path}\" more than once")
            }
        }
    }
}

impl std::error::Error for FormatError {}

/// Quantizes one sample for 8-bit storage: round half to even, then clamp
/// to [0, 255]. Non-finite values clamp to the nearest bound (NaN to 0).
pub fn quantize(value: f64) -> u8 {
    let rounded = value.round_ties_even();
    if rounded >= 255.0 {
        255
    } else if rounded >= 0.0 {
        rounded as u8
    } else {
        0
    }
}

struct TokenCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> TokenCursor<'a> {
    fn new(bytes: &'a [u8], pos: usize) -> TokenCursor<'a> {
        TokenCursor { bytes, pos }
    }

    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_filler(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Option<&'a [u8]> {
        self.skip_filler();
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }

    fn at_end(&mut self) -> bool {
        self.skip_filler();
        self.pos >= self.bytes.len()
    }
}

fn parse_ascii_u32(token: &[u8]) -> Option<u32> {
    let s = std::str::from_utf8(token).ok()?;
    s.parse().ok()
}

/// Decodes a PGM image, plain (`P2`) or binary (`P5`). `#` comments are
/// allowed wherever whitespace is; maxval must be in 1..=255.
pub fn load_pgm(bytes: &[u8]) -> Result<Image, FormatError> {
    if bytes.len() < 2 {
        return Err(FormatError::BadMagic);
    }
    let binary = match &bytes[..2] {
        b"P2" => false,
        b"P5" => true,
        _ => return Err(FormatError::BadMagic),
    };
    if bytes.len() > 2 && !bytes[2].is_ascii_whitespace() && bytes[2] != b'#' {
        return Err(FormatError::BadMagic);
    }

    let mut cursor = TokenCursor::new(bytes, 2);
    let mut header_field = |reason| {
        cursor
            .next_token()
            .and_then(parse_ascii_u32)
            .ok_or(FormatError::MalformedHeader { reason })
    };
    let width = header_field("width is missing or not a number")? as usize;
    let height = header_field("height is missing or not a number")? as usize;
    let maxval = header_field("maxval is missing or not a number")?;
    if width == 0 || height == 0 {
        return Err(FormatError::MalformedHeader {
            reason: "dimensions must be nonzero",
        });
    }
    if maxval == 0 {
        return Err(FormatError::MalformedHeader {
            reason: "maxval must be nonzero",
        });
    }
    if maxval > 255 {
        return Err(FormatError::MaxvalUnsupported { maxval });
    }
    let maxval = maxval as u16;
    let pixel_count = height
        .checked_mul(width)
        .ok_or(FormatError::MalformedHeader {
            reason: "dimensions overflow",
        })?;

    let mut data = Vec::new();
    if binary {
        // Exactly one whitespace byte separates the maxval from the payload.
        let mut pos = cursor.pos;
        match bytes.get(pos) {
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            Some(_) => {
                return Err(FormatError::MalformedHeader {
                    reason: "maxval must be followed by one whitespace byte",
                })
            }
            None => return Err(FormatError::TruncatedData),
        }
        let payload = &bytes[pos..];
        if payload.len() < pixel_count {
            return Err(FormatError::TruncatedData);
        }
        if payload.len() > pixel_count {
            return Err(FormatError::LengthMismatch {
                reason: "trailing bytes after pixel data",
            });
        }
        data.reserve_exact(pixel_count);
        for &b in payload {
            if u16::from(b) > maxval {
                return Err(FormatError::SampleOutOfRange {
                    value: u32::from(b),
                    maxval,
                });
            }
            data.push(f64::from(b));
        }
    } else {
        // No upfront reservation: a lying header runs out of tokens long
        // before the claimed pixel count allocates anything.
        for _ in 0..pixel_count {
            let token = cursor.next_token().ok_or(FormatError::TruncatedData)?;
            let value = parse_ascii_u32(token).ok_or(FormatError::MalformedSample)?;
            if value > u32::from(maxval) {
                return Err(FormatError::SampleOutOfRange { value, maxval });
            }
            data.push(f64::from(value));
        }
        if !cursor.at_end() {
            return Err(FormatError::LengthMismatch {
                reason: "trailing samples after pixel data",
            });
        }
    }
    Ok(Image::from_vec(height, width, data))
}

/// Encodes an image as PGM with maxval 255, binary (`P5`) or plain (`P2`).
/// Samples pass through [`quantize`] first.
pub fn save_pgm(image: &Image, binary: bool) -> Vec<u8> {
    let header = format!(
        "{}\n{} {}\n255\n",
        if binary { "P5" } else { "P2" },
        image.cols(),
        image.rows()
    );
    if binary {
        let mut out = header.into_bytes();
        out.extend(image.data().iter().map(|&v| quantize(v)));
        out
    } else {
        let mut out = header;
        // Plain-format lines stay under 70 characters: 17 samples of at
        // most 4 characters each ("255 ").
        for chunk in image.data().chunks(17) {
            let mut first = true;
            for &v in chunk {
                if !first {
                    out.push(' ');
                }
                out.push_str(&quantize(v).to_string());
                first = false;
            }
            out.push('\n');
        }
        out.into_bytes()
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_matrix(out: &mut Vec<u8>, m: &Image) {
    put_u32(out, m.rows().try_into().expect("matrix rows exceed u32"));
    put_u32(out, m.cols().try_into().expect("matrix cols exceed u32"));
    for &v in m.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Serializes a pyramid. Layout: magic `HDWT`, version byte, then
/// little-endian u32 level count, source rows, and source cols; then the
/// approximation matrix followed by the `lh`, `hl`, `hh` bands per level,
/// coarsest level first. Each matrix is u32 rows, u32 cols, and row-major
/// f64 little-endian samples. Coefficients round-trip bit-exactly.
///
/// Panics if any dimension or the level count exceeds `u32::MAX`.
pub fn save_pyramid(pyramid: &Pyramid) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&PYRAMID_MAGIC);
    out.push(PYRAMID_VERSION);
    put_u32(
        &mut out,
        pyramid.levels.try_into().expect("level count exceeds u32"),
    );
    put_u32(
        &mut out,
        pyramid
            .source_rows
            .try_into()
            .expect("source rows exceed u32"),
    );
    put_u32(
        &mut out,
        pyramid
            .source_cols
            .try_into()
            .expect("source cols exceed u32"),
    );
    put_matrix(&mut out, &pyramid.approximation);
    for bands in pyramid.details.iter().rev() {
        put_matrix(&mut out, &bands.lh);
        put_matrix(&mut out, &bands.hl);
        put_matrix(&mut out, &bands.hh);
    }
    out
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).ok_or(FormatError::TruncatedData)?;
        if end > self.bytes.len() {
            return Err(FormatError::TruncatedData);
        }
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32_le(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn matrix(&mut self) -> Result<Image, FormatError> {
        let rows = self.u32_le()? as usize;
        let cols = self.u32_le()? as usize;
        if rows == 0 || cols == 0 {
            return Err(FormatError::LengthMismatch {
                reason: "matrix with a zero dimension",
            });
        }
        let byte_len = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or(FormatError::LengthMismatch {
                reason: "matrix dimensions overflow",
            })?;
        // Bound the payload before allocating for it.
        let payload = self.take(byte_len)?;
        let count = byte_len / 8;
        let mut data = Vec::with_capacity(count);
        for chunk in payload.chunks_exact(8) {
            data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
        }
        Ok(Image::from_vec(rows, cols, data))
    }
}

/// Decodes a pyramid file written by [`save_pyramid`], validating the
/// structural invariants before returning.
pub fn load_pyramid(bytes: &[u8]) -> Result<Pyramid, FormatError> {
    let mut reader = ByteReader { bytes, pos: 0 };
    if reader.take(4)? != PYRAMID_MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = reader.take(1)?[0];
    if version != PYRAMID_VERSION {
        return Err(FormatError::VersionUnsupported { version });
    }
    let levels = reader.u32_le()? as usize;
    let source_rows = reader.u32_le()? as usize;
    let source_cols = reader.u32_le()? as usize;
    if levels == 0 {
        return Err(FormatError::LengthMismatch {
            reason: "zero level count",
        });
    }

    let approximation = reader.matrix()?;
    let mut details_coarse_first = Vec::with_capacity(levels);
    for _ in 0..levels {
        let lh = reader.matrix()?;
        let hl = reader.matrix()?;
        let hh = reader.matrix()?;
        details_coarse_first.push(DetailBands { lh, hl, hh });
    }
    if reader.pos != bytes.len() {
        return Err(FormatError::LengthMismatch {
            reason: "trailing data after the last matrix",
        });
    }
    details_coarse_first.reverse();
    let pyramid = Pyramid {
        levels,
        approximation,
        details: details_coarse_first,
        source_rows,
        source_cols,
    };
    match pyramid.validate() {
        Ok(()) => Ok(pyramid),
        Err(WaveletError::CorruptPyramid { reason }) => Err(FormatError::LengthMismatch { reason }),
        // validate only emits CorruptPyramid.
        Err(_) => unreachable!(),
    }
}

/// One manifest row: an image path and its ground-truth label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub label: Verdict,
}

/// A labeled image listing, as stored in `manifest.csv`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

/// Parses a manifest CSV: header `path,label`, then one `path,label` row
/// per image. Labels are `ok` or `defective`, case-insensitive; LF and
/// CRLF both work; blank lines are skipped. Line numbers in errors are
/// 1-based counting the header.
pub fn load_manifest(bytes: &[u8]) -> Result<Manifest, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| FormatError::BadHeader)?;
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = lines.next().ok_or(FormatError::BadHeader)?;
    if header != "path,label" {
        return Err(FormatError::BadHeader);
    }

    let mut entries = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        if line.is_empty() {
            continue;
        }
        let (path, label) = line
            .split_once(',')
            .ok_or(FormatError::BadLabel { line: line_no })?;
        if path.is_empty() {
            return Err(FormatError::BadLabel { line: line_no });
        }
        let label: Verdict = label
            .parse()
            .map_err(|_| FormatError::BadLabel { line: line_no })?;
        if !seen.insert(path.to_string()) {
            return Err(FormatError::DuplicatePath {
                path: path.to_string(),
            });
        }
        entries.push(ManifestEntry {
            path: path.to_string(),
            label,
        });
    }
    Ok(Manifest { entries })
}

/// Serializes a manifest with LF line endings and lowercase labels.
pub fn save_manifest(manifest: &Manifest) -> Vec<u8> {
    let mut out = String::from("path,label\n");
    for entry in &manifest.entries {
        out.push_str(&entry.path);
        out.push(',');
        out.push_str(&entry.label.as_str().to_ascii_lowercase());
        out.push('\n');
    }
    out.into_bytes()
}
