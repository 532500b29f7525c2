//! Reading and writing 8-bit grayscale images (binary PGM and PNG) and the
//! JSON dataset manifest.

use std::fmt;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Rec. 601 luma of an 8-bit RGB triple.
#[inline]
pub fn luma601(r: u8, g: u8, b: u8) -> f64 {
    0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
}

/// Loads a binary PGM (P5, maxval 255) or 8-bit PNG. Color PNGs are reduced
/// to luma; alpha is ignored.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes, path)
}

pub fn decode_image(bytes: &[u8], path: &Path) -> Result<Image> {
    if bytes.starts_with(b"P5") {
        decode_pgm(bytes, path)
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes, path)
    } else {
        Err(format_err(path, "unrecognized magic bytes (expected P5 PGM or PNG)"))
    }
}

fn format_err(path: &Path, detail: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Image> {
    // Header: magic, width, height, maxval separated by whitespace, with
    // '#' comments running to end of line, then exactly one whitespace byte.
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (i, slot) in fields.iter_mut().enumerate() {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            let name = ["width", "height", "maxval"][i];
            return Err(format_err(path, format!("PGM header missing {name}")));
        }
        *slot = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err(path, "PGM header field out of range"))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(format_err(
            path,
            format!("PGM maxval {maxval} (bit depth must be 8, maxval 255)"),
        ));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(format_err(path, "PGM header not terminated by whitespace"));
    }
    pos += 1;
    let n = width
        .checked_mul(height)
        .ok_or_else(|| format_err(path, "PGM dimensions overflow"))?;
    let raster = bytes
        .get(pos..pos + n)
        .ok_or_else(|| format_err(path, format!("PGM raster truncated: need {n} bytes")))?;
    Image::new(width, height, raster.iter().map(|&b| b as f64).collect())
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<Image> {
    let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| format_err(path, e.to_string()))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let data: Vec<f64> = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(f64::from).collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0] as f64).collect(),
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| luma601(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(buf) => buf.pixels().map(|p| luma601(p.0[0], p.0[1], p.0[2])).collect(),
        other => {
            return Err(format_err(
                path,
                format!(
                    "bit depth {} per channel ({:?}); only 8-bit PNG is supported",
                    other.color().bits_per_pixel() / other.color().channel_count() as u16,
                    other.color()
                ),
            ))
        }
    };
    Image::new(w, h, data)
}

/// Rounds half away from zero and clamps to `[0, 255]`.
pub fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub fn to_bytes(img: &Image) -> Vec<u8> {
    img.data().iter().map(|&v| quantize(v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Pgm,
    Png,
}

impl OutputFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("pgm") => Ok(OutputFormat::Pgm),
            Some("png") => Ok(OutputFormat::Png),
            _ => Err(format_err(path, "output extension must be .pgm or .png")),
        }
    }
}

pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(to_bytes(img));
    out
}

pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    encode_gray8_png(img.width(), img.height(), to_bytes(img))
}

pub(crate) fn encode_gray8_png(width: usize, height: usize, raster: Vec<u8>) -> Result<Vec<u8>> {
    let buf = image::GrayImage::from_raw(width as u32, height as u32, raster)
        .ok_or(Error::InvalidDimensions(width, height))?;
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::InvalidParameter(format!("png encoding failed: {e}")))?;
    Ok(out.into_inner())
}

/// Writes `img` as 8-bit grayscale; the format follows the file extension.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match OutputFormat::from_path(path)? {
        OutputFormat::Pgm => encode_pgm(img),
        OutputFormat::Png => encode_png(img)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Standard,
    Natural,
    Texture,
    Synthetic,
}

impl DatasetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::Standard => "standard",
            DatasetKind::Natural => "natural",
            DatasetKind::Texture => "texture",
            DatasetKind::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub path: PathBuf,
    pub dataset: DatasetKind,
}

/// Dataset manifest: a JSON list of `{name, path, dataset}` entries.
///
/// Relative paths are resolved against the manifest's own directory.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries: Vec<ManifestEntry> =
            serde_json::from_str(&text).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for e in &mut entries {
            if e.path.is_relative() {
                e.path = base.join(&e.path);
            }
        }
        Ok(Self { entries })
    }
}
