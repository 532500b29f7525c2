//! Square patch extraction and weighted overlap aggregation.

use crate::error::{Error, Result};
use crate::image::Image;

/// Top-left origins along one axis: multiples of `stride`, plus a final origin
/// snapped to `len - size` so the last pixels are always covered.
pub fn axis_origins(len: usize, size: usize, stride: usize) -> Vec<usize> {
    assert!(size >= 1 && size <= len && stride >= 1);
    let last = len - size;
    let mut out: Vec<usize> = (0..=last).step_by(stride).collect();
    if *out.last().unwrap() != last {
        out.push(last);
    }
    out
}

/// A set of `patch_size × patch_size` patches cut from one image, stored
/// contiguously in row-major scan order of their origins.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSet {
    patch_size: usize,
    stride: usize,
    origins: Vec<(usize, usize)>,
    data: Vec<f64>,
}

impl PatchSet {
    pub fn from_parts(
        patch_size: usize,
        stride: usize,
        origins: Vec<(usize, usize)>,
        data: Vec<f64>,
    ) -> Result<Self> {
        if patch_size == 0 || data.len() != origins.len() * patch_size * patch_size {
            return Err(Error::InvalidParameter(format!(
                "{} origins do not match {} patch values",
                origins.len(),
                data.len()
            )));
        }
        Ok(Self {
            patch_size,
            stride,
            origins,
            data,
        })
    }

    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn patch_len(&self) -> usize {
        self.patch_size * self.patch_size
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn origins(&self) -> &[(usize, usize)] {
        &self.origins
    }

    pub fn patch(&self, i: usize) -> &[f64] {
        let n = self.patch_len();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn patch_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.patch_len();
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.patch_len())
    }
}

pub fn extract_patches(img: &Image, patch_size: usize, stride: usize) -> Result<PatchSet> {
    if patch_size == 0 || patch_size > img.width().min(img.height()) {
        return Err(Error::InvalidParameter(format!(
            "patch size {patch_size} does not fit a {}x{} image",
            img.width(),
            img.height()
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be at least 1".into()));
    }
    let rows = axis_origins(img.height(), patch_size, stride);
    let cols = axis_origins(img.width(), patch_size, stride);
    let mut origins = Vec::with_capacity(rows.len() * cols.len());
    let mut data = Vec::with_capacity(rows.len() * cols.len() * patch_size * patch_size);
    for &r in &rows {
        for &c in &cols {
            origins.push((r, c));
            for dr in 0..patch_size {
                data.extend_from_slice(&img.row(r + dr)[c..c + patch_size]);
            }
        }
    }
    Ok(PatchSet {
        patch_size,
        stride,
        origins,
        data,
    })
}

/// Per-pixel weighted sums used to merge overlapping patch estimates.
#[derive(Debug, Clone)]
pub struct Accumulator {
    width: usize,
    height: usize,
    numerator: Vec<f64>,
    denominator: Vec<f64>,
}

impl Accumulator {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            numerator: vec![0.0; width * height],
            denominator: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Adds `weight × patch` at `origin`; the patch is `size × size` row-major.
    pub fn add_patch(&mut self, origin: (usize, usize), size: usize, patch: &[f64], weight: f64) {
        debug_assert_eq!(patch.len(), size * size);
        let (r0, c0) = origin;
        assert!(r0 + size <= self.height && c0 + size <= self.width);
        for dr in 0..size {
            let base = (r0 + dr) * self.width + c0;
            let src = &patch[dr * size..(dr + 1) * size];
            for (dc, &v) in src.iter().enumerate() {
                self.numerator[base + dc] += weight * v;
                self.denominator[base + dc] += weight;
            }
        }
    }

    pub fn numerator(&self) -> &[f64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    /// Normalizes the sums; fails on the first pixel with zero total weight.
    pub fn finish(self) -> Result<Image> {
        let mut out = self.numerator;
        for (i, (v, &d)) in out.iter_mut().zip(&self.denominator).enumerate() {
            if d <= 0.0 {
                return Err(Error::Coverage {
                    row: i / self.width,
                    col: i % self.width,
                });
            }
            *v /= d;
        }
        Ok(Image::from_raw(self.width, self.height, out))
    }
}

/// Weighted average of overlapping patches onto a `width × height` canvas.
pub fn aggregate_patches(
    patches: &PatchSet,
    weights: &[f64],
    width: usize,
    height: usize,
) -> Result<Image> {
    if weights.len() != patches.len() {
        return Err(Error::InvalidParameter(format!(
            "{} weights for {} patches",
            weights.len(),
            patches.len()
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions(width, height));
    }
    let n = patches.patch_size();
    let mut acc = Accumulator::new(width, height);
    for ((&origin, patch), &w) in patches.origins().iter().zip(patches.iter()).zip(weights) {
        if !(w > 0.0) {
            return Err(Error::InvalidParameter(format!("patch weight {w} is not positive")));
        }
        if origin.0 + n > height || origin.1 + n > width {
            return Err(Error::InvalidParameter(format!(
                "patch at {origin:?} exceeds {width}x{height} canvas"
            )));
        }
        acc.add_patch(origin, n, patch, w);
    }
    acc.finish()
}
