//! In-memory grayscale image and the resampling helpers used to build the
//! 64/128/256 test sizes.

use crate::error::{Error, Result};

/// Row-major grid of real-valued intensities on the nominal `[0, 255]` scale.
///
/// Values are not clamped; denoisers and noise models may push pixels outside
/// the 8-bit range, and quantization only happens on export.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::InvalidDimensions(width, height));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite intensity at index {i}"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "empty image");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "empty image");
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Internal constructor for buffers whose length is already known good.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image::from_raw(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Copy with every value clamped to `[0, 255]`.
    pub fn clipped(&self) -> Image {
        self.map(|v| v.clamp(0.0, 255.0))
    }

    pub fn mirrored_horizontally(&self) -> Image {
        Image::from_fn(self.width, self.height, |r, c| self.get(r, self.width - 1 - c))
    }

    pub fn crop(&self, top: usize, left: usize, width: usize, height: usize) -> Result<Image> {
        if width == 0 || height == 0 || top + height > self.height || left + width > self.width {
            return Err(Error::Size(format!(
                "crop {width}x{height} at ({top}, {left}) exceeds {}x{}",
                self.width, self.height
            )));
        }
        Ok(Image::from_fn(width, height, |r, c| self.get(top + r, left + c)))
    }

    /// Largest centered square.
    pub fn center_square(&self) -> Image {
        let edge = self.width.min(self.height);
        let top = (self.height - edge) / 2;
        let left = (self.width - edge) / 2;
        self.crop(top, left, edge, edge)
            .expect("center square always fits")
    }

    /// Center-crops to a square and area-averages down to `target × target`.
    ///
    /// The resampling treats each source pixel as a unit square and each output
    /// pixel as the mean over the footprint it covers, weighting partially
    /// covered source pixels by their overlap. Integer factors therefore reduce
    /// to plain block means.
    pub fn resize_to(&self, target: usize) -> Result<Image> {
        if target == 0 {
            return Err(Error::Size("target edge must be positive".into()));
        }
        let square = self.center_square();
        let edge = square.width;
        if edge < target {
            return Err(Error::Size(format!(
                "source edge {edge} is smaller than target {target}"
            )));
        }
        if edge == target {
            return Ok(square);
        }
        let weights = area_weights(edge, target);
        let mut out = vec![0.0; target * target];
        for (orow, rw) in weights.iter().enumerate() {
            for (ocol, cw) in weights.iter().enumerate() {
                let mut acc = 0.0;
                for &(sr, wr) in rw {
                    let src = square.row(sr);
                    let mut line = 0.0;
                    for &(sc, wc) in cw {
                        line += wc * src[sc];
                    }
                    acc += wr * line;
                }
                out[orow * target + ocol] = acc;
            }
        }
        Ok(Image::from_raw(target, target, out))
    }
}

/// Per output index, the source indices it overlaps and their normalized
/// overlap weights for a `src -> dst` area-average along one axis.
fn area_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    // Work in units of 1/dst of a source pixel so integer bounds stay exact.
    (0..dst)
        .map(|o| {
            let lo = o * src;
            let hi = (o + 1) * src;
            let first = lo / dst;
            let last = (hi - 1) / dst;
            (first..=last)
                .map(|s| {
                    let a = lo.max(s * dst);
                    let b = hi.min((s + 1) * dst);
                    (s, (b - a) as f64 / src as f64)
                })
                .collect()
        })
        .collect()
}
