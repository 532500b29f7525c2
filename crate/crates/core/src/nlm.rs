//! Pixelwise non-local means.
//!
//! Each pixel becomes a weighted mean of the pixels in a square search window
//! around it, weighted by how similar their surrounding patches are:
//!
//! ```text
//! w(p, q) = exp(-max(d²(p, q) - 2σ², 0) / h²)
//! ```
//!
//! where `d²` is the mean squared difference between the two
//! `(2r+1) × (2r+1)` patches. The self weight `w(p, p)` is replaced by the
//! largest weight any other candidate received. Patches that run past the
//! border read symmetrically reflected pixels; candidates `q` are restricted
//! to the image itself.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

/// Rows per independently processed band. Fixed so the floating-point
/// reduction order never depends on the worker count.
const BAND: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NlmParams {
    pub patch_radius: usize,
    pub search_radius: usize,
    /// Filtering strength; `None` means `0.55 · sigma`.
    pub h: Option<f64>,
    pub sigma: f64,
}

impl Default for NlmParams {
    fn default() -> Self {
        Self {
            patch_radius: 3,
            search_radius: 10,
            h: None,
            sigma: 20.0,
        }
    }
}

impl NlmParams {
    pub fn for_sigma(sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::default()
        }
    }

    pub fn h(&self) -> f64 {
        self.h.unwrap_or(0.55 * self.sigma)
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.h();
        if self.patch_radius < 1
            || self.search_radius < self.patch_radius
            || !(h > 0.0)
            || !h.is_finite()
            || !(self.sigma >= 0.0)
        {
            return Err(Error::InvalidParameter(format!("invalid NL-means parameters {self:?}")));
        }
        Ok(())
    }
}

/// Symmetric (edge-repeating) reflection of `i` into `[0, n)`.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let m = i.rem_euclid(2 * n);
    (if m < n { m } else { 2 * n - 1 - m }) as usize
}

/// Mean squared difference between the `(2·radius+1)²` patches centered at
/// `p` and `q` (row, col), with symmetric reflection at the borders.
pub fn patch_distance(img: &Image, p: (isize, isize), q: (isize, isize), radius: usize) -> f64 {
    let r = radius as isize;
    let (w, h) = img.dims();
    let mut sum = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            let a = img.get(reflect(p.0 + dy, h), reflect(p.1 + dx, w));
            let b = img.get(reflect(q.0 + dy, h), reflect(q.1 + dx, w));
            sum += (a - b) * (a - b);
        }
    }
    let side = (2 * radius + 1) as f64;
    sum / (side * side)
}

struct Padded {
    data: Vec<f64>,
    stride: usize,
}

impl Padded {
    fn new(img: &Image, pad: usize) -> Self {
        let (w, h) = img.dims();
        let stride = w + 2 * pad;
        let mut data = Vec::with_capacity(stride * (h + 2 * pad));
        for r in 0..h + 2 * pad {
            let sr = reflect(r as isize - pad as isize, h);
            for c in 0..stride {
                data.push(img.get(sr, reflect(c as isize - pad as isize, w)));
            }
        }
        Self { data, stride }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.stride + c]
    }
}

pub fn denoise_nlm(noisy: &Image, params: &NlmParams) -> Result<Image> {
    params.validate()?;
    let (w, h) = noisy.dims();
    let side = 2 * params.patch_radius + 1;
    if w < side || h < side {
        return Err(Error::Size(format!(
            "NL-means with patch radius {} needs at least {side}x{side} pixels",
            params.patch_radius
        )));
    }
    let padded = Padded::new(noisy, params.patch_radius);
    let hh = params.h() * params.h();
    let bias = 2.0 * params.sigma * params.sigma;

    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(BAND * w)
        .enumerate()
        .for_each(|(band, dst)| {
            let y0 = band * BAND;
            let y1 = (y0 + BAND).min(h);
            denoise_band(noisy, &padded, params.patch_radius, params.search_radius, hh, bias, y0, y1, dst);
        });
    Ok(Image::from_raw(w, h, out))
}

#[allow(clippy::too_many_arguments)]
fn denoise_band(
    noisy: &Image,
    padded: &Padded,
    pr: usize,
    sr: usize,
    hh: f64,
    bias: f64,
    y0: usize,
    y1: usize,
    dst: &mut [f64],
) {
    let (w, h) = noisy.dims();
    let side = 2 * pr + 1;
    let norm = 1.0 / (side * side) as f64;
    let rows = y1 - y0;
    let mut num = vec![0.0; rows * w];
    let mut den = vec![0.0; rows * w];
    let mut wmax = vec![0.0f64; rows * w];
    // scratch: squared differences and horizontal box sums over padded rows
    let prow = rows + 2 * pr;
    let mut diff = vec![0.0; prow * padded.stride];
    let mut hsum = vec![0.0; prow * w];

    let s = sr as isize;
    for dy in -s..=s {
        for dx in -s..=s {
            if dy == 0 && dx == 0 {
                continue;
            }
            // pixels p whose candidate p + (dy, dx) stays inside the image
            let ya = (y0 as isize).max(-dy) as usize;
            let yb = (y1 as isize).min(h as isize - dy);
            let xa = (-dx).max(0) as usize;
            let xb = (w as isize - dx).min(w as isize);
            if yb <= ya as isize || xb <= xa as isize {
                continue;
            }
            let (yb, xb) = (yb as usize, xb as usize);
            let pcols = xb - xa + 2 * pr;

            // diff over padded rows [ya, yb + 2pr) and padded cols [xa, xb + 2pr)
            for yy in ya..yb + 2 * pr {
                let qy = (yy as isize + dy) as usize;
                let drow = &mut diff[(yy - y0) * padded.stride..(yy - y0) * padded.stride + pcols];
                for (k, d) in drow.iter_mut().enumerate() {
                    let xx = xa + k;
                    let a = padded.at(yy, xx);
                    let b = padded.at(qy, (xx as isize + dx) as usize);
                    *d = (a - b) * (a - b);
                }
                let hrow = &mut hsum[(yy - y0) * w..(yy - y0) * w + w];
                let mut acc: f64 = drow[..side].iter().sum();
                hrow[xa] = acc;
                for x in xa + 1..xb {
                    acc += drow[x - xa + side - 1] - drow[x - xa - 1];
                    hrow[x] = acc;
                }
            }
            for x in xa..xb {
                let mut acc = 0.0;
                for yy in ya..ya + side {
                    acc += hsum[(yy - y0) * w + x];
                }
                for y in ya..yb {
                    if y > ya {
                        acc += hsum[(y + side - 1 - y0) * w + x] - hsum[(y - 1 - y0) * w + x];
                    }
                    let d2 = (acc * norm).max(0.0);
                    let wt = (-(d2 - bias).max(0.0) / hh).exp();
                    let q = noisy.get((y as isize + dy) as usize, (x as isize + dx) as usize);
                    let i = (y - y0) * w + x;
                    num[i] += wt * q;
                    den[i] += wt;
                    if wt > wmax[i] {
                        wmax[i] = wt;
                    }
                }
            }
        }
    }
    for (i, d) in dst.iter_mut().enumerate() {
        let self_w = if wmax[i] > 0.0 { wmax[i] } else { 1.0 };
        let v = noisy.data()[y0 * w + i];
        *d = (num[i] + self_w * v) / (den[i] + self_w);
    }
}
