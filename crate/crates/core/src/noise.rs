//! Seeded image corruption: additive white Gaussian, salt-and-pepper and
//! multiplicative speckle noise.
//!
//! Every random draw comes from a ChaCha8 keystream addressed by pixel
//! position, so a given `(image, spec)` produces the same bytes whether the
//! pixels are generated sequentially or by any number of workers.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

/// Pixels per independently seeked chunk. Must be even so Box–Muller pairs
/// never straddle chunks.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseKind {
    /// Additive Gaussian with standard deviation `sigma` in intensity units.
    Awgn { sigma: f64 },
    /// Fraction `density` of pixels forced to 0 or 255 with equal odds.
    SaltPepper { density: f64 },
    /// `out = in · (1 + u)` with `u` zero-mean uniform of the given variance.
    Speckle { variance: f64 },
}

impl NoiseKind {
    fn stream_id(&self) -> u64 {
        match self {
            NoiseKind::Awgn { .. } => 1,
            NoiseKind::SaltPepper { .. } => 2,
            NoiseKind::Speckle { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn awgn(sigma: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::Awgn { sigma },
            seed,
        }
    }

    pub fn salt_pepper(density: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::SaltPepper { density },
            seed,
        }
    }

    pub fn speckle(variance: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::Speckle { variance },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            NoiseKind::Awgn { sigma } => sigma.is_finite() && sigma > 0.0,
            NoiseKind::SaltPepper { density } => density > 0.0 && density <= 0.5,
            NoiseKind::Speckle { variance } => variance.is_finite() && variance > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid noise spec {:?}", self.kind)))
        }
    }

    fn rng_at(&self, word_pos: u128) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.kind.stream_id());
        rng.set_word_pos(word_pos);
        rng
    }
}

/// Uniform on `(0, 1]`.
#[inline]
fn open_unit(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `[0, 1)`.
#[inline]
fn half_open_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn box_muller(a: u64, b: u64) -> (f64, f64) {
    let r = (-2.0 * open_unit(a).ln()).sqrt();
    let theta = std::f64::consts::TAU * half_open_unit(b);
    (r * theta.cos(), r * theta.sin())
}

/// Applies `f(value, draws)` to every pixel in parallel chunks. Each pixel
/// consumes `words_per_pixel` 32-bit words of the keystream at its index.
fn per_pixel<F>(img: &Image, spec: &NoiseSpec, fill: F) -> Image
where
    F: Fn(&mut ChaCha8Rng, &[f64], &mut [f64]) + Sync,
{
    let src = img.data();
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(CHUNK)
        .zip(src.par_chunks(CHUNK))
        .enumerate()
        .for_each(|(chunk, (dst, src))| {
            // two u64 draws (four words) per pixel
            let mut rng = spec.rng_at((chunk * CHUNK) as u128 * 4);
            fill(&mut rng, src, dst);
        });
    Image::from_raw(img.width(), img.height(), out)
}

/// Standard normal draws for `n` consecutive pixels starting at `start`,
/// exactly as [`awgn`] consumes them. Exposed for statistical tests.
pub fn standard_normals(seed: u64, n: usize) -> Vec<f64> {
    let probe = Image::constant(n, 1, 0.0);
    awgn(&probe, &NoiseSpec::awgn(1.0, seed)).expect("unit sigma is valid").into_data()
}

pub fn awgn(img: &Image, spec: &NoiseSpec) -> Result<Image> {
    spec.validate()?;
    let NoiseKind::Awgn { sigma } = spec.kind else {
        return Err(Error::InvalidParameter("awgn requires an awgn spec".into()));
    };
    Ok(per_pixel(img, spec, |rng, src, dst| {
        // Pixel pair (2k, 2k+1) shares one Box–Muller draw; the second half of
        // each pair's word budget is left unused to keep addressing uniform.
        for (s, d) in src.chunks(2).zip(dst.chunks_mut(2)) {
            let (z0, z1) = box_muller(rng.next_u64(), rng.next_u64());
            let _ = (rng.next_u64(), rng.next_u64());
            d[0] = s[0] + sigma * z0;
            if d.len() > 1 {
                d[1] = s[1] + sigma * z1;
            }
        }
    }))
}

pub fn salt_pepper(img: &Image, spec: &NoiseSpec) -> Result<Image> {
    spec.validate()?;
    let NoiseKind::SaltPepper { density } = spec.kind else {
        return Err(Error::InvalidParameter("salt_pepper requires a salt_pepper spec".into()));
    };
    Ok(per_pixel(img, spec, |rng, src, dst| {
        for (&s, d) in src.iter().zip(dst.iter_mut()) {
            let u = half_open_unit(rng.next_u64());
            let _ = rng.next_u64();
            *d = if u < density / 2.0 {
                0.0
            } else if u < density {
                255.0
            } else {
                s
            };
        }
    }))
}

pub fn speckle(img: &Image, spec: &NoiseSpec) -> Result<Image> {
    spec.validate()?;
    let NoiseKind::Speckle { variance } = spec.kind else {
        return Err(Error::InvalidParameter("speckle requires a speckle spec".into()));
    };
    let half_width = (3.0 * variance).sqrt();
    Ok(per_pixel(img, spec, |rng, src, dst| {
        for (&s, d) in src.iter().zip(dst.iter_mut()) {
            let u = (2.0 * half_open_unit(rng.next_u64()) - 1.0) * half_width;
            let _ = rng.next_u64();
            *d = s * (1.0 + u);
        }
    }))
}

/// Dispatches on the spec's family.
pub fn corrupt(img: &Image, spec: &NoiseSpec) -> Result<Image> {
    match spec.kind {
        NoiseKind::Awgn { .. } => awgn(img, spec),
        NoiseKind::SaltPepper { .. } => salt_pepper(img, spec),
        NoiseKind::Speckle { .. } => speckle(img, spec),
    }
}
