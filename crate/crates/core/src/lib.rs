//! Grayscale image denoising benchmark toolkit.
//!
//! The crate is organised around the flow of a denoising study: images are
//! loaded and resized ([`image`], [`io`]), corrupted with seeded noise
//! ([`noise`]), restored by one of three patch-based denoisers ([`nlm`],
//! [`sparse`], [`bm3d`]), scored ([`metrics`]) and collected into reports
//! ([`bench`]).
//!
//! Intensities are `f64` values on the nominal 8-bit scale `[0, 255]` and are
//! only quantized when an image is written to disk.

pub mod bench;
pub mod bm3d;
pub mod error;
pub mod image;
pub mod io;
pub mod sparse;
pub mod metrics;
pub mod nlm;
pub mod noise;
pub mod patches;

pub use crate::error::{Error, Result};
pub use crate::image::Image;
