//! Two-stage BM3D: block matching, collaborative filtering in a separable
//! 3D transform domain (hard thresholding, then Wiener shrinkage guided by the
//! first-stage estimate), and weighted aggregation of the filtered blocks.

mod matching;
mod transform;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use matching::{block_distance, block_match, floor_pow2, BlockGroup, MatchParams};
pub use transform::GroupTransform;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::patches::{axis_origins, Accumulator};

/// Reference-block rows handed to the worker pool at a time. Aggregation
/// happens in reference order after each batch, so output does not depend
/// on scheduling.
const ROWS_PER_BATCH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm3dParams {
    pub block_size: usize,
    /// Stride between reference blocks.
    pub step: usize,
    pub search_radius: usize,
    pub max_group: usize,
    /// Stage-1 matching cutoff on the σ-normalized distance `d − 2σ²`,
    /// where `d` is the mean squared difference of two noisy blocks.
    pub threshold_hard: f64,
    /// Matching cutoff on the basic estimate.
    pub threshold_wiener: f64,
    pub lambda_3d: f64,
    pub sigma: f64,
}

impl Default for Bm3dParams {
    fn default() -> Self {
        Self {
            block_size: 8,
            step: 3,
            search_radius: 19,
            max_group: 16,
            threshold_hard: 3000.0,
            threshold_wiener: 400.0,
            lambda_3d: 2.7,
            sigma: 20.0,
        }
    }
}

impl Bm3dParams {
    pub fn for_sigma(sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.block_size > 0
            && self.step > 0
            && self.step <= self.block_size
            && self.search_radius > 0
            && self.max_group > 0
            && self.threshold_hard > 0.0
            && self.threshold_wiener > 0.0
            && self.lambda_3d >= 0.0
            && self.sigma > 0.0
            && self.sigma.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid BM3D parameters {self:?}")))
        }
    }

    /// Noisy blocks carry an expected `2σ²` of pure-noise distance, so the
    /// raw cutoff is shifted by that amount.
    pub fn hard_matching(&self) -> MatchParams {
        MatchParams {
            block_size: self.block_size,
            search_radius: self.search_radius,
            threshold: self.threshold_hard + 2.0 * self.sigma * self.sigma,
            max_group: self.max_group,
        }
    }

    pub fn wiener_matching(&self) -> MatchParams {
        MatchParams {
            block_size: self.block_size,
            search_radius: self.search_radius,
            threshold: self.threshold_wiener,
            max_group: self.max_group,
        }
    }
}

/// Filtered group ready for aggregation.
struct Filtered {
    coords: Vec<(usize, usize)>,
    blocks: Vec<f64>,
    weight: f64,
}

fn check_size(img: &Image, params: &Bm3dParams) -> Result<()> {
    params.validate()?;
    let n = params.block_size;
    if img.width() < n || img.height() < n {
        return Err(Error::Size(format!(
            "BM3D needs at least {n}x{n} pixels, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

/// Runs `filter` on every reference block of the step grid and aggregates the
/// results in reference order.
fn process_references<F>(width: usize, height: usize, params: &Bm3dParams, filter: F) -> Result<Image>
where
    F: Fn((usize, usize)) -> Filtered + Sync,
{
    let n = params.block_size;
    let rows = axis_origins(height, n, params.step);
    let cols = axis_origins(width, n, params.step);
    let mut acc = Accumulator::new(width, height);
    for batch in rows.chunks(ROWS_PER_BATCH) {
        let refs: Vec<(usize, usize)> = batch
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
            .collect();
        let results: Vec<Filtered> = refs.par_iter().map(|&rc| filter(rc)).collect();
        for f in &results {
            for (i, &origin) in f.coords.iter().enumerate() {
                acc.add_patch(origin, n, &f.blocks[i * n * n..(i + 1) * n * n], f.weight);
            }
        }
    }
    acc.finish()
}

/// First stage: collaborative hard thresholding of groups matched on the
/// noisy image.
pub fn hard_threshold_stage(noisy: &Image, params: &Bm3dParams) -> Result<Image> {
    check_size(noisy, params)?;
    let transform = GroupTransform::new(params.block_size);
    let matching = params.hard_matching();
    let threshold = params.lambda_3d * params.sigma;
    let sigma2 = params.sigma * params.sigma;
    process_references(noisy.width(), noisy.height(), params, |reference| {
        let group = block_match(noisy, reference, &matching);
        let mut stack = group.stack(noisy);
        transform.forward(&mut stack, group.len());
        let mut retained = 0usize;
        for c in stack.iter_mut() {
            if c.abs() < threshold {
                *c = 0.0;
            } else {
                retained += 1;
            }
        }
        transform.inverse(&mut stack, group.len());
        let weight = if retained > 0 {
            1.0 / (sigma2 * retained as f64)
        } else {
            1.0
        };
        Filtered {
            coords: group.coords,
            blocks: stack,
            weight,
        }
    })
}

/// Second stage: empirical Wiener shrinkage of the noisy groups, with the
/// grouping and the signal power taken from the basic estimate.
pub fn wiener_stage(noisy: &Image, basic: &Image, params: &Bm3dParams) -> Result<Image> {
    check_size(noisy, params)?;
    noisy.same_dims(basic)?;
    let transform = GroupTransform::new(params.block_size);
    let matching = params.wiener_matching();
    let sigma2 = params.sigma * params.sigma;
    process_references(noisy.width(), noisy.height(), params, |reference| {
        let group = block_match(basic, reference, &matching);
        let mut pilot = group.stack(basic);
        let mut stack = group.stack(noisy);
        transform.forward(&mut pilot, group.len());
        transform.forward(&mut stack, group.len());
        let mut energy = 0.0;
        for (c, &b) in stack.iter_mut().zip(&pilot) {
            let shrink = b * b / (b * b + sigma2);
            *c *= shrink;
            energy += shrink * shrink;
        }
        transform.inverse(&mut stack, group.len());
        let weight = if energy > 0.0 {
            1.0 / (sigma2 * energy)
        } else {
            1.0
        };
        Filtered {
            coords: group.coords,
            blocks: stack,
            weight,
        }
    })
}

pub fn denoise_bm3d(noisy: &Image, params: &Bm3dParams) -> Result<Image> {
    let basic = hard_threshold_stage(noisy, params)?;
    wiener_stage(noisy, &basic, params)
}
