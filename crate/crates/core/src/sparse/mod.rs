//! K-SVD denoising: a dictionary is learned from the noisy image's own
//! patches, every patch is sparse-coded with OMP, and the overlapping
//! reconstructions are averaged together with the noisy image.

mod dictionary;
mod omp;
mod train;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dictionary::{build_overcomplete_dct, Dictionary};
pub use omp::{omp, OmpSolver, SparseCode};
pub use train::{train_dictionary, TrainState};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::patches::{extract_patches, Accumulator, PatchSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KsvdParams {
    pub patch_size: usize,
    pub n_atoms: usize,
    pub train_iterations: usize,
    /// Noise gain `C` in the OMP stopping threshold `n²·(C·σ)²`.
    pub gain: f64,
    /// Weight of the noisy image in the final blend; `None` means `30/σ`.
    pub lambda: Option<f64>,
    pub max_train_patches: usize,
    /// Stride of the patches coded for reconstruction.
    pub stride: usize,
    /// Support cap per patch; `None` means half the patch length.
    pub max_atoms: Option<usize>,
    pub sigma: f64,
    /// Offsets the uniform training-patch subsampling grid.
    pub seed: u64,
}

impl Default for KsvdParams {
    fn default() -> Self {
        Self {
            patch_size: 8,
            n_atoms: 256,
            train_iterations: 10,
            gain: 1.15,
            lambda: None,
            max_train_patches: 40_000,
            stride: 1,
            max_atoms: None,
            sigma: 20.0,
            seed: 0,
        }
    }
}

impl KsvdParams {
    pub fn for_sigma(sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::default()
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or(30.0 / self.sigma)
    }

    pub fn patch_len(&self) -> usize {
        self.patch_size * self.patch_size
    }

    pub fn max_atoms(&self) -> usize {
        self.max_atoms.unwrap_or(self.patch_len() / 2).max(1)
    }

    /// Squared-residual target for OMP.
    pub fn epsilon(&self) -> f64 {
        self.patch_len() as f64 * (self.gain * self.sigma).powi(2)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.patch_size > 0
            && self.n_atoms >= self.patch_len()
            && self.train_iterations > 0
            && self.gain > 0.0
            && self.lambda() > 0.0
            && self.lambda().is_finite()
            && self.max_train_patches > 0
            && self.stride > 0
            && self.sigma > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid K-SVD parameters {self:?}")))
        }
    }
}

/// Subtracts each patch's mean in place and returns the means.
pub fn remove_means(patches: &mut PatchSet) -> Vec<f64> {
    (0..patches.len())
        .map(|i| {
            let p = patches.patch_mut(i);
            let m = p.iter().sum::<f64>() / p.len() as f64;
            p.iter_mut().for_each(|v| *v -= m);
            m
        })
        .collect()
}

/// Deterministic uniform subsample of `count` indices out of `total`.
pub fn training_indices(total: usize, count: usize, seed: u64) -> Vec<usize> {
    if total <= count {
        return (0..total).collect();
    }
    // splitmix64 finalizer to turn the seed into a fractional grid offset
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    let frac = (z >> 11) as f64 / (1u64 << 53) as f64;
    let step = total as f64 / count as f64;
    (0..count)
        .map(|i| (((i as f64 + frac) * step) as usize).min(total - 1))
        .collect()
}

/// K-SVD training on mean-removed patches, starting from `dict0`.
pub fn ksvd_train(patches: &PatchSet, dict0: Dictionary, params: &KsvdParams) -> Result<Dictionary> {
    params.validate()?;
    if patches.patch_len() != dict0.atom_length() {
        return Err(Error::InvalidParameter(format!(
            "patch length {} does not match atom length {}",
            patches.patch_len(),
            dict0.atom_length()
        )));
    }
    let flat: Vec<f64> = patches.iter().flatten().copied().collect();
    train_dictionary(
        &flat,
        dict0,
        params.epsilon(),
        params.max_atoms(),
        params.train_iterations,
    )
}

pub fn denoise_ksvd(noisy: &Image, params: &KsvdParams) -> Result<Image> {
    params.validate()?;
    let n = params.patch_size;
    if noisy.width() < n || noisy.height() < n {
        return Err(Error::Size(format!(
            "K-SVD needs at least {n}x{n} pixels, got {}x{}",
            noisy.width(),
            noisy.height()
        )));
    }

    // training set: uniformly subsampled dense patches, means removed
    let dense = extract_patches(noisy, n, 1)?;
    let picks = training_indices(dense.len(), params.max_train_patches, params.seed);
    let mut train_data = Vec::with_capacity(picks.len() * params.patch_len());
    for &i in &picks {
        let p = dense.patch(i);
        let m = p.iter().sum::<f64>() / p.len() as f64;
        train_data.extend(p.iter().map(|v| v - m));
    }
    let dict0 = build_overcomplete_dct(n, params.n_atoms)?;
    let dict = train_dictionary(
        &train_data,
        dict0,
        params.epsilon(),
        params.max_atoms(),
        params.train_iterations,
    )?;
    drop(train_data);

    // code every patch on the reconstruction grid
    let mut coded = if params.stride == 1 {
        dense
    } else {
        extract_patches(noisy, n, params.stride)?
    };
    let means = remove_means(&mut coded);
    let solver = OmpSolver::new(&dict);
    let eps = params.epsilon();
    let max_atoms = params.max_atoms();
    let len = params.patch_len();
    let recon: Vec<f64> = (0..coded.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let code = solver.code(coded.patch(i), eps, max_atoms);
            let mut out = vec![0.0; len];
            dict.synthesize(&code.support, &code.coefficients, &mut out);
            out.iter_mut().for_each(|v| *v += means[i]);
            out
        })
        .collect();

    let mut acc = Accumulator::new(noisy.width(), noisy.height());
    for (i, &origin) in coded.origins().iter().enumerate() {
        acc.add_patch(origin, n, &recon[i * len..(i + 1) * len], 1.0);
    }
    let lambda = params.lambda();
    let out: Vec<f64> = noisy
        .data()
        .iter()
        .zip(acc.numerator().iter().zip(acc.denominator()))
        .map(|(&y, (&num, &den))| (lambda * y + num) / (lambda + den))
        .collect();
    Ok(Image::from_raw(noisy.width(), noisy.height(), out))
}
