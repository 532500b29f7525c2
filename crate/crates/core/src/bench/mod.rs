//! Benchmark driver: load the manifest, resize, corrupt once per
//! (image, size, σ), fan out to the selected denoisers, score, and emit
//! CSV, Markdown tables, plot series and montages.

mod config;
mod emit;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{cell_seed, with_worker_pool, workers_from_env, Algorithm, BenchConfig, WORKERS_ENV};
pub use emit::{
    emit_csv, emit_markdown_table, emit_montage, emit_plot_series, format_cell, render_csv,
    write_outputs, MontagePanel,
};

use crate::bm3d::denoise_bm3d;
use crate::error::Result;
use crate::image::Image;
use crate::io::{load_image, DatasetKind, Manifest, ManifestEntry};
use crate::metrics::MetricPair;
use crate::nlm::denoise_nlm;
use crate::noise::{awgn, NoiseSpec};
use crate::sparse::denoise_ksvd;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub dataset: DatasetKind,
    pub image: String,
    pub size: usize,
    pub sigma: f64,
    pub algorithm: Algorithm,
    /// `inf` for a perfect reconstruction; serialized as a string then.
    #[serde(with = "float_or_inf")]
    pub psnr: f64,
    pub ssim: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageFailure {
    pub image: String,
    pub dataset: DatasetKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub cells: Vec<Cell>,
    pub failures: Vec<ImageFailure>,
    pub provenance: Provenance,
    /// Whether `wall_ms` goes into the CSV.
    pub csv_wall_time: bool,
    /// Image names per dataset in manifest order (table column order).
    pub image_order: Vec<String>,
}

impl BenchReport {
    pub fn empty(provenance: Provenance) -> Self {
        Self {
            cells: Vec::new(),
            failures: Vec::new(),
            provenance,
            csv_wall_time: false,
            image_order: Vec::new(),
        }
    }
}

mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            Repr::Num(*v).serialize(s)
        } else {
            Repr::Text(if *v > 0.0 { "inf" } else { "-inf" }.into()).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Runs one algorithm with the config's parameter block at noise level `sigma`.
pub fn run_algorithm(config: &BenchConfig, alg: Algorithm, noisy: &Image, sigma: f64, seed: u64) -> Result<Image> {
    match alg {
        Algorithm::Noisy => Ok(noisy.clone()),
        Algorithm::Nlmeans => {
            let mut p = config.nlm;
            p.sigma = sigma;
            denoise_nlm(noisy, &p)
        }
        Algorithm::Ksvd => {
            let mut p = config.ksvd;
            p.sigma = sigma;
            p.seed = seed;
            denoise_ksvd(noisy, &p)
        }
        Algorithm::Bm3d => {
            let mut p = config.bm3d;
            p.sigma = sigma;
            denoise_bm3d(noisy, &p)
        }
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// One (image, size, σ) job: a single noisy realization shared by all
/// selected algorithms.
fn run_cell(config: &BenchConfig, entry: &ManifestEntry, clean: &Image, size: usize, sigma: f64) -> Result<Vec<Cell>> {
    let seed = cell_seed(config.seed, &entry.name, size, sigma);
    let mk = |alg: Algorithm, m: MetricPair, wall_ms: f64| Cell {
        dataset: entry.dataset,
        image: entry.name.clone(),
        size,
        sigma,
        algorithm: alg,
        psnr: m.psnr,
        ssim: m.ssim,
        wall_ms,
    };

    let t = Instant::now();
    let noisy = awgn(clean, &NoiseSpec::awgn(sigma, seed))?;
    let noisy_ms = elapsed_ms(t);
    let reference = clean.clipped();
    let mut cells = vec![mk(
        Algorithm::Noisy,
        MetricPair::compute(&reference, &noisy.clipped())?,
        noisy_ms,
    )];
    let mut panels = vec![
        MontagePanel::new("Clean", clean.clone()),
        MontagePanel::new(Algorithm::Noisy.label(), noisy.clone()),
    ];

    let mut algs = config.algorithms.clone();
    algs.sort();
    for alg in algs {
        let t = Instant::now();
        let out = run_algorithm(config, alg, &noisy, sigma, seed)?;
        let ms = elapsed_ms(t);
        cells.push(mk(alg, MetricPair::compute(&reference, &out.clipped())?, ms));
        if config.montages {
            panels.push(MontagePanel::new(alg.label(), out));
        }
    }

    if config.montages {
        let name = format!(
            "{}_{}_{}_s{}.png",
            entry.dataset,
            file_stem(&entry.name),
            size,
            sigma
        );
        emit_montage(&panels, &config.output_dir.join("montages").join(name))?;
    }
    Ok(cells)
}

/// Lowercase, filesystem-safe version of an image name.
pub(crate) fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

fn load_sizes(entry: &ManifestEntry, sizes: &[usize]) -> Result<Vec<(usize, Image)>> {
    let img = load_image(&entry.path)?;
    sizes.iter().map(|&s| Ok((s, img.resize_to(s)?))).collect()
}

/// Runs the full (image × size × σ × algorithm) matrix. The worker pool is
/// whatever rayon pool the caller installs; see [`with_worker_pool`].
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let manifest = Manifest::load(&config.manifest_path)?;
    let provenance = Provenance {
        config_hash: config.hash(),
        seed: config.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let mut report = BenchReport::empty(provenance);
    report.csv_wall_time = config.csv_wall_time;
    report.image_order = manifest.entries.iter().map(|e| e.name.clone()).collect();

    let mut sizes = config.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();

    // loading failures are recorded per image; the rest of the run goes on
    let mut loaded = Vec::new();
    for entry in &manifest.entries {
        match load_sizes(entry, &sizes) {
            Ok(images) => loaded.push((entry, images)),
            Err(e) => report.failures.push(ImageFailure {
                image: entry.name.clone(),
                dataset: entry.dataset,
                message: e.to_string(),
            }),
        }
    }

    let jobs: Vec<(&ManifestEntry, usize, &Image, f64)> = loaded
        .iter()
        .flat_map(|(entry, images)| {
            images.iter().flat_map(move |(size, img)| {
                config.sigmas.iter().map(move |&sigma| (*entry, *size, img, sigma))
            })
        })
        .collect();
    if config.montages {
        let dir = config.output_dir.join("montages");
        std::fs::create_dir_all(&dir).map_err(|e| crate::error::Error::io(&dir, e))?;
    }
    let results: Vec<Result<Vec<Cell>>> = jobs
        .par_iter()
        .map(|&(entry, size, img, sigma)| run_cell(config, entry, img, size, sigma))
        .collect();
    for ((entry, ..), res) in jobs.iter().zip(results) {
        match res {
            Ok(cells) => report.cells.extend(cells),
            Err(e) => {
                if !report.failures.iter().any(|f| f.image == entry.name) {
                    report.failures.push(ImageFailure {
                        image: entry.name.clone(),
                        dataset: entry.dataset,
                        message: e.to_string(),
                    });
                }
            }
        }
    }
    sort_cells(&mut report.cells);
    Ok(report)
}

/// CSV row order: dataset, image, size, σ, then noisy → nlmeans → ksvd → bm3d.
pub fn sort_cells(cells: &mut [Cell]) {
    cells.sort_by(|a, b| {
        a.dataset
            .as_str()
            .cmp(b.dataset.as_str())
            .then_with(|| a.image.cmp(&b.image))
            .then_with(|| a.size.cmp(&b.size))
            .then_with(|| a.sigma.total_cmp(&b.sigma))
            .then_with(|| a.algorithm.cmp(&b.algorithm))
    });
}

/// Loads a config, runs it on the capped worker pool, and writes every
/// artifact into the output directory.
pub fn run_from_file(path: impl AsRef<Path>) -> Result<BenchReport> {
    let config = BenchConfig::load(path)?;
    let report = with_worker_pool(|| run_benchmark(&config))??;
    write_outputs(&report, &config.output_dir)?;
    Ok(report)
}
