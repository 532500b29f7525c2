//! `denoise-bench`: corrupt, denoise, score and benchmark grayscale images.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use denoise_core::bench::{self, format_cell, with_worker_pool, MontagePanel};
use denoise_core::bm3d::{denoise_bm3d, Bm3dParams};
use denoise_core::io::{load_image, save_image};
use denoise_core::metrics::MetricPair;
use denoise_core::nlm::{denoise_nlm, NlmParams};
use denoise_core::noise::{corrupt, NoiseSpec};
use denoise_core::sparse::{denoise_ksvd, KsvdParams};
use denoise_core::{Error, Image};

#[derive(Parser)]
#[command(name = "denoise-bench", version, about = "Grayscale denoising benchmark toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Nlm,
    Ksvd,
    Bm3d,
}

#[derive(Subcommand)]
enum Command {
    /// Add white Gaussian noise.
    Corrupt {
        image: PathBuf,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Denoise an image with one of the three algorithms.
    Denoise {
        image: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long)]
        sigma: f64,
        /// Parameter override `key=value` (e.g. `search_radius=7`); repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Print `PSNR/SSIM` of TEST against REF.
    Metrics { reference: PathBuf, test: PathBuf },
    /// Run the benchmark matrix described by a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Side-by-side PNG (clean | noisy | outputs...) with a JSON captions sidecar.
    Montage {
        /// Clean reference first, then the noisy image and any denoised outputs.
        #[arg(required = true, num_args = 2..)]
        images: Vec<PathBuf>,
        /// Comma-separated panel labels (default: Clean,Noisy,NL-means,K-SVD,BM3D).
        #[arg(long, value_delimiter = ',')]
        labels: Vec<String>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

/// Applies `key=value` overrides to a serde parameter block.
fn with_overrides<T>(params: T, overrides: &[String]) -> Result<T, Error>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let mut v = serde_json::to_value(params).expect("params serialize");
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("override {o:?} is not KEY=VALUE")))?;
        let obj = v.as_object_mut().expect("params are a JSON object");
        if key == "sigma" || !obj.contains_key(key) {
            return Err(Error::InvalidParameter(format!("unknown parameter {key:?}")));
        }
        let val = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        obj.insert(key.to_string(), val);
    }
    serde_json::from_value(v).map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn denoise(img: &Image, algo: Algo, sigma: f64, overrides: &[String]) -> Result<Image, Error> {
    match algo {
        Algo::Nlm => denoise_nlm(img, &with_overrides(NlmParams::for_sigma(sigma), overrides)?),
        Algo::Ksvd => denoise_ksvd(img, &with_overrides(KsvdParams::for_sigma(sigma), overrides)?),
        Algo::Bm3d => denoise_bm3d(img, &with_overrides(Bm3dParams::for_sigma(sigma), overrides)?),
    }
}

const DEFAULT_LABELS: [&str; 5] = ["Clean", "Noisy", "NL-means", "K-SVD", "BM3D"];

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Corrupt {
            image,
            sigma,
            seed,
            output,
        } => {
            let img = load_image(&image)?;
            save_image(&corrupt(&img, &NoiseSpec::awgn(sigma, seed))?, &output)
        }
        Command::Denoise {
            image,
            algo,
            sigma,
            overrides,
            output,
        } => {
            let img = load_image(&image)?;
            save_image(&denoise(&img, algo, sigma, &overrides)?, &output)
        }
        Command::Metrics { reference, test } => {
            let a = load_image(&reference)?.clipped();
            let b = load_image(&test)?.clipped();
            let m = MetricPair::compute(&a, &b)?;
            println!("{}", format_cell(m.psnr, m.ssim));
            Ok(())
        }
        Command::Bench { config } => {
            let report = bench::run_from_file(&config)?;
            for f in &report.failures {
                eprintln!("warning: {} ({}) skipped: {}", f.image, f.dataset, f.message);
            }
            eprintln!("{} cells written", report.cells.len());
            Ok(())
        }
        Command::Montage {
            images,
            labels,
            output,
        } => {
            if !labels.is_empty() && labels.len() != images.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} labels for {} images",
                    labels.len(),
                    images.len()
                )));
            }
            let panels = images
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let label = labels
                        .get(i)
                        .cloned()
                        .or_else(|| DEFAULT_LABELS.get(i).map(|s| s.to_string()))
                        .unwrap_or_else(|| format!("Panel {}", i + 1));
                    Ok(MontagePanel::new(label, load_image(p)?))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            bench::emit_montage(&panels, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match with_worker_pool(|| run(cli.command)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
