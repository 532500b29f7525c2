use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bm3d::Bm3dParams;
use crate::error::{Error, Result};
use crate::nlm::NlmParams;
use crate::sparse::KsvdParams;

/// Environment variable capping the benchmark worker pool (single integer ≥ 1).
pub const WORKERS_ENV: &str = "DENOISE_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Noisy,
    Nlmeans,
    Ksvd,
    Bm3d,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Noisy,
        Algorithm::Nlmeans,
        Algorithm::Ksvd,
        Algorithm::Bm3d,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Noisy => "noisy",
            Algorithm::Nlmeans => "nlmeans",
            Algorithm::Ksvd => "ksvd",
            Algorithm::Bm3d => "bm3d",
        }
    }

    /// Row label used in tables and montage captions.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Noisy => "Noisy",
            Algorithm::Nlmeans => "NL-means",
            Algorithm::Ksvd => "K-SVD",
            Algorithm::Bm3d => "BM3D",
        }
    }
}

fn default_sizes() -> Vec<usize> {
    vec![64, 128, 256]
}

fn default_sigmas() -> Vec<f64> {
    vec![5.0, 20.0, 35.0, 50.0, 65.0, 80.0, 95.0, 100.0]
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Nlmeans, Algorithm::Ksvd, Algorithm::Bm3d]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("bench_out")
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub manifest_path: PathBuf,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub seed: u64,
    /// `sigma` inside the parameter blocks is ignored; each cell uses its own.
    #[serde(default)]
    pub nlm: NlmParams,
    #[serde(default)]
    pub ksvd: KsvdParams,
    #[serde(default)]
    pub bm3d: Bm3dParams,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Write measured wall times into the CSV. Off by default so that the CSV
    /// is byte-reproducible; timings always go to `report.json`.
    #[serde(default)]
    pub csv_wall_time: bool,
    /// Emit a montage (clean | noisy | outputs) per image, size and σ.
    #[serde(default = "default_true")]
    pub montages: bool,
}

impl BenchConfig {
    /// Reads a JSON config; a relative `manifest_path` or `output_dir` is
    /// resolved against the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: BenchConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if cfg.manifest_path.is_relative() {
            cfg.manifest_path = base.join(&cfg.manifest_path);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sigmas.is_empty() || self.algorithms.is_empty() {
            return Err(Error::Config("sizes, sigmas and algorithms must be non-empty".into()));
        }
        if self.sizes.iter().any(|&s| s < 16) {
            return Err(Error::Config(format!("sizes must be at least 16, got {:?}", self.sizes)));
        }
        if self.sigmas.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Config(format!("sigmas must be positive, got {:?}", self.sigmas)));
        }
        if self.sigmas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "sigmas must be strictly increasing, got {:?}",
                self.sigmas
            )));
        }
        if self.algorithms.contains(&Algorithm::Noisy) {
            return Err(Error::Config("\"noisy\" is always reported and cannot be selected".into()));
        }
        let mut algs = self.algorithms.clone();
        algs.sort();
        algs.dedup();
        if algs.len() != self.algorithms.len() {
            return Err(Error::Config("duplicate algorithm".into()));
        }
        self.nlm.validate()?;
        self.ksvd.validate()?;
        self.bm3d.validate()?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(json))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Noise seed of one (image, size, σ) cell; independent of run order.
pub fn cell_seed(seed: u64, image: &str, size: usize, sigma: f64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((image.len() as u64).to_le_bytes());
    h.update(image.as_bytes());
    h.update((size as u64).to_le_bytes());
    h.update(sigma.to_bits().to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Worker count requested through [`WORKERS_ENV`], if any.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{WORKERS_ENV} must be an integer >= 1, got {v:?}"))),
        },
    }
}

/// Runs `f` on a pool capped by [`WORKERS_ENV`] (rayon's default otherwise).
pub fn with_worker_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers_from_env()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
