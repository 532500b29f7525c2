//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.
//!
//! Reference images come from `data/standard.json` at the workspace root.
//! A criterion whose images are absent from the manifest is reported as
//! N/A rather than failed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use denoise_core::bench::{render_csv, run_benchmark, Algorithm, BenchConfig, BenchReport, Cell};
use denoise_core::bm3d::{block_match, floor_pow2, GroupTransform, MatchParams};
use denoise_core::io::{load_image, Manifest};
use denoise_core::metrics::{psnr, psnr_from_mse, ssim};
use denoise_core::nlm::{denoise_nlm, NlmParams};
use denoise_core::noise::{awgn, NoiseSpec};
use denoise_core::sparse::{build_overcomplete_dct, omp, Dictionary, TrainState};
use denoise_core::Image;

// Tolerances, pinned.
const NOISY_TOL_DB: f64 = 0.3;
const NOISY_SEEDS: u64 = 10;
const BM3D_TOL_DB: f64 = 1.0;
const BM3D_HIGH_SIGMA_TOL_DB: f64 = 1.5;
const BM3D_BUDGET_MS: f64 = 60_000.0;
const KSVD_TOL_DB: f64 = 1.0;
const KSVD_BUDGET_MS: f64 = 120_000.0;
const NLM_TOL_DB: f64 = 1.5;
const MONOTONE_SLACK_DB: f64 = 0.2;
const ORACLE_IMAGES: u64 = 50;
const OMP_INSTANCES: u64 = 100;
const OMP_SLACK: f64 = 1e-9;
const TRANSFORM_TOL: f64 = 1e-9;
const TRAIN_SLACK: f64 = 1e-9;
const SSIM_CONST_TARGET: f64 = 0.9231;
const SSIM_CONST_TOL: f64 = 1e-4;
const SSIM_SYMMETRY_TOL: f64 = 1e-12;

// 256×256 BM3D PSNR targets: (σ, Cameraman, Lena, House).
const BM3D_TABLE: [(f64, [f64; 3]); 6] = [
    (20.0, [30.48, 30.44, 33.87]),
    (35.0, [27.91, 27.94, 31.51]),
    (50.0, [26.14, 26.27, 29.80]),
    (65.0, [24.88, 25.28, 28.67]),
    (80.0, [24.08, 24.56, 27.27]),
    (95.0, [23.28, 23.52, 25.73]),
];
const BM3D_IMAGES: [&str; 3] = ["Cameraman", "Lena", "House"];
const KSVD_CAMERAMAN_256_S20: f64 = 30.03;
const KSVD_HOUSE_64_S5: f64 = 37.97;
const NLM_CAMERAMAN_64_S20: f64 = 27.51;
const MONOTONE_SIGMAS: [f64; 7] = [5.0, 20.0, 35.0, 50.0, 65.0, 80.0, 95.0];

enum Outcome {
    Pass(String),
    Fail(String),
    Unavailable(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn manifest_path() -> PathBuf {
    workspace_root().join("data/standard.json")
}

fn standard_manifest() -> Manifest {
    Manifest::load(manifest_path()).unwrap_or_default()
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("denoise-acceptance-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Writes a manifest restricted to `names` (all entries if empty).
fn sub_manifest(names: &[&str], tag: &str) -> (PathBuf, Vec<String>) {
    let m = standard_manifest();
    let entries: Vec<_> = m
        .entries
        .into_iter()
        .filter(|e| names.is_empty() || names.contains(&e.name.as_str()))
        .filter(|e| e.path.exists())
        .collect();
    let found = entries.iter().map(|e| e.name.clone()).collect();
    let path = scratch_dir(tag).join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&entries).unwrap()).unwrap();
    (path, found)
}

fn bench_config(manifest: PathBuf, sizes: Vec<usize>, sigmas: Vec<f64>, algorithms: Vec<Algorithm>) -> BenchConfig {
    let mut cfg: BenchConfig = serde_json::from_value(serde_json::json!({
        "manifest_path": manifest,
        "seed": 2024,
        "montages": false,
    }))
    .unwrap();
    cfg.sizes = sizes;
    cfg.sigmas = sigmas;
    cfg.algorithms = algorithms;
    cfg.output_dir = manifest.parent().unwrap().join("out");
    cfg
}

fn find<'a>(r: &'a BenchReport, image: &str, size: usize, sigma: f64, alg: Algorithm) -> Option<&'a Cell> {
    r.cells
        .iter()
        .find(|c| c.image == image && c.size == size && c.sigma == sigma && c.algorithm == alg)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(r: &mut ChaCha8Rng) -> f64 {
    (r.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

// ---------------------------------------------------------------------------

fn c1_noisy_baseline() -> Outcome {
    let m = standard_manifest();
    let clean = m
        .entries
        .iter()
        .find(|e| e.path.exists())
        .and_then(|e| load_image(&e.path).ok())
        .and_then(|img| img.resize_to(256).ok())
        .unwrap_or_else(|| Image::from_fn(256, 256, |r, c| ((r * 7 + c * 3) % 256) as f64));
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for sigma in MONOTONE_SIGMAS {
        let mean = (0..NOISY_SEEDS)
            .map(|seed| psnr(&clean, &awgn(&clean, &NoiseSpec::awgn(sigma, seed)).unwrap(), 255.0).unwrap())
            .sum::<f64>()
            / NOISY_SEEDS as f64;
        let expected = 20.0 * (255.0 / sigma).log10();
        worst = worst.max((mean - expected).abs());
        parts.push(format!("σ{sigma}:{mean:.2}"));
    }
    verdict(
        worst <= NOISY_TOL_DB,
        format!("max |Δ| {worst:.3} dB ≤ {NOISY_TOL_DB} ({})", parts.join(" ")),
    )
}

fn c2_bm3d(main: &BenchReport, high: &BenchReport, available: &[String]) -> Outcome {
    let mut missing = Vec::new();
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, name) in BM3D_IMAGES.iter().enumerate() {
        if !available.iter().any(|a| a == name) {
            missing.push(*name);
            continue;
        }
        for (sigma, targets) in BM3D_TABLE {
            let tol = if sigma >= 65.0 { BM3D_HIGH_SIGMA_TOL_DB } else { BM3D_TOL_DB };
            let cell = find(main, name, 256, sigma, Algorithm::Bm3d).or_else(|| find(high, name, 256, sigma, Algorithm::Bm3d));
            let Some(c) = cell else {
                ok = false;
                lines.push(format!("{name}/σ{sigma}: no result"));
                continue;
            };
            let d = c.psnr - targets[i];
            let good = d.abs() <= tol && c.wall_ms <= BM3D_BUDGET_MS;
            ok &= good;
            if !good {
                lines.push(format!("{name}/σ{sigma}: {:.2} vs {:.2} ({:.0} ms)", c.psnr, targets[i], c.wall_ms));
            }
        }
    }
    let max_ms = main
        .cells
        .iter()
        .chain(&high.cells)
        .filter(|c| c.algorithm == Algorithm::Bm3d)
        .map(|c| c.wall_ms)
        .fold(0.0, f64::max);
    let evaluated = BM3D_IMAGES.len() - missing.len();
    if evaluated == 0 {
        return Outcome::Unavailable(format!("images {missing:?} not in manifest"));
    }
    let mut detail = format!("{evaluated} images × 6 σ within band, slowest {max_ms:.0} ms");
    if !lines.is_empty() {
        detail = format!("out of band: {}", lines.join("; "));
    }
    if !missing.is_empty() {
        detail.push_str(&format!(" [missing: {}]", missing.join(", ")));
    }
    verdict(ok, detail)
}

fn c3_ksvd(main: &BenchReport, small: &BenchReport) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let mut evaluated = 0;
    if let Some(c) = find(main, "Cameraman", 256, 20.0, Algorithm::Ksvd) {
        evaluated += 1;
        let good = (c.psnr - KSVD_CAMERAMAN_256_S20).abs() <= KSVD_TOL_DB && c.wall_ms <= KSVD_BUDGET_MS;
        ok &= good;
        parts.push(format!("Cameraman256/σ20 {:.2} vs {KSVD_CAMERAMAN_256_S20} ({:.0} ms)", c.psnr, c.wall_ms));
    } else {
        parts.push("Cameraman256 missing".into());
    }
    if let Some(c) = find(small, "House", 64, 5.0, Algorithm::Ksvd) {
        evaluated += 1;
        let good = (c.psnr - KSVD_HOUSE_64_S5).abs() <= KSVD_TOL_DB;
        ok &= good;
        parts.push(format!("House64/σ5 {:.2} vs {KSVD_HOUSE_64_S5}", c.psnr));
    } else {
        parts.push("House64 missing".into());
    }
    if evaluated == 0 {
        return Outcome::Unavailable(parts.join("; "));
    }
    verdict(ok, parts.join("; "))
}

/// Exhaustive check that every output pixel lies in [min, max] of its
/// (in-image) search window.
fn nlm_within_window(noisy: &Image, out: &Image, radius: usize) -> bool {
    let (w, h) = noisy.dims();
    for r in 0..h {
        for c in 0..w {
            let (r0, r1) = (r.saturating_sub(radius), (r + radius).min(h - 1));
            let (c0, c1) = (c.saturating_sub(radius), (c + radius).min(w - 1));
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for rr in r0..=r1 {
                for &v in &noisy.row(rr)[c0..=c1] {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            let v = out.get(r, c);
            if v < lo - 1e-9 || v > hi + 1e-9 {
                return false;
            }
        }
    }
    true
}

fn c4_nlm(small: &BenchReport) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    match find(small, "Cameraman", 64, 20.0, Algorithm::Nlmeans) {
        Some(c) => {
            ok &= (c.psnr - NLM_CAMERAMAN_64_S20).abs() <= NLM_TOL_DB;
            parts.push(format!("Cameraman64/σ20 {:.2} vs {NLM_CAMERAMAN_64_S20}", c.psnr));
        }
        None => return Outcome::Unavailable("Cameraman not in manifest".into()),
    }
    let mut checked = 0;
    for seed in 0..6u64 {
        let clean = Image::from_fn(48, 40, |r, c| ((r * 17 + c * 29 + seed as usize * 5) % 200) as f64);
        for (sigma, radius) in [(10.0, 10), (40.0, 4), (80.0, 7)] {
            let noisy = awgn(&clean, &NoiseSpec::awgn(sigma, seed)).unwrap();
            let params = NlmParams {
                search_radius: radius,
                ..NlmParams::for_sigma(sigma)
            };
            let out = denoise_nlm(&noisy, &params).unwrap();
            ok &= nlm_within_window(&noisy, &out, radius);
            checked += 1;
        }
    }
    parts.push(format!("window bounds hold on {checked} images"));
    verdict(ok, parts.join("; "))
}

fn c5_ordering(main: &BenchReport, available: &[String]) -> Outcome {
    if available.is_empty() {
        return Outcome::Unavailable("no standard images".into());
    }
    let mut detail = Vec::new();
    let mut ok = true;
    for sigma in [20.0, 35.0] {
        let mean = |alg: Algorithm| {
            let v: Vec<f64> = main
                .cells
                .iter()
                .filter(|c| c.size == 256 && c.sigma == sigma && c.algorithm == alg)
                .map(|c| c.psnr)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let (b, k, n) = (mean(Algorithm::Bm3d), mean(Algorithm::Ksvd), mean(Algorithm::Nlmeans));
        ok &= b >= k && k >= n;
        detail.push(format!("σ{sigma}: BM3D {b:.2} ≥ K-SVD {k:.2} ≥ NLM {n:.2}"));
    }
    let mut d = detail.join("; ");
    d.push_str(&format!(" [{}/9 standard images]", available.len()));
    verdict(ok, d)
}

fn c6_monotone(small: &BenchReport) -> Outcome {
    let mut rows: BTreeMap<(String, Algorithm), Vec<(f64, f64)>> = BTreeMap::new();
    for c in &small.cells {
        rows.entry((c.image.clone(), c.algorithm)).or_default().push((c.sigma, c.psnr));
    }
    if rows.is_empty() {
        return Outcome::Unavailable("no standard images".into());
    }
    let mut bad = Vec::new();
    for ((image, alg), mut row) in rows.clone() {
        row.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in row.windows(2) {
            let ok = if alg == Algorithm::Noisy {
                w[1].1 < w[0].1
            } else {
                w[1].1 <= w[0].1 + MONOTONE_SLACK_DB
            };
            if !ok {
                bad.push(format!("{image}/{}: σ{} {:.2} → σ{} {:.2}", alg.as_str(), w[0].0, w[0].1, w[1].0, w[1].1));
            }
        }
    }
    let images = rows.keys().map(|k| k.0.clone()).collect::<std::collections::BTreeSet<_>>().len();
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} rows over {images} images at 64x64, σ 5…95", rows.len())
        } else {
            bad.join("; ")
        },
    )
}

/// Brute-force block matching: every candidate, exact distances, full sort.
fn brute_force_match(img: &Image, reference: (usize, usize), p: &MatchParams) -> Vec<(usize, usize)> {
    let n = p.block_size;
    let (w, h) = img.dims();
    let mut all = Vec::new();
    for r in reference.0.saturating_sub(p.search_radius)..=(reference.0 + p.search_radius).min(h - n) {
        for c in reference.1.saturating_sub(p.search_radius)..=(reference.1 + p.search_radius).min(w - n) {
            if (r, c) == reference {
                continue;
            }
            let mut s = 0.0;
            for dr in 0..n {
                for dc in 0..n {
                    let d = img.get(reference.0 + dr, reference.1 + dc) - img.get(r + dr, c + dc);
                    s += d * d;
                }
            }
            let d = s / (n * n) as f64;
            if d <= p.threshold {
                all.push((d, r, c));
            }
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let keep = floor_pow2((all.len() + 1).min(p.max_group));
    std::iter::once(reference)
        .chain(all.into_iter().take(keep - 1).map(|(_, r, c)| (r, c)))
        .collect()
}

fn least_squares_residual(dict: &Dictionary, support: &[usize], y: &[f64]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let yy = dot(y, y);
    match *support {
        [a] => {
            let c = dot(dict.atom(a), y);
            (yy - c * c).max(0.0)
        }
        [a, b] => {
            let (da, db) = (dict.atom(a), dict.atom(b));
            let (g11, g12, g22) = (1.0, dot(da, db), 1.0);
            let det = g11 * g22 - g12 * g12;
            let (ra, rb) = (dot(da, y), dot(db, y));
            let xa = (g22 * ra - g12 * rb) / det;
            let xb = (g11 * rb - g12 * ra) / det;
            let res: Vec<f64> = (0..y.len()).map(|t| y[t] - xa * da[t] - xb * db[t]).collect();
            dot(&res, &res)
        }
        _ => yy,
    }
}

/// Tropp's exact recovery condition for unit-norm atoms and |S| <= 2:
/// max over j outside S of ||G_SS^-1 D_S^T d_j||_1 < 1.
fn exact_recovery(dict: &Dictionary, support: &[usize]) -> bool {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    (0..dict.n_atoms()).filter(|j| !support.contains(j)).all(|j| {
        let dj = dict.atom(j);
        let l1 = match *support {
            [a] => dot(dict.atom(a), dj).abs(),
            [a, b] => {
                let (da, db) = (dict.atom(a), dict.atom(b));
                let g = dot(da, db);
                let det = 1.0 - g * g;
                let (ra, rb) = (dot(da, dj), dot(db, dj));
                ((ra - g * rb) / det).abs() + ((rb - g * ra) / det).abs()
            }
            _ => 0.0,
        };
        l1 < 1.0
    })
}

fn c7_oracles() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;

    // block matching
    let params = MatchParams {
        block_size: 8,
        search_radius: 19,
        threshold: 3000.0,
        max_group: 16,
    };
    let mut mismatches = 0;
    let mut refs = 0;
    for i in 0..ORACLE_IMAGES {
        let mut r = rng(i);
        let amp = 40.0 + 200.0 * uniform(&mut r);
        let period = 3 + (r.next_u64() % 9) as usize;
        let img = Image::from_fn(64, 64, |y, x| {
            let base = if (y / period + x / period) % 2 == 0 { 60.0 } else { 60.0 + amp };
            base + 90.0 * (uniform(&mut r) - 0.5)
        });
        for _ in 0..20 {
            let reference = ((r.next_u64() % 57) as usize, (r.next_u64() % 57) as usize);
            let got = block_match(&img, reference, &params);
            refs += 1;
            if got.coords != brute_force_match(&img, reference, &params) {
                mismatches += 1;
            }
        }
    }
    ok &= mismatches == 0;
    parts.push(format!("block_match {mismatches}/{refs} mismatches"));

    // OMP vs exhaustive supports. Greedy selection can miss the optimum on
    // random 8x5 dictionaries, so only instances whose support satisfies the
    // exact recovery condition are scored; rejections are reported.
    let mut worst = f64::NEG_INFINITY;
    let mut accepted = 0;
    let mut rejected = 0;
    let mut i = 0;
    while accepted < OMP_INSTANCES {
        let mut r = rng(10_000 + i);
        i += 1;
        let atoms: Vec<f64> = (0..40).map(|_| uniform(&mut r) * 2.0 - 1.0).collect();
        let dict = Dictionary::from_atoms(8, 5, atoms).unwrap();
        let k = 1 + (accepted % 2) as usize;
        let a = (r.next_u64() % 5) as usize;
        let b = (a + 1 + (r.next_u64() % 4) as usize) % 5;
        let support: Vec<usize> = if k == 1 { vec![a] } else { vec![a, b] };
        if !exact_recovery(&dict, &support) {
            rejected += 1;
            continue;
        }
        accepted += 1;
        let mut y = vec![0.0; 8];
        for &s in &support {
            let coef = (0.5 + 1.5 * uniform(&mut r)) * if r.next_u64() % 2 == 0 { 1.0 } else { -1.0 };
            for (t, v) in y.iter_mut().enumerate() {
                *v += coef * dict.atom(s)[t];
            }
        }
        let mut best = f64::INFINITY;
        for s0 in 0..5 {
            best = best.min(least_squares_residual(&dict, &[s0], &y));
            if k == 2 {
                for s1 in s0 + 1..5 {
                    best = best.min(least_squares_residual(&dict, &[s0, s1], &y));
                }
            }
        }
        let code = omp(&dict, &y, 0.0, k);
        worst = worst.max(code.residual_norm.powi(2) - best);
    }
    ok &= worst <= OMP_SLACK;
    parts.push(format!(
        "OMP worst excess {worst:.1e} over {OMP_INSTANCES} ({rejected} non-ERC draws skipped)"
    ));

    // transform round trip and Parseval
    let t = GroupTransform::new(8);
    let mut worst_rt: f64 = 0.0;
    let mut worst_energy: f64 = 0.0;
    for (i, g) in [1usize, 2, 4, 8, 16].into_iter().enumerate() {
        let mut r = rng(20_000 + i as u64);
        let x: Vec<f64> = (0..g * 64).map(|_| 255.0 * uniform(&mut r)).collect();
        let mut y = x.clone();
        t.forward(&mut y, g);
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ey: f64 = y.iter().map(|v| v * v).sum();
        worst_energy = worst_energy.max((ex - ey).abs() / ex);
        t.inverse(&mut y, g);
        worst_rt = worst_rt.max(x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    ok &= worst_rt <= TRANSFORM_TOL && worst_energy <= TRANSFORM_TOL;
    parts.push(format!("transform round-trip {worst_rt:.1e}, Parseval {worst_energy:.1e}"));
    verdict(ok, parts.join("; "))
}

fn c8_training() -> Outcome {
    let mut ok = true;
    let mut steps = 0;
    for seed in 0..5u64 {
        let mut r = rng(30_000 + seed);
        let signals: Vec<f64> = (0..20 * 16).map(|_| uniform(&mut r) * 2.0 - 1.0).collect();
        let dict = build_overcomplete_dct(4, 16).unwrap();
        let mut state = TrainState::new(&signals, dict);
        state.sparse_code(0.05, 3);
        let mut last = state.total_error();
        for k in 0..16 {
            state.update_atom(k);
            let e = state.total_error();
            let fresh = state.total_error_recomputed();
            ok &= e <= last * (1.0 + TRAIN_SLACK) + TRAIN_SLACK;
            ok &= (e - fresh).abs() <= 1e-9 * (1.0 + fresh);
            last = e;
            steps += 1;
        }
    }
    verdict(ok, format!("error non-increasing over {steps} atom updates (5 toys × 16 atoms, 20 patches)"))
}

fn c9_determinism() -> Outcome {
    let (manifest, found) = sub_manifest(&["Cameraman", "Lena", "House"], "determinism");
    let (manifest, found) = if found.is_empty() {
        let dir = scratch_dir("determinism-synthetic");
        let img = Image::from_fn(96, 96, |r, c| ((r * 5 + c * 11) % 256) as f64);
        denoise_core::io::save_image(&img, dir.join("syn.png")).unwrap();
        let path = dir.join("manifest.json");
        std::fs::write(&path, r#"[{"name":"Syn","path":"syn.png","dataset":"synthetic"}]"#).unwrap();
        (path, vec!["Syn".to_string()])
    } else {
        (manifest, found)
    };
    let cfg = bench_config(manifest, vec![64], vec![20.0, 50.0], vec![Algorithm::Nlmeans, Algorithm::Ksvd, Algorithm::Bm3d]);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| render_csv(&run_benchmark(&cfg).unwrap()))
    };
    let a = run(1);
    let b = run(1);
    let c = run(4);
    verdict(
        a == b && a == c && a.lines().count() > 1,
        format!("{} CSV rows identical across 2 runs and 1 vs 4 workers ({} images)", a.lines().count() - 1, found.len()),
    )
}

fn c10_metrics() -> Outcome {
    let p = psnr_from_mse(256.0, 255.0);
    let s = ssim(&Image::constant(32, 32, 100.0), &Image::constant(32, 32, 150.0)).unwrap();
    let x = Image::from_fn(40, 40, |r, c| ((r * 37 + c * 11) % 256) as f64);
    let y = awgn(&x, &NoiseSpec::awgn(15.0, 3)).unwrap();
    let self_sim = ssim(&x, &x).unwrap();
    let asym = (ssim(&x, &y).unwrap() - ssim(&y, &x).unwrap()).abs();
    verdict(
        format!("{p:.2}") == "24.05"
            && (s - SSIM_CONST_TARGET).abs() <= SSIM_CONST_TOL
            && (self_sim - 1.0).abs() <= 1e-12
            && asym <= SSIM_SYMMETRY_TOL,
        format!("psnr(256)={p:.4}, ssim(100,150)={s:.5}, ssim(x,x)={self_sim}, |asym|={asym:.1e}"),
    )
}

fn main() {
    // `cargo test -- --list` style invocations from tooling: nothing to list.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let started = Instant::now();
    let all_algs = vec![Algorithm::Nlmeans, Algorithm::Ksvd, Algorithm::Bm3d];

    let (std_manifest, available) = sub_manifest(&[], "standard");
    let (main, small, high) = if available.is_empty() {
        let empty = || BenchReport::empty(denoise_core::bench::Provenance {
            config_hash: String::new(),
            seed: 0,
            tool_version: String::new(),
        });
        (empty(), empty(), empty())
    } else {
        let main = run_benchmark(&bench_config(std_manifest.clone(), vec![256], vec![20.0, 35.0], all_algs.clone())).unwrap();
        let small = run_benchmark(&bench_config(std_manifest, vec![64], MONOTONE_SIGMAS.to_vec(), all_algs)).unwrap();
        let (hi_manifest, _) = sub_manifest(&BM3D_IMAGES, "bm3d-high");
        let high = run_benchmark(&bench_config(hi_manifest, vec![256], vec![50.0, 65.0, 80.0, 95.0], vec![Algorithm::Bm3d])).unwrap();
        (main, small, high)
    };

    let results: Vec<(&str, Outcome)> = vec![
        ("noisy baseline", c1_noisy_baseline()),
        ("BM3D reference PSNR", c2_bm3d(&main, &high, &available)),
        ("K-SVD reference PSNR", c3_ksvd(&main, &small)),
        ("NL-means", c4_nlm(&small)),
        ("ordering BM3D ≥ K-SVD ≥ NLM", c5_ordering(&main, &available)),
        ("monotonicity in σ", c6_monotone(&small)),
        ("oracle equivalence", c7_oracles()),
        ("K-SVD training monotonicity", c8_training()),
        ("determinism", c9_determinism()),
        ("metric closed forms", c10_metrics()),
    ];

    let mut failed = 0;
    println!();
    for (i, (name, outcome)) in results.iter().enumerate() {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Unavailable(d) => ("N/A ", d),
        };
        println!("[{tag}] {:>2}. {name}: {detail}", i + 1);
    }
    println!(
        "\nacceptance: {} of {} criteria failed ({:.0} s)",
        failed,
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
