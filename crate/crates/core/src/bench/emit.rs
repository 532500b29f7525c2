use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{file_stem, sort_cells, Algorithm, BenchReport, Cell};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::{encode_gray8_png, quantize, DatasetKind};
use crate::metrics::MetricPair;

const SEPARATOR: usize = 4;

fn fmt_psnr(p: f64) -> String {
    if p.is_infinite() && p > 0.0 {
        "inf".to_string()
    } else {
        format!("{p:.2}")
    }
}

/// Table cell text, e.g. `34.24/0.71`.
pub fn format_cell(psnr: f64, ssim: f64) -> String {
    format!("{}/{:.2}", fmt_psnr(psnr), ssim)
}

pub fn render_csv(report: &BenchReport) -> String {
    let mut cells = report.cells.clone();
    sort_cells(&mut cells);
    let mut out = String::from("dataset,image,size,sigma,algorithm,psnr_db,ssim,wall_ms\n");
    for c in &cells {
        let wall = if report.csv_wall_time {
            format!("{:.3}", c.wall_ms)
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.2},{}",
            c.dataset,
            csv_field(&c.image),
            c.size,
            c.sigma,
            c.algorithm.as_str(),
            fmt_psnr(c.psnr),
            c.ssim,
            wall
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit_csv(report: &BenchReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_csv(report)).map_err(|e| Error::io(path, e))
}

fn slice<'a>(report: &'a BenchReport, dataset: DatasetKind, size: usize) -> Vec<&'a Cell> {
    report
        .cells
        .iter()
        .filter(|c| c.dataset == dataset && c.size == size)
        .collect()
}

fn sorted_sigmas(cells: &[&Cell]) -> Vec<f64> {
    let mut s: Vec<f64> = cells.iter().map(|c| c.sigma).collect();
    s.sort_by(f64::total_cmp);
    s.dedup();
    s
}

/// Image columns: manifest order first, then anything else alphabetically.
fn image_columns(report: &BenchReport, cells: &[&Cell]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for name in &report.image_order {
        if cells.iter().any(|c| &c.image == name) && !cols.contains(name) {
            cols.push(name.clone());
        }
    }
    let mut rest: Vec<String> = cells
        .iter()
        .map(|c| c.image.clone())
        .filter(|n| !cols.contains(n))
        .collect();
    rest.sort();
    rest.dedup();
    cols.extend(rest);
    cols
}

/// Markdown table for one (dataset, size): σ-major rows with one sub-row per
/// algorithm and one `PSNR/SSIM` column per image.
pub fn emit_markdown_table(report: &BenchReport, dataset: DatasetKind, size: usize) -> String {
    let cells = slice(report, dataset, size);
    let title = format!("### {dataset} dataset, {size}x{size}\n\n");
    if cells.is_empty() {
        return format!("{title}_No results for this dataset and size._\n");
    }
    let images = image_columns(report, &cells);
    let mut out = title;
    out.push_str("| Noise | Algorithm |");
    for name in &images {
        let _ = write!(out, " {name} |");
    }
    out.push_str("\n|---|---|");
    out.push_str(&"---|".repeat(images.len()));
    out.push('\n');
    for sigma in sorted_sigmas(&cells) {
        for (i, alg) in Algorithm::ALL.iter().enumerate() {
            let noise = if i == 0 { format!("σ={sigma}") } else { String::new() };
            let _ = write!(out, "| {noise} | {} |", alg.label());
            for name in &images {
                let text = cells
                    .iter()
                    .find(|c| c.sigma == sigma && c.algorithm == *alg && &c.image == name)
                    .map(|c| format_cell(c.psnr, c.ssim))
                    .unwrap_or_else(|| "—".to_string());
                let _ = write!(out, " {text} |");
            }
            out.push('\n');
        }
    }
    out
}

fn series_value(v: Option<f64>) -> String {
    match v {
        None => "nan".to_string(),
        Some(v) if v.is_infinite() => "inf".to_string(),
        Some(v) => format!("{v:.4}"),
    }
}

/// Writes `<stem>_psnr.txt` and `<stem>_ssim.txt` into `dir`: tab-separated,
/// header `sigma noisy nlmeans ksvd bm3d`, one row per σ.
pub fn emit_plot_series(
    report: &BenchReport,
    dataset: DatasetKind,
    size: usize,
    image: &str,
    dir: impl AsRef<Path>,
) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    let cells: Vec<&Cell> = slice(report, dataset, size)
        .into_iter()
        .filter(|c| c.image == image)
        .collect();
    if cells.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no results for {image} in {dataset} at {size}x{size}"
        )));
    }
    let header = {
        let mut h = String::from("sigma");
        for a in Algorithm::ALL {
            h.push('\t');
            h.push_str(a.as_str());
        }
        h.push('\n');
        h
    };
    let mut psnr = header.clone();
    let mut ssim = header;
    for sigma in sorted_sigmas(&cells) {
        let _ = write!(psnr, "{sigma}");
        let _ = write!(ssim, "{sigma}");
        for alg in Algorithm::ALL {
            let c = cells.iter().find(|c| c.sigma == sigma && c.algorithm == alg);
            let _ = write!(psnr, "\t{}", series_value(c.map(|c| c.psnr)));
            let _ = write!(ssim, "\t{}", series_value(c.map(|c| c.ssim)));
        }
        psnr.push('\n');
        ssim.push('\n');
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = format!("{dataset}_{size}_{}", file_stem(image));
    let p = dir.join(format!("{stem}_psnr.txt"));
    let s = dir.join(format!("{stem}_ssim.txt"));
    fs::write(&p, psnr).map_err(|e| Error::io(&p, e))?;
    fs::write(&s, ssim).map_err(|e| Error::io(&s, e))?;
    Ok((p, s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MontagePanel {
    pub label: String,
    pub image: Image,
}

impl MontagePanel {
    pub fn new(label: impl Into<String>, image: Image) -> Self {
        Self {
            label: label.into(),
            image,
        }
    }
}

#[derive(Serialize)]
struct Caption<'a> {
    label: &'a str,
    /// `PSNR/SSIM` against the first panel.
    text: String,
    psnr: Option<f64>,
    ssim: f64,
}

/// Writes the panels left to right with white separators as one PNG, plus a
/// `.json` sidecar next to it with each panel's label and scores against the
/// first (clean) panel.
pub fn emit_montage(panels: &[MontagePanel], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let Some(first) = panels.first() else {
        return Err(Error::InvalidParameter("montage needs at least one panel".into()));
    };
    let (w, h) = first.image.dims();
    for p in panels {
        first.image.same_dims(&p.image)?;
    }
    let total_w = panels.len() * w + (panels.len() - 1) * SEPARATOR;
    let mut raster = vec![255u8; total_w * h];
    for (i, p) in panels.iter().enumerate() {
        let x0 = i * (w + SEPARATOR);
        for r in 0..h {
            for (c, &v) in p.image.row(r).iter().enumerate() {
                raster[r * total_w + x0 + c] = quantize(v);
            }
        }
    }
    let png = encode_gray8_png(total_w, h, raster)?;
    fs::write(path, png).map_err(|e| Error::io(path, e))?;

    let reference = first.image.clipped();
    let captions = panels
        .iter()
        .map(|p| {
            let m = MetricPair::compute(&reference, &p.image.clipped())?;
            Ok(Caption {
                label: &p.label,
                text: format_cell(m.psnr, m.ssim),
                psnr: m.psnr.is_finite().then_some(m.psnr),
                ssim: m.ssim,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sidecar = path.with_extension("json");
    let json = serde_json::to_string_pretty(&captions).expect("captions serialize");
    fs::write(&sidecar, json + "\n").map_err(|e| Error::io(&sidecar, e))
}

/// Writes `results.csv`, `report.json`, one Markdown table per
/// (dataset, size) under `tables/` and plot series under `series/`.
pub fn write_outputs(report: &BenchReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    emit_csv(report, dir.join("results.csv"))?;
    let json_path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;

    let mut slices: Vec<(DatasetKind, usize)> =
        report.cells.iter().map(|c| (c.dataset, c.size)).collect();
    slices.sort();
    slices.dedup();
    let tables = dir.join("tables");
    fs::create_dir_all(&tables).map_err(|e| Error::io(&tables, e))?;
    for &(dataset, size) in &slices {
        let p = tables.join(format!("{dataset}_{size}.md"));
        fs::write(&p, emit_markdown_table(report, dataset, size)).map_err(|e| Error::io(&p, e))?;
        let cells = slice(report, dataset, size);
        for image in image_columns(report, &cells) {
            emit_plot_series(report, dataset, size, &image, dir.join("series"))?;
        }
    }
    Ok(())
}
