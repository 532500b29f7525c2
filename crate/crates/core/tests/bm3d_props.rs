//! The Wiener stage should, on aggregate, improve on the hard-threshold
//! estimate it is piloted by.

use std::path::PathBuf;

use denoise_core::bm3d::{denoise_bm3d, hard_threshold_stage, Bm3dParams};
use denoise_core::io::{load_image, Manifest};
use denoise_core::metrics::psnr;
use denoise_core::noise::{awgn, NoiseSpec};
use denoise_core::Image;

fn test_images() -> Vec<Image> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/standard.json");
    let mut images: Vec<Image> = Manifest::load(&path)
        .map(|m| {
            m.entries
                .iter()
                .filter_map(|e| load_image(&e.path).ok())
                .filter_map(|img| img.resize_to(96).ok())
                .collect()
        })
        .unwrap_or_default();
    if images.is_empty() {
        images.push(Image::from_fn(96, 96, |r, c| {
            let edge = if r * 2 + c > 120 { 170.0 } else { 70.0 };
            edge + 30.0 * ((c as f64) / 9.0).sin()
        }));
    }
    images
}

#[test]
fn full_pipeline_beats_stage_one_on_average() {
    let images = test_images();
    for sigma in [20.0, 35.0] {
        let (mut basic_sum, mut full_sum, mut noisy_sum) = (0.0, 0.0, 0.0);
        for (i, clean) in images.iter().enumerate() {
            let noisy = awgn(clean, &NoiseSpec::awgn(sigma, 100 + i as u64)).unwrap();
            let params = Bm3dParams::for_sigma(sigma);
            let basic = hard_threshold_stage(&noisy, &params).unwrap();
            let full = denoise_bm3d(&noisy, &params).unwrap();
            noisy_sum += psnr(clean, &noisy.clipped(), 255.0).unwrap();
            basic_sum += psnr(clean, &basic.clipped(), 255.0).unwrap();
            full_sum += psnr(clean, &full.clipped(), 255.0).unwrap();
        }
        let n = images.len() as f64;
        let (noisy, basic, full) = (noisy_sum / n, basic_sum / n, full_sum / n);
        assert!(basic > noisy + 3.0, "σ={sigma}: stage 1 {basic:.2} vs noisy {noisy:.2}");
        assert!(full >= basic, "σ={sigma}: full {full:.2} < stage 1 {basic:.2}");
    }
}
