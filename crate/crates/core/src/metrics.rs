//! PSNR, SSIM and pseudo-image density.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::RgbImage;
use crate::render::PseudoImage;

/// Reported for identical images so aggregates stay finite.
pub const PSNR_CAP_DB: f64 = 99.0;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
const DYNAMIC_RANGE: f64 = 255.0;

fn check_shape(a: &RgbImage, b: &RgbImage) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::Shape(format!("{}×{} vs {}×{}", a.width, a.height, b.width, b.height)))
    }
}

pub fn psnr(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    check_shape(a, b)?;
    if a.data.is_empty() {
        return Err(Error::Shape("empty image".into()));
    }
    let sse: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    let mse = sse / a.data.len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * libm::log10(DYNAMIC_RANGE * DYNAMIC_RANGE / mse)).min(PSNR_CAP_DB))
}

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut taps = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, t) in taps.iter_mut().enumerate() {
        let x = i as f64 - half;
        *t = libm::exp(-(x * x) / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
    }
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    taps
}

/// Separable "valid" filter: output is `(w - 10) × (h - 10)`.
fn filter_valid(src: &[f64], w: usize, h: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w + 1 - SSIM_WINDOW;
    let oh = h + 1 - SSIM_WINDOW;
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            horiz[y * ow + x] = taps.iter().zip(&row[x..x + SSIM_WINDOW]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps.iter().enumerate().map(|(i, t)| t * horiz[(y + i) * ow + x]).sum();
        }
    }
    out
}

fn ssim_channel(a: &[f64], b: &[f64], w: usize, h: usize, taps: &[f64; SSIM_WINDOW]) -> f64 {
    let c1 = (SSIM_K1 * DYNAMIC_RANGE) * (SSIM_K1 * DYNAMIC_RANGE);
    let c2 = (SSIM_K2 * DYNAMIC_RANGE) * (SSIM_K2 * DYNAMIC_RANGE);
    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let mu_a = filter_valid(a, w, h, taps);
    let mu_b = filter_valid(b, w, h, taps);
    let e_aa = filter_valid(&aa, w, h, taps);
    let e_bb = filter_valid(&bb, w, h, taps);
    let e_ab = filter_valid(&ab, w, h, taps);
    let n = mu_a.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let var_a = e_aa[i] - ma * ma;
            let var_b = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2))
        })
        .sum();
    total / n as f64
}

/// Single-scale SSIM: per channel, 11×11 Gaussian (σ 1.5) over valid
/// window positions, K1 0.01, K2 0.03, range 255; channel means averaged.
pub fn ssim(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    check_shape(a, b)?;
    let (w, h) = (a.width as usize, a.height as usize);
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::Shape(format!("{w}×{h} is smaller than the {SSIM_WINDOW}×{SSIM_WINDOW} SSIM window")));
    }
    let taps = gaussian_taps();
    let channel = |img: &RgbImage, c: usize| -> Vec<f64> { img.data.iter().skip(c).step_by(3).map(|&v| v as f64).collect() };
    let score: f64 = (0..3).map(|c| ssim_channel(&channel(a, c), &channel(b, c), w, h, &taps)).sum();
    Ok((score / 3.0).clamp(-1.0, 1.0))
}

pub fn mask_density(p: &PseudoImage) -> f64 {
    if p.valid.is_empty() {
        return 0.0;
    }
    p.valid_count() as f64 / p.valid.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewMetric {
    pub frame: i64,
    pub camera: String,
    pub psnr_db: f64,
    pub ssim: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub views: Vec<ViewMetric>,
}

impl MetricReport {
    pub fn push(&mut self, frame: i64, camera: impl Into<String>, a: &RgbImage, b: &RgbImage) -> Result<()> {
        let psnr_db = psnr(a, b)?;
        let ssim = ssim(a, b)?;
        self.views.push(ViewMetric { frame, camera: camera.into(), psnr_db, ssim });
        Ok(())
    }

    /// `(mean psnr, mean ssim)`; `None` for an empty report.
    pub fn means(&self) -> Option<(f64, f64)> {
        if self.views.is_empty() {
            return None;
        }
        let n = self.views.len() as f64;
        let p = self.views.iter().map(|v| v.psnr_db).sum::<f64>() / n;
        let s = self.views.iter().map(|v| v.ssim).sum::<f64>() / n;
        Some((p, s))
    }

    /// CSV with header `frame,camera,psnr_db,ssim`, views sorted by (frame, camera),
    /// and a trailing `mean,all,…` row.
    pub fn to_csv(&self) -> String {
        let mut views: Vec<&ViewMetric> = self.views.iter().collect();
        views.sort_by(|a, b| (a.frame, &a.camera).cmp(&(b.frame, &b.camera)));
        let mut out = String::from("frame,camera,psnr_db,ssim\n");
        for v in views {
            let _ = writeln!(out, "{},{},{:.6},{:.6}", v.frame, v.camera, v.psnr_db, v.ssim);
        }
        if let Some((p, s)) = self.means() {
            let _ = writeln!(out, "mean,all,{p:.6},{s:.6}");
        }
        out
    }
}
