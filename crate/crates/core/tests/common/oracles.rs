//! Slow reference implementations, written independently of the engine.

use freevs_core::{CameraView, ColoredPointCloud, PseudoImage, RgbImage};

/// Per-pixel scan over every point: the nearest point whose footprint
/// covers the pixel wins; ties go to the lower source frame, then the lower
/// index in the cloud.
pub fn brute_force_render(cloud: &ColoredPointCloud, camera: &CameraView, z_near: f64, splat_radius: u32) -> PseudoImage {
    let k = camera.intrinsics;
    let t = camera.camera_from_world();
    let (w, h) = (k.width as usize, k.height as usize);
    let r = splat_radius as f64;

    // continuous image coordinates of every point in front of the camera
    let projected: Vec<Option<(f64, f64, f32)>> = cloud
        .points
        .iter()
        .map(|p| {
            let c = t.apply(p.position.map(f64::from));
            if c[2] <= z_near {
                return None;
            }
            let u = k.fx * c[0] / c[2] + k.cx;
            let v = k.fy * c[1] / c[2] + k.cy;
            let on_raster = u >= 0.0 && v >= 0.0 && u < w as f64 && v < h as f64;
            on_raster.then_some((u, v, c[2] as f32))
        })
        .collect();

    let mut out = PseudoImage::empty(camera.clone());
    for row in 0..h {
        for col in 0..w {
            let mut best: Option<(f32, i64, usize)> = None;
            for (i, proj) in projected.iter().enumerate() {
                let Some((u, v, depth)) = *proj else { continue };
                let covers = u >= col as f64 - r && u < col as f64 + r + 1.0 && v >= row as f64 - r && v < row as f64 + r + 1.0;
                if !covers {
                    continue;
                }
                let key = (depth, cloud.points[i].source_frame, i);
                let better = match best {
                    None => true,
                    Some(b) => {
                        key.0.total_cmp(&b.0).then(key.1.cmp(&b.1)).then(key.2.cmp(&b.2)) == std::cmp::Ordering::Less
                    }
                };
                if better {
                    best = Some(key);
                }
            }
            if let Some((depth, _, i)) = best {
                let pix = row * w + col;
                out.valid[pix] = true;
                out.depth[pix] = depth;
                out.rgb.data[pix * 3..pix * 3 + 3].copy_from_slice(&cloud.points[i].color);
            }
        }
    }
    out
}

pub fn psnr_direct(a: &RgbImage, b: &RgbImage) -> f64 {
    let n = a.data.len() as f64;
    let mse = a.data.iter().zip(&b.data).map(|(&x, &y)| (x as f64 - y as f64).powi(2)).sum::<f64>() / n;
    if mse == 0.0 {
        99.0
    } else {
        (10.0 * (255.0f64.powi(2) / mse).log10()).min(99.0)
    }
}

/// SSIM straight from the definition: for every 11×11 window fully inside
/// the image, Gaussian-weighted (σ = 1.5) means, variances and covariance.
pub fn ssim_direct(a: &RgbImage, b: &RgbImage) -> f64 {
    let (w, h) = (a.width as usize, a.height as usize);
    let mut weights = [[0.0f64; 11]; 11];
    let mut total = 0.0;
    for (y, row) in weights.iter_mut().enumerate() {
        for (x, wt) in row.iter_mut().enumerate() {
            let (dx, dy) = (x as f64 - 5.0, y as f64 - 5.0);
            *wt = (-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5)).exp();
            total += *wt;
        }
    }
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let mut channel_scores = 0.0;
    for ch in 0..3 {
        let px = |img: &RgbImage, x: usize, y: usize| img.data[(y * w + x) * 3 + ch] as f64;
        let mut sum = 0.0;
        let mut count = 0usize;
        for y0 in 0..=h - 11 {
            for x0 in 0..=w - 11 {
                let (mut ma, mut mb) = (0.0, 0.0);
                for (dy, wrow) in weights.iter().enumerate() {
                    for (dx, wt) in wrow.iter().enumerate() {
                        let g = wt / total;
                        ma += g * px(a, x0 + dx, y0 + dy);
                        mb += g * px(b, x0 + dx, y0 + dy);
                    }
                }
                let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
                for (dy, wrow) in weights.iter().enumerate() {
                    for (dx, wt) in wrow.iter().enumerate() {
                        let g = wt / total;
                        let (da, db) = (px(a, x0 + dx, y0 + dy) - ma, px(b, x0 + dx, y0 + dy) - mb);
                        va += g * da * da;
                        vb += g * db * db;
                        cov += g * da * db;
                    }
                }
                sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                count += 1;
            }
        }
        channel_scores += sum / count as f64;
    }
    channel_scores / 3.0
}
