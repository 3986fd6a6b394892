//! LiDAR colorization: project each sweep point into every camera of its frame,
//! sample the observed pixel, and record the per-channel mean over all cameras
//! that see it. Points no camera sees are dropped.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraView, Projector, WorldPoint, DEFAULT_Z_NEAR};
use crate::raster::RgbImage;
use crate::scene::Frame;

/// Colored points in the world frame; `frame_index` is the frame the cloud belongs to.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ColoredPointCloud {
    pub points: Vec<WorldPoint>,
    pub frame_index: i64,
}

impl ColoredPointCloud {
    pub fn new(frame_index: i64) -> Self {
        Self { points: Vec::new(), frame_index }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorizeConfig {
    pub occlusion_check: bool,
    /// A sample is accepted when its depth is within this of the pixel's nearest depth.
    pub depth_tolerance: f64,
    pub z_near: f64,
}

impl Default for ColorizeConfig {
    fn default() -> Self {
        Self { occlusion_check: true, depth_tolerance: 0.3, z_near: DEFAULT_Z_NEAR }
    }
}

/// Colorized cloud plus, per output point, how many cameras contributed to its color.
#[derive(Clone, Debug, PartialEq)]
pub struct Colorized {
    pub cloud: ColoredPointCloud,
    pub sample_counts: Vec<u32>,
}

/// World positions of a frame's sweep, rounded to storage precision.
pub fn lidar_to_world(frame: &Frame) -> Vec<[f32; 3]> {
    frame
        .lidar
        .iter()
        .map(|p| {
            let w = frame.world_from_ego.apply(p.position_f64());
            [w[0] as f32, w[1] as f32, w[2] as f32]
        })
        .collect()
}

/// Colors seen by one camera, one entry per input position (`None` = not observed).
pub fn sample_camera(
    positions: &[[f32; 3]],
    view: &CameraView,
    image: &RgbImage,
    cfg: &ColorizeConfig,
) -> Result<Vec<Option<[u8; 3]>>> {
    let k = &view.intrinsics;
    if image.width != k.width || image.height != k.height {
        return Err(Error::Shape(format!(
            "camera {} expects a {}×{} image, got {}×{}",
            view.name, k.width, k.height, image.width, image.height
        )));
    }
    let projector = Projector::new(view, cfg.z_near);
    let hits: Vec<Option<(u32, u32, f64)>> = positions.iter().map(|&p| projector.project_world(p)).collect();

    let nearest = cfg.occlusion_check.then(|| {
        let mut zbuf = vec![f64::INFINITY; k.pixel_count()];
        for &(col, row, depth) in hits.iter().flatten() {
            let slot = &mut zbuf[row as usize * k.width as usize + col as usize];
            if depth < *slot {
                *slot = depth;
            }
        }
        zbuf
    });

    Ok(hits
        .iter()
        .map(|hit| {
            let (col, row, depth) = (*hit)?;
            if let Some(zbuf) = &nearest {
                if depth > zbuf[row as usize * k.width as usize + col as usize] + cfg.depth_tolerance {
                    return None;
                }
            }
            Some(image.get(col, row))
        })
        .collect())
}

/// Mean-fuses per-camera samples. Each channel is `round_half_up(sum / n)`,
/// computed in integers so the result is independent of camera order.
pub fn fuse_samples(positions: &[[f32; 3]], per_camera: &[Vec<Option<[u8; 3]>>], frame_index: i64) -> Colorized {
    let mut cloud = ColoredPointCloud::new(frame_index);
    let mut sample_counts = Vec::new();
    for (i, &position) in positions.iter().enumerate() {
        let mut sum = [0u32; 3];
        let mut n = 0u32;
        for color in per_camera.iter().filter_map(|samples| samples[i]) {
            for c in 0..3 {
                sum[c] += color[c] as u32;
            }
            n += 1;
        }
        if n == 0 {
            continue;
        }
        let mean = |s: u32| ((2 * s + n) / (2 * n)) as u8;
        cloud.points.push(WorldPoint {
            position,
            color: [mean(sum[0]), mean(sum[1]), mean(sum[2])],
            source_frame: frame_index,
        });
        sample_counts.push(n);
    }
    Colorized { cloud, sample_counts }
}

/// Colorizes one frame. `images` follows `frame.cameras` order.
pub fn colorize_frame(frame: &Frame, images: &[&RgbImage], cfg: &ColorizeConfig) -> Result<Colorized> {
    if images.len() != frame.cameras.len() {
        return Err(Error::Shape(format!(
            "frame {} has {} cameras but {} images were supplied",
            frame.index,
            frame.cameras.len(),
            images.len()
        )));
    }
    let positions = lidar_to_world(frame);
    let per_camera = frame
        .cameras
        .iter()
        .zip(images)
        .map(|(cam, img)| sample_camera(&positions, &cam.view, img, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(fuse_samples(&positions, &per_camera, frame.index))
}
