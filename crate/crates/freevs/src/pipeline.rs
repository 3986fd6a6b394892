//! Parallel drivers over the core algorithms.
//!
//! Every function here produces output identical to the serial core
//! routine it wraps, whatever the size of the current rayon pool.

use std::collections::BTreeMap;
use std::path::Path;

use freevs_core::accumulate::{self, frame_contribution};
use freevs_core::colorize::{fuse_samples, lidar_to_world, sample_camera};
use freevs_core::render::{assemble, project_cloud, rasterize_rows};
use freevs_core::view_sim::check_pair_bounds;
use freevs_core::{
    AccumulationConfig, CameraView, ColoredPointCloud, ColorizeConfig, Colorized, PseudoImage, RenderConfig,
    RgbImage, SimulationConfig, TrainingPair,
};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imageio::read_camera_image;
use crate::ingest::Scene;

pub fn load_frame_images(scene: &Scene, frame: i64) -> Result<Vec<RgbImage>> {
    let f = scene
        .sequence
        .frame(frame)
        .ok_or_else(|| freevs_core::Error::Range(format!("frame {frame} is outside the sequence")))?;
    f.cameras
        .par_iter()
        .map(|c| {
            read_camera_image(Path::new(&c.image), &c.view.intrinsics).map_err(|e| Error::CameraImage {
                camera: c.view.name.clone(),
                frame,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Colorizes one frame, projecting into cameras in parallel.
pub fn colorize_frame(scene: &Scene, frame: i64, cfg: &ColorizeConfig) -> Result<Colorized> {
    let images = load_frame_images(scene, frame)?;
    let f = &scene.sequence.frames[frame as usize];
    let positions = lidar_to_world(f);
    let per_camera = f
        .cameras
        .par_iter()
        .zip(&images)
        .map(|(c, img)| sample_camera(&positions, &c.view, img, cfg))
        .collect::<freevs_core::Result<Vec<_>>>()?;
    Ok(fuse_samples(&positions, &per_camera, frame))
}

pub fn colorize_frames(scene: &Scene, frames: &[i64], cfg: &ColorizeConfig) -> Result<BTreeMap<i64, ColoredPointCloud>> {
    let clouds = frames
        .par_iter()
        .map(|&f| colorize_frame(scene, f, cfg).map(|c| (f, c.cloud)))
        .collect::<Result<Vec<_>>>()?;
    Ok(clouds.into_iter().collect())
}

/// Frames whose clouds an accumulation at each of `centers` needs.
pub fn window_frames(scene: &Scene, centers: &[i64], radius: u32) -> Vec<i64> {
    let mut frames: Vec<i64> = centers
        .iter()
        .flat_map(|&c| accumulate::window(&scene.sequence, c, radius))
        .collect();
    frames.sort_unstable();
    frames.dedup();
    frames
}

pub fn accumulate(
    scene: &Scene,
    colored: &BTreeMap<i64, ColoredPointCloud>,
    center: i64,
    cfg: &AccumulationConfig,
) -> Result<ColoredPointCloud> {
    let seq = &scene.sequence;
    if !seq.contains_frame(center) {
        return Err(freevs_core::Error::Range(format!("center frame {center} is outside 0..{}", seq.len())).into());
    }
    let frames: Vec<i64> = accumulate::window(seq, center, cfg.radius).collect();
    let parts = frames
        .par_iter()
        .map(|f| {
            let cloud = colored.get(f).ok_or_else(|| {
                freevs_core::Error::Range(format!("no colored cloud for frame {f} (window of center {center})"))
            })?;
            frame_contribution(seq, cloud, center, cfg)
        })
        .collect::<freevs_core::Result<Vec<_>>>()?;
    Ok(accumulate::merge(parts, center, cfg)?)
}

/// Z-buffer render with the raster split into row bands across the pool.
pub fn render(cloud: &ColoredPointCloud, camera: &CameraView, cfg: &RenderConfig) -> PseudoImage {
    let splats = project_cloud(cloud, camera, cfg);
    let k = camera.intrinsics;
    let bands_wanted = (rayon::current_num_threads() * 4).max(1) as u32;
    let band_height = k.height.div_ceil(bands_wanted).max(1);
    let starts: Vec<u32> = (0..k.height).step_by(band_height as usize).collect();
    let bands: Vec<_> = starts
        .par_iter()
        .map(|&r0| rasterize_rows(&splats, &k, cfg.splat_radius, r0..(r0 + band_height).min(k.height)))
        .collect();
    assemble(camera, &bands)
}

/// Training pair with target frames rendered in parallel.
pub fn build_training_pair(
    scene: &Scene,
    colored: &BTreeMap<i64, ColoredPointCloud>,
    target_start: i64,
    offset: i64,
    sim: &SimulationConfig,
    acc: &AccumulationConfig,
    rc: &RenderConfig,
) -> Result<TrainingPair> {
    sim.validate()?;
    let seq = &scene.sequence;
    check_pair_bounds(seq, target_start, offset, sim.sequence_length)?;
    let target_frames: Vec<i64> = (target_start..target_start + sim.sequence_length as i64).collect();
    let pseudo_sequence = target_frames
        .par_iter()
        .map(|&t| {
            let cloud = accumulate(scene, colored, t + offset, acc)?;
            Ok(seq.frames[t as usize].cameras.iter().map(|c| render(&cloud, &c.view, rc)).collect())
        })
        .collect::<Result<Vec<Vec<PseudoImage>>>>()?;
    let target_image_paths = target_frames
        .iter()
        .map(|&t| seq.frames[t as usize].cameras.iter().map(|c| c.image.clone()).collect())
        .collect();
    Ok(TrainingPair { pseudo_sequence, target_image_paths, target_frames, offset, center_frame: target_start })
}

/// Runs `f` inside a pool of `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    pool.install(f)
}
