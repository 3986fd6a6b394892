//! Temporal merging of colored clouds around a center frame.
//!
//! Points that fall inside a moving object's box are carried along that
//! object's track to where the box sits at the center frame; everything
//! else is already in the world frame and passes through.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::colorize::ColoredPointCloud;
use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Vec3, WorldPoint};
use crate::scene::SceneSequence;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccumulationConfig {
    pub radius: u32,
    /// Voxel edge in meters; `None` keeps every point.
    pub voxel_downsample: Option<f64>,
    /// Carry points in moving boxes to the center-frame box pose.
    pub repose_moving: bool,
    /// Added to every box half-extent for the containment test.
    pub box_dilation: f64,
}

impl Default for AccumulationConfig {
    fn default() -> Self {
        Self { radius: 2, voxel_downsample: None, repose_moving: true, box_dilation: 0.1 }
    }
}

impl AccumulationConfig {
    pub fn with_radius(radius: u32) -> Self {
        Self { radius, ..Self::default() }
    }
}

/// `world_from_box_dst ∘ invert(world_from_box_src)` applied to each point.
pub fn repose_object_points(points: &[Vec3], world_from_box_src: &RigidTransform, world_from_box_dst: &RigidTransform) -> Vec<Vec3> {
    let motion = world_from_box_dst.compose(&world_from_box_src.inverse());
    motion.transform_points(points)
}

/// Window `[center - radius, center + radius]` clipped to the sequence.
pub fn window(scene: &SceneSequence, center: i64, radius: u32) -> RangeInclusive<i64> {
    let last = scene.len() as i64 - 1;
    (center - radius as i64).max(0)..=(center + radius as i64).min(last)
}

enum BoxFate {
    Carry(RigidTransform),
    Drop,
}

/// Points of frame `cloud.frame_index` as they contribute to the center frame,
/// in original order.
pub fn frame_contribution(
    scene: &SceneSequence,
    cloud: &ColoredPointCloud,
    center: i64,
    cfg: &AccumulationConfig,
) -> Result<Vec<WorldPoint>> {
    let source = scene
        .frame(cloud.frame_index)
        .ok_or_else(|| Error::Range(format!("cloud frame {} is outside the sequence", cloud.frame_index)))?;
    let target = scene
        .frame(center)
        .ok_or_else(|| Error::Range(format!("center frame {center} is outside the sequence")))?;
    if !cfg.repose_moving || cloud.frame_index == center {
        return Ok(cloud.points.clone());
    }

    let boxes: Vec<_> = source
        .objects
        .iter()
        .filter(|b| b.is_moving)
        .map(|b| {
            let fate = match target.object(&b.track_id) {
                Some(dst) => BoxFate::Carry(dst.world_from_box.compose(&b.world_from_box.inverse())),
                None => BoxFate::Drop,
            };
            (b, fate)
        })
        .collect();

    let mut out = Vec::with_capacity(cloud.points.len());
    for p in &cloud.points {
        let world = p.position_f64();
        match boxes.iter().find(|(b, _)| b.contains(world, cfg.box_dilation)) {
            None => out.push(*p),
            Some((_, BoxFate::Drop)) => {}
            Some((_, BoxFate::Carry(motion))) => {
                let moved = motion.apply(world);
                out.push(WorldPoint { position: [moved[0] as f32, moved[1] as f32, moved[2] as f32], ..*p });
            }
        }
    }
    Ok(out)
}

/// Merges the window's clouds into one cloud for `center`.
///
/// Output order is window frames ascending, original order within a frame,
/// unless voxel downsampling is on (then voxel-key order).
pub fn accumulate(
    scene: &SceneSequence,
    colored: &BTreeMap<i64, ColoredPointCloud>,
    center: i64,
    cfg: &AccumulationConfig,
) -> Result<ColoredPointCloud> {
    if !scene.contains_frame(center) {
        return Err(Error::Range(format!("center frame {center} is outside 0..{}", scene.len())));
    }
    let mut parts = Vec::new();
    for f in window(scene, center, cfg.radius) {
        let cloud = colored
            .get(&f)
            .ok_or_else(|| Error::Range(format!("no colored cloud for frame {f} (window of center {center})")))?;
        parts.push(frame_contribution(scene, cloud, center, cfg)?);
    }
    merge(parts, center, cfg)
}

/// Concatenates per-frame contributions (window order) and applies voxel downsampling.
pub fn merge(parts: Vec<Vec<WorldPoint>>, center: i64, cfg: &AccumulationConfig) -> Result<ColoredPointCloud> {
    let points: Vec<WorldPoint> = parts.into_iter().flatten().collect();
    let points = match cfg.voxel_downsample {
        None => points,
        Some(edge) if edge > 0.0 && edge.is_finite() => voxel_downsample(&points, edge),
        Some(edge) => return Err(Error::Config(format!("voxel edge must be positive, got {edge}"))),
    };
    Ok(ColoredPointCloud { points, frame_index: center })
}

/// Keeps, per voxel, the point nearest the voxel center (earliest wins ties).
pub fn voxel_downsample(points: &[WorldPoint], edge: f64) -> Vec<WorldPoint> {
    let mut best: BTreeMap<[i64; 3], (f64, usize)> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        let w = p.position_f64();
        let key = [0, 1, 2].map(|a| libm::floor(w[a] / edge) as i64);
        let d2: f64 = (0..3)
            .map(|a| {
                let c = (key[a] as f64 + 0.5) * edge;
                (w[a] - c) * (w[a] - c)
            })
            .sum();
        best.entry(key)
            .and_modify(|slot| {
                if d2 < slot.0 {
                    *slot = (d2, i);
                }
            })
            .or_insert((d2, i));
    }
    best.values().map(|&(_, i)| points[i]).collect()
}
