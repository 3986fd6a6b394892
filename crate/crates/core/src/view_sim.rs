//! Viewpoint-transformation simulation, benchmark splits and trajectory edits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::accumulate::{accumulate, AccumulationConfig};
use crate::colorize::ColoredPointCloud;
use crate::error::{Error, Result};
use crate::geometry::{RigidTransform, Vec3};
use crate::render::{render_pseudo_image, PseudoImage, RenderConfig};
use crate::scene::SceneSequence;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Offsets are drawn from `{-window, …, -1, 1, …, window}`.
    pub window: u32,
    pub enable_probability: f64,
    /// Frames per training sequence.
    pub sequence_length: u32,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { window: 4, enable_probability: 0.5, sequence_length: 8 }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.enable_probability) {
            return Err(Error::Config(format!(
                "enable_probability must lie in [0, 1], got {}",
                self.enable_probability
            )));
        }
        if self.window == 0 && self.enable_probability > 0.0 {
            return Err(Error::Config("simulation window is 0 but enable_probability > 0".into()));
        }
        if self.sequence_length == 0 {
            return Err(Error::Config("sequence_length must be at least 1".into()));
        }
        Ok(())
    }
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn below(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    ((rng.next_u64() as u128 * n as u128) >> 64) as u64
}

/// 0 with probability `1 - enable_probability`, else uniform over the nonzero window offsets.
pub fn sample_offset(cfg: &SimulationConfig, rng_seed: u64) -> Result<i64> {
    sample_offset_in(cfg, rng_seed, |_| true)
}

/// As [`sample_offset`], restricted to offsets accepted by `allowed`.
/// Falls back to 0 when simulation triggers but no nonzero offset is allowed.
pub fn sample_offset_in(cfg: &SimulationConfig, rng_seed: u64, allowed: impl Fn(i64) -> bool) -> Result<i64> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    if unit_f64(&mut rng) >= cfg.enable_probability {
        return Ok(0);
    }
    let w = cfg.window as i64;
    let candidates: Vec<i64> = (-w..=w).filter(|&o| o != 0 && allowed(o)).collect();
    if candidates.is_empty() {
        return Ok(0);
    }
    Ok(candidates[below(&mut rng, candidates.len() as u64) as usize])
}

/// Pseudo-image sequence paired with recorded targets.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPair {
    /// `[frame][camera]`, frames in target order, cameras in scene order.
    pub pseudo_sequence: Vec<Vec<PseudoImage>>,
    pub target_image_paths: Vec<Vec<String>>,
    pub target_frames: Vec<i64>,
    pub offset: i64,
    /// First target frame of the sequence.
    pub center_frame: i64,
}

/// Checks that targets `[start, start+n)` and their observation frames lie in the sequence.
pub fn check_pair_bounds(scene: &SceneSequence, target_start: i64, offset: i64, n: u32) -> Result<()> {
    let end = target_start + n as i64 - 1;
    let len = scene.len() as i64;
    if target_start < 0 || end >= len {
        return Err(Error::Range(format!("target frames {target_start}..={end} exceed sequence 0..={}", len - 1)));
    }
    if target_start + offset < 0 || end + offset >= len {
        return Err(Error::Range(format!(
            "observation frames {}..={} (offset {offset}) exceed sequence 0..={}",
            target_start + offset,
            end + offset,
            len - 1
        )));
    }
    Ok(())
}

/// Renders each target frame's cameras from the cloud accumulated at `t + offset`.
pub fn build_training_pair(
    scene: &SceneSequence,
    colored: &BTreeMap<i64, ColoredPointCloud>,
    target_start: i64,
    offset: i64,
    cfg: &SimulationConfig,
    acc: &AccumulationConfig,
    rc: &RenderConfig,
) -> Result<TrainingPair> {
    cfg.validate()?;
    check_pair_bounds(scene, target_start, offset, cfg.sequence_length)?;
    let target_frames: Vec<i64> = (target_start..target_start + cfg.sequence_length as i64).collect();
    let mut pseudo_sequence = Vec::with_capacity(target_frames.len());
    let mut target_image_paths = Vec::with_capacity(target_frames.len());
    for &t in &target_frames {
        let cloud = accumulate(scene, colored, t + offset, acc)?;
        let frame = &scene.frames[t as usize];
        pseudo_sequence.push(frame.cameras.iter().map(|c| render_pseudo_image(&cloud, &c.view, rc)).collect());
        target_image_paths.push(frame.cameras.iter().map(|c| c.image.clone()).collect());
    }
    Ok(TrainingPair { pseudo_sequence, target_image_paths, target_frames, offset, center_frame: target_start })
}

/// Moves every ego pose by `offset` expressed in that frame's own ego frame.
/// Rig extrinsics, sweeps, images and boxes are untouched.
pub fn shift_trajectory_by(scene: &SceneSequence, offset: Vec3) -> SceneSequence {
    let step = RigidTransform::from_translation(offset);
    let mut out = scene.clone();
    for i in 0..out.frames.len() {
        let shifted = out.frames[i].world_from_ego.compose(&step);
        out.set_ego_pose(i, shifted);
    }
    out
}

/// Lateral shift along the ego y axis (left positive).
pub fn shift_trajectory(scene: &SceneSequence, lateral_offset: f64) -> SceneSequence {
    shift_trajectory_by(scene, [0.0, lateral_offset, 0.0])
}

/// Lateral offsets of the novel-trajectory benchmark, both signs.
pub const BENCHMARK_LATERAL_OFFSETS: [f64; 6] = [-4.0, -2.0, -1.0, 1.0, 2.0, 4.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    NovelFrame,
    NovelCamera,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitParams {
    /// Test frames are those whose index is a multiple of this.
    pub frame_stride: u32,
    pub test_cameras: Vec<String>,
}

impl Default for SplitParams {
    fn default() -> Self {
        Self { frame_stride: 4, test_cameras: Vec::new() }
    }
}

pub type ViewId = (i64, String);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub kind: SplitKind,
    pub params: SplitParams,
    pub train_views: Vec<ViewId>,
    pub test_views: Vec<ViewId>,
}

pub fn make_split(scene: &SceneSequence, kind: SplitKind, params: &SplitParams) -> Result<Split> {
    let is_test: &dyn Fn(&ViewId) -> bool = match kind {
        SplitKind::NovelFrame => {
            if params.frame_stride == 0 {
                return Err(Error::Config("frame_stride must be at least 1".into()));
            }
            &|(frame, _)| frame % params.frame_stride as i64 == 0
        }
        SplitKind::NovelCamera => {
            if params.test_cameras.is_empty() {
                return Err(Error::Config("novel-camera split needs at least one test camera".into()));
            }
            if let Some(unknown) = params.test_cameras.iter().find(|c| !scene.camera_names.contains(c)) {
                return Err(Error::Config(format!(
                    "unknown test camera {unknown:?}; scene cameras are {:?}",
                    scene.camera_names
                )));
            }
            if scene.camera_names.iter().all(|c| params.test_cameras.contains(c)) {
                return Err(Error::Config("test cameras cover every scene camera; no train views remain".into()));
            }
            &|(_, cam)| params.test_cameras.contains(cam)
        }
    };
    let (test_views, train_views) = scene.views().into_iter().partition(|v| is_test(v));
    Ok(Split { kind, params: params.clone(), train_views, test_views })
}
