//! Scene manifest (JSON) loading and saving.
//!
//! ```json
//! {
//!   "camera_names": ["FRONT", ...],
//!   "frames": [{
//!     "index": 0, "timestamp": 0.0,
//!     "world_from_ego": [16 numbers, row-major 4×4],
//!     "lidar": "lidar/000.bin",
//!     "cameras": {"FRONT": {"fx":..,"fy":..,"cx":..,"cy":..,"width":..,"height":..,
//!                           "ego_from_camera": [16 numbers], "image": "images/000_FRONT.png"}},
//!     "objects": [{"track_id": "car", "world_from_box": [16 numbers],
//!                  "size": [l, w, h], "is_moving": true}]
//!   }]
//! }
//! ```
//!
//! Relative paths resolve against the manifest's directory. `is_moving` may
//! be omitted, in which case it is derived from box motion.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use freevs_core::geometry::CameraIntrinsics;
use freevs_core::{CameraView, Frame, FrameCamera, ObjectBox, RigidTransform, SceneSequence, ValidationError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::read_raw_points;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestCamera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub ego_from_camera: [f64; 16],
    pub image: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestObject {
    pub track_id: String,
    pub world_from_box: [f64; 16],
    pub size: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_moving: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestFrame {
    pub index: i64,
    pub timestamp: f64,
    pub world_from_ego: [f64; 16],
    pub lidar: String,
    pub cameras: BTreeMap<String, ManifestCamera>,
    #[serde(default)]
    pub objects: Vec<ManifestObject>,
    /// Pose the sweep and images were captured at, when `world_from_ego` was edited by `shift`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recorded_world_from_ego: Option<[f64; 16]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub camera_names: Vec<String>,
    pub frames: Vec<ManifestFrame>,
    /// Total ego-frame offset applied by `shift`, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_offset: Option<[f64; 3]>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LoadOptions {
    /// Resample every camera to this `(width, height)`, scaling intrinsics proportionally.
    pub resize: Option<(u32, u32)>,
}

/// A loaded scene plus the on-disk locations its data came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub sequence: SceneSequence,
    /// Per frame, the absolute sweep file path.
    pub lidar_paths: Vec<PathBuf>,
    pub manifest_path: PathBuf,
    /// Per frame, the capture pose. Differs from the sequence poses only for shifted scenes.
    pub recorded_poses: Vec<RigidTransform>,
    pub trajectory_offset: [f64; 3],
}

impl Scene {
    pub fn is_shifted(&self) -> bool {
        self.trajectory_offset != [0.0; 3] || self.sequence.frames.iter().zip(&self.recorded_poses).any(|(f, p)| f.world_from_ego != *p)
    }

    /// The scene at its capture poses, which is what sweeps and images must be paired with.
    pub fn recorded(&self) -> Scene {
        let mut out = self.clone();
        for (i, pose) in self.recorded_poses.iter().enumerate() {
            out.sequence.set_ego_pose(i, *pose);
        }
        out.trajectory_offset = [0.0; 3];
        out
    }

    /// Moves every ego pose by `offset` in its own ego frame, keeping the capture poses.
    pub fn shifted(&self, offset: [f64; 3]) -> Scene {
        Scene {
            sequence: freevs_core::shift_trajectory_by(&self.sequence, offset),
            trajectory_offset: [0, 1, 2].map(|i| self.trajectory_offset[i] + offset[i]),
            ..self.clone()
        }
    }

    pub fn image_path(&self, frame: i64, camera: &str) -> Option<PathBuf> {
        Some(PathBuf::from(&self.sequence.frame(frame)?.camera(camera)?.image))
    }
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_owned()
    } else {
        base.join(p)
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "file not found")))
    }
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_owned(), source })
}

pub fn load_scene(manifest_path: &Path) -> Result<Scene> {
    load_scene_with(manifest_path, &LoadOptions::default())
}

/// Loads and validates a scene. Sweeps load in parallel; image files are
/// only existence-checked here.
pub fn load_scene_with(manifest_path: &Path, opts: &LoadOptions) -> Result<Scene> {
    let manifest_path = fs::canonicalize(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest = read_manifest(&manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("/")).to_owned();

    if manifest.frames.is_empty() {
        return Err(ValidationError::new("scene has no frames").into());
    }

    let lidar_paths: Vec<PathBuf> = manifest.frames.iter().map(|f| resolve(&base, &f.lidar)).collect();
    let sweeps = lidar_paths
        .par_iter()
        .map(|p| {
            require_file(p)?;
            read_raw_points(p)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut frames = Vec::with_capacity(manifest.frames.len());
    let mut explicit_motion = Vec::new();
    let mut recorded_poses = Vec::with_capacity(manifest.frames.len());
    for (pos, (mf, lidar)) in manifest.frames.iter().zip(sweeps).enumerate() {
        let world_from_ego = RigidTransform::from_row_major(&mf.world_from_ego);
        let mut cameras = Vec::with_capacity(manifest.camera_names.len());
        for name in &manifest.camera_names {
            let mc = mf.cameras.get(name).ok_or_else(|| {
                ValidationError::at_frame(pos as i64, format!("cameras: missing entry for {name:?}"))
            })?;
            let image = resolve(&base, &mc.image);
            require_file(&image)?;
            let mut intrinsics = CameraIntrinsics {
                fx: mc.fx,
                fy: mc.fy,
                cx: mc.cx,
                cy: mc.cy,
                width: mc.width,
                height: mc.height,
            };
            if let Some((w, h)) = opts.resize {
                intrinsics = intrinsics.rescaled(w, h);
            }
            cameras.push(FrameCamera {
                view: CameraView {
                    name: name.clone(),
                    intrinsics,
                    ego_from_camera: RigidTransform::from_row_major(&mc.ego_from_camera),
                    world_from_ego,
                },
                image: image.to_string_lossy().into_owned(),
            });
        }
        if let Some(extra) = mf.cameras.keys().find(|k| !manifest.camera_names.contains(k)) {
            return Err(ValidationError::at_frame(pos as i64, format!("cameras: {extra:?} is not in camera_names")).into());
        }
        let objects = mf
            .objects
            .iter()
            .map(|o| {
                explicit_motion.push(o.is_moving);
                ObjectBox {
                    track_id: o.track_id.clone(),
                    world_from_box: RigidTransform::from_row_major(&o.world_from_box),
                    size: o.size,
                    is_moving: o.is_moving.unwrap_or(false),
                }
            })
            .collect();
        recorded_poses.push(mf.recorded_world_from_ego.map_or(world_from_ego, |m| RigidTransform::from_row_major(&m)));
        frames.push(Frame { index: mf.index, timestamp: mf.timestamp, world_from_ego, lidar, cameras, objects });
    }

    let mut sequence = SceneSequence { camera_names: manifest.camera_names.clone(), frames };
    sequence.validate()?;
    if explicit_motion.iter().any(Option::is_none) {
        let derived = sequence.moving_tracks();
        let mut flags = explicit_motion.into_iter();
        for obj in sequence.frames.iter_mut().flat_map(|f| f.objects.iter_mut()) {
            if flags.next().flatten().is_none() {
                obj.is_moving = derived[&obj.track_id];
            }
        }
    }
    for (i, pose) in recorded_poses.iter().enumerate() {
        pose.validate().map_err(|e| e.in_frame(i as i64))?;
    }
    let trajectory_offset = manifest.trajectory_offset.unwrap_or([0.0; 3]);
    Ok(Scene { sequence, lidar_paths, manifest_path, recorded_poses, trajectory_offset })
}

/// Manifest describing `scene`, with every file reference written as an absolute path.
pub fn to_manifest(scene: &Scene) -> Manifest {
    let seq = &scene.sequence;
    let frames = seq
        .frames
        .iter()
        .zip(&scene.lidar_paths)
        .zip(&scene.recorded_poses)
        .map(|((f, lidar), recorded)| ManifestFrame {
            index: f.index,
            timestamp: f.timestamp,
            world_from_ego: f.world_from_ego.to_row_major(),
            lidar: lidar.to_string_lossy().into_owned(),
            cameras: f
                .cameras
                .iter()
                .map(|c| {
                    let k = c.view.intrinsics;
                    (
                        c.view.name.clone(),
                        ManifestCamera {
                            fx: k.fx,
                            fy: k.fy,
                            cx: k.cx,
                            cy: k.cy,
                            width: k.width,
                            height: k.height,
                            ego_from_camera: c.view.ego_from_camera.to_row_major(),
                            image: c.image.clone(),
                        },
                    )
                })
                .collect(),
            objects: f
                .objects
                .iter()
                .map(|o| ManifestObject {
                    track_id: o.track_id.clone(),
                    world_from_box: o.world_from_box.to_row_major(),
                    size: o.size,
                    is_moving: Some(o.is_moving),
                })
                .collect(),
            recorded_world_from_ego: (*recorded != f.world_from_ego).then(|| recorded.to_row_major()),
        })
        .collect();
    let shifted = scene.trajectory_offset != [0.0; 3];
    Manifest { camera_names: seq.camera_names.clone(), frames, trajectory_offset: shifted.then_some(scene.trajectory_offset) }
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).map_err(|source| Error::Json { path: path.to_owned(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `scene` as a manifest at `path` (the scene's own data files are referenced, not copied).
pub fn save_scene(path: &Path, scene: &Scene) -> Result<()> {
    write_manifest(path, &to_manifest(scene))
}
