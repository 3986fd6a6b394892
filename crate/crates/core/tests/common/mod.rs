#![allow(dead_code)]

pub mod oracles;

use freevs_core::geometry::camera_rotation_for_yaw;
use freevs_core::{
    CameraIntrinsics, CameraView, ColoredPointCloud, Frame, FrameCamera, ObjectBox, RigidTransform, SceneSequence,
    WorldPoint,
};

pub const CAMERA_HEIGHT: f64 = 1.5;

pub fn intrinsics(fx: f64, width: u32, height: u32) -> CameraIntrinsics {
    CameraIntrinsics { fx, fy: fx, cx: width as f64 / 2.0, cy: height as f64 / 2.0, width, height }
}

pub fn view(name: &str, k: CameraIntrinsics, yaw_deg: f64, world_from_ego: RigidTransform) -> CameraView {
    CameraView {
        name: name.to_string(),
        intrinsics: k,
        ego_from_camera: RigidTransform {
            rotation: camera_rotation_for_yaw(yaw_deg.to_radians()),
            translation: [0.0, 0.0, CAMERA_HEIGHT],
        },
        world_from_ego,
    }
}

/// Ego drives along world +x by `ego_step` per frame; no sweeps, no objects.
pub fn rig_scene(frames: usize, cameras: &[(&str, f64)], k: CameraIntrinsics, ego_step: f64) -> SceneSequence {
    let frames = (0..frames)
        .map(|i| {
            let pose = RigidTransform::from_translation([ego_step * i as f64, 0.0, 0.0]);
            Frame {
                index: i as i64,
                timestamp: i as f64 * 0.1,
                world_from_ego: pose,
                lidar: vec![],
                cameras: cameras
                    .iter()
                    .map(|(n, yaw)| FrameCamera { view: view(n, k, *yaw, pose), image: format!("{i:03}_{n}.png") })
                    .collect(),
                objects: vec![],
            }
        })
        .collect();
    SceneSequence { camera_names: cameras.iter().map(|(n, _)| n.to_string()).collect(), frames }
}

/// Adds a moving box track whose center is `start + i * velocity` at frame i.
pub fn add_moving_box(scene: &mut SceneSequence, track: &str, start: [f64; 3], velocity: [f64; 3], size: [f64; 3]) {
    for (i, f) in scene.frames.iter_mut().enumerate() {
        let c = [0, 1, 2].map(|a| start[a] + velocity[a] * i as f64);
        f.objects.push(ObjectBox {
            track_id: track.to_string(),
            world_from_box: RigidTransform::from_translation(c),
            size,
            is_moving: true,
        });
    }
}

/// Points given in a box's local frame, placed in the world at `frame`.
pub fn box_points(scene: &SceneSequence, track: &str, frame: i64, local: &[[f64; 3]], color: [u8; 3]) -> Vec<WorldPoint> {
    let b = scene.frame(frame).unwrap().object(track).unwrap();
    local
        .iter()
        .map(|&p| {
            let w = b.world_from_box.apply(p);
            WorldPoint { position: w.map(|v| v as f32), color, source_frame: frame }
        })
        .collect()
}

pub fn cloud(frame_index: i64, points: Vec<WorldPoint>) -> ColoredPointCloud {
    ColoredPointCloud { points, frame_index }
}
