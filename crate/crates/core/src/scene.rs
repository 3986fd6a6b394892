//! Recorded driving sequences: ego poses, LiDAR sweeps, camera rigs and object tracks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::geometry::{distance, CameraView, RigidTransform, Vec3};

/// Box-center displacement between consecutive frames above which a track counts as moving.
pub const MOVING_THRESHOLD_M: f64 = 0.05;

/// A raw LiDAR return in the ego frame of its own sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawPoint {
    pub position: [f32; 3],
    pub intensity: f32,
}

impl RawPoint {
    pub fn position_f64(&self) -> Vec3 {
        [self.position[0] as f64, self.position[1] as f64, self.position[2] as f64]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameCamera {
    pub view: CameraView,
    /// Image reference, resolved by the IO layer.
    pub image: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectBox {
    pub track_id: String,
    /// Box center pose; heading is the rotation about the vertical axis.
    pub world_from_box: RigidTransform,
    /// (length, width, height) in meters.
    pub size: Vec3,
    pub is_moving: bool,
}

impl ObjectBox {
    /// Containment in box-local coordinates with every half-extent grown by `dilation`.
    pub fn contains(&self, world: Vec3, dilation: f64) -> bool {
        let local = self.world_from_box.inverse().apply(world);
        (0..3).all(|i| local[i].abs() <= 0.5 * self.size[i] + dilation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub index: i64,
    pub timestamp: f64,
    pub world_from_ego: RigidTransform,
    pub lidar: Vec<RawPoint>,
    /// One entry per scene camera, in `SceneSequence::camera_names` order.
    pub cameras: Vec<FrameCamera>,
    pub objects: Vec<ObjectBox>,
}

impl Frame {
    pub fn camera(&self, name: &str) -> Option<&FrameCamera> {
        self.cameras.iter().find(|c| c.view.name == name)
    }

    pub fn object(&self, track_id: &str) -> Option<&ObjectBox> {
        self.objects.iter().find(|o| o.track_id == track_id)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSequence {
    pub camera_names: Vec<String>,
    pub frames: Vec<Frame>,
}

impl SceneSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame(&self, index: i64) -> Option<&Frame> {
        usize::try_from(index).ok().and_then(|i| self.frames.get(i))
    }

    pub fn contains_frame(&self, index: i64) -> bool {
        index >= 0 && (index as usize) < self.frames.len()
    }

    /// Every `(frame, camera)` pair in frame-major, camera-name order.
    pub fn views(&self) -> Vec<(i64, String)> {
        self.frames
            .iter()
            .flat_map(|f| self.camera_names.iter().map(move |c| (f.index, c.clone())))
            .collect()
    }

    /// Checks every scene invariant. Frame indices must run 0, 1, 2, … in order.
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.frames.is_empty() {
            return Err(ValidationError::new("scene has no frames"));
        }
        if self.camera_names.is_empty() {
            return Err(ValidationError::new("scene has no cameras"));
        }
        for (i, name) in self.camera_names.iter().enumerate() {
            if self.camera_names[..i].contains(name) {
                return Err(ValidationError::new(format!("duplicate camera name {name:?}")));
            }
        }
        for (pos, frame) in self.frames.iter().enumerate() {
            let at = |msg: String| ValidationError::at_frame(pos as i64, msg);
            if frame.index != pos as i64 {
                return Err(at(format!("index: expected {pos}, found {}", frame.index)));
            }
            if !frame.timestamp.is_finite() {
                return Err(at("timestamp: not finite".into()));
            }
            if pos > 0 && frame.timestamp <= self.frames[pos - 1].timestamp {
                return Err(at("timestamp: not strictly increasing".into()));
            }
            frame
                .world_from_ego
                .validate()
                .map_err(|e| at(format!("world_from_ego: {}", e.message)))?;
            if let Some(i) = frame.lidar.iter().position(|p| !p.position.iter().all(|v| v.is_finite())) {
                return Err(at(format!("lidar: point {i} has non-finite coordinates")));
            }
            if frame.cameras.len() != self.camera_names.len() {
                return Err(at(format!(
                    "cameras: expected {} entries, found {}",
                    self.camera_names.len(),
                    frame.cameras.len()
                )));
            }
            for (name, cam) in self.camera_names.iter().zip(&frame.cameras) {
                if &cam.view.name != name {
                    return Err(at(format!("cameras: missing entry for {name:?}")));
                }
                if cam.view.world_from_ego != frame.world_from_ego {
                    return Err(at(format!("cameras.{name}: ego pose differs from frame pose")));
                }
                cam.view
                    .validate()
                    .map_err(|e| at(format!("cameras.{name}: {}", e.message)))?;
            }
            for obj in &frame.objects {
                if !obj.size.iter().all(|&s| s > 0.0 && s.is_finite()) {
                    return Err(at(format!("objects.{}: size must be positive", obj.track_id)));
                }
                obj.world_from_box
                    .validate()
                    .map_err(|e| at(format!("objects.{}: {}", obj.track_id, e.message)))?;
            }
        }
        Ok(())
    }

    /// Replaces the ego pose of every frame, keeping camera views in sync.
    pub fn set_ego_pose(&mut self, frame_pos: usize, world_from_ego: RigidTransform) {
        let frame = &mut self.frames[frame_pos];
        frame.world_from_ego = world_from_ego;
        for cam in &mut frame.cameras {
            cam.view.world_from_ego = world_from_ego;
        }
    }

    /// Track ids whose box center moves more than [`MOVING_THRESHOLD_M`] between
    /// consecutive frames in which the track appears.
    pub fn moving_tracks(&self) -> BTreeMap<String, bool> {
        let mut last_center: BTreeMap<&str, (i64, Vec3)> = BTreeMap::new();
        let mut moving: BTreeMap<String, bool> = BTreeMap::new();
        for frame in &self.frames {
            for obj in &frame.objects {
                let center = obj.world_from_box.translation;
                let flag = moving.entry(obj.track_id.clone()).or_insert(false);
                if let Some((prev_index, prev)) = last_center.get(obj.track_id.as_str()) {
                    if *prev_index + 1 == frame.index && distance(*prev, center) > MOVING_THRESHOLD_M {
                        *flag = true;
                    }
                }
                last_center.insert(obj.track_id.as_str(), (frame.index, center));
            }
        }
        moving
    }

    /// Overwrites every box's `is_moving` from [`SceneSequence::moving_tracks`].
    pub fn derive_motion_flags(&mut self) {
        let moving = self.moving_tracks();
        for frame in &mut self.frames {
            for obj in &mut frame.objects {
                obj.is_moving = moving.get(&obj.track_id).copied().unwrap_or(false);
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::{camera_rotation_for_yaw, CameraIntrinsics};
    use alloc::string::ToString;
    use alloc::vec;

    pub(crate) fn tiny_scene(frames: usize) -> SceneSequence {
        let k = CameraIntrinsics { fx: 20.0, fy: 20.0, cx: 8.0, cy: 6.0, width: 16, height: 12 };
        let frames = (0..frames)
            .map(|i| {
                let pose = RigidTransform::from_translation([i as f64, 0.0, 0.0]);
                Frame {
                    index: i as i64,
                    timestamp: i as f64 * 0.1,
                    world_from_ego: pose,
                    lidar: vec![],
                    cameras: vec![FrameCamera {
                        view: CameraView {
                            name: "FRONT".to_string(),
                            intrinsics: k,
                            ego_from_camera: RigidTransform {
                                rotation: camera_rotation_for_yaw(0.0),
                                translation: [0.0, 0.0, 1.5],
                            },
                            world_from_ego: pose,
                        },
                        image: "front.png".to_string(),
                    }],
                    objects: vec![],
                }
            })
            .collect();
        SceneSequence { camera_names: vec!["FRONT".to_string()], frames }
    }

    #[test]
    fn valid_scene_passes() {
        assert_eq!(tiny_scene(3).validate(), Ok(()));
    }

    #[test]
    fn empty_scene_rejected() {
        let mut s = tiny_scene(1);
        s.frames.clear();
        assert_eq!(s.validate().unwrap_err().message, "scene has no frames");
    }

    #[test]
    fn non_increasing_timestamp_cites_frame() {
        let mut s = tiny_scene(3);
        s.frames[1].timestamp = 0.0;
        let err = s.validate().unwrap_err();
        assert_eq!(err.frame, Some(1));
        assert!(err.message.contains("timestamp"));
    }

    #[test]
    fn missing_camera_rejected() {
        let mut s = tiny_scene(2);
        s.frames[1].cameras.clear();
        assert_eq!(s.validate().unwrap_err().frame, Some(1));
    }

    #[test]
    fn non_finite_lidar_rejected() {
        let mut s = tiny_scene(2);
        s.frames[0].lidar.push(RawPoint { position: [f32::NAN, 0.0, 0.0], intensity: 0.0 });
        assert!(s.validate().unwrap_err().message.contains("lidar"));
    }

    #[test]
    fn motion_threshold() {
        let mut s = tiny_scene(3);
        for (i, f) in s.frames.iter_mut().enumerate() {
            f.objects.push(ObjectBox {
                track_id: "car".into(),
                world_from_box: RigidTransform::from_translation([0.06 * i as f64, 0.0, 0.0]),
                size: [4.0, 2.0, 1.5],
                is_moving: false,
            });
            f.objects.push(ObjectBox {
                track_id: "parked".into(),
                world_from_box: RigidTransform::from_translation([5.0 + 0.04 * i as f64, 0.0, 0.0]),
                size: [4.0, 2.0, 1.5],
                is_moving: true,
            });
        }
        s.derive_motion_flags();
        assert!(s.frames.iter().all(|f| f.object("car").unwrap().is_moving));
        assert!(s.frames.iter().all(|f| !f.object("parked").unwrap().is_moving));
    }

    #[test]
    fn box_containment_uses_local_frame_and_dilation() {
        let b = ObjectBox {
            track_id: "t".into(),
            world_from_box: RigidTransform::from_yaw(core::f64::consts::FRAC_PI_2, [10.0, 0.0, 0.0]),
            size: [4.0, 2.0, 2.0],
            is_moving: true,
        };
        // long axis is world y after the yaw
        assert!(b.contains([10.0, 1.9, 0.0], 0.0));
        assert!(!b.contains([11.9, 0.0, 0.0], 0.0));
        assert!(b.contains([11.05, 0.0, 0.0], 0.1));
    }
}
