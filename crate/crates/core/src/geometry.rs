//! Rigid poses, pinhole cameras and the projection primitive.
//!
//! Frames used throughout the crate:
//!
//! * world: fixed scene frame, meters.
//! * ego: vehicle body, x forward, y left, z up.
//! * camera: x right, y down, z forward.
//!
//! A transform named `a_from_b` maps coordinates expressed in frame `b`
//! into frame `a`.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Points at or closer than this depth never project.
pub const DEFAULT_Z_NEAR: f64 = 0.1;

const ORTHO_TOLERANCE: f64 = 1e-6;

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn norm(a: Vec3) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn distance(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

/// Rotation + translation. `apply(p) = rotation * p + translation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl RigidTransform {
    pub const IDENTITY: Self = Self {
        rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        translation: [0.0; 3],
    };

    pub fn from_translation(t: Vec3) -> Self {
        Self {
            rotation: Self::IDENTITY.rotation,
            translation: t,
        }
    }

    /// Rotation by `yaw` radians about +z, followed by `translation`.
    pub fn from_yaw(yaw: f64, translation: Vec3) -> Self {
        let (s, c) = (libm::sin(yaw), libm::cos(yaw));
        Self {
            rotation: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
            translation,
        }
    }

    /// Builds a transform from a row-major homogeneous 4×4 matrix.
    /// The bottom row is ignored; call [`RigidTransform::validate`] to check the rotation.
    pub fn from_row_major(m: &[f64; 16]) -> Self {
        Self {
            rotation: [
                [m[0], m[1], m[2]],
                [m[4], m[5], m[6]],
                [m[8], m[9], m[10]],
            ],
            translation: [m[3], m[7], m[11]],
        }
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[0][0], r[0][1], r[0][2], t[0], //
            r[1][0], r[1][1], r[1][2], t[1], //
            r[2][0], r[2][1], r[2][2], t[2], //
            0.0, 0.0, 0.0, 1.0,
        ]
    }

    /// Checks RᵀR = I and det R = +1 within 1e-6, and that every entry is finite.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let r = &self.rotation;
        let finite = r.iter().flatten().chain(self.translation.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(ValidationError::new("transform has non-finite entries"));
        }
        for i in 0..3 {
            for j in 0..3 {
                let rtr = r[0][i] * r[0][j] + r[1][i] * r[1][j] + r[2][i] * r[2][j];
                let expected = if i == j { 1.0 } else { 0.0 };
                if (rtr - expected).abs() > ORTHO_TOLERANCE {
                    return Err(ValidationError::new("rotation is not orthonormal"));
                }
            }
        }
        if (det3(r) - 1.0).abs() > ORTHO_TOLERANCE {
            return Err(ValidationError::new("rotation determinant is not +1"));
        }
        Ok(())
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + t[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + t[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + t[2],
        ]
    }

    pub fn rotate(&self, v: Vec3) -> Vec3 {
        let r = &self.rotation;
        [
            r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
            r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
            r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
        ]
    }

    /// `self ∘ other`: maps x to `self(other(x))`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        let a = &self.rotation;
        let b = &other.rotation;
        let mut rotation = [[0.0; 3]; 3];
        for (i, row) in rotation.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        RigidTransform {
            rotation,
            translation: self.apply(other.translation),
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let r = &self.rotation;
        let rt = [
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ];
        let inv = RigidTransform {
            rotation: rt,
            translation: [0.0; 3],
        };
        let t = inv.rotate(self.translation);
        RigidTransform {
            rotation: rt,
            translation: [-t[0], -t[1], -t[2]],
        }
    }

    pub fn transform_points(&self, pts: &[Vec3]) -> Vec<Vec3> {
        pts.iter().map(|&p| self.apply(p)).collect()
    }
}

fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

/// Result of pushing a camera-frame point through the pinhole model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Projection {
    InFront { u: f64, v: f64, depth: f64 },
    Behind,
}

impl Projection {
    /// Integer pixel `(col, row)` covering the continuous coordinate, if it lies in the raster.
    pub fn pixel(&self, k: &CameraIntrinsics) -> Option<(u32, u32)> {
        match *self {
            Projection::InFront { u, v, .. } => k.pixel_of(u, v),
            Projection::Behind => None,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let finite = [self.fx, self.fy, self.cx, self.cy].iter().all(|v| v.is_finite());
        if !finite || self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(ValidationError::new("focal lengths must be positive and finite"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(ValidationError::new("raster size must be at least 1×1"));
        }
        Ok(())
    }

    pub fn project(&self, p_cam: Vec3, z_near: f64) -> Projection {
        let [x, y, z] = p_cam;
        // NaN depth lands here too
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(z > z_near) {
            return Projection::Behind;
        }
        Projection::InFront {
            u: self.fx * x / z + self.cx,
            v: self.fy * y / z + self.cy,
            depth: z,
        }
    }

    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> Vec3 {
        [
            (u - self.cx) * depth / self.fx,
            (v - self.cy) * depth / self.fy,
            depth,
        ]
    }

    /// Pixel (i, j) covers [i, i+1) × [j, j+1).
    pub fn pixel_of(&self, u: f64, v: f64) -> Option<(u32, u32)> {
        if !(u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64) {
            return None;
        }
        let (col, row) = (libm::floor(u) as u32, libm::floor(v) as u32);
        // guards against u just below width rounding up in the cast
        (col < self.width && row < self.height).then_some((col, row))
    }

    /// Intrinsics for the same camera resampled to `width × height`.
    pub fn rescaled(&self, width: u32, height: u32) -> CameraIntrinsics {
        let sx = width as f64 / self.width as f64;
        let sy = height as f64 / self.height as f64;
        CameraIntrinsics {
            fx: self.fx * sx,
            fy: self.fy * sy,
            cx: self.cx * sx,
            cy: self.cy * sy,
            width,
            height,
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// One camera at one frame: intrinsics, rig extrinsics and the ego pose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraView {
    pub name: String,
    pub intrinsics: CameraIntrinsics,
    pub ego_from_camera: RigidTransform,
    pub world_from_ego: RigidTransform,
}

impl CameraView {
    pub fn world_from_camera(&self) -> RigidTransform {
        self.world_from_ego.compose(&self.ego_from_camera)
    }

    pub fn camera_from_world(&self) -> RigidTransform {
        self.world_from_camera().inverse()
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        self.intrinsics.validate()?;
        self.ego_from_camera.validate()?;
        self.world_from_ego.validate()?;
        self.world_from_camera().validate()
    }
}

/// Pixel-projector for one camera with the world→camera transform cached.
#[derive(Clone, Copy, Debug)]
pub struct Projector {
    pub camera_from_world: RigidTransform,
    pub intrinsics: CameraIntrinsics,
    pub z_near: f64,
}

impl Projector {
    pub fn new(view: &CameraView, z_near: f64) -> Self {
        Self {
            camera_from_world: view.camera_from_world(),
            intrinsics: view.intrinsics,
            z_near,
        }
    }

    /// Projects a stored world position; returns `(col, row, depth)` if it hits the raster.
    pub fn project_world(&self, position: [f32; 3]) -> Option<(u32, u32, f64)> {
        let p = [position[0] as f64, position[1] as f64, position[2] as f64];
        match self.intrinsics.project(self.camera_from_world.apply(p), self.z_near) {
            Projection::InFront { u, v, depth } => {
                let (col, row) = self.intrinsics.pixel_of(u, v)?;
                Some((col, row, depth))
            }
            Projection::Behind => None,
        }
    }
}

/// A colored point in the world frame, tagged with the frame whose sweep produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldPoint {
    pub position: [f32; 3],
    pub color: [u8; 3],
    pub source_frame: i64,
}

impl WorldPoint {
    pub fn position_f64(&self) -> Vec3 {
        [self.position[0] as f64, self.position[1] as f64, self.position[2] as f64]
    }
}

/// Camera axes (x right, y down, z forward) expressed in the ego frame (x forward, y left, z up),
/// rotated by `yaw` about the ego z axis.
pub fn camera_rotation_for_yaw(yaw: f64) -> Mat3 {
    let base = RigidTransform {
        rotation: [[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]],
        translation: [0.0; 3],
    };
    RigidTransform::from_yaw(yaw, [0.0; 3]).compose(&base).rotation
}
