//! Synthetic driving scenes for tests and demos.
//!
//! A tiny ray caster over a ground plane and axis-aligned boxes produces
//! LiDAR sweeps and camera images that agree with each other exactly. The
//! ego drives along world +x; one car moves alongside at constant velocity.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use freevs_core::geometry::{camera_rotation_for_yaw, CameraIntrinsics, Vec3};
use freevs_core::{RawPoint, RgbImage, RigidTransform};

use crate::error::{Error, Result};
use crate::imageio::write_rgb;
use crate::ingest::{write_manifest, Manifest, ManifestCamera, ManifestFrame, ManifestObject};
use crate::points::write_raw_points;

pub const FIVE_CAMERAS: [(&str, f64); 5] = [
    ("FRONT", 0.0),
    ("FRONT_LEFT", 45.0),
    ("FRONT_RIGHT", -45.0),
    ("SIDE_LEFT", 90.0),
    ("SIDE_RIGHT", -90.0),
];

const SKY: [u8; 3] = [135, 180, 235];
const LIDAR_MOUNT: Vec3 = [0.0, 0.0, 1.8];
const CAMERA_MOUNT: Vec3 = [1.5, 0.0, 1.6];
const MAX_RANGE: f64 = 80.0;
pub const MOVING_TRACK: &str = "car_0";

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub frames: usize,
    /// (name, yaw in degrees, left positive).
    pub cameras: Vec<(String, f64)>,
    pub width: u32,
    pub height: u32,
    pub focal: f64,
    /// Ego advance per frame along world +x, meters.
    pub ego_speed: f64,
    /// Moving car advance per frame along world +x, meters.
    pub car_speed: f64,
    pub lidar_azimuths: usize,
    pub lidar_rings: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            frames: 6,
            cameras: FIVE_CAMERAS.iter().map(|(n, y)| (n.to_string(), *y)).collect(),
            width: 96,
            height: 64,
            focal: 60.0,
            ego_speed: 1.0,
            car_speed: 1.5,
            lidar_azimuths: 720,
            lidar_rings: 32,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Aabb {
    min: Vec3,
    max: Vec3,
    color: [u8; 3],
}

impl Aabb {
    fn centered(center: Vec3, size: Vec3, color: [u8; 3]) -> Self {
        Self {
            min: [0, 1, 2].map(|i| center[i] - size[i] / 2.0),
            max: [0, 1, 2].map(|i| center[i] + size[i] / 2.0),
            color,
        }
    }

    fn hit(&self, o: Vec3, d: Vec3) -> Option<f64> {
        let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
        for a in 0..3 {
            if d[a].abs() < 1e-12 {
                if o[a] < self.min[a] || o[a] > self.max[a] {
                    return None;
                }
                continue;
            }
            let (mut lo, mut hi) = ((self.min[a] - o[a]) / d[a], (self.max[a] - o[a]) / d[a]);
            if lo > hi {
                std::mem::swap(&mut lo, &mut hi);
            }
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return None;
            }
        }
        (t0 > 1e-9).then_some(t0)
    }
}

struct World {
    boxes: Vec<Aabb>,
}

fn shade(base: [u8; 3], p: Vec3) -> [u8; 3] {
    let stripe = ((p[2] * 2.0).floor() as i64).rem_euclid(2) == 0;
    let grain = ((p[0] * 3.0).floor() + (p[1] * 3.0).floor()) as i64;
    let bump = (grain.rem_euclid(3) * 8) as i32 + if stripe { 20 } else { 0 };
    base.map(|c| (c as i32 + bump - 20).clamp(0, 255) as u8)
}

fn ground_color(p: Vec3) -> [u8; 3] {
    if p[1].abs() < 0.15 && (p[0].floor() as i64).rem_euclid(3) != 0 {
        return [235, 235, 225];
    }
    let checker = ((p[0].floor() + p[1].floor()) as i64).rem_euclid(2) == 0;
    let tone = ((p[0] * 0.5).floor() as i64).rem_euclid(4) as u8 * 12;
    if checker {
        [90 + tone, 95 + tone, 85]
    } else {
        [60 + tone, 70, 55 + tone]
    }
}

impl World {
    fn at_frame(cfg: &SynthConfig, frame: usize) -> Self {
        let mut boxes = vec![
            Aabb { min: [5.0, 8.0, 0.0], max: [15.0, 14.0, 6.0], color: [170, 120, 80] },
            Aabb { min: [20.0, -14.0, 0.0], max: [28.0, -8.0, 8.0], color: [80, 120, 170] },
            Aabb { min: [32.0, 6.0, 0.0], max: [38.0, 10.0, 4.0], color: [150, 150, 60] },
            Aabb { min: [-12.0, -12.0, 0.0], max: [-4.0, -7.0, 5.0], color: [120, 70, 140] },
            Aabb { min: [12.0, -5.0, 0.0], max: [12.4, -4.6, 4.0], color: [200, 200, 200] },
        ];
        let (car, parked) = object_boxes(cfg, frame);
        boxes.push(Aabb::centered(car.0, car.1, [200, 40, 40]));
        boxes.push(Aabb::centered(parked.0, parked.1, [40, 160, 60]));
        World { boxes }
    }

    fn trace(&self, o: Vec3, d: Vec3) -> Option<(f64, [u8; 3])> {
        let mut best: Option<(f64, [u8; 3])> = None;
        if d[2] < -1e-12 {
            let t = -o[2] / d[2];
            let p = [o[0] + t * d[0], o[1] + t * d[1], 0.0];
            best = Some((t, ground_color(p)));
        }
        for b in &self.boxes {
            if let Some(t) = b.hit(o, d) {
                if best.is_none_or(|(bt, _)| t < bt) {
                    let p = [o[0] + t * d[0], o[1] + t * d[1], o[2] + t * d[2]];
                    best = Some((t, shade(b.color, p)));
                }
            }
        }
        best.filter(|(t, _)| *t <= MAX_RANGE)
    }
}

type BoxSpec = (Vec3, Vec3);

/// (moving car, parked car) as (center, size) at `frame`.
fn object_boxes(cfg: &SynthConfig, frame: usize) -> (BoxSpec, BoxSpec) {
    let car = ([6.0 + cfg.car_speed * frame as f64, 3.5, 0.8], [4.0, 2.0, 1.6]);
    let parked = ([18.0, -4.0, 0.8], [4.4, 2.0, 1.6]);
    (car, parked)
}

pub fn ego_pose(cfg: &SynthConfig, frame: usize) -> RigidTransform {
    RigidTransform::from_translation([cfg.ego_speed * frame as f64, 0.0, 0.0])
}

pub fn intrinsics(cfg: &SynthConfig) -> CameraIntrinsics {
    CameraIntrinsics {
        fx: cfg.focal,
        fy: cfg.focal,
        cx: cfg.width as f64 / 2.0,
        cy: cfg.height as f64 / 2.0,
        width: cfg.width,
        height: cfg.height,
    }
}

pub fn ego_from_camera(yaw_deg: f64) -> RigidTransform {
    RigidTransform { rotation: camera_rotation_for_yaw(yaw_deg.to_radians()), translation: CAMERA_MOUNT }
}

fn normalize(v: Vec3) -> Vec3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|c| c / n)
}

fn sweep(cfg: &SynthConfig, world: &World, pose: &RigidTransform) -> Vec<RawPoint> {
    let origin = pose.apply(LIDAR_MOUNT);
    let mut out = Vec::new();
    for ring in 0..cfg.lidar_rings {
        let el = (-24.0 + 28.0 * ring as f64 / (cfg.lidar_rings.max(2) - 1) as f64).to_radians();
        for a in 0..cfg.lidar_azimuths {
            let az = std::f64::consts::TAU * a as f64 / cfg.lidar_azimuths as f64;
            let d_ego = [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()];
            let d = pose.rotate(d_ego);
            if let Some((t, _)) = world.trace(origin, d) {
                let p = [0, 1, 2].map(|i| LIDAR_MOUNT[i] + t * d_ego[i]);
                out.push(RawPoint { position: p.map(|v| v as f32), intensity: 0.5 });
            }
        }
    }
    out
}

fn camera_image(cfg: &SynthConfig, world: &World, pose: &RigidTransform, yaw: f64) -> RgbImage {
    let k = intrinsics(cfg);
    let world_from_camera = pose.compose(&ego_from_camera(yaw));
    let origin = world_from_camera.translation;
    let mut img = RgbImage::new(cfg.width, cfg.height);
    for row in 0..cfg.height {
        for col in 0..cfg.width {
            let ray = k.unproject(col as f64 + 0.5, row as f64 + 0.5, 1.0);
            let d = normalize(world_from_camera.rotate(ray));
            img.put(col, row, world.trace(origin, d).map_or(SKY, |(_, c)| c));
        }
    }
    img
}

/// Writes a scene under `dir` (`scene.json`, `lidar/`, `images/`) and returns the manifest path.
pub fn write_scene(dir: &Path, cfg: &SynthConfig) -> Result<PathBuf> {
    for sub in ["lidar", "images"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let k = intrinsics(cfg);
    let mut frames = Vec::with_capacity(cfg.frames);
    for i in 0..cfg.frames {
        let pose = ego_pose(cfg, i);
        let world = World::at_frame(cfg, i);
        let lidar_rel = format!("lidar/{i:03}.bin");
        write_raw_points(&dir.join(&lidar_rel), &sweep(cfg, &world, &pose))?;
        let mut cameras = BTreeMap::new();
        for (name, yaw) in &cfg.cameras {
            let image_rel = format!("images/{i:03}_{name}.png");
            write_rgb(&dir.join(&image_rel), &camera_image(cfg, &world, &pose, *yaw))?;
            cameras.insert(
                name.clone(),
                ManifestCamera {
                    fx: k.fx,
                    fy: k.fy,
                    cx: k.cx,
                    cy: k.cy,
                    width: k.width,
                    height: k.height,
                    ego_from_camera: ego_from_camera(*yaw).to_row_major(),
                    image: image_rel,
                },
            );
        }
        let (car, parked) = object_boxes(cfg, i);
        let objects = vec![
            ManifestObject {
                track_id: MOVING_TRACK.to_string(),
                world_from_box: RigidTransform::from_translation(car.0).to_row_major(),
                size: car.1,
                is_moving: None,
            },
            ManifestObject {
                track_id: "car_1".to_string(),
                world_from_box: RigidTransform::from_translation(parked.0).to_row_major(),
                size: parked.1,
                is_moving: None,
            },
        ];
        frames.push(ManifestFrame {
            index: i as i64,
            timestamp: i as f64 * 0.1,
            world_from_ego: pose.to_row_major(),
            lidar: lidar_rel,
            cameras,
            objects,
            recorded_world_from_ego: None,
        });
    }
    let manifest = Manifest { camera_names: cfg.cameras.iter().map(|(n, _)| n.clone()).collect(), frames, trajectory_offset: None };
    let path = dir.join("scene.json");
    write_manifest(&path, &manifest)?;
    Ok(path)
}
