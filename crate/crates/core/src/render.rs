//! Point-splat z-buffer rendering of colored clouds into pseudo-images.
//!
//! Per pixel the nearest point wins. Exact depth ties go to the smaller
//! `(source_frame, point index)` key, so the result is a pure function of
//! the cloud and camera regardless of how the raster is partitioned.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::colorize::ColoredPointCloud;
use crate::geometry::{CameraIntrinsics, CameraView, Projector, DEFAULT_Z_NEAR};
use crate::raster::RgbImage;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    /// Each point fills a `(2r+1)²` block centered on its pixel.
    pub splat_radius: u32,
    pub z_near: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self { splat_radius: 0, z_near: DEFAULT_Z_NEAR }
    }
}

/// Sparse rendering of a cloud at one camera. Invalid pixels hold black and `+inf` depth.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoImage {
    pub rgb: RgbImage,
    pub valid: Vec<bool>,
    pub depth: Vec<f32>,
    pub camera: CameraView,
}

impl PseudoImage {
    pub fn empty(camera: CameraView) -> Self {
        let k = camera.intrinsics;
        let n = k.pixel_count();
        Self {
            rgb: RgbImage::new(k.width, k.height),
            valid: vec![false; n],
            depth: vec![f32::INFINITY; n],
            camera,
        }
    }

    pub fn width(&self) -> u32 {
        self.rgb.width
    }

    pub fn height(&self) -> u32 {
        self.rgb.height
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn is_valid(&self, col: u32, row: u32) -> bool {
        self.valid[row as usize * self.rgb.width as usize + col as usize]
    }
}

/// A point after projection: its center pixel, depth and tie key.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Splat {
    pub col: u32,
    pub row: u32,
    pub depth: f32,
    pub source_frame: i64,
    pub index: u32,
    pub color: [u8; 3],
}

impl Splat {
    /// Total order used by the z-test; `Less` wins.
    #[inline]
    pub fn precedence(&self, other: &Splat) -> Ordering {
        self.depth
            .total_cmp(&other.depth)
            .then(self.source_frame.cmp(&other.source_frame))
            .then(self.index.cmp(&other.index))
    }
}

/// Projects every point; drops those behind the near plane or off-raster.
pub fn project_cloud(cloud: &ColoredPointCloud, camera: &CameraView, cfg: &RenderConfig) -> Vec<Splat> {
    let projector = Projector::new(camera, cfg.z_near);
    cloud
        .points
        .iter()
        .enumerate()
        .filter_map(|(index, p)| {
            let (col, row, depth) = projector.project_world(p.position)?;
            Some(Splat {
                col,
                row,
                depth: depth as f32,
                source_frame: p.source_frame,
                index: index as u32,
                color: p.color,
            })
        })
        .collect()
}

/// Raster rows `rows` of a render: winners per pixel, row-major within the band.
#[derive(Clone, Debug, PartialEq)]
pub struct RowBand {
    pub rows: Range<u32>,
    pub winners: Vec<Option<Splat>>,
}

pub fn rasterize_rows(splats: &[Splat], k: &CameraIntrinsics, splat_radius: u32, rows: Range<u32>) -> RowBand {
    let width = k.width as usize;
    let band_height = rows.end.saturating_sub(rows.start) as usize;
    let mut winners: Vec<Option<Splat>> = vec![None; width * band_height];
    let r = splat_radius;
    for s in splats {
        let row_lo = s.row.saturating_sub(r).max(rows.start);
        let row_hi = (s.row.saturating_add(r)).min(rows.end.saturating_sub(1));
        if rows.is_empty() || row_lo > row_hi {
            continue;
        }
        let col_lo = s.col.saturating_sub(r);
        let col_hi = s.col.saturating_add(r).min(k.width - 1);
        for row in row_lo..=row_hi {
            let base = (row - rows.start) as usize * width;
            for col in col_lo..=col_hi {
                let slot = &mut winners[base + col as usize];
                match slot {
                    Some(cur) if cur.precedence(s) != Ordering::Greater => {}
                    _ => *slot = Some(*s),
                }
            }
        }
    }
    RowBand { rows, winners }
}

/// Stitches bands (any order, must tile the raster) into a pseudo-image.
pub fn assemble(camera: &CameraView, bands: &[RowBand]) -> PseudoImage {
    let mut out = PseudoImage::empty(camera.clone());
    let width = out.rgb.width as usize;
    for band in bands {
        for (i, w) in band.winners.iter().enumerate() {
            if let Some(s) = w {
                let row = band.rows.start as usize + i / width;
                let col = i % width;
                let pix = row * width + col;
                out.valid[pix] = true;
                out.depth[pix] = s.depth;
                out.rgb.data[pix * 3..pix * 3 + 3].copy_from_slice(&s.color);
            }
        }
    }
    out
}

/// Renders `cloud` as seen by `camera`.
pub fn render_pseudo_image(cloud: &ColoredPointCloud, camera: &CameraView, cfg: &RenderConfig) -> PseudoImage {
    let splats = project_cloud(cloud, camera, cfg);
    let k = &camera.intrinsics;
    let band = rasterize_rows(&splats, k, cfg.splat_radius, 0..k.height);
    assemble(camera, &[band])
}

/// Depth in whole centimeters for 16-bit export; invalid pixels map to 0.
pub fn depth_to_centimeters(depth: f32, valid: bool) -> u16 {
    if !valid {
        return 0;
    }
    let cm = libm::round(depth as f64 * 100.0);
    if cm >= 65535.0 {
        65535
    } else {
        cm.max(0.0) as u16
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{camera_rotation_for_yaw, RigidTransform, WorldPoint};
    use alloc::string::ToString;

    /// Camera at the world origin looking down world +z with camera axes equal to world axes.
    fn axis_camera(k: CameraIntrinsics) -> CameraView {
        CameraView {
            name: "FRONT".to_string(),
            intrinsics: k,
            ego_from_camera: RigidTransform::IDENTITY,
            world_from_ego: RigidTransform::IDENTITY,
        }
    }

    fn pt(p: [f32; 3], color: [u8; 3], frame: i64) -> WorldPoint {
        WorldPoint { position: p, color, source_frame: frame }
    }

    fn k640() -> CameraIntrinsics {
        CameraIntrinsics { fx: 100.0, fy: 100.0, cx: 320.0, cy: 240.0, width: 640, height: 480 }
    }

    #[test]
    fn empty_cloud_renders_nothing() {
        let img = render_pseudo_image(&ColoredPointCloud::new(0), &axis_camera(k640()), &RenderConfig::default());
        assert_eq!(img.valid_count(), 0);
        assert!(img.rgb.data.iter().all(|&b| b == 0));
        assert!(img.depth.iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn optical_axis_point() {
        let cloud = ColoredPointCloud { points: vec![pt([0.0, 0.0, 5.0], [9, 9, 9], 0)], frame_index: 0 };
        let img = render_pseudo_image(&cloud, &axis_camera(k640()), &RenderConfig::default());
        assert_eq!(img.valid_count(), 1);
        assert!(img.is_valid(320, 240));
        assert_eq!(img.rgb.get(320, 240), [9, 9, 9]);
        assert_eq!(img.depth[240 * 640 + 320], 5.0);
    }

    #[test]
    fn nearest_point_wins() {
        let cloud = ColoredPointCloud {
            points: vec![pt([0.0, 0.0, 10.0], [1, 1, 1], 0), pt([0.0, 0.0, 5.0], [2, 2, 2], 0)],
            frame_index: 0,
        };
        let img = render_pseudo_image(&cloud, &axis_camera(k640()), &RenderConfig::default());
        assert_eq!(img.rgb.get(320, 240), [2, 2, 2]);
    }

    #[test]
    fn ties_break_by_frame_then_index() {
        let points = vec![
            pt([0.0, 0.0, 5.0], [3, 3, 3], 2),
            pt([0.0, 0.0, 5.0], [1, 1, 1], 1),
            pt([0.0, 0.0, 5.0], [4, 4, 4], 1),
        ];
        let cloud = ColoredPointCloud { points, frame_index: 0 };
        let img = render_pseudo_image(&cloud, &axis_camera(k640()), &RenderConfig::default());
        assert_eq!(img.rgb.get(320, 240), [1, 1, 1]);
    }

    #[test]
    fn splat_block_is_clipped() {
        let k = CameraIntrinsics { fx: 10.0, fy: 10.0, cx: 0.5, cy: 0.5, width: 8, height: 8 };
        let cloud = ColoredPointCloud { points: vec![pt([0.0, 0.0, 5.0], [5, 6, 7], 0)], frame_index: 0 };
        let cfg = RenderConfig { splat_radius: 2, ..Default::default() };
        let img = render_pseudo_image(&cloud, &axis_camera(k), &cfg);
        // center (0, 0): block covers cols/rows 0..=2
        assert_eq!(img.valid_count(), 9);
        assert!(img.is_valid(2, 2) && !img.is_valid(3, 0));
    }

    #[test]
    fn behind_and_off_raster_skipped() {
        let cloud = ColoredPointCloud {
            points: vec![pt([0.0, 0.0, -5.0], [1, 1, 1], 0), pt([100.0, 0.0, 5.0], [1, 1, 1], 0)],
            frame_index: 0,
        };
        let img = render_pseudo_image(&cloud, &axis_camera(k640()), &RenderConfig::default());
        assert_eq!(img.valid_count(), 0);
    }

    #[test]
    fn band_partition_matches_single_pass() {
        let k = CameraIntrinsics { fx: 30.0, fy: 30.0, cx: 16.0, cy: 12.0, width: 32, height: 24 };
        let mut points = Vec::new();
        for i in 0..400u32 {
            let x = ((i * 37) % 29) as f32 * 0.2 - 2.8;
            let y = ((i * 53) % 23) as f32 * 0.2 - 2.2;
            let z = 4.0 + ((i * 11) % 7) as f32;
            points.push(pt([x, y, z], [(i % 251) as u8, 0, 0], (i % 3) as i64));
        }
        let cloud = ColoredPointCloud { points, frame_index: 0 };
        let cam = axis_camera(k);
        let cfg = RenderConfig { splat_radius: 1, ..Default::default() };
        let whole = render_pseudo_image(&cloud, &cam, &cfg);
        let splats = project_cloud(&cloud, &cam, &cfg);
        let bands: Vec<_> = [0..5, 5..6, 6..24].into_iter().rev().map(|r| rasterize_rows(&splats, &k, 1, r)).collect();
        assert_eq!(assemble(&cam, &bands), whole);
    }

    #[test]
    fn ego_camera_convention() {
        // ego at origin, camera forward along +x; point 10 m ahead is on the optical axis
        let cam = CameraView {
            name: "FRONT".to_string(),
            intrinsics: k640(),
            ego_from_camera: RigidTransform { rotation: camera_rotation_for_yaw(0.0), translation: [0.0; 3] },
            world_from_ego: RigidTransform::IDENTITY,
        };
        let cloud = ColoredPointCloud { points: vec![pt([10.0, 0.0, 0.0], [1, 2, 3], 0)], frame_index: 0 };
        let img = render_pseudo_image(&cloud, &cam, &RenderConfig::default());
        assert!(img.is_valid(320, 240));
    }

    #[test]
    fn depth_encoding() {
        assert_eq!(depth_to_centimeters(5.0, true), 500);
        assert_eq!(depth_to_centimeters(1e6, true), 65535);
        assert_eq!(depth_to_centimeters(f32::INFINITY, false), 0);
        assert_eq!(depth_to_centimeters(1.234, true), 123);
    }
}
