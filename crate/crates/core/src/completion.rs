//! Densifying sparse pseudo-images.
//!
//! The in-tree backend is pull-push hole filling. Other backends (e.g. a
//! generative model behind a subprocess) register under their own id.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::raster::RgbImage;
use crate::render::PseudoImage;

pub const PULL_PUSH_ID: &str = "pull_push";

/// Integer color sum and sample weight of one pyramid cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Cell {
    sum: [u64; 3],
    weight: u64,
}

struct Level {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl Level {
    fn at(&self, x: usize, y: usize) -> Cell {
        self.cells[y * self.width + x]
    }
}

/// Fills every invalid pixel; valid pixels are copied unchanged.
///
/// Pull: each coarser level sums the colors and weights of its 2×2 children
/// (only valid pixels carry weight). Push: walking back down, an empty cell
/// takes its parent's sum and weight. A filled pixel's color is the exact
/// rational mean, rounded half-up once at the end. An image with no valid
/// pixel comes back black.
pub fn pull_push_complete(p: &PseudoImage) -> RgbImage {
    let (w, h) = (p.width() as usize, p.height() as usize);
    if p.valid.iter().all(|&v| v) {
        return p.rgb.clone();
    }

    let mut base = Level { width: w, height: h, cells: vec![Cell::default(); w * h] };
    for (i, cell) in base.cells.iter_mut().enumerate() {
        if p.valid[i] {
            let c = &p.rgb.data[i * 3..i * 3 + 3];
            *cell = Cell { sum: [c[0] as u64, c[1] as u64, c[2] as u64], weight: 1 };
        }
    }

    let mut levels = vec![base];
    while let Some(top) = levels.last().filter(|l| l.width > 1 || l.height > 1) {
        let (pw, ph) = (top.width.div_ceil(2), top.height.div_ceil(2));
        let mut cells = vec![Cell::default(); pw * ph];
        for y in 0..top.height {
            for x in 0..top.width {
                let child = top.at(x, y);
                let parent = &mut cells[(y / 2) * pw + x / 2];
                for c in 0..3 {
                    parent.sum[c] += child.sum[c];
                }
                parent.weight += child.weight;
            }
        }
        levels.push(Level { width: pw, height: ph, cells });
    }

    for k in (0..levels.len() - 1).rev() {
        let (lower, upper) = levels.split_at_mut(k + 1);
        let (fine, coarse) = (&mut lower[k], &upper[0]);
        for y in 0..fine.height {
            for x in 0..fine.width {
                let i = y * fine.width + x;
                if fine.cells[i].weight == 0 {
                    fine.cells[i] = coarse.at(x / 2, y / 2);
                }
            }
        }
    }

    let mut out = p.rgb.clone();
    for (i, cell) in levels[0].cells.iter().enumerate() {
        if p.valid[i] || cell.weight == 0 {
            continue;
        }
        let n = cell.weight;
        for c in 0..3 {
            out.data[i * 3 + c] = ((2 * cell.sum[c] + n) / (2 * n)) as u8;
        }
    }
    out
}

pub trait CompletionBackend: Send + Sync {
    fn id(&self) -> &str;

    /// One dense image per input, same dimensions, same order.
    fn complete(&self, pseudos: &[PseudoImage]) -> Result<Vec<RgbImage>>;

    /// Whether frames may be completed concurrently by one instance.
    fn concurrent_safe(&self) -> bool {
        false
    }

    /// In-tree backends promise bit-exact pass-through of valid pixels; the
    /// harness verifies it. External backends are exempt.
    fn preserves_valid_pixels(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PullPush;

impl CompletionBackend for PullPush {
    fn id(&self) -> &str {
        PULL_PUSH_ID
    }

    fn complete(&self, pseudos: &[PseudoImage]) -> Result<Vec<RgbImage>> {
        Ok(pseudos.iter().map(pull_push_complete).collect())
    }

    fn concurrent_safe(&self) -> bool {
        true
    }

    fn preserves_valid_pixels(&self) -> bool {
        true
    }
}

pub struct BackendRegistry {
    backends: BTreeMap<String, Box<dyn CompletionBackend>>,
}

impl Default for BackendRegistry {
    /// Registry holding only the pull-push baseline.
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(PullPush));
        r
    }
}

impl BackendRegistry {
    pub fn empty() -> Self {
        Self { backends: BTreeMap::new() }
    }

    /// Replaces any backend already registered under the same id.
    pub fn register(&mut self, backend: Box<dyn CompletionBackend>) {
        self.backends.insert(backend.id().to_string(), backend);
    }

    pub fn ids(&self) -> Vec<&str> {
        self.backends.keys().map(String::as_str).collect()
    }

    pub fn get(&self, id: &str) -> Result<&dyn CompletionBackend> {
        self.backends.get(id).map(|b| b.as_ref()).ok_or_else(|| {
            Error::Config(format!("unknown completion backend {id:?}; registered: {}", self.ids().join(", ")))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Completed {
    pub images: Vec<RgbImage>,
    /// False when the backend is external and valid-pixel preservation was not enforced.
    pub valid_pixels_checked: bool,
}

/// Runs backend `id` over a frame sequence and checks the output contract.
pub fn complete_sequence(registry: &BackendRegistry, id: &str, pseudos: &[PseudoImage]) -> Result<Completed> {
    let backend = registry.get(id)?;
    let images = backend.complete(pseudos)?;
    check_outputs(backend, pseudos, &images)?;
    Ok(Completed { images, valid_pixels_checked: backend.preserves_valid_pixels() })
}

/// Shape contract for every backend, plus valid-pixel preservation for in-tree ones.
pub fn check_outputs(backend: &dyn CompletionBackend, pseudos: &[PseudoImage], images: &[RgbImage]) -> Result<()> {
    if images.len() != pseudos.len() {
        return Err(Error::Backend(format!(
            "{} returned {} images for {} frames",
            backend.id(),
            images.len(),
            pseudos.len()
        )));
    }
    for (i, (p, img)) in pseudos.iter().zip(images).enumerate() {
        if !img.same_shape(&p.rgb) {
            return Err(Error::Backend(format!(
                "{} frame {i}: output is {}×{}, expected {}×{}",
                backend.id(),
                img.width,
                img.height,
                p.width(),
                p.height()
            )));
        }
        if backend.preserves_valid_pixels() {
            let broken = p.valid.iter().enumerate().any(|(j, &v)| v && img.data[j * 3..j * 3 + 3] != p.rgb.data[j * 3..j * 3 + 3]);
            if broken {
                return Err(Error::Backend(format!("{} frame {i}: valid pixels were modified", backend.id())));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CameraIntrinsics, CameraView, RigidTransform};

    fn pseudo(w: u32, h: u32) -> PseudoImage {
        PseudoImage::empty(CameraView {
            name: "C".to_string(),
            intrinsics: CameraIntrinsics { fx: 1.0, fy: 1.0, cx: 0.0, cy: 0.0, width: w, height: h },
            ego_from_camera: RigidTransform::IDENTITY,
            world_from_ego: RigidTransform::IDENTITY,
        })
    }

    fn set(p: &mut PseudoImage, col: u32, row: u32, c: [u8; 3]) {
        p.rgb.put(col, row, c);
        let i = (row * p.width() + col) as usize;
        p.valid[i] = true;
        p.depth[i] = 1.0;
    }

    #[test]
    fn fully_valid_passes_through() {
        let mut p = pseudo(5, 3);
        for r in 0..3 {
            for c in 0..5 {
                set(&mut p, c, r, [c as u8 * 40, r as u8 * 70, 9]);
            }
        }
        let out = pull_push_complete(&p);
        assert_eq!(out, p.rgb);
    }

    #[test]
    fn single_valid_pixel_floods() {
        let mut p = pseudo(7, 5);
        set(&mut p, 3, 4, [12, 34, 56]);
        let out = pull_push_complete(&p);
        assert!(out.data.chunks(3).all(|px| px == [12, 34, 56]));
    }

    #[test]
    fn left_half_red_fills_right_half() {
        let mut p = pseudo(8, 8);
        for r in 0..8 {
            for c in 0..4 {
                set(&mut p, c, r, [255, 0, 0]);
            }
        }
        let out = pull_push_complete(&p);
        assert!(out.data.chunks(3).all(|px| px == [255, 0, 0]));
    }

    #[test]
    fn empty_image_is_black() {
        assert!(pull_push_complete(&pseudo(3, 3)).data.iter().all(|&b| b == 0));
    }

    #[test]
    fn hole_takes_parent_mean() {
        // 2×1: one valid pixel of value 10 and one of 21 beside a hole row
        let mut p = pseudo(2, 2);
        set(&mut p, 0, 0, [10, 10, 10]);
        set(&mut p, 1, 0, [21, 21, 21]);
        let out = pull_push_complete(&p);
        // (10 + 21) / 2 = 15.5 rounds half-up to 16
        assert_eq!(out.get(0, 1), [16, 16, 16]);
        assert_eq!(out.get(1, 1), [16, 16, 16]);
    }

    #[test]
    fn registry_reports_unknown_ids() {
        let reg = BackendRegistry::default();
        let err = complete_sequence(&reg, "svd", &[pseudo(2, 2)]).unwrap_err();
        match err {
            Error::Config(m) => assert!(m.contains("pull_push")),
            e => panic!("unexpected {e:?}"),
        }
        let out = complete_sequence(&reg, PULL_PUSH_ID, &[pseudo(2, 2), pseudo(2, 2), pseudo(2, 2)]).unwrap();
        assert_eq!(out.images.len(), 3);
        assert!(out.valid_pixels_checked);
    }

    struct Vandal;
    impl CompletionBackend for Vandal {
        fn id(&self) -> &str {
            "vandal"
        }
        fn complete(&self, pseudos: &[PseudoImage]) -> Result<Vec<RgbImage>> {
            Ok(pseudos.iter().map(|p| RgbImage::filled(p.width(), p.height(), [1, 1, 1])).collect())
        }
        fn preserves_valid_pixels(&self) -> bool {
            true
        }
    }

    #[test]
    fn harness_catches_modified_valid_pixels() {
        let mut reg = BackendRegistry::empty();
        reg.register(Box::new(Vandal));
        let mut p = pseudo(2, 2);
        set(&mut p, 0, 0, [9, 9, 9]);
        assert!(matches!(complete_sequence(&reg, "vandal", &[p]), Err(Error::Backend(_))));
    }
}
