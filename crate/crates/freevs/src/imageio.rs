//! PNG reading and writing for camera images and pseudo-image triples.

use std::path::{Path, PathBuf};

use freevs_core::geometry::CameraIntrinsics;
use freevs_core::render::depth_to_centimeters;
use freevs_core::{CameraView, PseudoImage, RgbImage, RigidTransform};
use image::{imageops, GrayImage, ImageBuffer, Luma};

use crate::error::{Error, Result};

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|source| Error::Image { path: path.to_owned(), source })?;
    let rgb = img.into_rgb8();
    let (w, h) = rgb.dimensions();
    Ok(RgbImage::from_raw(w, h, rgb.into_raw()))
}

/// Loads a camera image at the camera's raster size. An image with the same
/// aspect ratio but a different size is resampled; any other mismatch is an error.
pub fn read_camera_image(path: &Path, k: &CameraIntrinsics) -> Result<RgbImage> {
    let img = read_rgb(path)?;
    if img.width == k.width && img.height == k.height {
        return Ok(img);
    }
    if img.width as u64 * k.height as u64 != img.height as u64 * k.width as u64 {
        return Err(Error::format(
            path,
            format!("image is {}×{}, camera expects {}×{}", img.width, img.height, k.width, k.height),
        ));
    }
    let buf = image::RgbImage::from_raw(img.width, img.height, img.data).expect("size checked");
    let resized = imageops::resize(&buf, k.width, k.height, imageops::FilterType::Triangle);
    Ok(RgbImage::from_raw(k.width, k.height, resized.into_raw()))
}

pub fn write_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    image::save_buffer(path, &img.data, img.width, img.height, image::ExtendedColorType::Rgb8)
        .map_err(|source| Error::Image { path: path.to_owned(), source })
}

pub struct PseudoPaths {
    pub rgb: PathBuf,
    pub mask: PathBuf,
    pub depth: PathBuf,
}

impl PseudoPaths {
    pub fn new(dir: &Path, stem: &str) -> Self {
        Self {
            rgb: dir.join(format!("{stem}.rgb.png")),
            mask: dir.join(format!("{stem}.mask.png")),
            depth: dir.join(format!("{stem}.depth.png")),
        }
    }
}

/// Writes `<stem>.rgb.png`, `<stem>.mask.png` (255 = valid) and
/// `<stem>.depth.png` (16-bit centimeters, 0 where invalid).
pub fn write_pseudo_image(dir: &Path, stem: &str, p: &PseudoImage) -> Result<PseudoPaths> {
    let paths = PseudoPaths::new(dir, stem);
    let (w, h) = (p.width(), p.height());
    write_rgb(&paths.rgb, &p.rgb)?;
    let mask = GrayImage::from_raw(w, h, p.valid.iter().map(|&v| if v { 255 } else { 0 }).collect()).expect("mask size");
    mask.save(&paths.mask).map_err(|source| Error::Image { path: paths.mask.clone(), source })?;
    let depth: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(
        w,
        h,
        p.depth.iter().zip(&p.valid).map(|(&d, &v)| depth_to_centimeters(d, v)).collect(),
    )
    .expect("depth size");
    depth.save(&paths.depth).map_err(|source| Error::Image { path: paths.depth.clone(), source })?;
    Ok(paths)
}

/// Reads a pseudo-image triple. The camera is a placeholder sized to the raster.
pub fn read_pseudo_image(dir: &Path, stem: &str) -> Result<PseudoImage> {
    let paths = PseudoPaths::new(dir, stem);
    let rgb = read_rgb(&paths.rgb)?;
    let mask = image::open(&paths.mask)
        .map_err(|source| Error::Image { path: paths.mask.clone(), source })?
        .into_luma8();
    if mask.dimensions() != (rgb.width, rgb.height) {
        return Err(Error::format(&paths.mask, "mask size differs from rgb size"));
    }
    let valid: Vec<bool> = mask.into_raw().into_iter().map(|m| m >= 128).collect();
    let depth = match image::open(&paths.depth) {
        Ok(img) => {
            let d = img.into_luma16();
            if d.dimensions() != (rgb.width, rgb.height) {
                return Err(Error::format(&paths.depth, "depth size differs from rgb size"));
            }
            d.into_raw()
                .into_iter()
                .zip(&valid)
                .map(|(cm, &v)| if v { cm as f32 / 100.0 } else { f32::INFINITY })
                .collect()
        }
        Err(_) if !paths.depth.exists() => valid.iter().map(|&v| if v { 1.0 } else { f32::INFINITY }).collect(),
        Err(source) => return Err(Error::Image { path: paths.depth.clone(), source }),
    };
    let camera = CameraView {
        name: stem.to_string(),
        intrinsics: CameraIntrinsics {
            fx: 1.0,
            fy: 1.0,
            cx: 0.0,
            cy: 0.0,
            width: rgb.width,
            height: rgb.height,
        },
        ego_from_camera: RigidTransform::IDENTITY,
        world_from_ego: RigidTransform::IDENTITY,
    };
    Ok(PseudoImage { rgb, valid, depth, camera })
}

/// Stems of every `<stem>.<suffix>` file in `dir`, sorted.
pub fn list_stems(dir: &Path, suffix: &str) -> Result<Vec<String>> {
    let mut stems = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if let Some(name) = entry.file_name().to_str() {
            if let Some(stem) = name.strip_suffix(suffix) {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort();
    Ok(stems)
}

/// `f003_FRONT` for frame 3, camera FRONT.
pub fn view_stem(frame: i64, camera: &str) -> String {
    format!("f{frame:03}_{camera}")
}

/// Inverse of [`view_stem`].
pub fn parse_view_stem(stem: &str) -> Option<(i64, String)> {
    let rest = stem.strip_prefix('f')?;
    let (frame, camera) = rest.split_once('_')?;
    Some((frame.parse().ok()?, camera.to_string()))
}
