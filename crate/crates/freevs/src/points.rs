//! Binary point files (little-endian).
//!
//! Raw sweep, `FVPC`: magic, u32 count, then count × (x, y, z, intensity) as f32.
//!
//! Colored cloud, `FVCP`: magic, u32 count, then count × 20-byte records:
//! world position as 3 × f32, RGB as 3 × u8, the source frame as a signed
//! offset from the cloud's own frame stored in one byte (two's complement),
//! and 4 zero bytes.

use std::fs;
use std::path::Path;

use freevs_core::{ColoredPointCloud, RawPoint, WorldPoint};

use crate::error::{Error, Result};

pub const RAW_MAGIC: &[u8; 4] = b"FVPC";
pub const COLORED_MAGIC: &[u8; 4] = b"FVCP";
pub const RAW_RECORD: usize = 16;
pub const COLORED_RECORD: usize = 20;
const HEADER: usize = 8;

fn f32_at(buf: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(buf[at..at + 4].try_into().unwrap())
}

fn payload<'a>(path: &Path, bytes: &'a [u8], magic: &[u8; 4], record: usize) -> Result<&'a [u8]> {
    if bytes.len() < HEADER {
        return Err(Error::format(path, format!("header needs {HEADER} bytes, file has {}", bytes.len())));
    }
    if &bytes[..4] != magic {
        return Err(Error::format(
            path,
            format!("bad magic {:?}, expected {:?}", String::from_utf8_lossy(&bytes[..4]), String::from_utf8_lossy(magic)),
        ));
    }
    let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let expected = count * record;
    let actual = bytes.len() - HEADER;
    if actual != expected {
        return Err(Error::format(
            path,
            format!("payload for {count} points should be {expected} bytes, found {actual}"),
        ));
    }
    Ok(&bytes[HEADER..])
}

fn header(magic: &[u8; 4], count: usize, record: usize) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER + count * record);
    buf.extend_from_slice(magic);
    buf.extend_from_slice(&(count as u32).to_le_bytes());
    buf
}

pub fn encode_raw_points(points: &[RawPoint]) -> Vec<u8> {
    let mut buf = header(RAW_MAGIC, points.len(), RAW_RECORD);
    for p in points {
        for v in p.position.iter().chain(std::iter::once(&p.intensity)) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    buf
}

pub fn decode_raw_points(path: &Path, bytes: &[u8]) -> Result<Vec<RawPoint>> {
    let body = payload(path, bytes, RAW_MAGIC, RAW_RECORD)?;
    Ok(body
        .chunks_exact(RAW_RECORD)
        .map(|r| RawPoint { position: [f32_at(r, 0), f32_at(r, 4), f32_at(r, 8)], intensity: f32_at(r, 12) })
        .collect())
}

pub fn write_raw_points(path: &Path, points: &[RawPoint]) -> Result<()> {
    fs::write(path, encode_raw_points(points)).map_err(|e| Error::io(path, e))
}

pub fn read_raw_points(path: &Path) -> Result<Vec<RawPoint>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raw_points(path, &bytes)
}

pub fn encode_colored_points(path: &Path, cloud: &ColoredPointCloud) -> Result<Vec<u8>> {
    let mut buf = header(COLORED_MAGIC, cloud.points.len(), COLORED_RECORD);
    for (i, p) in cloud.points.iter().enumerate() {
        let offset = i8::try_from(p.source_frame - cloud.frame_index).map_err(|_| {
            Error::format(
                path,
                format!("point {i}: source frame {} is too far from frame {}", p.source_frame, cloud.frame_index),
            )
        })?;
        for v in p.position {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&p.color);
        buf.push(offset as u8);
        buf.extend_from_slice(&[0; 4]);
    }
    Ok(buf)
}

pub fn decode_colored_points(path: &Path, bytes: &[u8], frame_index: i64) -> Result<ColoredPointCloud> {
    let body = payload(path, bytes, COLORED_MAGIC, COLORED_RECORD)?;
    let points = body
        .chunks_exact(COLORED_RECORD)
        .map(|r| WorldPoint {
            position: [f32_at(r, 0), f32_at(r, 4), f32_at(r, 8)],
            color: [r[12], r[13], r[14]],
            source_frame: frame_index + (r[15] as i8) as i64,
        })
        .collect();
    Ok(ColoredPointCloud { points, frame_index })
}

pub fn write_colored_points(path: &Path, cloud: &ColoredPointCloud) -> Result<()> {
    let bytes = encode_colored_points(path, cloud)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a colored cloud; `frame_index` anchors the stored source-frame offsets.
pub fn read_colored_points(path: &Path, frame_index: i64) -> Result<ColoredPointCloud> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_colored_points(path, &bytes, frame_index)
}

/// Frame index encoded in a file name such as `f012.fvcp` or `acc_f012.fvcp`.
pub fn frame_index_from_path(path: &Path) -> Option<i64> {
    let stem = path.file_stem()?.to_str()?;
    let at = stem.rfind('f')?;
    let digits: String = stem[at + 1..].chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok()
}

/// `f012.fvcp` for frame 12.
pub fn colored_file_name(frame: i64) -> String {
    format!("f{frame:03}.fvcp")
}

/// `acc_f012.fvcp` for an accumulation centered at frame 12.
pub fn accumulated_file_name(center: i64) -> String {
    format!("acc_f{center:03}.fvcp")
}
