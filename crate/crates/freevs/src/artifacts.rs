//! JSON artifacts: pipeline config, split files and training-pair manifests.

use std::fs;
use std::path::{Path, PathBuf};

use freevs_core::{Split, SplitKind, SplitParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_radius() -> u32 {
    2
}
fn default_window() -> u32 {
    4
}
fn default_probability() -> f64 {
    0.5
}
fn default_length() -> u32 {
    8
}
fn default_backend() -> String {
    freevs_core::completion::PULL_PUSH_ID.to_string()
}

/// Defaults shared by every subcommand. Paths are relative to the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub scene: Option<PathBuf>,
    #[serde(default = "default_radius")]
    pub accumulation_radius: u32,
    #[serde(default = "default_window")]
    pub simulation_window: u32,
    #[serde(default = "default_probability")]
    pub simulation_probability: f64,
    #[serde(default = "default_length")]
    pub sequence_length: u32,
    #[serde(default)]
    pub splat_radius: u32,
    #[serde(default)]
    pub trajectory_offset: [f64; 3],
    #[serde(default = "default_backend")]
    pub backend: String,
    #[serde(default)]
    pub backend_command: Option<String>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_owned(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.scene, &mut cfg.output_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewRef {
    pub frame: i64,
    pub camera: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFile {
    pub kind: SplitKind,
    pub params: SplitParams,
    pub train: Vec<ViewRef>,
    pub test: Vec<ViewRef>,
}

impl From<&Split> for SplitFile {
    fn from(s: &Split) -> Self {
        let refs = |v: &[(i64, String)]| v.iter().map(|(frame, camera)| ViewRef { frame: *frame, camera: camera.clone() }).collect();
        SplitFile { kind: s.kind, params: s.params.clone(), train: refs(&s.train_views), test: refs(&s.test_views) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoRef {
    pub rgb: String,
    pub mask: String,
    pub depth: String,
}

/// One training pair; pseudo paths are relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub center_frame: i64,
    pub offset: i64,
    pub target_frames: Vec<i64>,
    pub cameras: Vec<String>,
    /// `[frame][camera]`
    pub pseudo: Vec<Vec<PseudoRef>>,
    /// `[frame][camera]`
    pub targets: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairsManifest {
    pub pairs: Vec<PairRecord>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json { path: path.to_owned(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_owned(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults() {
        let c = PipelineConfig::default();
        assert_eq!(c.accumulation_radius, 2);
        assert_eq!(c.simulation_window, 4);
        assert_eq!(c.simulation_probability, 0.5);
        assert_eq!(c.splat_radius, 0);
        assert_eq!(c.trajectory_offset, [0.0; 3]);
        assert_eq!(c.backend, "pull_push");
    }

    #[test]
    fn config_paths_resolve_against_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"scene": "data/scene.json", "output_dir": "/abs/out", "seed": 7}"#).unwrap();
        let c = PipelineConfig::load(&path).unwrap();
        assert_eq!(c.scene.unwrap(), dir.path().join("data/scene.json"));
        assert_eq!(c.output_dir.unwrap(), PathBuf::from("/abs/out"));
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn unknown_config_field_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"radius": 3}"#).unwrap();
        assert!(PipelineConfig::load(&path).is_err());
    }
}
