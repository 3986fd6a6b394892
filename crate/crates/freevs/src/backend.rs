//! External completion backends driven through files and a child process.
//!
//! For each call the engine writes, per frame, `<stem>.rgb.png`,
//! `<stem>.mask.png` and `<stem>.depth.png` into a work directory, plus an
//! input manifest:
//!
//! ```json
//! {"frames": [{"stem": "f000_FRONT", "rgb": "...", "mask": "...", "depth": "...", "out": ".../f000_FRONT.out.png"}]}
//! ```
//!
//! The backend command runs with the manifest path appended as its last
//! argument and must write every `out` file. A nonzero exit is an error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use freevs_core::{CompletionBackend, PseudoImage, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::imageio::{read_rgb, write_pseudo_image};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub stem: String,
    pub rgb: PathBuf,
    pub mask: PathBuf,
    pub depth: PathBuf,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputManifest {
    pub frames: Vec<FrameEntry>,
}

pub const INPUT_MANIFEST: &str = "input.json";

pub struct SubprocessBackend {
    id: String,
    program: String,
    args: Vec<String>,
    work_dir: PathBuf,
}

impl SubprocessBackend {
    /// `command` is split on whitespace: program first, then fixed arguments.
    pub fn new(id: impl Into<String>, command: &str, work_dir: impl Into<PathBuf>) -> Result<Self, Error> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts.next().ok_or_else(|| Error::Usage("empty backend command".into()))?;
        Ok(Self { id: id.into(), program, args: parts.collect(), work_dir: work_dir.into() })
    }

    fn stem_for(i: usize, p: &PseudoImage) -> String {
        let name: String = p.camera.name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '-' }).collect();
        format!("{i:04}_{name}")
    }

    fn run(&self, pseudos: &[PseudoImage]) -> Result<Vec<RgbImage>, Error> {
        let dir = &self.work_dir;
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut frames = Vec::with_capacity(pseudos.len());
        for (i, p) in pseudos.iter().enumerate() {
            let stem = Self::stem_for(i, p);
            let paths = write_pseudo_image(dir, &stem, p)?;
            let out = dir.join(format!("{stem}.out.png"));
            if out.exists() {
                fs::remove_file(&out).map_err(|e| Error::io(&out, e))?;
            }
            frames.push(FrameEntry { stem, rgb: paths.rgb, mask: paths.mask, depth: paths.depth, out });
        }
        let manifest_path = dir.join(INPUT_MANIFEST);
        let manifest = InputManifest { frames };
        let text = serde_json::to_string_pretty(&manifest).map_err(|source| Error::Json { path: manifest_path.clone(), source })?;
        fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;

        let status = Command::new(&self.program)
            .args(&self.args)
            .arg(&manifest_path)
            .status()
            .map_err(|e| Error::io(Path::new(&self.program), e))?;
        if !status.success() {
            return Err(freevs_core::Error::Backend(format!("{} exited with {status}", self.program)).into());
        }
        manifest.frames.iter().map(|f| read_rgb(&f.out)).collect()
    }
}

impl CompletionBackend for SubprocessBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, pseudos: &[PseudoImage]) -> freevs_core::Result<Vec<RgbImage>> {
        self.run(pseudos).map_err(|e| match e {
            Error::Core(inner) => inner,
            other => freevs_core::Error::Backend(other.to_string()),
        })
    }
}
