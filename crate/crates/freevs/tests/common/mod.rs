#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use freevs::synth::{write_scene, SynthConfig};

pub fn small_synth() -> SynthConfig {
    SynthConfig { frames: 6, width: 64, height: 48, focal: 40.0, lidar_azimuths: 360, lidar_rings: 24, ..Default::default() }
}

/// Writes the small synthetic scene under `dir` and returns its manifest path.
pub fn fixture(dir: &Path) -> PathBuf {
    write_scene(&dir.join("scene"), &small_synth()).unwrap()
}

pub fn freevs(args: &[&str]) -> Output {
    freevs_env(args, &[])
}

pub fn freevs_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_freevs"));
    cmd.args(args).env_remove("FREEVS_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}
