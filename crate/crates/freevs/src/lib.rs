//! IO, file formats, parallel drivers and the command-line front end for
//! the `freevs-core` pseudo-image engine.

pub mod artifacts;
pub mod backend;
pub mod cli;
pub mod error;
pub mod imageio;
pub mod ingest;
pub mod pipeline;
pub mod points;
pub mod synth;

pub use error::{Error, Result};
pub use ingest::{load_scene, load_scene_with, save_scene, LoadOptions, Scene};
