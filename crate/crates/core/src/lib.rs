//! Pseudo-image synthesis for driving scenes.
//!
//! LiDAR sweeps are colored from the frame's camera images, merged over a
//! temporal window (moving objects follow their tracks), and projected into
//! arbitrary camera poses as sparse z-buffered pseudo-images. Also hosts the
//! benchmark tooling (splits, shifted trajectories, training-pair sampling),
//! a pull-push completion baseline and image metrics.
//!
//! The crate is `no_std` + `alloc`; file formats, image decoding, parallel
//! drivers and the CLI live in the `freevs` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod accumulate;
pub mod colorize;
pub mod completion;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod raster;
pub mod render;
pub mod scene;
pub mod view_sim;

pub use accumulate::{accumulate, repose_object_points, AccumulationConfig};
pub use colorize::{colorize_frame, ColoredPointCloud, ColorizeConfig, Colorized};
pub use completion::{complete_sequence, pull_push_complete, BackendRegistry, CompletionBackend, PullPush};
pub use error::{Error, Result, ValidationError};
pub use geometry::{CameraIntrinsics, CameraView, Projection, RigidTransform, Vec3, WorldPoint, DEFAULT_Z_NEAR};
pub use metrics::{mask_density, psnr, ssim, MetricReport};
pub use raster::RgbImage;
pub use render::{render_pseudo_image, PseudoImage, RenderConfig};
pub use scene::{Frame, FrameCamera, ObjectBox, RawPoint, SceneSequence};
pub use view_sim::{
    build_training_pair, make_split, sample_offset, shift_trajectory, shift_trajectory_by, SimulationConfig, Split,
    SplitKind, SplitParams, TrainingPair,
};
