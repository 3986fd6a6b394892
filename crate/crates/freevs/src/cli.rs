//! `freevs` command line: one subcommand per pipeline stage.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use freevs_core::view_sim::{check_pair_bounds, sample_offset_in};
use freevs_core::{
    make_split, AccumulationConfig, BackendRegistry, ColoredPointCloud, ColorizeConfig, MetricReport, PseudoImage,
    RenderConfig, SimulationConfig, SplitKind, SplitParams,
};
use rayon::prelude::*;

use crate::artifacts::{read_json, write_json, PairRecord, PairsManifest, PipelineConfig, PseudoRef, SplitFile};
use crate::backend::SubprocessBackend;
use crate::error::{Error, Result};
use crate::imageio::{list_stems, parse_view_stem, read_camera_image, read_pseudo_image, read_rgb, view_stem, write_pseudo_image, write_rgb};
use crate::ingest::{load_scene, save_scene, Scene};
use crate::pipeline::{self, with_threads};
use crate::points::{accumulated_file_name, colored_file_name, frame_index_from_path, read_colored_points, write_colored_points};
use crate::synth::{write_scene, SynthConfig};

pub const THREADS_ENV: &str = "FREEVS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "freevs", version, about = "Pseudo-image synthesis for driving scenes")]
pub struct Cli {
    /// Pipeline config (JSON); flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (falls back to FREEVS_THREADS). Output never depends on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Color each frame's LiDAR sweep from its camera images.
    Colorize(ColorizeArgs),
    /// Merge colored clouds over a temporal window.
    Accumulate(AccumulateArgs),
    /// Render pseudo-images at recorded or edited camera poses.
    Render(RenderArgs),
    /// Write a scene manifest with every ego pose shifted.
    Shift(ShiftArgs),
    /// Write a novel-frame or novel-camera benchmark split.
    Split(SplitArgs),
    /// Build training pairs with viewpoint-transformation simulation.
    Pairs(PairsArgs),
    /// Densify pseudo-images with a completion backend.
    Complete(CompleteArgs),
    /// PSNR/SSIM of completed images against recorded ones.
    Eval(EvalArgs),
    /// Generate a synthetic scene.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct SceneOut {
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ColorizeArgs {
    #[command(flatten)]
    pub io: SceneOut,
    /// `all`, or a list such as `0,2,4-7`.
    #[arg(long, default_value = "all")]
    pub frames: String,
    #[arg(long)]
    pub no_occlusion_check: bool,
}

#[derive(Debug, Args)]
pub struct AccumulateArgs {
    #[command(flatten)]
    pub io: SceneOut,
    /// Directory of `fNNN.fvcp` clouds from `colorize`; colorizes on the fly when absent.
    #[arg(long)]
    pub colored: Option<PathBuf>,
    #[arg(long, default_value = "all")]
    pub centers: String,
    #[arg(long)]
    pub radius: Option<u32>,
    /// Voxel edge (meters) for downsampling.
    #[arg(long)]
    pub voxel: Option<f64>,
    /// Leave moving-object points where they were observed.
    #[arg(long)]
    pub no_repose: bool,
    #[arg(long)]
    pub no_occlusion_check: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub io: SceneOut,
    #[arg(long, default_value = "all")]
    pub frame: String,
    /// `all` or a comma-separated camera list.
    #[arg(long, default_value = "all")]
    pub camera: String,
    /// Render this one cloud into every requested view.
    #[arg(long, conflicts_with_all = ["accumulated", "colored"])]
    pub cloud: Option<PathBuf>,
    /// Directory of `acc_fNNN.fvcp` clouds from `accumulate`.
    #[arg(long, conflicts_with = "colored")]
    pub accumulated: Option<PathBuf>,
    /// Directory of `fNNN.fvcp` clouds from `colorize`.
    #[arg(long)]
    pub colored: Option<PathBuf>,
    /// Scene whose camera poses are rendered (e.g. from `shift`); defaults to --scene.
    #[arg(long)]
    pub views: Option<PathBuf>,
    #[arg(long)]
    pub radius: Option<u32>,
    #[arg(long)]
    pub splat_radius: Option<u32>,
    #[arg(long, conflicts_with = "offset")]
    pub lateral: Option<f64>,
    /// Ego-frame pose offset `x,y,z` in meters.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub offset: Option<[f64; 3]>,
}

#[derive(Debug, Args)]
pub struct ShiftArgs {
    #[command(flatten)]
    pub io: SceneOut,
    /// Shift along the ego y axis (left positive), meters.
    #[arg(long, conflicts_with = "offset", allow_hyphen_values = true)]
    pub lateral: Option<f64>,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub offset: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    NovelFrame,
    NovelCamera,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub io: SceneOut,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, value_delimiter = ',')]
    pub test_cameras: Vec<String>,
    #[arg(long, default_value_t = 4)]
    pub stride: u32,
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    #[command(flatten)]
    pub io: SceneOut,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub window: Option<u32>,
    #[arg(long)]
    pub probability: Option<f64>,
    #[arg(long)]
    pub length: Option<u32>,
    /// Frames between consecutive sequence starts; defaults to the sequence length.
    #[arg(long)]
    pub stride: Option<u32>,
    #[arg(long)]
    pub radius: Option<u32>,
    #[arg(long)]
    pub splat_radius: Option<u32>,
    #[arg(long)]
    pub no_simulation: bool,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    /// Directory holding `<stem>.rgb.png` / `.mask.png` / `.depth.png` triples.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub backend: Option<String>,
    /// Command for a subprocess backend registered under --backend.
    #[arg(long)]
    pub backend_cmd: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub io: SceneOut,
    /// Directory of `<stem>.out.png` predictions.
    #[arg(long)]
    pub pred: PathBuf,
    /// Only score the test views of this split file.
    #[arg(long)]
    pub split: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub frames: usize,
    #[arg(long, default_value_t = 96)]
    pub width: u32,
    #[arg(long, default_value_t = 64)]
    pub height: u32,
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p.trim().parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(v)
}

/// `all` or `a,b,c-d` → sorted unique list within `0..len`.
pub fn parse_index_list(list: &str, len: usize) -> Result<Vec<i64>> {
    if list == "all" {
        return Ok((0..len as i64).collect());
    }
    let bad = || Error::Usage(format!("bad frame list {list:?}"));
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (a.parse::<i64>().map_err(|_| bad())?, b.parse::<i64>().map_err(|_| bad())?),
            None => {
                let v = part.parse::<i64>().map_err(|_| bad())?;
                (v, v)
            }
        };
        if lo > hi || lo < 0 || hi >= len as i64 {
            return Err(Error::Usage(format!("frames {part} outside 0..{len}")));
        }
        out.extend(lo..=hi);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

struct Context {
    cfg: PipelineConfig,
}

impl Context {
    fn scene_path(&self, flag: &Option<PathBuf>) -> Result<PathBuf> {
        flag.clone()
            .or_else(|| self.cfg.scene.clone())
            .ok_or_else(|| Error::Usage("no scene given (--scene or config \"scene\")".into()))
    }

    fn out_dir(&self, flag: &Option<PathBuf>) -> Result<PathBuf> {
        let dir = flag
            .clone()
            .or_else(|| self.cfg.output_dir.clone())
            .ok_or_else(|| Error::Usage("no output directory given (--out or config \"output_dir\")".into()))?;
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }

    /// The scene at its capture poses; a shifted manifest is undone here.
    fn scene(&self, flag: &Option<PathBuf>) -> Result<Scene> {
        Ok(self.scene_as_written(flag)?.recorded())
    }

    fn scene_as_written(&self, flag: &Option<PathBuf>) -> Result<Scene> {
        load_scene(&self.scene_path(flag)?)
    }
}

fn colorize_cfg(no_occlusion_check: bool) -> ColorizeConfig {
    ColorizeConfig { occlusion_check: !no_occlusion_check, ..Default::default() }
}

fn read_clouds(dir: &Path, frames: &[i64]) -> Result<BTreeMap<i64, ColoredPointCloud>> {
    frames
        .par_iter()
        .map(|&f| read_colored_points(&dir.join(colored_file_name(f)), f).map(|c| (f, c)))
        .collect()
}

fn cmd_colorize(ctx: &Context, a: &ColorizeArgs) -> Result<()> {
    let scene = ctx.scene(&a.io.scene)?;
    let out = ctx.out_dir(&a.io.out)?;
    let frames = parse_index_list(&a.frames, scene.sequence.len())?;
    let cfg = colorize_cfg(a.no_occlusion_check);
    let counts = frames
        .par_iter()
        .map(|&f| {
            let c = pipeline::colorize_frame(&scene, f, &cfg)?;
            write_colored_points(&out.join(colored_file_name(f)), &c.cloud)?;
            Ok((f, scene.sequence.frames[f as usize].lidar.len(), c.cloud.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    for (f, raw, colored) in counts {
        println!("frame {f}: {colored}/{raw} points colored");
    }
    Ok(())
}

fn accumulation(ctx: &Context, radius: Option<u32>) -> AccumulationConfig {
    AccumulationConfig::with_radius(radius.unwrap_or(ctx.cfg.accumulation_radius))
}

fn cmd_accumulate(ctx: &Context, a: &AccumulateArgs) -> Result<()> {
    let scene = ctx.scene(&a.io.scene)?;
    let out = ctx.out_dir(&a.io.out)?;
    let centers = parse_index_list(&a.centers, scene.sequence.len())?;
    let cfg = AccumulationConfig { voxel_downsample: a.voxel, repose_moving: !a.no_repose, ..accumulation(ctx, a.radius) };
    let needed = pipeline::window_frames(&scene, &centers, cfg.radius);
    let colored = match &a.colored {
        Some(dir) => read_clouds(dir, &needed)?,
        None => pipeline::colorize_frames(&scene, &needed, &colorize_cfg(a.no_occlusion_check))?,
    };
    for &c in &centers {
        let cloud = pipeline::accumulate(&scene, &colored, c, &cfg)?;
        write_colored_points(&out.join(accumulated_file_name(c)), &cloud)?;
        println!("center {c}: {} points", cloud.len());
    }
    Ok(())
}

fn pose_offset(ctx: &Context, lateral: Option<f64>, offset: Option<[f64; 3]>) -> [f64; 3] {
    match (lateral, offset) {
        (Some(d), _) => [0.0, d, 0.0],
        (None, Some(v)) => v,
        (None, None) => ctx.cfg.trajectory_offset,
    }
}

fn cmd_render(ctx: &Context, a: &RenderArgs) -> Result<()> {
    let written = ctx.scene_as_written(&a.io.scene)?;
    let scene = written.recorded();
    let out = ctx.out_dir(&a.io.out)?;
    let seq = &scene.sequence;
    // a shifted --scene renders along its own edited trajectory
    let mut views = match &a.views {
        Some(p) => load_scene(p)?.sequence,
        None => written.sequence,
    };
    if views.len() != seq.len() || views.camera_names != seq.camera_names {
        return Err(Error::Usage("--views scene must have the same frames and cameras as --scene".into()));
    }
    let offset = pose_offset(ctx, a.lateral, a.offset);
    if offset != [0.0; 3] {
        views = freevs_core::shift_trajectory_by(&views, offset);
    }
    let frames = parse_index_list(&a.frame, seq.len())?;
    let cameras: Vec<String> = if a.camera == "all" {
        seq.camera_names.clone()
    } else {
        let list: Vec<String> = a.camera.split(',').map(|s| s.trim().to_string()).collect();
        if let Some(bad) = list.iter().find(|c| !seq.camera_names.contains(c)) {
            return Err(Error::Usage(format!("unknown camera {bad:?}; scene has {:?}", seq.camera_names)));
        }
        list
    };
    let rc = RenderConfig { splat_radius: a.splat_radius.unwrap_or(ctx.cfg.splat_radius), ..Default::default() };
    let acc = accumulation(ctx, a.radius);

    let fixed_cloud = match &a.cloud {
        Some(p) => {
            let frame = frame_index_from_path(p).unwrap_or(0);
            Some(read_colored_points(p, frame)?)
        }
        None => None,
    };
    let colored = match (&fixed_cloud, &a.accumulated, &a.colored) {
        (None, None, Some(dir)) => Some(read_clouds(dir, &pipeline::window_frames(&scene, &frames, acc.radius))?),
        (None, None, None) => Some(pipeline::colorize_frames(
            &scene,
            &pipeline::window_frames(&scene, &frames, acc.radius),
            &ColorizeConfig::default(),
        )?),
        _ => None,
    };

    for &f in &frames {
        let cloud = match (&fixed_cloud, &a.accumulated, &colored) {
            (Some(c), _, _) => c.clone(),
            (None, Some(dir), _) => read_colored_points(&dir.join(accumulated_file_name(f)), f)?,
            (None, None, Some(colored)) => pipeline::accumulate(&scene, colored, f, &acc)?,
            (None, None, None) => unreachable!("cloud source resolved above"),
        };
        let frame = &views.frames[f as usize];
        for cam in &cameras {
            let view = &frame.camera(cam).expect("camera checked").view;
            let img = pipeline::render(&cloud, view, &rc);
            write_pseudo_image(&out, &view_stem(f, cam), &img)?;
            println!("{}: {} valid pixels", view_stem(f, cam), img.valid_count());
        }
    }
    Ok(())
}

fn cmd_shift(ctx: &Context, a: &ShiftArgs) -> Result<()> {
    let scene = ctx.scene_as_written(&a.io.scene)?;
    let out = ctx.out_dir(&a.io.out)?;
    let shifted = scene.shifted(pose_offset(ctx, a.lateral, a.offset));
    let path = out.join("scene.json");
    save_scene(&path, &shifted)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_split(ctx: &Context, a: &SplitArgs) -> Result<()> {
    let scene = ctx.scene(&a.io.scene)?;
    let out = ctx.out_dir(&a.io.out)?;
    let kind = match a.kind {
        KindArg::NovelFrame => SplitKind::NovelFrame,
        KindArg::NovelCamera => SplitKind::NovelCamera,
    };
    let params = SplitParams { frame_stride: a.stride, test_cameras: a.test_cameras.clone() };
    let split = make_split(&scene.sequence, kind, &params)?;
    write_json(&out.join("split.json"), &SplitFile::from(&split))?;
    println!("{} train views, {} test views", split.train_views.len(), split.test_views.len());
    Ok(())
}

/// Per-sequence seed derived from the run seed.
fn job_seed(seed: u64, job: u64) -> u64 {
    let mut z = seed ^ job.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cmd_pairs(ctx: &Context, a: &PairsArgs) -> Result<()> {
    let scene = ctx.scene(&a.io.scene)?;
    let out = ctx.out_dir(&a.io.out)?;
    let seq = &scene.sequence;
    let sim = SimulationConfig {
        window: a.window.unwrap_or(ctx.cfg.simulation_window),
        enable_probability: if a.no_simulation { 0.0 } else { a.probability.unwrap_or(ctx.cfg.simulation_probability) },
        sequence_length: a.length.unwrap_or(ctx.cfg.sequence_length),
    };
    sim.validate()?;
    let n = sim.sequence_length as i64;
    let stride = a.stride.unwrap_or(sim.sequence_length).max(1) as i64;
    if n > seq.len() as i64 {
        return Err(freevs_core::Error::Config(format!("sequence length {n} exceeds the {} scene frames", seq.len())).into());
    }
    let starts: Vec<i64> = (0..=seq.len() as i64 - n).step_by(stride as usize).collect();
    let seed = a.seed.unwrap_or(ctx.cfg.seed);
    let jobs = starts
        .iter()
        .enumerate()
        .map(|(k, &start)| {
            let offset = sample_offset_in(&sim, job_seed(seed, k as u64), |o| check_pair_bounds(seq, start, o, sim.sequence_length).is_ok())?;
            Ok((k, start, offset))
        })
        .collect::<Result<Vec<_>>>()?;

    let acc = accumulation(ctx, a.radius);
    let rc = RenderConfig { splat_radius: a.splat_radius.unwrap_or(ctx.cfg.splat_radius), ..Default::default() };
    let centers: Vec<i64> = jobs.iter().flat_map(|&(_, s, o)| (s + o)..(s + o + n)).collect();
    let colored = pipeline::colorize_frames(&scene, &pipeline::window_frames(&scene, &centers, acc.radius), &ColorizeConfig::default())?;

    let records = jobs
        .par_iter()
        .map(|&(k, start, offset)| {
            let pair = pipeline::build_training_pair(&scene, &colored, start, offset, &sim, &acc, &rc)?;
            let rel_dir = format!("pair_{k:03}");
            let dir = out.join(&rel_dir);
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let mut pseudo = Vec::new();
            for (&t, row) in pair.target_frames.iter().zip(&pair.pseudo_sequence) {
                let mut refs = Vec::new();
                for (cam, img) in seq.camera_names.iter().zip(row) {
                    let stem = view_stem(t, cam);
                    write_pseudo_image(&dir, &stem, img)?;
                    refs.push(PseudoRef {
                        rgb: format!("{rel_dir}/{stem}.rgb.png"),
                        mask: format!("{rel_dir}/{stem}.mask.png"),
                        depth: format!("{rel_dir}/{stem}.depth.png"),
                    });
                }
                pseudo.push(refs);
            }
            Ok(PairRecord {
                center_frame: pair.center_frame,
                offset: pair.offset,
                target_frames: pair.target_frames,
                cameras: seq.camera_names.clone(),
                pseudo,
                targets: pair.target_image_paths,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for r in &records {
        println!("pair at frame {}: offset {:+}", r.center_frame, r.offset);
    }
    write_json(&out.join("pairs.json"), &PairsManifest { pairs: records })
}

fn cmd_complete(ctx: &Context, a: &CompleteArgs) -> Result<()> {
    let out = ctx.out_dir(&a.out)?;
    let id = a.backend.clone().unwrap_or_else(|| ctx.cfg.backend.clone());
    let mut registry = BackendRegistry::default();
    if let Some(cmd) = a.backend_cmd.as_ref().or(ctx.cfg.backend_command.as_ref()) {
        registry.register(Box::new(SubprocessBackend::new(&id, cmd, out.join("backend_work"))?));
    }
    let backend = registry.get(&id)?;
    let stems = list_stems(&a.input, ".rgb.png")?;
    let pseudos = stems
        .par_iter()
        .map(|s| read_pseudo_image(&a.input, s))
        .collect::<Result<Vec<PseudoImage>>>()?;
    let images = if backend.concurrent_safe() {
        let chunks = pseudos
            .par_iter()
            .map(|p| freevs_core::complete_sequence(&registry, &id, std::slice::from_ref(p)))
            .collect::<freevs_core::Result<Vec<_>>>()?;
        chunks.into_iter().flat_map(|c| c.images).collect()
    } else {
        let done = freevs_core::complete_sequence(&registry, &id, &pseudos)?;
        if !done.valid_pixels_checked {
            eprintln!("note: backend {id} is external; valid-pixel preservation not enforced");
        }
        done.images
    };
    stems
        .par_iter()
        .zip(&images)
        .map(|(s, img)| write_rgb(&out.join(format!("{s}.out.png")), img))
        .collect::<Result<Vec<_>>>()?;
    println!("completed {} frames with {id}", images.len());
    Ok(())
}

fn cmd_eval(ctx: &Context, a: &EvalArgs) -> Result<()> {
    let scene = ctx.scene(&a.io.scene)?;
    let out = ctx.out_dir(&a.io.out)?;
    let stems = list_stems(&a.pred, ".out.png")?;
    let allowed: Option<Vec<(i64, String)>> = match &a.split {
        Some(p) => Some(read_json::<SplitFile>(p)?.test.into_iter().map(|v| (v.frame, v.camera)).collect()),
        None => None,
    };
    let mut views = Vec::new();
    for s in &stems {
        let view = parse_view_stem(s).ok_or_else(|| Error::Usage(format!("prediction {s:?} is not named fNNN_CAMERA")))?;
        if allowed.as_ref().is_none_or(|a| a.contains(&view)) {
            views.push((s.clone(), view));
        }
    }
    let metrics = views
        .par_iter()
        .map(|(stem, (frame, cam))| {
            let fc = scene
                .sequence
                .frame(*frame)
                .and_then(|f| f.camera(cam))
                .ok_or_else(|| Error::Usage(format!("{stem}: no such view in scene")))?;
            let target = read_camera_image(Path::new(&fc.image), &fc.view.intrinsics)?;
            let pred = read_rgb(&a.pred.join(format!("{stem}.out.png")))?;
            let mut r = MetricReport::default();
            r.push(*frame, cam.clone(), &pred, &target)?;
            Ok(r.views.remove(0))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = MetricReport { views: metrics };
    let path = out.join("report.csv");
    fs::write(&path, report.to_csv()).map_err(|e| Error::io(&path, e))?;
    match report.means() {
        Some((p, s)) => println!("{} views: mean PSNR {p:.3} dB, mean SSIM {s:.4}", report.views.len()),
        None => println!("no views evaluated"),
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let cfg = SynthConfig { frames: a.frames, width: a.width, height: a.height, ..Default::default() };
    let path = write_scene(&a.out, &cfg)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn resolve_threads(cli: Option<usize>, cfg: &PipelineConfig) -> Result<usize> {
    if let Some(n) = cli.or(cfg.threads) {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p).map_err(|e| Error::Usage(format!("config: {e}")))?,
        None => PipelineConfig::default(),
    };
    let threads = resolve_threads(cli.threads, &cfg)?;
    let ctx = Context { cfg };
    with_threads(threads, || match &cli.command {
        Command::Colorize(a) => cmd_colorize(&ctx, a),
        Command::Accumulate(a) => cmd_accumulate(&ctx, a),
        Command::Render(a) => cmd_render(&ctx, a),
        Command::Shift(a) => cmd_shift(&ctx, a),
        Command::Split(a) => cmd_split(&ctx, a),
        Command::Pairs(a) => cmd_pairs(&ctx, a),
        Command::Complete(a) => cmd_complete(&ctx, a),
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::Synth(a) => cmd_synth(a),
    })
}

/// Parses `args` (including the program name) and runs; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return 0;
            }
            if e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = e.print();
                return 2;
            }
            let text = e.render().to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: bad arguments"));
            return 2;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
