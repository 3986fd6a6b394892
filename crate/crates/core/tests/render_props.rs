mod common;

use common::oracles::brute_force_render;
use common::{cloud, intrinsics, view};
use freevs_core::render::{assemble, project_cloud, rasterize_rows};
use freevs_core::{render_pseudo_image, shift_trajectory, RenderConfig, RigidTransform, WorldPoint};
use proptest::prelude::*;

/// Points in a box in front of a camera at the origin looking along +x.
/// Coordinates are snapped to a coarse grid so that exact depth ties occur.
fn points(max: usize) -> impl Strategy<Value = Vec<WorldPoint>> {
    prop::collection::vec(
        (1i32..160, -80i32..80, -30i32..40, any::<[u8; 3]>(), 0i64..3),
        0..max,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .map(|(x, y, z, color, source_frame)| WorldPoint {
                position: [x as f32 * 0.25, y as f32 * 0.25, z as f32 * 0.25],
                color,
                source_frame,
            })
            .collect()
    })
}

fn camera() -> impl Strategy<Value = (u32, u32, f64, f64)> {
    (1u32..=64, 1u32..=64, 5.0f64..80.0, -40.0f64..40.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_brute_force(pts in points(2000), (w, h, f, yaw) in camera(), splat in 0u32..3) {
        let v = view("CAM", intrinsics(f, w, h), yaw, RigidTransform::IDENTITY);
        let c = cloud(0, pts);
        let cfg = RenderConfig { splat_radius: splat, ..Default::default() };
        let fast = render_pseudo_image(&c, &v, &cfg);
        let slow = brute_force_render(&c, &v, cfg.z_near, splat);
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn any_band_split_gives_the_same_image(pts in points(800), (w, h, f, yaw) in camera(), cuts in prop::collection::vec(0u32..64, 0..6)) {
        let v = view("CAM", intrinsics(f, w, h), yaw, RigidTransform::IDENTITY);
        let c = cloud(0, pts);
        let cfg = RenderConfig::default();
        let whole = render_pseudo_image(&c, &v, &cfg);
        let splats = project_cloud(&c, &v, &cfg);
        let mut edges: Vec<u32> = cuts.into_iter().map(|x| x % (h + 1)).chain([0, h]).collect();
        edges.sort_unstable();
        edges.dedup();
        let mut bands: Vec<_> = edges.windows(2).map(|e| rasterize_rows(&splats, &v.intrinsics, 0, e[0]..e[1])).collect();
        bands.reverse();
        prop_assert_eq!(assemble(&v, &bands), whole);
    }

    #[test]
    fn point_order_is_irrelevant_without_exact_ties(pts in points(600), (w, h, f, yaw) in camera(), seed in any::<u64>()) {
        // jitter every point so depths are distinct
        let pts: Vec<WorldPoint> = pts
            .into_iter()
            .enumerate()
            .map(|(i, mut p)| {
                p.position[0] += i as f32 * 1e-3;
                p
            })
            .collect();
        let v = view("CAM", intrinsics(f, w, h), yaw, RigidTransform::IDENTITY);
        let cfg = RenderConfig::default();
        let a = render_pseudo_image(&cloud(0, pts.clone()), &v, &cfg);
        let mut shuffled = pts;
        let mut s = seed | 1;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(render_pseudo_image(&cloud(0, shuffled), &v, &cfg), a);
    }

    #[test]
    fn splatting_only_adds_coverage(pts in points(400), (w, h, f, yaw) in camera()) {
        let v = view("CAM", intrinsics(f, w, h), yaw, RigidTransform::IDENTITY);
        let c = cloud(0, pts);
        let r0 = render_pseudo_image(&c, &v, &RenderConfig::default());
        let r1 = render_pseudo_image(&c, &v, &RenderConfig { splat_radius: 1, ..Default::default() });
        prop_assert!(r0.valid.iter().zip(&r1.valid).all(|(a, b)| !a || *b));
    }
}

#[test]
fn parallax_follows_focal_times_shift_over_depth() {
    let k = intrinsics(500.0, 1600, 900);
    let scene = common::rig_scene(1, &[("FRONT", 0.0)], k, 0.0);
    let base = &scene.frames[0].cameras[0].view;
    // points straight ahead of the camera (ego x forward), depth 10..100 m
    let pts: Vec<WorldPoint> = (0..2000)
        .map(|i| {
            let depth = 10.0 + 90.0 * i as f32 / 1999.0;
            let lateral = ((i * 37) % 21) as f32 * 0.1 - 1.0;
            let height = ((i * 11) % 9) as f32 * 0.1 + 1.1;
            WorldPoint { position: [depth, lateral, height], color: [1, 2, 3], source_frame: 0 }
        })
        .collect();
    let c = cloud(0, pts);
    let cfg = RenderConfig::default();
    let before = project_cloud(&c, base, &cfg);
    let project = |v: &freevs_core::CameraView| {
        let t = v.camera_from_world();
        c.points
            .iter()
            .map(|p| {
                let q = t.apply(p.position_f64());
                (k.fx * q[0] / q[2] + k.cx, q[2])
            })
            .collect::<Vec<_>>()
    };
    let orig = project(base);
    for d in [1.0, 2.0, 4.0] {
        let shifted = shift_trajectory(&scene, d);
        let sv = &shifted.frames[0].cameras[0].view;
        let moved = project(sv);
        let after = project_cloud(&c, sv, &cfg);
        let good = orig
            .iter()
            .zip(&moved)
            .filter(|((u0, z), (u1, _))| ((u1 - u0) - k.fx * d / z).abs() <= 0.5)
            .count();
        assert!(good as f64 >= 0.99 * orig.len() as f64, "shift {d}: {good}/{}", orig.len());
        // rendered pixels move by the same amount, up to pixel quantization
        for (a, b) in before.iter().zip(&after) {
            let z = orig[a.index as usize].1;
            let expect = k.fx * d / z;
            assert!(((b.col as f64 - a.col as f64) - expect).abs() < 1.0 + 1e-9);
        }
    }
}
