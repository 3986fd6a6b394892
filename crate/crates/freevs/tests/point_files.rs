use freevs::points::{
    decode_colored_points, decode_raw_points, encode_raw_points, read_colored_points, read_raw_points, write_colored_points,
    write_raw_points,
};
use freevs_core::{ColoredPointCloud, RawPoint, WorldPoint};
use proptest::prelude::*;

struct Bits(u64);

impl Bits {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 16
    }
    /// Any finite or infinite f32, negative zero included; NaNs excluded so `==` is meaningful.
    fn f32(&mut self) -> f32 {
        loop {
            let v = f32::from_bits(self.next() as u32);
            if !v.is_nan() {
                return v;
            }
        }
    }
}

fn raw_cloud(n: usize, seed: u64) -> Vec<RawPoint> {
    let mut b = Bits(seed);
    (0..n).map(|_| RawPoint { position: [b.f32(), b.f32(), b.f32()], intensity: b.f32() }).collect()
}

fn colored_cloud(n: usize, seed: u64, frame: i64) -> ColoredPointCloud {
    let mut b = Bits(seed);
    let points = (0..n)
        .map(|_| {
            let c = b.next();
            WorldPoint {
                position: [b.f32(), b.f32(), b.f32()],
                color: [c as u8, (c >> 8) as u8, (c >> 16) as u8],
                source_frame: frame + ((c >> 24) % 255) as i64 - 127,
            }
        })
        .collect();
    ColoredPointCloud { points, frame_index: frame }
}

fn same_bits(a: [f32; 3], b: [f32; 3]) -> bool {
    (0..3).all(|i| a[i].to_bits() == b[i].to_bits())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn raw_round_trip(n in prop_oneof![0usize..64, 0usize..=1_000_000], seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.bin");
        let pts = raw_cloud(n, seed);
        write_raw_points(&path, &pts).unwrap();
        let back = read_raw_points(&path).unwrap();
        prop_assert_eq!(back.len(), n);
        for (a, b) in pts.iter().zip(&back) {
            prop_assert!(same_bits(a.position, b.position) && a.intensity.to_bits() == b.intensity.to_bits());
        }
    }

    #[test]
    fn colored_round_trip(n in prop_oneof![0usize..64, 0usize..=1_000_000], seed in any::<u64>(), frame in 0i64..10_000) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f000.fvcp");
        let cloud = colored_cloud(n, seed, frame);
        write_colored_points(&path, &cloud).unwrap();
        let back = read_colored_points(&path, frame).unwrap();
        prop_assert_eq!(back.frame_index, frame);
        prop_assert_eq!(back.len(), n);
        for (a, b) in cloud.points.iter().zip(&back.points) {
            prop_assert!(same_bits(a.position, b.position));
            prop_assert_eq!((a.color, a.source_frame), (b.color, b.source_frame));
        }
    }

    #[test]
    fn truncated_files_are_rejected(n in 1usize..200, cut in 1usize..16, seed in any::<u64>()) {
        let bytes = encode_raw_points(&raw_cloud(n, seed));
        let err = decode_raw_points("x.bin".as_ref(), &bytes[..bytes.len() - cut]).unwrap_err().to_string();
        prop_assert!(err.contains("x.bin") && err.contains("bytes"), "{}", err);
    }
}

#[test]
fn exactly_one_million_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.fvcp");
    let cloud = colored_cloud(1_000_000, 42, 3);
    write_colored_points(&path, &cloud).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 8 + 20 * 1_000_000);
    let back = read_colored_points(&path, 3).unwrap();
    assert_eq!(back.points.len(), 1_000_000);
    assert!(cloud.points.iter().zip(&back.points).all(|(a, b)| same_bits(a.position, b.position) && a.color == b.color));
}

#[test]
fn wrong_magic_and_offset_range() {
    let err = decode_colored_points("a.bin".as_ref(), b"FVPC\0\0\0\0", 0).unwrap_err().to_string();
    assert!(err.contains("magic"), "{err}");
    let dir = tempfile::tempdir().unwrap();
    let far = ColoredPointCloud {
        points: vec![WorldPoint { position: [0.0; 3], color: [0; 3], source_frame: 200 }],
        frame_index: 0,
    };
    assert!(write_colored_points(&dir.path().join("f.fvcp"), &far).is_err());
}
