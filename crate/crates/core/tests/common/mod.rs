#![allow(dead_code)]

use std::path::{Path, PathBuf};

use cmfmts::data::{serialize_ts, Channel, MtsDataset, MtsInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CLASSES: [&str; 4] = ["badminton", "running", "standing", "walking"];

/// Four classes of motion-like signals: each class has its own base
/// frequency, amplitude and noise level on every channel.
pub fn motion_dataset(name: &str, n: usize, dims: usize, len: usize, seed: u64) -> MtsDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = (0..n)
        .map(|i| {
            let c = i % CLASSES.len();
            let freq = 0.05 + 0.07 * c as f64;
            let amp = 1.0 + 0.5 * c as f64;
            let noise = 0.2 + 0.3 * (c % 2) as f64;
            let channels = (0..dims)
                .map(|d| {
                    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    let values = (0..len)
                        .map(|t| {
                            amp * (freq * (d + 1) as f64 * t as f64 + phase).sin() + noise * rng.gen_range(-1.0..1.0)
                        })
                        .collect();
                    Channel::new(values)
                })
                .collect();
            MtsInstance {
                id: i.to_string(),
                channels,
                label: CLASSES[c].to_string(),
            }
        })
        .collect();
    MtsDataset::new(name, instances, CLASSES.iter().map(|s| s.to_string())).unwrap()
}

/// Writes `<name>_TRAIN.ts` and `<name>_TEST.ts` into `dir`.
pub fn write_split(dir: &Path, name: &str, n: usize, dims: usize, len: usize, seed: u64) -> (PathBuf, PathBuf) {
    let train = dir.join(format!("{name}_TRAIN.ts"));
    let test = dir.join(format!("{name}_TEST.ts"));
    std::fs::write(&train, serialize_ts(&motion_dataset(name, n, dims, len, seed))).unwrap();
    std::fs::write(&test, serialize_ts(&motion_dataset(name, n, dims, len, seed + 1))).unwrap();
    (train, test)
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}
