//! Writes small files in the raw C-MAPSS layout for tests that cannot rely
//! on the public data being present.

#![allow(dead_code)]

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rulcp_core::cmapss::{format_rul, format_units};
use rulcp_core::{TimeSeriesUnit, N_SENSORS};

const CONDITIONS: [[f64; 3]; 6] = [
    [0.0, 0.0, 100.0],
    [10.0, 0.25, 100.0],
    [20.0, 0.7, 100.0],
    [25.0, 0.62, 60.0],
    [35.0, 0.84, 100.0],
    [42.0, 0.84, 100.0],
];

/// Sensors that stay constant within an operating condition.
const FLAT: [usize; 7] = [1, 5, 6, 10, 16, 18, 19];

fn unit(id: u32, length: usize, life: usize, multi: bool, rng: &mut ChaCha8Rng) -> TimeSeriesUnit {
    let mut settings = Vec::with_capacity(length);
    let mut sensors = Vec::with_capacity(length);
    for t in 1..=length {
        let c = if multi { rng.random_range(0..6) } else { 0 };
        let mut s = CONDITIONS[c];
        s[0] += rng.random_range(-1e-3..1e-3);
        s[1] += rng.random_range(-1e-4..1e-4);
        settings.push(s);
        let wear = (t as f64 / life as f64).powi(2);
        sensors.push(std::array::from_fn(|j| {
            let base = 100.0 * (j + 1) as f64 + 10.0 * c as f64;
            if FLAT.contains(&(j + 1)) {
                base
            } else {
                base + 5.0 * wear * if j % 2 == 0 { 1.0 } else { -1.0 }
                    + rng.random_range(-0.3..0.3)
            }
        }));
    }
    debug_assert_eq!(sensors[0].len(), N_SENSORS);
    TimeSeriesUnit::new(id, settings, sensors, length as u32).unwrap()
}

pub struct Fixture {
    pub train_lengths: Vec<usize>,
    pub test_lengths: Vec<usize>,
    pub test_rul: Vec<u32>,
}

/// Writes `train_FD00{id}.txt`, `test_FD00{id}.txt` and `RUL_FD00{id}.txt`
/// into `dir`. Datasets 2 and 4 mix six operating conditions.
pub fn write_cmapss(dir: &Path, id: u8, n_train: usize, n_test: usize, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let multi = id == 2 || id == 4;
    let mut train = Vec::new();
    for i in 0..n_train {
        let life = rng.random_range(128..=300);
        train.push(unit(i as u32 + 1, life, life, multi, &mut rng));
    }
    let mut test = Vec::new();
    let mut rul = Vec::new();
    for i in 0..n_test {
        let life = rng.random_range(128..=300);
        let length = rng.random_range(10..life);
        test.push(unit(i as u32 + 1, length, life, multi, &mut rng));
        rul.push((life - length) as u32);
    }
    std::fs::write(
        dir.join(format!("train_FD00{id}.txt")),
        format_units(&train),
    )
    .unwrap();
    std::fs::write(dir.join(format!("test_FD00{id}.txt")), format_units(&test)).unwrap();
    std::fs::write(dir.join(format!("RUL_FD00{id}.txt")), format_rul(&rul)).unwrap();
    Fixture {
        train_lengths: train.iter().map(|u| u.len()).collect(),
        test_lengths: test.iter().map(|u| u.len()).collect(),
        test_rul: rul,
    }
}
