//! Shared fixtures for the integration tests.
#![allow(dead_code)]

pub mod oracles;

use std::io::Write;
use std::path::Path;

use coburst::coword::PairKey;
use coburst::PairSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BACKGROUND: &[&str] = &[
    "efficient", "robust", "scalable", "distributed", "adaptive", "optimal", "sparse", "fast",
    "algorithm", "analysis", "system", "model", "estimation", "signal", "image", "channel",
    "protocol", "scheduling", "filtering", "coding", "detection", "tracking", "recognition",
    "wireless", "sensor", "speech", "video", "routing", "control", "array",
];

/// Deterministic JSON-lines titles corpus over 2010..=2019. A topic pair
/// ("adversarial", "networks") appears from 2016 on and grows quickly; the
/// rest is stationary background vocabulary.
pub fn write_titles_corpus(path: &Path, per_year: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = std::fs::File::create(path).unwrap();
    let mut n = 0;
    for year in 2010..=2019 {
        for k in 0..per_year {
            let len = rng.random_range(4..8);
            let mut words: Vec<&str> = (0..len)
                .map(|_| BACKGROUND[rng.random_range(0..BACKGROUND.len())])
                .collect();
            let burst_share = match year {
                2016 => 0.15,
                2017.. => 0.35,
                _ => 0.0,
            };
            if rng.random::<f64>() < burst_share {
                words.insert(0, "Adversarial");
                words.push("Networks");
            }
            if k % 7 == 0 {
                words.push("for");
                words.push("the");
            }
            let title = words.join(" ");
            writeln!(out, r#"{{"id": "p{n}", "title": "{title}", "year": {year}}}"#).unwrap();
            n += 1;
        }
    }
    // One malformed record that ingest must skip.
    writeln!(out, r#"{{"id": "bad", "year": 2012}}"#).unwrap();
}

/// Random dense `W` with `rows` pairs over `t` periods, entries in [0, 1).
pub fn random_series(rng: &mut ChaCha8Rng, rows: usize, t: usize) -> PairSeries {
    let m = (1..).find(|m: &usize| m * (m - 1) / 2 >= rows).unwrap().max(2);
    let mut pairs = Vec::new();
    'outer: for i in 0..m as u32 {
        for j in i + 1..m as u32 {
            if pairs.len() == rows {
                break 'outer;
            }
            pairs.push(PairKey { i, j });
        }
    }
    let weights: Vec<f64> = (0..rows * t).map(|_| rng.random::<f64>() + 1e-3).collect();
    PairSeries::from_rows(pairs, weights, t, m, vec![100; t]).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
