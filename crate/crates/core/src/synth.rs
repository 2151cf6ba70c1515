//! Synthetic dynamic co-word networks with injected ground-truth bursts.
//!
//! Stable series are drawn per pair: a base rate from a log-normal
//! distribution, then independent Poisson counts for every period. Bursts
//! follow the injection protocol: at each period every eligible pair
//! (mean count above `mu_min`) becomes a burst point with probability
//! `p_burst`, and its count is replaced by `mu + u sigma` with
//! `u ~ U[u_low, u_high]`. Type-A bursts touch only the onset period;
//! Type-B bursts are re-drawn for every period from the onset to the end.
//!
//! Every pair draws from its own ChaCha stream keyed by the pair index, so
//! output depends only on the seed, never on the thread schedule.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coword::{PairKey, PairSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableConfig {
    pub num_pairs: usize,
    pub periods: usize,
    /// Median of the log-normal base-rate distribution.
    pub base_median: f64,
    /// Shape (standard deviation of the underlying normal).
    pub base_shape: f64,
    pub seed: u64,
}

impl Default for StableConfig {
    fn default() -> Self {
        StableConfig {
            num_pairs: 2000,
            periods: 50,
            base_median: 2.0,
            base_shape: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectionConfig {
    pub p_burst: f64,
    pub p_type_a: f64,
    pub u_low: f64,
    pub u_high: f64,
    pub mu_min: f64,
    pub seed: u64,
}

impl Default for InjectionConfig {
    fn default() -> Self {
        InjectionConfig {
            p_burst: 0.05,
            p_type_a: 0.95,
            u_low: 3.0,
            u_high: 6.0,
            mu_min: 3.0,
            seed: 1,
        }
    }
}

impl InjectionConfig {
    fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.p_burst) || !prob(self.p_type_a) {
            return Err(Error::Config("injection probabilities must lie in [0, 1]".into()));
        }
        if !(self.u_low <= self.u_high) {
            return Err(Error::Config("u_low must not exceed u_high".into()));
        }
        Ok(())
    }
}

/// Per-period counts `G_t` for a set of word pairs, with the per-pair mean
/// and standard deviation of the series before any injection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableSeries {
    pub pairs: Vec<PairKey>,
    /// Row-major `pairs x periods`.
    pub counts: Vec<f64>,
    pub periods: usize,
    pub vocab_size: usize,
    pub mu: Vec<f64>,
    /// Population standard deviation.
    pub sigma: Vec<f64>,
    pub seed: u64,
}

impl StableSeries {
    /// Wraps given counts, freezing `mu` and `sigma` from them.
    pub fn from_counts(pairs: Vec<PairKey>, counts: Vec<f64>, periods: usize, vocab_size: usize, seed: u64) -> Result<Self> {
        if periods < 2 {
            return Err(Error::Config("series needs at least 2 periods".into()));
        }
        if counts.len() != pairs.len() * periods {
            return Err(Error::Shape {
                expected: format!("{} x {periods}", pairs.len()),
                found: counts.len().to_string(),
            });
        }
        if counts.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::Config("counts must be non-negative".into()));
        }
        let (mu, sigma) = counts
            .chunks_exact(periods)
            .map(|row| {
                let n = row.len() as f64;
                let m = row.iter().sum::<f64>() / n;
                let v = row.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
                (m, v.sqrt())
            })
            .unzip();
        Ok(StableSeries {
            pairs,
            counts,
            periods,
            vocab_size,
            mu,
            sigma,
            seed,
        })
    }

    pub fn rows(&self) -> usize {
        self.pairs.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.counts[r * self.periods..(r + 1) * self.periods]
    }

    /// `i<TAB>j<TAB>t<TAB>count` for every entry.
    pub fn write_tsv(&self, mut out: impl Write) -> std::io::Result<()> {
        for (r, p) in self.pairs.iter().enumerate() {
            for (t, c) in self.row(r).iter().enumerate() {
                writeln!(out, "{}\t{}\t{}\t{c}", p.i, p.j, t + 1)?;
            }
        }
        Ok(())
    }

    /// Reads the [`write_tsv`](Self::write_tsv) form. `mu` and `sigma` are
    /// recomputed from the counts read.
    pub fn read_tsv(input: impl BufRead, vocab_size: Option<usize>) -> Result<Self> {
        let mut rows: BTreeMap<PairKey, BTreeMap<usize, f64>> = BTreeMap::new();
        for (k, line) in input.lines().enumerate() {
            let n = k + 1;
            let line = line.map_err(|e| Error::parse("series", n, e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(Error::parse("series", n, "expected `i j t count`"));
            }
            let bad = |what: &str| Error::parse("series", n, format!("bad {what}"));
            let i: u32 = f[0].parse().map_err(|_| bad("i"))?;
            let j: u32 = f[1].parse().map_err(|_| bad("j"))?;
            let t: usize = f[2].parse().map_err(|_| bad("t"))?;
            let c: f64 = f[3].parse().map_err(|_| bad("count"))?;
            if t == 0 {
                return Err(bad("t"));
            }
            rows.entry(PairKey::new(i, j)?).or_default().insert(t, c);
        }
        let periods = rows.values().flat_map(|r| r.keys()).copied().max().unwrap_or(0);
        let mut pairs = Vec::with_capacity(rows.len());
        let mut counts = Vec::with_capacity(rows.len() * periods);
        for (p, r) in rows {
            if r.len() != periods {
                return Err(Error::parse("series", 0, format!("pair {p:?} lacks some periods")));
            }
            pairs.push(p);
            counts.extend(r.into_values());
        }
        let m = vocab_size.unwrap_or_else(|| pairs.iter().map(|p| p.j as usize + 1).max().unwrap_or(0));
        Self::from_counts(pairs, counts, periods, m, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BurstType {
    /// Single-period spike.
    A,
    /// Jump that persists until the end of the series.
    B,
}

impl std::fmt::Display for BurstType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BurstType::A => "A",
            BurstType::B => "B",
        })
    }
}

/// Injected burst points keyed by `(pair, onset period)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub bursts: BTreeMap<(PairKey, usize), BurstType>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.bursts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bursts.is_empty()
    }

    pub fn contains(&self, pair: PairKey, period: usize) -> bool {
        self.bursts.contains_key(&(pair, period))
    }

    /// `i<TAB>j<TAB>t<TAB>type` per burst point.
    pub fn write_tsv(&self, mut out: impl Write) -> std::io::Result<()> {
        for ((p, t), ty) in &self.bursts {
            writeln!(out, "{}\t{}\t{t}\t{ty}", p.i, p.j)?;
        }
        Ok(())
    }

    pub fn read_tsv(input: impl BufRead) -> Result<Self> {
        let mut bursts = BTreeMap::new();
        for (k, line) in input.lines().enumerate() {
            let n = k + 1;
            let line = line.map_err(|e| Error::parse("truth", n, e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let bad = || Error::parse("truth", n, "expected `i j t type`");
            if f.len() != 4 {
                return Err(bad());
            }
            let i: u32 = f[0].parse().map_err(|_| bad())?;
            let j: u32 = f[1].parse().map_err(|_| bad())?;
            let t: usize = f[2].parse().map_err(|_| bad())?;
            let ty = match f[3] {
                "A" => BurstType::A,
                "B" => BurstType::B,
                _ => return Err(bad()),
            };
            bursts.insert((PairKey::new(i, j)?, t), ty);
        }
        Ok(GroundTruth { bursts })
    }
}

fn pair_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Smallest vocabulary whose pair count reaches `num_pairs`, and the first
/// `num_pairs` pairs of it in canonical order.
fn synthetic_pairs(num_pairs: usize) -> (usize, Vec<PairKey>) {
    let mut m = 2;
    while m * (m - 1) / 2 < num_pairs {
        m += 1;
    }
    let pairs = (0..m as u32)
        .flat_map(|i| (i + 1..m as u32).map(move |j| PairKey { i, j }))
        .take(num_pairs)
        .collect();
    (m, pairs)
}

/// Draws a stable series: per pair a log-normal base rate, then Poisson
/// counts at that rate for every period.
pub fn generate_stable(cfg: &StableConfig) -> Result<StableSeries> {
    if cfg.num_pairs == 0 || cfg.periods < 2 {
        return Err(Error::Config("need at least 1 pair and 2 periods".into()));
    }
    if !(cfg.base_median > 0.0) || !(cfg.base_shape >= 0.0) {
        return Err(Error::Config("base-rate median must be > 0 and shape >= 0".into()));
    }
    let rate = LogNormal::new(cfg.base_median.ln(), cfg.base_shape)
        .map_err(|e| Error::Config(e.to_string()))?;
    let (m, pairs) = synthetic_pairs(cfg.num_pairs);
    let t = cfg.periods;
    let mut counts = vec![0.0; cfg.num_pairs * t];
    counts
        .par_chunks_mut(t)
        .enumerate()
        .for_each(|(r, row)| {
            let mut rng = pair_rng(cfg.seed, r as u64);
            let lam: f64 = rate.sample(&mut rng);
            if let Ok(pois) = Poisson::new(lam) {
                for c in row.iter_mut() {
                    *c = pois.sample(&mut rng);
                }
            }
        });
    StableSeries::from_counts(pairs, counts, t, m, cfg.seed)
}

/// Applies the injection protocol. `mu` and `sigma` stay frozen at their
/// pre-injection values; the returned truth records onset periods.
pub fn inject_bursts(series: &StableSeries, cfg: &InjectionConfig) -> Result<(StableSeries, GroundTruth)> {
    cfg.validate()?;
    if !series.mu.iter().any(|&m| m > cfg.mu_min) {
        return Err(Error::NoEligiblePairs { mu_min: cfg.mu_min });
    }
    let t_len = series.periods;
    let mut out = series.clone();
    let truth_rows: Vec<Vec<(usize, BurstType)>> = out
        .counts
        .par_chunks_mut(t_len)
        .enumerate()
        .map(|(r, row)| {
            let (mu, sigma) = (series.mu[r], series.sigma[r]);
            if mu <= cfg.mu_min {
                return Vec::new();
            }
            let mut rng = pair_rng(cfg.seed, r as u64);
            let draw = |rng: &mut ChaCha8Rng| mu + rng.random_range(cfg.u_low..=cfg.u_high) * sigma;
            let mut points = Vec::new();
            for t in 0..t_len {
                if rng.random::<f64>() >= cfg.p_burst {
                    continue;
                }
                let ty = if rng.random::<f64>() < cfg.p_type_a {
                    BurstType::A
                } else {
                    BurstType::B
                };
                match ty {
                    BurstType::A => row[t] = draw(&mut rng),
                    BurstType::B => {
                        for c in row[t..].iter_mut() {
                            *c = draw(&mut rng);
                        }
                    }
                }
                points.push((t + 1, ty));
            }
            points
        })
        .collect();
    let mut truth = GroundTruth::default();
    for (r, points) in truth_rows.into_iter().enumerate() {
        for (t, ty) in points {
            truth.bursts.insert((series.pairs[r], t), ty);
        }
    }
    Ok((out, truth))
}

/// `W_t = G_t / omega_size` for every pair; all-zero rows are dropped.
pub fn to_pair_series(series: &StableSeries, omega_size: u64) -> Result<PairSeries> {
    if omega_size == 0 {
        return Err(Error::ZeroCollection { period: 1 });
    }
    let o = omega_size as f64;
    let weights = series.counts.iter().map(|c| c / o).collect();
    PairSeries::from_rows_dropping_zeros(
        series.pairs.clone(),
        weights,
        series.periods,
        series.vocab_size,
        vec![omega_size; series.periods],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> StableConfig {
        StableConfig {
            num_pairs: 300,
            periods: 20,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn generation_is_seeded() {
        let a = generate_stable(&small(7)).unwrap();
        let b = generate_stable(&small(7)).unwrap();
        let c = generate_stable(&small(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.counts, c.counts);
        assert!(a.counts.iter().all(|&x| x >= 0.0 && x.fract() == 0.0));
    }

    #[test]
    fn synthetic_pairs_cover_request() {
        let (m, pairs) = synthetic_pairs(2000);
        assert_eq!(m, 64);
        assert_eq!(pairs.len(), 2000);
        assert!(pairs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn zero_row_stats() {
        let s = StableSeries::from_counts(
            vec![PairKey { i: 0, j: 1 }, PairKey { i: 0, j: 2 }],
            vec![0.0, 0.0, 0.0, 1.0, 2.0, 3.0],
            3,
            3,
            0,
        )
        .unwrap();
        assert_eq!((s.mu[0], s.sigma[0]), (0.0, 0.0));
        assert!((s.sigma[1] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let w = to_pair_series(&s, 50).unwrap();
        assert_eq!(w.rows(), 1);
        assert_eq!(w.row(0)[1], 0.04);
    }

    #[test]
    fn constant_series_injects_the_mean() {
        let s = StableSeries::from_counts(vec![PairKey { i: 0, j: 1 }], vec![5.0; 10], 10, 2, 0).unwrap();
        let cfg = InjectionConfig { p_burst: 1.0, p_type_a: 1.0, ..Default::default() };
        let (g, truth) = inject_bursts(&s, &cfg).unwrap();
        assert_eq!(truth.len(), 10);
        assert_eq!(g.counts, vec![5.0; 10]);
    }

    #[test]
    fn no_eligible_pairs() {
        let s = StableSeries::from_counts(vec![PairKey { i: 0, j: 1 }], vec![1.0, 2.0], 2, 2, 0).unwrap();
        assert!(matches!(
            inject_bursts(&s, &InjectionConfig::default()),
            Err(Error::NoEligiblePairs { .. })
        ));
    }

    #[test]
    fn truth_and_series_tsv_round_trip() {
        let s = generate_stable(&small(3)).unwrap();
        let (g, truth) = inject_bursts(&s, &InjectionConfig::default()).unwrap();
        assert!(!truth.is_empty());
        let mut buf = Vec::new();
        truth.write_tsv(&mut buf).unwrap();
        assert_eq!(GroundTruth::read_tsv(&buf[..]).unwrap(), truth);
        let mut buf = Vec::new();
        g.write_tsv(&mut buf).unwrap();
        let back = StableSeries::read_tsv(&buf[..], Some(g.vocab_size)).unwrap();
        assert_eq!(back.counts, g.counts);
        assert_eq!(back.pairs, g.pairs);
    }
}
