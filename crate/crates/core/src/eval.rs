//! Precision/recall scoring against synthetic ground truth, PR curves
//! traced by parameter sweeps, and the area under them.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, BurstSet, KleinbergParams};
use crate::coword::PairSeries;
use crate::decomp::{self, SolverConfig};
use crate::error::{Error, Result};
use crate::synth::{self, GroundTruth, InjectionConfig, StableConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub param: f64,
    pub recall: f64,
    pub precision: f64,
}

/// `(precision, recall)` of `detected` against `truth`. A detection counts
/// as correct when its `(pair, period)` is a truth point. An empty
/// detection set has precision 1 by convention.
pub fn precision_recall(detected: &BurstSet, truth: &GroundTruth) -> Result<(f64, f64)> {
    if truth.is_empty() {
        return Err(Error::Eval("ground truth is empty".into()));
    }
    let correct = detected
        .bursts()
        .iter()
        .filter(|b| truth.contains(b.pair, b.period))
        .count() as f64;
    let precision = if detected.is_empty() {
        1.0
    } else {
        correct / detected.len() as f64
    };
    Ok((precision, correct / truth.len() as f64))
}

/// Result of sweeping one detector over a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub points: Vec<PrPoint>,
    /// Grid values where the detector failed, with the error text.
    pub failures: Vec<(f64, String)>,
}

/// Runs `detector` at every grid value and scores it. Failing grid values
/// are skipped and reported.
pub fn sweep<F>(detector: F, grid: &[f64], truth: &GroundTruth) -> Result<Sweep>
where
    F: Fn(f64) -> Result<BurstSet> + Sync,
{
    if grid.is_empty() {
        return Err(Error::Eval("parameter grid is empty".into()));
    }
    if truth.is_empty() {
        return Err(Error::Eval("ground truth is empty".into()));
    }
    let results: Vec<std::result::Result<PrPoint, (f64, String)>> = grid
        .par_iter()
        .map(|&param| {
            detector(param)
                .and_then(|set| precision_recall(&set, truth))
                .map(|(precision, recall)| PrPoint {
                    param,
                    recall,
                    precision,
                })
                .map_err(|e| (param, e.to_string()))
        })
        .collect();
    let mut out = Sweep {
        points: Vec::new(),
        failures: Vec::new(),
    };
    for r in results {
        match r {
            Ok(p) => out.points.push(p),
            Err(f) => out.failures.push(f),
        }
    }
    Ok(out)
}

/// Area under the PR curve by the trapezoid rule over recall.
///
/// Points are sorted by recall (ties by descending precision) and a point
/// at recall 0 with the first precision is prepended. The curve stops at
/// the largest recall reached; nothing is extrapolated to recall 1.
pub fn auc(points: &[PrPoint]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Eval(format!("AUC needs at least 2 points, got {}", points.len())));
    }
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p.recall, p.precision)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut area = 0.0;
    let mut prev = (0.0, pts[0].1);
    for &p in &pts {
        area += (p.0 - prev.0) * (p.1 + prev.1) / 2.0;
        prev = p;
    }
    Ok(area)
}

/// `count` values spaced evenly in log scale over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Thresholds for a detector that flags `score > tau`, chosen so that the
/// number of flagged entries runs roughly geometrically from all positive
/// scores down to none.
pub fn score_grid(mut scores: Vec<f64>, count: usize) -> Vec<f64> {
    scores.retain(|s| *s > 0.0 && s.is_finite());
    if scores.is_empty() || count == 0 {
        return vec![0.0];
    }
    scores.sort_by(|a, b| b.total_cmp(a));
    let n = scores.len() as f64;
    let mut grid: Vec<f64> = (0..count.saturating_sub(1))
        .map(|k| {
            let keep = n.powf(k as f64 / (count - 1).max(1) as f64).round() as usize;
            scores[keep.clamp(1, scores.len()) - 1]
        })
        .collect();
    grid.push(0.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorCurve {
    pub detector: String,
    /// Name of the swept parameter.
    pub param: String,
    pub grid: Vec<f64>,
    /// Sorted by recall.
    pub points: Vec<PrPoint>,
    pub auc: f64,
    pub failures: Vec<(f64, String)>,
}

impl DetectorCurve {
    fn from_sweep(detector: &str, param: &str, grid: Vec<f64>, sweep: Sweep) -> Result<Self> {
        let auc = auc(&sweep.points)?;
        let mut points = sweep.points;
        points.sort_by(|a, b| a.recall.total_cmp(&b.recall).then(b.precision.total_cmp(&a.precision)));
        Ok(DetectorCurve {
            detector: detector.into(),
            param: param.into(),
            grid,
            points,
            auc,
            failures: sweep.failures,
        })
    }

    /// `param,recall,precision` rows with a header line.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "param,recall,precision")?;
        for p in &self.points {
            writeln!(out, "{},{},{}", p.param, p.recall, p.precision)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub curves: Vec<DetectorCurve>,
    pub truth_points: usize,
    pub metadata: BTreeMap<String, String>,
}

impl EvaluationReport {
    pub fn auc_of(&self, detector: &str) -> Option<f64> {
        self.curves.iter().find(|c| c.detector == detector).map(|c| c.auc)
    }
}

/// Knobs of a detector comparison on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSettings {
    pub grid_points: usize,
    pub solver: SolverConfig,
    pub kleinberg_s: f64,
    /// Trials per period for the Kleinberg binomial model.
    pub kleinberg_trials: f64,
}

impl Default for DetectorSettings {
    fn default() -> Self {
        DetectorSettings {
            grid_points: 40,
            solver: SolverConfig {
                max_iters: 5000,
                tol: 1e-7,
                ..SolverConfig::default()
            },
            kleinberg_s: 2.0,
            kleinberg_trials: 5000.0,
        }
    }
}

pub const DETECTORS: [&str; 5] = ["proposed", "raw", "derivative", "mean_deviation", "kleinberg"];

/// Sweeps the decomposition over `lambda` and the four baselines over their
/// thresholds and `gamma`, scoring each against `truth`.
///
/// `counts` holds the raw per-period counts aligned with the rows of `w`;
/// Kleinberg treats them as successes out of `kleinberg_trials` trials.
pub fn compare_detectors(
    w: &PairSeries,
    counts: &[f64],
    truth: &GroundTruth,
    settings: &DetectorSettings,
) -> Result<EvaluationReport> {
    let n = settings.grid_points.max(2);
    let t = w.periods();

    let lambda_max = decomp::zero_solution_threshold(w);
    let lambda_grid = log_grid(lambda_max * 1e-3, lambda_max, n);
    let proposed = sweep(
        |lambda| {
            let cfg = SolverConfig { lambda, ..settings.solver };
            Ok(decomp::decompose(w, &cfg)?.to_burst_set(w))
        },
        &lambda_grid,
        truth,
    )?;

    let raw_scores: Vec<f64> = w.weights().to_vec();
    let deriv_scores: Vec<f64> = w
        .weights()
        .chunks_exact(t)
        .flat_map(|r| r.windows(2).map(|p| p[1] - p[0]).collect::<Vec<_>>())
        .collect();
    let dev_scores: Vec<f64> = w
        .weights()
        .chunks_exact(t)
        .flat_map(|r| {
            let m = r.iter().sum::<f64>() / t as f64;
            r.iter().map(move |x| x - m)
        })
        .collect();
    let raw_grid = score_grid(raw_scores, n);
    let deriv_grid = score_grid(deriv_scores, n);
    let dev_grid = score_grid(dev_scores, n);
    let raw = sweep(|tau| baselines::threshold_raw(w, tau), &raw_grid, truth)?;
    let deriv = sweep(|tau| baselines::threshold_derivative(w, tau), &deriv_grid, truth)?;
    let dev = sweep(|tau| baselines::threshold_mean_deviation(w, tau), &dev_grid, truth)?;

    let totals = vec![settings.kleinberg_trials; t];
    let mut gamma_grid = vec![0.0];
    gamma_grid.extend(log_grid(1e-2, 1e3, n - 1));
    let kleinberg = sweep(
        |gamma| {
            let p = KleinbergParams { s: settings.kleinberg_s, gamma };
            baselines::kleinberg_rows(w, counts, &totals, &p)
        },
        &gamma_grid,
        truth,
    )?;

    let curves = vec![
        DetectorCurve::from_sweep("proposed", "lambda", lambda_grid, proposed)?,
        DetectorCurve::from_sweep("raw", "tau1", raw_grid, raw)?,
        DetectorCurve::from_sweep("derivative", "tau2", deriv_grid, deriv)?,
        DetectorCurve::from_sweep("mean_deviation", "tau3", dev_grid, dev)?,
        DetectorCurve::from_sweep("kleinberg", "gamma", gamma_grid, kleinberg)?,
    ];
    let metadata = BTreeMap::from([
        ("empty_detection_precision".to_string(), "1.0".to_string()),
        ("auc_rule".to_string(), "trapezoid over achieved recall, starting at recall 0".to_string()),
        ("kleinberg_s".to_string(), settings.kleinberg_s.to_string()),
        ("kleinberg_trials".to_string(), settings.kleinberg_trials.to_string()),
    ]);
    Ok(EvaluationReport {
        curves,
        truth_points: truth.len(),
        metadata,
    })
}

/// One synthetic benchmark instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub stable: StableConfig,
    pub injection: InjectionConfig,
    /// Fixed collection size used to turn counts into weights.
    pub omega_size: u64,
    pub detectors: DetectorSettings,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            stable: StableConfig::default(),
            injection: InjectionConfig::default(),
            omega_size: 50,
            detectors: DetectorSettings::default(),
        }
    }
}

impl BenchmarkConfig {
    /// Stable-series and injection seeds both derived from one seed.
    pub fn with_seed(seed: u64) -> Self {
        let mut cfg = Self::default();
        cfg.stable.seed = seed;
        cfg.injection.seed = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
        cfg
    }
}

/// Generates, injects and evaluates one synthetic instance.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<EvaluationReport> {
    let stable = synth::generate_stable(&cfg.stable)?;
    let (series, truth) = synth::inject_bursts(&stable, &cfg.injection)?;
    evaluate_series(&series, &truth, cfg.omega_size, &cfg.detectors)
}

/// Evaluates all detectors on an already-injected series.
pub fn evaluate_series(
    series: &synth::StableSeries,
    truth: &GroundTruth,
    omega_size: u64,
    settings: &DetectorSettings,
) -> Result<EvaluationReport> {
    let w = synth::to_pair_series(series, omega_size)?;
    let t = series.periods;
    let counts: Vec<f64> = w
        .pairs()
        .iter()
        .flat_map(|p| {
            let r = series.pairs.binary_search(p).expect("row comes from the series");
            series.row(r).to_vec()
        })
        .collect();
    debug_assert_eq!(counts.len(), w.rows() * t);
    let mut report = compare_detectors(&w, &counts, truth, settings)?;
    report.metadata.insert("omega_size".into(), omega_size.to_string());
    report.metadata.insert("seed".into(), series.seed.to_string());
    Ok(report)
}
