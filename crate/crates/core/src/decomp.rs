//! Sparse-smooth decomposition of the stacked weight matrix.
//!
//! Solves
//!
//! ```text
//! min_S  f(S) + g(S),   f(S) = 1/2 ||D(W - S)||_F^2,   g(S) = lambda ||S||_1
//! ```
//!
//! where `D` maps a row `x` of length `T` to its `T - 1` successive
//! differences `x[t+1] - x[t]`. The gradient is `grad f(S) = -D*D(W - S)`
//! and the proximity operator of `g / L` is soft-thresholding at
//! `lambda / L`, so each FISTA step is linear in the number of entries.
//!
//! Rows of the problem are decoupled, so rows are solved independently and
//! in parallel; each row stops on its own relative-change criterion. The
//! output never depends on the thread schedule.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{BurstPoint, BurstSet};
use crate::coword::{PairKey, PairSeries};
use crate::error::{Error, Result};

/// Magnitudes below this are set to exact zero after convergence.
pub const ZERO_SNAP: f64 = 1e-9;

const CHUNK_ROWS: usize = 1024;

/// Column-difference operator `D` on rows of length `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DifferenceOperator {
    periods: usize,
}

impl DifferenceOperator {
    pub fn new(periods: usize) -> Result<Self> {
        if periods < 2 {
            return Err(Error::Config(format!(
                "difference operator needs at least 2 columns, got {periods}"
            )));
        }
        Ok(DifferenceOperator { periods })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    /// `out[t] = x[t+1] - x[t]`; `x` has `T` entries, `out` has `T - 1`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.periods);
        for (o, w) in out.iter_mut().zip(x.windows(2)) {
            *o = w[1] - w[0];
        }
    }

    /// Adjoint `D*`: `out[0] = -y[0]`, `out[t] = y[t-1] - y[t]`,
    /// `out[T-1] = y[T-2]`.
    pub fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        let t = self.periods;
        debug_assert_eq!(y.len(), t - 1);
        out[0] = -y[0];
        for k in 1..t - 1 {
            out[k] = y[k - 1] - y[k];
        }
        out[t - 1] = y[t - 2];
    }

    /// `D*D x` in one pass (the discrete Neumann Laplacian of `x`).
    pub fn normal(&self, x: &[f64], out: &mut [f64]) {
        let t = self.periods;
        out[0] = x[0] - x[1];
        for k in 1..t - 1 {
            out[k] = 2.0 * x[k] - x[k - 1] - x[k + 1];
        }
        out[t - 1] = x[t - 1] - x[t - 2];
    }

    /// Applies `D` to every row of a row-major block.
    pub fn apply_block(&self, x: &[f64]) -> Vec<f64> {
        let t = self.periods;
        let mut out = vec![0.0; x.len() / t * (t - 1)];
        for (xr, or) in x.chunks_exact(t).zip(out.chunks_exact_mut(t - 1)) {
            self.apply(xr, or);
        }
        out
    }

    /// Applies `D*` to every row of a row-major block with `T - 1` columns.
    pub fn adjoint_block(&self, y: &[f64]) -> Vec<f64> {
        let t = self.periods;
        let mut out = vec![0.0; y.len() / (t - 1) * t];
        for (yr, or) in y.chunks_exact(t - 1).zip(out.chunks_exact_mut(t)) {
            self.adjoint(yr, or);
        }
        out
    }

    /// `||D||_op^2 = 4 sin^2((T-1) pi / 2T)`, always below 4.
    pub fn op_norm_squared(&self) -> f64 {
        let t = self.periods as f64;
        let s = ((t - 1.0) * std::f64::consts::PI / (2.0 * t)).sin();
        4.0 * s * s
    }
}

/// `sgn(x) max(|x| - tau, 0)`.
#[inline]
pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    let m = x.abs() - tau;
    if m > 0.0 {
        m.copysign(x)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sparsity weight `lambda >= 0`.
    pub lambda: f64,
    /// Lipschitz constant of the gradient; the step size is `1 / L`.
    pub lipschitz: f64,
    pub max_iters: usize,
    /// Stop a row once `||S_k+1 - S_k|| / max(||S_k||, 1) < tol`.
    pub tol: f64,
    /// Record the total objective after every iteration.
    pub record_trace: bool,
}

impl SolverConfig {
    pub fn new(lambda: f64) -> Self {
        SolverConfig {
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(Error::Config(format!("Lipschitz constant must be > 0, got {}", self.lipschitz)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance must be > 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 0.0,
            lipschitz: 4.0,
            max_iters: 1000,
            tol: 1e-6,
            record_trace: false,
        }
    }
}

/// The burst matrix `S` with solver diagnostics. `S` shares the row index
/// of the `W` it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    burst: Vec<f64>,
    periods: usize,
    pub lambda: f64,
    /// Largest iteration count over all rows.
    pub iterations: usize,
    /// Rows that stopped without meeting the tolerance and the KKT check.
    pub unconverged_rows: usize,
    /// `1/2 ||D(W - S)||^2 + lambda ||S||_1` at the returned `S`.
    pub objective: f64,
    pub kkt_residual: f64,
    /// Total objective after each iteration; empty unless requested.
    pub objective_trace: Vec<f64>,
}

impl DecompositionResult {
    /// Wraps an existing `S` (e.g. read back from disk), recomputing the
    /// objective and optimality certificate against `w`.
    pub fn from_burst(w: &PairSeries, burst: Vec<f64>, lambda: f64) -> Result<Self> {
        let objective = objective(w, &burst, lambda)?;
        let kkt_residual = verify_optimality(w, &burst, lambda)?;
        Ok(DecompositionResult {
            burst,
            periods: w.periods(),
            lambda,
            iterations: 0,
            unconverged_rows: 0,
            objective,
            kkt_residual,
            objective_trace: Vec::new(),
        })
    }

    /// Row-major `S`.
    pub fn burst(&self) -> &[f64] {
        &self.burst
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn rows(&self) -> usize {
        self.burst.len() / self.periods
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.burst[r * self.periods..(r + 1) * self.periods]
    }

    /// Smooth part `W - S`.
    pub fn smooth(&self, w: &PairSeries) -> Vec<f64> {
        w.weights().iter().zip(&self.burst).map(|(a, b)| a - b).collect()
    }

    /// Nonzero entries as `(row, period, value)` with 1-based periods.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let t = self.periods;
        self.burst
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(move |(k, &v)| (k / t, k % t + 1, v))
    }

    pub fn nnz(&self) -> usize {
        self.burst.iter().filter(|v| **v != 0.0).count()
    }

    /// Positive entries of `S` as detections, scored by their value.
    pub fn to_burst_set(&self, w: &PairSeries) -> BurstSet {
        let bursts = self
            .nonzeros()
            .filter(|&(_, _, v)| v > 0.0)
            .map(|(r, t, v)| BurstPoint {
                pair: w.pairs()[r],
                period: t,
                score: v,
            })
            .collect();
        BurstSet::new("proposed", [("lambda".to_string(), self.lambda)], bursts)
    }

    /// Writes `pair_index<TAB>period<TAB>value` for every nonzero, preceded
    /// by a `# rows <R> periods <T>` header.
    pub fn write_triplets(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "# rows {} periods {}", self.rows(), self.periods)?;
        for (r, t, v) in self.nonzeros() {
            writeln!(out, "{r}\t{t}\t{v}")?;
        }
        Ok(())
    }

    /// Reads a triplet file back into a dense `(S, rows, periods)` block.
    pub fn read_triplets(input: impl BufRead) -> Result<(Vec<f64>, usize, usize)> {
        const CTX: &str = "burst triplets";
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(CTX, 1, "missing header"))?
            .map_err(|e| Error::parse(CTX, 1, e.to_string()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let (rows, periods) = match parts.as_slice() {
            ["#", "rows", r, "periods", t] => (
                r.parse::<usize>().map_err(|_| Error::parse(CTX, 1, "bad row count"))?,
                t.parse::<usize>().map_err(|_| Error::parse(CTX, 1, "bad period count"))?,
            ),
            _ => return Err(Error::parse(CTX, 1, "expected `# rows <R> periods <T>`")),
        };
        let mut s = vec![0.0; rows * periods];
        for (k, line) in lines.enumerate() {
            let n = k + 2;
            let line = line.map_err(|e| Error::parse(CTX, n, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(Error::parse(CTX, n, "expected 3 fields"));
            }
            let r: usize = f[0].parse().map_err(|_| Error::parse(CTX, n, "bad row"))?;
            let t: usize = f[1].parse().map_err(|_| Error::parse(CTX, n, "bad period"))?;
            let v: f64 = f[2].parse().map_err(|_| Error::parse(CTX, n, "bad value"))?;
            if r >= rows || t == 0 || t > periods {
                return Err(Error::parse(CTX, n, "index out of range"));
            }
            s[r * periods + t - 1] = v;
        }
        Ok((s, rows, periods))
    }
}

/// Writes the `pair_index<TAB>i<TAB>j` table that maps triplet rows to word
/// pairs.
pub fn write_pair_keys(pairs: &[PairKey], mut out: impl Write) -> std::io::Result<()> {
    for (r, p) in pairs.iter().enumerate() {
        writeln!(out, "{r}\t{}\t{}", p.i, p.j)?;
    }
    Ok(())
}

pub fn read_pair_keys(input: impl BufRead) -> Result<Vec<PairKey>> {
    let mut pairs = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::parse("pair keys", k + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<u32> = line
            .split('\t')
            .map(|x| x.parse().map_err(|_| Error::parse("pair keys", k + 1, "bad integer")))
            .collect::<Result<_>>()?;
        if f.len() != 3 || f[0] as usize != pairs.len() {
            return Err(Error::parse("pair keys", k + 1, "expected dense `index i j` rows"));
        }
        pairs.push(PairKey::new(f[1], f[2])?);
    }
    Ok(pairs)
}

fn check_shape(w: &PairSeries, s: &[f64]) -> Result<()> {
    if s.len() != w.weights().len() {
        return Err(Error::Shape {
            expected: format!("{} x {}", w.rows(), w.periods()),
            found: format!("{} values", s.len()),
        });
    }
    Ok(())
}

fn row_objective(op: &DifferenceOperator, w: &[f64], s: &[f64], lambda: f64, diff: &mut [f64]) -> f64 {
    let t = op.periods();
    let mut smooth = 0.0;
    for k in 0..t - 1 {
        let d = (w[k + 1] - s[k + 1]) - (w[k] - s[k]);
        diff[k] = d;
        smooth += d * d;
    }
    0.5 * smooth + lambda * s.iter().map(|x| x.abs()).sum::<f64>()
}

/// `1/2 ||D(W - S)||_F^2 + lambda ||S||_1`.
pub fn objective(w: &PairSeries, s: &[f64], lambda: f64) -> Result<f64> {
    check_shape(w, s)?;
    let op = DifferenceOperator::new(w.periods())?;
    let t = w.periods();
    let mut diff = vec![0.0; t - 1];
    Ok(w.weights()
        .chunks_exact(t)
        .zip(s.chunks_exact(t))
        .map(|(wr, sr)| row_objective(&op, wr, sr, lambda, &mut diff))
        .sum())
}

/// `grad f(S) = -D*D(W - S)`.
pub fn gradient(w: &PairSeries, s: &[f64]) -> Result<Vec<f64>> {
    check_shape(w, s)?;
    let op = DifferenceOperator::new(w.periods())?;
    let t = w.periods();
    let mut out = vec![0.0; s.len()];
    let mut resid = vec![0.0; t];
    for ((wr, sr), gr) in w
        .weights()
        .chunks_exact(t)
        .zip(s.chunks_exact(t))
        .zip(out.chunks_exact_mut(t))
    {
        for k in 0..t {
            resid[k] = wr[k] - sr[k];
        }
        op.normal(&resid, gr);
        gr.iter_mut().for_each(|g| *g = -*g);
    }
    Ok(out)
}

fn row_kkt(op: &DifferenceOperator, w: &[f64], s: &[f64], lambda: f64, resid: &mut [f64], grad: &mut [f64]) -> f64 {
    for k in 0..w.len() {
        resid[k] = w[k] - s[k];
    }
    op.normal(resid, grad);
    let mut worst: f64 = 0.0;
    for (g, &x) in grad.iter().zip(s) {
        let g = -*g;
        let v = if x != 0.0 {
            (g + lambda * x.signum()).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// First-order optimality violation of `S`: the largest of
/// `|grad f(S) + lambda sgn(S)|` over nonzero entries and
/// `max(|grad f(S)| - lambda, 0)` over zero entries.
pub fn verify_optimality(w: &PairSeries, s: &[f64], lambda: f64) -> Result<f64> {
    check_shape(w, s)?;
    let op = DifferenceOperator::new(w.periods())?;
    let t = w.periods();
    Ok(w.weights()
        .par_chunks(t * CHUNK_ROWS)
        .zip(s.par_chunks(t * CHUNK_ROWS))
        .map(|(wc, sc)| {
            let mut resid = vec![0.0; t];
            let mut grad = vec![0.0; t];
            wc.chunks_exact(t)
                .zip(sc.chunks_exact(t))
                .map(|(wr, sr)| row_kkt(&op, wr, sr, lambda, &mut resid, &mut grad))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

struct RowWork {
    y: Vec<f64>,
    prev: Vec<f64>,
    resid: Vec<f64>,
    step: Vec<f64>,
    diff: Vec<f64>,
    sorted: Vec<f64>,
}

impl RowWork {
    fn new(t: usize) -> Self {
        RowWork {
            y: vec![0.0; t],
            prev: vec![0.0; t],
            resid: vec![0.0; t],
            step: vec![0.0; t],
            diff: vec![0.0; t],
            sorted: vec![0.0; t],
        }
    }
}

/// Upper bound on FISTA restarts per row.
const MAX_RESTARTS: usize = 64;

/// FISTA on one row starting from `Y_0 = S_0 = s`, for at most `budget`
/// iterations. Returns the iterations used and whether `tol` was met.
#[allow(clippy::too_many_arguments)]
fn fista_row(
    op: &DifferenceOperator,
    cfg: &SolverConfig,
    w: &[f64],
    s: &mut [f64],
    row: usize,
    budget: usize,
    work: &mut RowWork,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<(usize, bool)> {
    let t = w.len();
    let inv_l = 1.0 / cfg.lipschitz;
    let tau = cfg.lambda * inv_l;
    work.y.copy_from_slice(s);
    work.prev.copy_from_slice(s);
    let mut z = 1.0_f64;
    for k in 1..=budget {
        for i in 0..t {
            work.resid[i] = w[i] - work.y[i];
        }
        op.normal(&work.resid, &mut work.step);
        let mut change = 0.0;
        let mut prev_norm = 0.0;
        let mut restart = 0.0;
        for i in 0..t {
            let v = soft_threshold(work.y[i] + inv_l * work.step[i], tau);
            if !v.is_finite() {
                return Err(Error::Numerical { iteration: k, row });
            }
            s[i] = v;
            let d = v - work.prev[i];
            change += d * d;
            prev_norm += work.prev[i] * work.prev[i];
            restart += (work.y[i] - v) * d;
        }
        // Momentum restart when the step points against the last move.
        if restart > 0.0 {
            z = 1.0;
        }
        let z_next = 0.5 * (1.0 + (1.0 + 4.0 * z * z).sqrt());
        let momentum = (z - 1.0) / z_next;
        for i in 0..t {
            work.y[i] = s[i] + momentum * (s[i] - work.prev[i]);
            work.prev[i] = s[i];
        }
        z = z_next;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(row_objective(op, w, s, cfg.lambda, &mut work.diff));
        }
        if change.sqrt() / prev_norm.sqrt().max(1.0) < cfg.tol {
            return Ok((k, true));
        }
    }
    Ok((budget, false))
}

/// Lower median, `x_(ceil(T/2))` in ascending order.
fn lower_median(x: &[f64], scratch: &mut [f64]) -> f64 {
    scratch.copy_from_slice(x);
    let k = (x.len() - 1) / 2;
    *scratch.select_nth_unstable_by(k, f64::total_cmp).1
}

/// Solves one row. FISTA starts from `S_0 = W`. Adding a constant to a row
/// leaves `D(W - S)` unchanged, and along that direction the l1 term is
/// minimized exactly by subtracting the row's lower median; FISTA alone
/// crawls along it at `lambda / L` per step. So after each FISTA run the
/// row is shifted by its lower median. The shift also picks one canonical
/// point from the set of optimal rows, which differ only by such constants.
///
/// The relative-change test can fire while the momentum term is still
/// moving (two equal iterates pinned at zero), so each shifted row is
/// checked against the KKT certificate and FISTA restarts from it until
/// the residual is within `10 tol`, the iteration budget is spent, or the
/// restart cap is hit.
fn solve_row(
    op: &DifferenceOperator,
    cfg: &SolverConfig,
    w: &[f64],
    s: &mut [f64],
    row: usize,
    work: &mut RowWork,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<(usize, bool)> {
    // S = 0 is optimal exactly when |D*D w| <= lambda everywhere.
    op.normal(w, &mut work.step);
    if work.step.iter().all(|g| g.abs() <= cfg.lambda) {
        s.fill(0.0);
        return Ok((0, true));
    }
    s.copy_from_slice(w);
    let mut used = 0;
    for _ in 0..MAX_RESTARTS {
        let (k, ok) = fista_row(op, cfg, w, s, row, cfg.max_iters - used, work, trace.as_deref_mut())?;
        used += k;
        let c = lower_median(s, &mut work.sorted);
        if c != 0.0 {
            for v in s.iter_mut() {
                *v -= c;
            }
        }
        if !ok {
            return Ok((used, false));
        }
        let kkt = row_kkt(op, w, s, cfg.lambda, &mut work.resid, &mut work.diff);
        if kkt <= 10.0 * cfg.tol {
            return Ok((used, true));
        }
        if used >= cfg.max_iters {
            break;
        }
    }
    Ok((used, false))
}

#[derive(Default)]
struct ChunkStats {
    iterations: usize,
    unconverged: usize,
    // trace_acc[k]: sum of objectives of rows still running at iteration k;
    // settled[L]: sum of final objectives of rows that ran L iterations.
    trace_acc: Vec<f64>,
    settled: Vec<f64>,
}

fn add_into(dst: &mut Vec<f64>, src: &[f64]) {
    if dst.len() < src.len() {
        dst.resize(src.len(), 0.0);
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Runs FISTA on every row of `w`, snaps tiny entries to zero and
/// certifies the result.
pub fn decompose(w: &PairSeries, cfg: &SolverConfig) -> Result<DecompositionResult> {
    cfg.validate()?;
    let op = DifferenceOperator::new(w.periods())?;
    let t = w.periods();
    let mut burst = vec![0.0; w.weights().len()];

    let stats: Vec<ChunkStats> = w
        .weights()
        .par_chunks(t * CHUNK_ROWS)
        .zip(burst.par_chunks_mut(t * CHUNK_ROWS))
        .enumerate()
        .map(|(c, (wc, sc))| {
            let mut work = RowWork::new(t);
            let mut stats = ChunkStats::default();
            let mut row_trace = Vec::new();
            for (k, (wr, sr)) in wc.chunks_exact(t).zip(sc.chunks_exact_mut(t)).enumerate() {
                row_trace.clear();
                let trace = cfg.record_trace.then_some(&mut row_trace);
                let (iters, converged) =
                    solve_row(&op, cfg, wr, sr, c * CHUNK_ROWS + k, &mut work, trace)?;
                for v in sr.iter_mut() {
                    if v.abs() < ZERO_SNAP {
                        *v = 0.0;
                    }
                }
                stats.iterations = stats.iterations.max(iters);
                stats.unconverged += usize::from(!converged);
                if cfg.record_trace {
                    add_into(&mut stats.trace_acc, &row_trace);
                    let final_obj = row_objective(&op, wr, sr, cfg.lambda, &mut work.diff);
                    if stats.settled.len() <= iters {
                        stats.settled.resize(iters + 1, 0.0);
                    }
                    stats.settled[iters] += final_obj;
                }
            }
            Ok(stats)
        })
        .collect::<Result<_>>()?;

    let iterations = stats.iter().map(|s| s.iterations).max().unwrap_or(0);
    let unconverged_rows = stats.iter().map(|s| s.unconverged).sum();
    let objective_trace = if cfg.record_trace {
        let mut acc = Vec::new();
        let mut settled = Vec::new();
        for s in &stats {
            add_into(&mut acc, &s.trace_acc);
            add_into(&mut settled, &s.settled);
        }
        settled.resize(iterations + 1, 0.0);
        let mut done = 0.0;
        (0..iterations)
            .map(|k| {
                // Rows that stopped after k iterations contribute their
                // final objective from iteration k + 1 onwards.
                done += settled[k];
                acc.get(k).copied().unwrap_or(0.0) + done
            })
            .collect()
    } else {
        Vec::new()
    };

    let objective = objective(w, &burst, cfg.lambda)?;
    let kkt_residual = verify_optimality(w, &burst, cfg.lambda)?;
    if !objective.is_finite() {
        return Err(Error::Numerical {
            iteration: iterations,
            row: 0,
        });
    }
    Ok(DecompositionResult {
        burst,
        periods: t,
        lambda: cfg.lambda,
        iterations,
        unconverged_rows,
        objective,
        kkt_residual,
        objective_trace,
    })
}

/// `||D*D W||_inf`: for any `lambda` at least this large, `S = 0` is optimal.
pub fn zero_solution_threshold(w: &PairSeries) -> f64 {
    let op = DifferenceOperator { periods: w.periods() };
    let t = w.periods();
    let mut out = vec![0.0; t];
    w.weights()
        .chunks_exact(t)
        .map(|r| {
            op.normal(r, &mut out);
            out.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
        })
        .fold(0.0, f64::max)
}
