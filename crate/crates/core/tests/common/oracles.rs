//! Slow reference implementations used to check the library: dense
//! matrices, plain proximal gradient, exhaustive enumeration.

/// `(T-1) x T` first-difference matrix, row `k` = `e_{k+1} - e_k`.
pub fn dense_d(t: usize) -> Vec<Vec<f64>> {
    (0..t - 1)
        .map(|k| {
            let mut row = vec![0.0; t];
            row[k] = -1.0;
            row[k + 1] = 1.0;
            row
        })
        .collect()
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn matvec_t(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = a.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (r, &yk) in a.iter().zip(y) {
        for (o, &v) in out.iter_mut().zip(r) {
            *o += v * yk;
        }
    }
    out
}

/// Smooth part `1/2 ||D(w - s)||^2` of one row.
pub fn smooth_loss(w: &[f64], s: &[f64]) -> f64 {
    let d = dense_d(w.len());
    let r: Vec<f64> = w.iter().zip(s).map(|(a, b)| a - b).collect();
    matvec(&d, &r).iter().map(|v| v * v).sum::<f64>() / 2.0
}

/// Sum of [`smooth_loss`] over the rows of a series.
pub fn smooth_loss_block(w: &coburst::PairSeries, s: &[f64]) -> f64 {
    let t = w.periods();
    (0..w.rows()).map(|r| smooth_loss(w.row(r), &s[r * t..(r + 1) * t])).sum()
}

pub fn full_objective(w: &[f64], s: &[f64], lambda: f64) -> f64 {
    smooth_loss(w, s) + lambda * s.iter().map(|v| v.abs()).sum::<f64>()
}

/// Plain (non-accelerated) proximal gradient with step `1/L`, `L` taken as
/// the dense `||D^T D||_F`, which bounds the spectral norm.
pub fn ista_row(w: &[f64], lambda: f64, iters: usize) -> Vec<f64> {
    let t = w.len();
    let d = dense_d(t);
    let l: f64 = {
        let mut dtd = vec![vec![0.0; t]; t];
        for r in &d {
            for a in 0..t {
                for b in 0..t {
                    dtd[a][b] += r[a] * r[b];
                }
            }
        }
        dtd.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    };
    let mut s = vec![0.0; t];
    for _ in 0..iters {
        let r: Vec<f64> = w.iter().zip(&s).map(|(a, b)| a - b).collect();
        let g: Vec<f64> = matvec_t(&d, &matvec(&d, &r)).iter().map(|v| -v).collect();
        for k in 0..t {
            let x = s[k] - g[k] / l;
            let tau = lambda / l;
            s[k] = if x > tau {
                x - tau
            } else if x < -tau {
                x + tau
            } else {
                0.0
            };
        }
    }
    s
}

/// Exhaustive two-state search. Emission cost is the negative binomial
/// log-likelihood without the coefficient; entering the burst state costs
/// `gamma ln T`. Among optimal sequences (within `tie` relative) returns
/// the lexicographically smallest with base < burst.
pub fn kleinberg_enumerate(counts: &[f64], totals: &[f64], s: f64, gamma: f64, tie: f64) -> Vec<bool> {
    let t = counts.len();
    let p0 = counts.iter().sum::<f64>() / totals.iter().sum::<f64>();
    if p0 == 0.0 {
        return vec![false; t];
    }
    let rates = [p0.min(1.0 - 1e-9), (s * p0).min(1.0 - 1e-9)];
    let emit = |k: usize, q: usize| {
        let p = rates[q];
        -(counts[k] * p.ln() + (totals[k] - counts[k]) * (1.0 - p).ln())
    };
    let enter = gamma * (t as f64).ln();
    let cost = |mask: u32| {
        let mut c = 0.0;
        let mut prev = 0;
        for k in 0..t {
            // Bit for period 0 is the most significant so that numeric
            // order equals lexicographic order.
            let q = ((mask >> (t - 1 - k)) & 1) as usize;
            if prev == 0 && q == 1 {
                c += enter;
            }
            c += emit(k, q);
            prev = q;
        }
        c
    };
    let costs: Vec<f64> = (0..1u32 << t).map(cost).collect();
    let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let mask = (0..1u32 << t)
        .find(|&m| costs[m as usize] <= best + tie * (1.0 + best.abs()))
        .unwrap();
    (0..t).map(|k| (mask >> (t - 1 - k)) & 1 == 1).collect()
}

/// Newman modularity of a dense symmetric adjacency matrix.
pub fn modularity(adj: &[Vec<f64>], part: &[usize]) -> f64 {
    let n = adj.len();
    let deg: Vec<f64> = adj.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = deg.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for a in 0..n {
        for b in 0..n {
            if part[a] == part[b] {
                q += adj[a][b] - deg[a] * deg[b] / two_m;
            }
        }
    }
    q / two_m
}

/// Best modularity over all set partitions (restricted growth strings).
pub fn best_modularity(adj: &[Vec<f64>]) -> f64 {
    fn rec(adj: &[Vec<f64>], part: &mut Vec<usize>, max_label: usize, best: &mut f64) {
        if part.len() == adj.len() {
            *best = best.max(modularity(adj, part));
            return;
        }
        for c in 0..=max_label + 1 {
            part.push(c);
            rec(adj, part, max_label.max(c), best);
            part.pop();
        }
    }
    if adj.is_empty() {
        return 0.0;
    }
    let mut best = f64::NEG_INFINITY;
    let mut part = vec![0];
    rec(adj, &mut part, 0, &mut best);
    best
}

/// Subtracts the lower median, `x_(ceil(T/2))`. Optimal rows differ only by
/// constants, and this picks the one whose lower median is zero.
pub fn canonical(row: &[f64]) -> Vec<f64> {
    let mut sorted = row.to_vec();
    sorted.sort_by(f64::total_cmp);
    let c = sorted[(row.len() - 1) / 2];
    row.iter().map(|v| v - c).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
