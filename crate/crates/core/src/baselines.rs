//! Comparison burst detectors: three thresholding rules and Kleinberg's
//! two-state automaton.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coword::{PairKey, PairSeries};
use crate::error::{Error, Result};

/// One detection: a word pair flagged at a 1-based period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstPoint {
    pub pair: PairKey,
    pub period: usize,
    pub score: f64,
}

/// Detections of one detector run, sorted by `(pair, period)` and free of
/// duplicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstSet {
    pub detector: String,
    pub params: BTreeMap<String, f64>,
    bursts: Vec<BurstPoint>,
}

impl BurstSet {
    /// Sorts the points and keeps the first of any duplicate `(pair, period)`.
    pub fn new(
        detector: impl Into<String>,
        params: impl IntoIterator<Item = (String, f64)>,
        mut bursts: Vec<BurstPoint>,
    ) -> Self {
        bursts.sort_by_key(|b| (b.pair, b.period));
        bursts.dedup_by_key(|b| (b.pair, b.period));
        BurstSet {
            detector: detector.into(),
            params: params.into_iter().collect(),
            bursts,
        }
    }

    pub fn bursts(&self) -> &[BurstPoint] {
        &self.bursts
    }

    pub fn len(&self) -> usize {
        self.bursts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bursts.is_empty()
    }

    pub fn contains(&self, pair: PairKey, period: usize) -> bool {
        self.bursts
            .binary_search_by_key(&(pair, period), |b| (b.pair, b.period))
            .is_ok()
    }

    /// `i<TAB>j<TAB>t<TAB>score<TAB>detector` per detection.
    pub fn write_tsv(&self, mut out: impl Write) -> std::io::Result<()> {
        for b in &self.bursts {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                b.pair.i, b.pair.j, b.period, b.score, self.detector
            )?;
        }
        Ok(())
    }
}

fn threshold_rows(
    w: &PairSeries,
    detector: &str,
    param: (&str, f64),
    score: impl Fn(&[f64], usize) -> Option<f64> + Sync,
) -> Result<BurstSet> {
    if !(param.1 >= 0.0) {
        return Err(Error::Config(format!("{} must be >= 0, got {}", param.0, param.1)));
    }
    let bursts = w
        .pairs()
        .par_iter()
        .enumerate()
        .flat_map_iter(|(r, &pair)| {
            let row = w.row(r);
            let score = &score;
            (0..row.len()).filter_map(move |t| {
                score(row, t)
                    .filter(|&s| s > param.1)
                    .map(|s| BurstPoint {
                        pair,
                        period: t + 1,
                        score: s,
                    })
            })
        })
        .collect();
    Ok(BurstSet::new(detector, [(param.0.to_string(), param.1)], bursts))
}

/// Flags `(pair, t)` when `W_t > tau1`.
pub fn threshold_raw(w: &PairSeries, tau1: f64) -> Result<BurstSet> {
    threshold_rows(w, "raw", ("tau1", tau1), |row, t| Some(row[t]))
}

/// Flags `(pair, t)` for `t >= 2` when `W_t - W_{t-1} > tau2`.
pub fn threshold_derivative(w: &PairSeries, tau2: f64) -> Result<BurstSet> {
    threshold_rows(w, "derivative", ("tau2", tau2), |row, t| {
        (t > 0).then(|| row[t] - row[t - 1])
    })
}

/// Flags `(pair, t)` when `W_t` exceeds the row mean over all periods by
/// more than `tau3`.
pub fn threshold_mean_deviation(w: &PairSeries, tau3: f64) -> Result<BurstSet> {
    threshold_rows(w, "mean_deviation", ("tau3", tau3), |row, t| {
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        Some(row[t] - mean)
    })
}

/// Parameters of the two-state automaton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KleinbergParams {
    /// Ratio of burst-state to base-state emission rate, `s > 1`.
    pub s: f64,
    /// Weight of the cost of entering the burst state, `gamma >= 0`.
    pub gamma: f64,
}

impl Default for KleinbergParams {
    fn default() -> Self {
        KleinbergParams { s: 2.0, gamma: 1.0 }
    }
}

impl KleinbergParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 1.0 && self.s.is_finite()) {
            return Err(Error::Config(format!("kleinberg s must be > 1, got {}", self.s)));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::Config(format!("kleinberg gamma must be >= 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Optimal state sequence of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct KleinbergOutcome {
    /// `true` where the automaton is in the burst state.
    pub states: Vec<bool>,
    /// Emission-cost saving of the burst state over the base state, per
    /// period.
    pub savings: Vec<f64>,
}

impl KleinbergOutcome {
    /// 1-based periods in the burst state with their savings as scores.
    pub fn burst_periods(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.states
            .iter()
            .zip(&self.savings)
            .enumerate()
            .filter(|(_, (b, _))| **b)
            .map(|(t, (_, s))| (t + 1, *s))
    }
}

/// Relative tolerance under which two path costs count as tied. Ties go to
/// the base state at the earliest period where the paths differ.
pub const KLEINBERG_TIE_EPS: f64 = 1e-12;

/// Per-period emission costs `-ln p^n (1-p)^(N-n)` for the base and burst
/// states. The binomial coefficient is the same for both states and is
/// left out.
pub fn kleinberg_costs(counts: &[f64], totals: &[f64], params: &KleinbergParams) -> Result<Option<[Vec<f64>; 2]>> {
    params.validate()?;
    if counts.len() != totals.len() {
        return Err(Error::Shape {
            expected: format!("{} totals", counts.len()),
            found: totals.len().to_string(),
        });
    }
    if counts.len() < 2 {
        return Err(Error::Config("kleinberg needs at least 2 periods".into()));
    }
    for (t, (&n, &total)) in counts.iter().zip(totals).enumerate() {
        if !(n >= 0.0 && total >= n && total > 0.0) {
            return Err(Error::Config(format!(
                "period {}: need 0 <= count <= total and total > 0, got {n} / {total}",
                t + 1
            )));
        }
    }
    let n_sum: f64 = counts.iter().sum();
    let total_sum: f64 = totals.iter().sum();
    let p0 = n_sum / total_sum;
    if p0 == 0.0 {
        return Ok(None);
    }
    let p1 = (params.s * p0).min(1.0 - 1e-9);
    let p0 = p0.min(1.0 - 1e-9);
    let cost = |p: f64| -> Vec<f64> {
        let (lp, lq) = (p.ln(), (1.0 - p).ln());
        counts
            .iter()
            .zip(totals)
            .map(|(&n, &total)| -(n * lp + (total - n) * lq))
            .collect()
    };
    Ok(Some([cost(p0), cost(p1)]))
}

/// Kleinberg's two-state automaton solved exactly by dynamic programming.
///
/// The base rate is `p0 = sum(n_t) / sum(N_t)` and the burst rate
/// `p1 = s p0`, capped just below 1. Entering the burst state costs
/// `gamma ln T`; leaving it is free. The automaton starts in the base state.
/// A series that never occurs (`p0 = 0`) has no bursts.
pub fn kleinberg(counts: &[f64], totals: &[f64], params: &KleinbergParams) -> Result<KleinbergOutcome> {
    let periods = counts.len();
    let Some([base, burst]) = kleinberg_costs(counts, totals, params)? else {
        return Ok(KleinbergOutcome {
            states: vec![false; periods],
            savings: vec![0.0; periods],
        });
    };
    let enter = params.gamma * (periods as f64).ln();
    let trans = |from: usize, to: usize| if from == 0 && to == 1 { enter } else { 0.0 };
    let emit = |t: usize, q: usize| if q == 0 { base[t] } else { burst[t] };

    // togo[t][q]: cheapest cost of periods t.. given state q at period t.
    let mut togo = vec![[0.0_f64; 2]; periods];
    togo[periods - 1] = [emit(periods - 1, 0), emit(periods - 1, 1)];
    for t in (0..periods - 1).rev() {
        for q in 0..2 {
            let next = (0..2)
                .map(|r| trans(q, r) + togo[t + 1][r])
                .fold(f64::INFINITY, f64::min);
            togo[t][q] = emit(t, q) + next;
        }
    }
    let mut states = Vec::with_capacity(periods);
    let mut prev = 0;
    for cost in &togo {
        let stay_base = trans(prev, 0) + cost[0];
        let go_burst = trans(prev, 1) + cost[1];
        let q = usize::from(strictly_less(go_burst, stay_base));
        states.push(q == 1);
        prev = q;
    }
    let savings = base.iter().zip(&burst).map(|(b, u)| b - u).collect();
    Ok(KleinbergOutcome { states, savings })
}

/// `a < b` by more than the tie tolerance.
pub fn strictly_less(a: f64, b: f64) -> bool {
    a < b - KLEINBERG_TIE_EPS * (1.0 + a.abs().max(b.abs()))
}

/// Runs [`kleinberg`] on every row, using `counts` (row-major, same shape
/// as `w`) against per-period `totals`.
pub fn kleinberg_rows(
    w: &PairSeries,
    counts: &[f64],
    totals: &[f64],
    params: &KleinbergParams,
) -> Result<BurstSet> {
    params.validate()?;
    let t = w.periods();
    if counts.len() != w.rows() * t {
        return Err(Error::Shape {
            expected: format!("{} x {t} counts", w.rows()),
            found: counts.len().to_string(),
        });
    }
    let per_row: Vec<Vec<BurstPoint>> = w
        .pairs()
        .par_iter()
        .zip(counts.par_chunks(t))
        .map(|(&pair, c)| {
            let out = kleinberg(c, totals, params)?;
            Ok(out
                .burst_periods()
                .map(|(period, score)| BurstPoint { pair, period, score })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(BurstSet::new(
        "kleinberg",
        [("s".to_string(), params.s), ("gamma".to_string(), params.gamma)],
        per_row.into_iter().flatten().collect(),
    ))
}

/// Kleinberg on a corpus-derived series: counts are recovered as
/// `W_t |Omega(t)|` with `|Omega(t)|` trials.
pub fn kleinberg_series(w: &PairSeries, params: &KleinbergParams) -> Result<BurstSet> {
    let counts: Vec<f64> = (0..w.rows()).flat_map(|r| w.counts_row(r)).collect();
    let totals: Vec<f64> = w.omega_sizes().iter().map(|&o| o as f64).collect();
    kleinberg_rows(w, &counts, &totals, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_row(row: &[f64]) -> PairSeries {
        PairSeries::from_rows(vec![PairKey { i: 0, j: 1 }], row.to_vec(), row.len(), 2, vec![100; row.len()]).unwrap()
    }

    fn periods(s: &BurstSet) -> Vec<usize> {
        s.bursts().iter().map(|b| b.period).collect()
    }

    #[test]
    fn raw_threshold() {
        let w = one_row(&[0.1, 0.5, 0.1]);
        assert_eq!(periods(&threshold_raw(&w, 0.3).unwrap()), [2]);
        assert_eq!(periods(&threshold_raw(&w, 0.0).unwrap()), [1, 2, 3]);
        assert!(threshold_raw(&w, 0.5).unwrap().is_empty());
        assert!(threshold_raw(&w, -1.0).is_err());
    }

    #[test]
    fn derivative_threshold() {
        let w = one_row(&[0.1, 0.5, 0.5]);
        let b = threshold_derivative(&w, 0.3).unwrap();
        assert_eq!(periods(&b), [2]);
        assert!((b.bursts()[0].score - 0.4).abs() < 1e-15);
        assert!(threshold_derivative(&one_row(&[0.2, 0.2, 0.2]), 0.0).unwrap().is_empty());
        // t = 1 has no predecessor, even for a huge first value.
        assert!(!threshold_derivative(&one_row(&[0.9, 0.0, 0.0]), 0.0)
            .unwrap()
            .contains(PairKey { i: 0, j: 1 }, 1));
    }

    #[test]
    fn mean_deviation_threshold() {
        let w = one_row(&[0.0, 0.0, 0.9]);
        assert_eq!(periods(&threshold_mean_deviation(&w, 0.5).unwrap()), [3]);
        assert!(threshold_mean_deviation(&one_row(&[0.25; 4]), 0.01).unwrap().is_empty());
        let w = one_row(&[0.1, 0.4, 0.1, 0.6]);
        assert_eq!(periods(&threshold_mean_deviation(&w, 0.0).unwrap()), [2, 4]);
    }

    #[test]
    fn kleinberg_spike_at_end() {
        let p = KleinbergParams { s: 2.0, gamma: 0.1 };
        let out = kleinberg(&[1.0, 1.0, 50.0], &[100.0; 3], &p).unwrap();
        assert_eq!(out.states, [false, false, true]);
        assert!(out.savings[2] > 0.0);
    }

    #[test]
    fn kleinberg_never_occurring() {
        let out = kleinberg(&[0.0; 4], &[10.0; 4], &KleinbergParams::default()).unwrap();
        assert_eq!(out.states, [false; 4]);
    }

    #[test]
    fn kleinberg_huge_gamma_stays_base() {
        let p = KleinbergParams { s: 2.0, gamma: 1e12 };
        let out = kleinberg(&[0.0, 0.0, 90.0, 0.0], &[100.0; 4], &p).unwrap();
        assert_eq!(out.states, [false; 4]);
    }

    #[test]
    fn kleinberg_rejects_bad_input() {
        let p = KleinbergParams::default();
        assert!(kleinberg(&[5.0, 1.0], &[2.0, 2.0], &p).is_err());
        assert!(kleinberg(&[1.0], &[2.0], &p).is_err());
        assert!(kleinberg(&[1.0, 1.0], &[2.0, 2.0], &KleinbergParams { s: 1.0, gamma: 1.0 }).is_err());
    }

    #[test]
    fn kleinberg_series_uses_counts() {
        let w = one_row(&[0.01, 0.01, 0.5]);
        let b = kleinberg_series(&w, &KleinbergParams { s: 2.0, gamma: 0.1 }).unwrap();
        assert_eq!(periods(&b), [3]);
        assert_eq!(b.detector, "kleinberg");
    }

    #[test]
    fn burst_set_dedups_and_sorts() {
        let p = PairKey { i: 0, j: 1 };
        let q = PairKey { i: 0, j: 2 };
        let s = BurstSet::new(
            "x",
            [],
            vec![
                BurstPoint { pair: q, period: 1, score: 1.0 },
                BurstPoint { pair: p, period: 2, score: 1.0 },
                BurstPoint { pair: p, period: 2, score: 3.0 },
            ],
        );
        assert_eq!(s.len(), 2);
        assert_eq!(s.bursts()[0].pair, p);
        let mut buf = Vec::new();
        s.write_tsv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0\t1\t2\t1\tx\n0\t2\t1\t1\tx\n");
    }
}
