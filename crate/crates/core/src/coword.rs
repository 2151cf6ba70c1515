//! Per-period co-word counts and the stacked pair-by-period weight matrix.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{TokenizedDocument, VocabularyIndex, WordId};
use crate::error::{Error, Result};

/// Unordered word pair stored canonically with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairKey {
    pub i: WordId,
    pub j: WordId,
}

impl PairKey {
    /// Canonical key for the pair `{a, b}`; `a == b` is rejected.
    pub fn new(a: WordId, b: WordId) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(PairKey { i: a, j: b }),
            std::cmp::Ordering::Greater => Ok(PairKey { i: b, j: a }),
            std::cmp::Ordering::Equal => Err(Error::Config(format!("self-pair ({a}, {a})"))),
        }
    }

    /// Row index of this pair in the full upper-triangular ordering over an
    /// `m`-word vocabulary.
    pub fn dense_index(&self, m: usize) -> usize {
        let (i, j) = (self.i as usize, self.j as usize);
        i * m - i * (i + 1) / 2 + (j - i - 1)
    }
}

/// Document co-occurrence counts `n_t(i, j)` for one period.
pub type PairCounts = BTreeMap<PairKey, u64>;

/// Counts, for every word pair, the documents containing both words. Tokens
/// missing from `vocab` are ignored.
pub fn count_pairs(subset: &[TokenizedDocument], vocab: &VocabularyIndex) -> PairCounts {
    let merged = subset
        .par_iter()
        .fold(HashMap::<PairKey, u64>::new, |mut acc, doc| {
            let mut ids = vocab.ids_of(doc);
            ids.sort_unstable();
            ids.dedup();
            for (a, &i) in ids.iter().enumerate() {
                for &j in &ids[a + 1..] {
                    *acc.entry(PairKey { i, j }).or_default() += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    merged.into_iter().collect()
}

/// `n / |Omega(t)|`.
pub fn edge_weight(n: u64, omega_size: u64) -> Result<f64> {
    if omega_size == 0 {
        return Err(Error::ZeroCollection { period: 0 });
    }
    Ok(n as f64 / omega_size as f64)
}

/// The stacked matrix `W`: one row per observed word pair, one column per
/// period. Pairs that never co-occur are not stored; their rows are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSeries {
    pairs: Vec<PairKey>,
    weights: Vec<f64>,
    periods: usize,
    vocab_size: usize,
    omega_sizes: Vec<u64>,
}

impl PairSeries {
    /// Validating constructor. `weights` is row-major with `periods` columns.
    /// Pairs must be strictly increasing, weights finite and non-negative,
    /// and every row must have a nonzero entry.
    pub fn from_rows(
        pairs: Vec<PairKey>,
        weights: Vec<f64>,
        periods: usize,
        vocab_size: usize,
        omega_sizes: Vec<u64>,
    ) -> Result<Self> {
        if periods < 2 {
            return Err(Error::Config(format!(
                "at least 2 periods are needed to take column differences, got {periods}"
            )));
        }
        if weights.len() != pairs.len() * periods {
            return Err(Error::Shape {
                expected: format!("{} x {periods} weights", pairs.len()),
                found: format!("{} values", weights.len()),
            });
        }
        if omega_sizes.len() != periods {
            return Err(Error::Shape {
                expected: format!("{periods} collection sizes"),
                found: omega_sizes.len().to_string(),
            });
        }
        if let Some(t) = omega_sizes.iter().position(|&o| o == 0) {
            return Err(Error::ZeroCollection { period: t + 1 });
        }
        if let Some(w) = pairs.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "pairs must be strictly increasing: {:?} then {:?}",
                w[0], w[1]
            )));
        }
        for (r, p) in pairs.iter().enumerate() {
            if p.i >= p.j || p.j as usize >= vocab_size {
                return Err(Error::Config(format!(
                    "pair {p:?} invalid for vocabulary of {vocab_size} words"
                )));
            }
            let row = &weights[r * periods..(r + 1) * periods];
            if row.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::Config(format!("row {r} has a negative or non-finite weight")));
            }
            if row.iter().all(|&w| w == 0.0) {
                return Err(Error::Config(format!("row {r} ({p:?}) is identically zero")));
            }
        }
        Ok(PairSeries {
            pairs,
            weights,
            periods,
            vocab_size,
            omega_sizes,
        })
    }

    /// Like [`from_rows`](Self::from_rows) but silently drops all-zero rows.
    pub fn from_rows_dropping_zeros(
        pairs: Vec<PairKey>,
        weights: Vec<f64>,
        periods: usize,
        vocab_size: usize,
        omega_sizes: Vec<u64>,
    ) -> Result<Self> {
        if periods == 0 || weights.len() != pairs.len() * periods {
            return Self::from_rows(pairs, weights, periods, vocab_size, omega_sizes);
        }
        let mut kept_pairs = Vec::with_capacity(pairs.len());
        let mut kept = Vec::with_capacity(weights.len());
        for (p, row) in pairs.into_iter().zip(weights.chunks_exact(periods)) {
            if row.iter().any(|&w| w != 0.0) {
                kept_pairs.push(p);
                kept.extend_from_slice(row);
            }
        }
        Self::from_rows(kept_pairs, kept, periods, vocab_size, omega_sizes)
    }

    pub fn pairs(&self) -> &[PairKey] {
        &self.pairs
    }

    /// Row-major weight block.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.periods..(r + 1) * self.periods]
    }

    pub fn rows(&self) -> usize {
        self.pairs.len()
    }

    /// Number of periods `T`.
    pub fn periods(&self) -> usize {
        self.periods
    }

    /// Vocabulary size `M`.
    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn omega_sizes(&self) -> &[u64] {
        &self.omega_sizes
    }

    /// `N = M(M-1)/2`, the row count of the unrestricted matrix.
    pub fn full_rows(&self) -> u128 {
        let m = self.vocab_size as u128;
        m * m.saturating_sub(1) / 2
    }

    pub fn row_of(&self, pair: PairKey) -> Option<usize> {
        self.pairs.binary_search(&pair).ok()
    }

    /// `W_t(a, b)` for 1-based period `t`; symmetric in `a` and `b`.
    pub fn weight(&self, a: WordId, b: WordId, t: usize) -> f64 {
        assert!((1..=self.periods).contains(&t), "period {t} out of range");
        PairKey::new(a, b)
            .ok()
            .and_then(|p| self.row_of(p))
            .map_or(0.0, |r| self.weights[r * self.periods + t - 1])
    }

    /// Recovers integer counts `n_t = W_t * |Omega(t)|` (rounded).
    pub fn counts_row(&self, r: usize) -> Vec<f64> {
        self.row(r)
            .iter()
            .zip(&self.omega_sizes)
            .map(|(w, &o)| (w * o as f64).round())
            .collect()
    }

    /// Writes the text form:
    ///
    /// ```text
    /// # coburst pair-series v1
    /// M <vocab size>
    /// T <periods>
    /// rows <row count>
    /// omega <|Omega(1)|> ... <|Omega(T)|>
    /// <i> <j> <w_1> ... <w_T>
    /// ```
    ///
    /// Weights use the shortest decimal form that parses back to the same
    /// `f64`.
    pub fn write_text(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "# coburst pair-series v1")?;
        writeln!(out, "M {}", self.vocab_size)?;
        writeln!(out, "T {}", self.periods)?;
        writeln!(out, "rows {}", self.pairs.len())?;
        write!(out, "omega")?;
        for o in &self.omega_sizes {
            write!(out, " {o}")?;
        }
        writeln!(out)?;
        let mut line = String::new();
        for (r, p) in self.pairs.iter().enumerate() {
            use std::fmt::Write as _;
            line.clear();
            let _ = write!(line, "{} {}", p.i, p.j);
            for w in self.row(r) {
                let _ = write!(line, " {w}");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text(input: impl BufRead) -> Result<Self> {
        const CTX: &str = "pair series";
        let mut lines = input
            .lines()
            .enumerate()
            .map(|(i, l)| l.map(|l| (i + 1, l)))
            .filter(|r| r.as_ref().map_or(true, |(_, l)| !l.trim().is_empty() && !l.starts_with('#')));
        let mut header = |key: &str| -> Result<(usize, Vec<String>)> {
            let (n, line) = lines
                .next()
                .ok_or_else(|| Error::parse(CTX, 0, format!("missing `{key}` header")))?
                .map_err(|e| Error::parse(CTX, 0, e.to_string()))?;
            let mut parts = line.split_whitespace().map(String::from);
            if parts.next().as_deref() != Some(key) {
                return Err(Error::parse(CTX, n, format!("expected `{key}` header")));
            }
            Ok((n, parts.collect()))
        };
        let single = |(n, v): (usize, Vec<String>)| -> Result<usize> {
            match v.as_slice() {
                [x] => x.parse().map_err(|_| Error::parse(CTX, n, "bad integer")),
                _ => Err(Error::parse(CTX, n, "expected one value")),
            }
        };
        let m = single(header("M")?)?;
        let t = single(header("T")?)?;
        let rows = single(header("rows")?)?;
        let (n, omega) = header("omega")?;
        let omega_sizes = omega
            .iter()
            .map(|o| o.parse::<u64>().map_err(|_| Error::parse(CTX, n, "bad collection size")))
            .collect::<Result<Vec<_>>>()?;
        let mut pairs = Vec::with_capacity(rows);
        let mut weights = Vec::with_capacity(rows * t);
        for item in lines {
            let (n, line) = item.map_err(|e| Error::parse(CTX, 0, e.to_string()))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != t + 2 {
                return Err(Error::parse(CTX, n, format!("expected {} fields", t + 2)));
            }
            let i: WordId = fields[0].parse().map_err(|_| Error::parse(CTX, n, "bad word id"))?;
            let j: WordId = fields[1].parse().map_err(|_| Error::parse(CTX, n, "bad word id"))?;
            pairs.push(PairKey { i, j });
            for f in &fields[2..] {
                weights.push(f.parse::<f64>().map_err(|_| Error::parse(CTX, n, "bad weight"))?);
            }
        }
        if pairs.len() != rows {
            return Err(Error::parse(
                CTX,
                0,
                format!("header declares {rows} rows, found {}", pairs.len()),
            ));
        }
        Self::from_rows(pairs, weights, t, m, omega_sizes)
    }
}

/// Stacks per-period counts into `W`, one column per period. Rows are the
/// union of observed pairs in sorted order.
pub fn stack(per_period: &[PairCounts], vocab_size: usize, omega_sizes: &[u64]) -> Result<PairSeries> {
    let periods = per_period.len();
    if periods < 2 {
        return Err(Error::Config(format!(
            "at least 2 periods are needed to take column differences, got {periods}"
        )));
    }
    if omega_sizes.len() != periods {
        return Err(Error::Shape {
            expected: format!("{periods} collection sizes"),
            found: omega_sizes.len().to_string(),
        });
    }
    let mut rows: BTreeMap<PairKey, Vec<f64>> = BTreeMap::new();
    for (t, counts) in per_period.iter().enumerate() {
        let omega = omega_sizes[t];
        for (&pair, &n) in counts {
            if n == 0 {
                continue;
            }
            if n > omega {
                return Err(Error::Config(format!(
                    "count {n} for {pair:?} exceeds collection size {omega} in period {}",
                    t + 1
                )));
            }
            let w = edge_weight(n, omega).map_err(|_| Error::ZeroCollection { period: t + 1 })?;
            rows.entry(pair).or_insert_with(|| vec![0.0; periods])[t] = w;
        }
    }
    let mut pairs = Vec::with_capacity(rows.len());
    let mut weights = Vec::with_capacity(rows.len() * periods);
    for (p, row) in rows {
        pairs.push(p);
        weights.extend(row);
    }
    PairSeries::from_rows(pairs, weights, periods, vocab_size, omega_sizes.to_vec())
}

/// Counts every period of a binned corpus and stacks the result.
pub fn build_pair_series(
    corpus: &crate::corpus::BinnedCorpus,
    vocab: &VocabularyIndex,
) -> Result<PairSeries> {
    let per_period: Vec<PairCounts> = corpus.subsets.iter().map(|s| count_pairs(s, vocab)).collect();
    stack(&per_period, vocab.len(), &corpus.omega_sizes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(lists: &[&[&str]]) -> Vec<TokenizedDocument> {
        lists
            .iter()
            .enumerate()
            .map(|(k, toks)| TokenizedDocument {
                id: k.to_string(),
                year: 2000,
                period: Some(1),
                tokens: toks.iter().map(|s| s.to_string()).collect(),
            })
            .collect()
    }

    fn abc() -> VocabularyIndex {
        VocabularyIndex::from_counts(["a", "b", "c", "x", "y"].iter().map(|w| (w.to_string(), 1)))
    }

    #[test]
    fn count_two_docs() {
        let v = abc();
        let c = count_pairs(&docs(&[&["a", "b", "c"], &["a", "b"]]), &v);
        assert_eq!(c.len(), 3);
        assert_eq!(c[&PairKey::new(0, 1).unwrap()], 2);
        assert_eq!(c[&PairKey::new(0, 2).unwrap()], 1);
        assert_eq!(c[&PairKey::new(1, 2).unwrap()], 1);
    }

    #[test]
    fn count_single_token_and_repeats() {
        let v = abc();
        assert!(count_pairs(&docs(&[&["a"]]), &v).is_empty());
        let many: Vec<&[&str]> = vec![&["x", "y"]; 50];
        let c = count_pairs(&docs(&many), &v);
        assert_eq!(c[&PairKey::new(3, 4).unwrap()], 50);
    }

    #[test]
    fn edge_weight_examples() {
        assert_eq!(edge_weight(2, 50).unwrap(), 0.04);
        assert_eq!(edge_weight(0, 50).unwrap(), 0.0);
        assert!(matches!(edge_weight(1, 0), Err(Error::ZeroCollection { .. })));
    }

    #[test]
    fn pair_key_canonical() {
        assert_eq!(PairKey::new(5, 2).unwrap(), PairKey { i: 2, j: 5 });
        assert!(PairKey::new(3, 3).is_err());
        let keys: Vec<usize> = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| PairKey { i, j }.dense_index(3))
            .collect();
        assert_eq!(keys, [0, 1, 2]);
    }

    #[test]
    fn stack_fully_observed() {
        let v = abc();
        let c = count_pairs(&docs(&[&["a", "b", "c"]]), &v);
        let w = stack(&[c.clone(), c], 3, &[1, 1]).unwrap();
        assert_eq!(w.rows(), 3);
        assert_eq!(
            w.pairs(),
            &[PairKey { i: 0, j: 1 }, PairKey { i: 0, j: 2 }, PairKey { i: 1, j: 2 }]
        );
        assert_eq!(w.full_rows(), 3);
    }

    #[test]
    fn stack_single_period_observation() {
        let p = PairKey::new(0, 1).unwrap();
        let per = vec![
            PairCounts::new(),
            PairCounts::from([(p, 3)]),
            PairCounts::new(),
            PairCounts::new(),
        ];
        let w = stack(&per, 2, &[10, 10, 10, 10]).unwrap();
        assert_eq!(w.row(0), &[0.0, 0.3, 0.0, 0.0]);
        assert_eq!(w.weight(1, 0, 2), 0.3);
        assert_eq!(w.weight(0, 1, 2), 0.3);
    }

    #[test]
    fn stack_needs_two_periods() {
        assert!(matches!(stack(&[PairCounts::new()], 2, &[1]), Err(Error::Config(_))));
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let pairs = vec![PairKey { i: 0, j: 3 }, PairKey { i: 1, j: 2 }];
        let weights = vec![0.1, 1.0 / 3.0, 0.0, 2.0e-17, 0.7, f64::MIN_POSITIVE];
        let w = PairSeries::from_rows(pairs, weights, 3, 4, vec![7, 8, 9]).unwrap();
        let mut buf = Vec::new();
        w.write_text(&mut buf).unwrap();
        let back = PairSeries::read_text(&buf[..]).unwrap();
        assert_eq!(back, w);
        for (a, b) in back.weights().iter().zip(w.weights()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn from_rows_validates() {
        let p = vec![PairKey { i: 0, j: 1 }];
        assert!(PairSeries::from_rows(p.clone(), vec![0.0, 0.0], 2, 2, vec![1, 1]).is_err());
        assert!(PairSeries::from_rows(p.clone(), vec![-0.1, 0.2], 2, 2, vec![1, 1]).is_err());
        assert!(PairSeries::from_rows(p.clone(), vec![0.1, 0.2], 2, 1, vec![1, 1]).is_err());
        assert!(PairSeries::from_rows(p, vec![0.1, 0.2], 2, 2, vec![1, 0]).is_err());
    }
}
