//! Title ingestion, normalization, temporal binning and the word index.

pub mod porter;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer word id in `0..M`.
pub type WordId = u32;

static DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// One paper: an opaque id, its raw title and publication year.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub year: i32,
}

/// Field names used to read documents out of JSON-lines records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSchema {
    pub title: String,
    pub year: String,
    pub id: Option<String>,
}

impl Default for FieldSchema {
    fn default() -> Self {
        FieldSchema {
            title: "title".into(),
            year: "year".into(),
            id: Some("id".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRecord {
    /// 1-based line number in the input file.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct IngestReport {
    pub documents: Vec<Document>,
    pub skipped: Vec<SkippedRecord>,
}

/// Reads a JSON-lines corpus. Records without a usable title or year are
/// skipped and reported; an input with no valid record at all is an error.
///
/// `year_range`, when given, is inclusive; records outside it are skipped.
pub fn ingest(
    path: impl AsRef<Path>,
    schema: &FieldSchema,
    year_range: Option<(i32, i32)>,
) -> Result<IngestReport> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut documents = Vec::new();
    let mut skipped = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line, schema, line_no) {
            Ok(doc) => match year_range {
                Some((lo, hi)) if doc.year < lo || doc.year > hi => skipped.push(SkippedRecord {
                    line: line_no,
                    reason: format!("year {} outside [{lo}, {hi}]", doc.year),
                }),
                _ => documents.push(doc),
            },
            Err(reason) => skipped.push(SkippedRecord {
                line: line_no,
                reason,
            }),
        }
    }
    if documents.is_empty() {
        return Err(Error::EmptyCorpus {
            skipped: skipped.len(),
        });
    }
    Ok(IngestReport { documents, skipped })
}

fn parse_record(
    line: &str,
    schema: &FieldSchema,
    line_no: usize,
) -> std::result::Result<Document, String> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("record is not a JSON object")?;
    let title = obj
        .get(&schema.title)
        .and_then(|v| v.as_str())
        .ok_or_else(|| format!("missing string field `{}`", schema.title))?;
    if title.trim().is_empty() {
        return Err("empty title".into());
    }
    let year = match obj.get(&schema.year) {
        Some(serde_json::Value::Number(n)) => n.as_i64(),
        Some(serde_json::Value::String(s)) => s.trim().parse::<i64>().ok(),
        _ => None,
    }
    .and_then(|y| i32::try_from(y).ok())
    .ok_or_else(|| format!("missing or non-integer field `{}`", schema.year))?;
    let id = schema
        .id
        .as_ref()
        .and_then(|f| obj.get(f))
        .map(|v| match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .unwrap_or_else(|| format!("line-{line_no}"));
    Ok(Document {
        id,
        title: title.to_string(),
        year,
    })
}

/// Stop-word set. Lookups are on lowercase surface forms and on stems.
#[derive(Debug, Clone)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    pub fn from_lines(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_lines(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for StopWords {
    /// The English list shipped in `data/stopwords.txt`.
    fn default() -> Self {
        Self::from_lines(DEFAULT_STOPWORDS)
    }
}

/// A title after normalization and stemming.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub id: String,
    pub year: i32,
    /// 1-based period index, assigned by [`bin`].
    pub period: Option<usize>,
    /// Distinct stems in first-occurrence order.
    pub tokens: Vec<String>,
}

impl TokenizedDocument {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Title normalizer: lowercase, symbol stripping, stop-word removal and
/// Porter stemming.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub stopwords: StopWords,
    /// Tokens shorter than this many characters are dropped.
    pub min_token_chars: usize,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Preprocessor {
            stopwords: StopWords::default(),
            min_token_chars: 2,
        }
    }
}

impl Preprocessor {
    pub fn new(stopwords: StopWords) -> Self {
        Preprocessor {
            stopwords,
            ..Default::default()
        }
    }

    /// Lowercased, symbol-stripped, stop-word-filtered surface tokens, in
    /// title order and with repeats.
    pub fn surface_tokens(&self, title: &str) -> Vec<String> {
        title
            .split_whitespace()
            .filter_map(clean_chunk)
            .filter(|t| self.keep(t))
            .collect()
    }

    /// Surface token paired with its stem, for every token whose stem
    /// survives filtering.
    pub fn stemmed_pairs(&self, title: &str) -> Vec<(String, String)> {
        self.surface_tokens(title)
            .into_iter()
            .filter_map(|surface| {
                let stem = porter::stem(&surface);
                self.keep(&stem).then_some((surface, stem))
            })
            .collect()
    }

    pub fn preprocess(&self, doc: &Document) -> TokenizedDocument {
        let mut seen = HashSet::new();
        let tokens = self
            .stemmed_pairs(&doc.title)
            .into_iter()
            .filter_map(|(_, stem)| seen.insert(stem.clone()).then_some(stem))
            .collect();
        TokenizedDocument {
            id: doc.id.clone(),
            year: doc.year,
            period: None,
            tokens,
        }
    }

    pub fn preprocess_all(&self, docs: &[Document]) -> Vec<TokenizedDocument> {
        docs.par_iter().map(|d| self.preprocess(d)).collect()
    }

    fn keep(&self, token: &str) -> bool {
        token.chars().count() >= self.min_token_chars && !self.stopwords.contains(token)
    }
}

/// Strips everything but alphanumerics and intra-word hyphens from one
/// whitespace-delimited chunk. Pure numbers are dropped.
fn clean_chunk(chunk: &str) -> Option<String> {
    let lowered = chunk.to_lowercase();
    let kept: String = lowered
        .chars()
        .filter(|c| c.is_alphanumeric() || *c == '-')
        .collect();
    let token = kept
        .split('-')
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join("-");
    if token.is_empty() || token.chars().all(|c| c.is_numeric() || c == '-') {
        return None;
    }
    Some(token)
}

/// Convenience wrapper over [`Preprocessor::preprocess`].
pub fn preprocess(doc: &Document, stopwords: &StopWords) -> TokenizedDocument {
    Preprocessor::new(stopwords.clone()).preprocess(doc)
}

/// Inclusive year range cut into consecutive bins of `years_per_bin` years.
/// The last bin is shorter when the span does not divide evenly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinSpec {
    pub start_year: i32,
    pub end_year: i32,
    pub years_per_bin: u32,
}

impl BinSpec {
    pub fn new(start_year: i32, end_year: i32, years_per_bin: u32) -> Result<Self> {
        if years_per_bin == 0 {
            return Err(Error::Config("years_per_bin must be at least 1".into()));
        }
        if end_year < start_year {
            return Err(Error::Config(format!(
                "end year {end_year} precedes start year {start_year}"
            )));
        }
        Ok(BinSpec {
            start_year,
            end_year,
            years_per_bin,
        })
    }

    /// A `BinSpec` covering exactly the years present in `years`.
    pub fn covering(years: impl IntoIterator<Item = i32>, years_per_bin: u32) -> Result<Self> {
        let mut lo = i32::MAX;
        let mut hi = i32::MIN;
        for y in years {
            lo = lo.min(y);
            hi = hi.max(y);
        }
        if lo > hi {
            return Err(Error::EmptyCorpus { skipped: 0 });
        }
        Self::new(lo, hi, years_per_bin)
    }

    pub fn periods(&self) -> usize {
        let span = (self.end_year - self.start_year + 1) as u32;
        span.div_ceil(self.years_per_bin) as usize
    }

    /// 1-based period of `year`, or `None` outside the range.
    pub fn period_of(&self, year: i32) -> Option<usize> {
        if year < self.start_year || year > self.end_year {
            return None;
        }
        Some(((year - self.start_year) as u32 / self.years_per_bin) as usize + 1)
    }

    /// First and last calendar year of a 1-based period.
    pub fn years_of(&self, period: usize) -> (i32, i32) {
        let first = self.start_year + ((period - 1) as u32 * self.years_per_bin) as i32;
        let last = (first + self.years_per_bin as i32 - 1).min(self.end_year);
        (first, last)
    }
}

/// Documents partitioned into `T` exclusive periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCorpus {
    pub bin_spec: BinSpec,
    /// `subsets[t - 1]` holds the documents of period `t`.
    pub subsets: Vec<Vec<TokenizedDocument>>,
}

impl BinnedCorpus {
    pub fn periods(&self) -> usize {
        self.subsets.len()
    }

    /// `|Omega(t)|` for every period, including documents with no tokens.
    pub fn omega_sizes(&self) -> Vec<u64> {
        self.subsets.iter().map(|s| s.len() as u64).collect()
    }

    pub fn len(&self) -> usize {
        self.subsets.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Assigns every document to its period. A document outside the bin range or a
/// period left without documents is a configuration error.
pub fn bin(docs: Vec<TokenizedDocument>, bin_spec: BinSpec) -> Result<BinnedCorpus> {
    let mut subsets = vec![Vec::new(); bin_spec.periods()];
    let mut offenders = Vec::new();
    for mut doc in docs {
        match bin_spec.period_of(doc.year) {
            Some(t) => {
                doc.period = Some(t);
                subsets[t - 1].push(doc);
            }
            None => offenders.push(format!("{} ({})", doc.id, doc.year)),
        }
    }
    if !offenders.is_empty() {
        return Err(Error::Config(format!(
            "{} document(s) outside years {}..={}: {}",
            offenders.len(),
            bin_spec.start_year,
            bin_spec.end_year,
            offenders.join(", ")
        )));
    }
    let empty: Vec<String> = subsets
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_empty())
        .map(|(t, _)| (t + 1).to_string())
        .collect();
    if !empty.is_empty() {
        return Err(Error::Config(format!(
            "period(s) {} contain no documents",
            empty.join(", ")
        )));
    }
    Ok(BinnedCorpus { bin_spec, subsets })
}

/// Bidirectional stem/id map with per-word document counts and display
/// labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyIndex {
    word_to_id: BTreeMap<String, WordId>,
    id_to_word: Vec<String>,
    counts: Vec<u64>,
    label_map: Vec<String>,
}

impl VocabularyIndex {
    /// Builds an index from `(stem, count)` entries, assigning ids in
    /// lexicographic order of stems.
    pub fn from_counts(entries: impl IntoIterator<Item = (String, u64)>) -> Self {
        let sorted: BTreeMap<String, u64> = entries.into_iter().collect();
        let mut word_to_id = BTreeMap::new();
        let mut id_to_word = Vec::with_capacity(sorted.len());
        let mut counts = Vec::with_capacity(sorted.len());
        for (idx, (word, count)) in sorted.into_iter().enumerate() {
            word_to_id.insert(word.clone(), idx as WordId);
            id_to_word.push(word);
            counts.push(count);
        }
        let label_map = id_to_word.clone();
        VocabularyIndex {
            word_to_id,
            id_to_word,
            counts,
            label_map,
        }
    }

    /// Vocabulary size `M`.
    pub fn len(&self) -> usize {
        self.id_to_word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_word.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.word_to_id.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> Option<&str> {
        self.id_to_word.get(id as usize).map(String::as_str)
    }

    pub fn count(&self, id: WordId) -> Option<u64> {
        self.counts.get(id as usize).copied()
    }

    /// Display label; the stem itself until labels are restored.
    pub fn label(&self, id: WordId) -> Option<&str> {
        self.label_map.get(id as usize).map(String::as_str)
    }

    pub fn set_labels(&mut self, labels: &BTreeMap<WordId, String>) {
        for (&id, label) in labels {
            if let Some(slot) = self.label_map.get_mut(id as usize) {
                *slot = label.clone();
            }
        }
    }

    /// Ids of a document's tokens that are in the vocabulary.
    pub fn ids_of(&self, doc: &TokenizedDocument) -> Vec<WordId> {
        doc.tokens.iter().filter_map(|t| self.id(t)).collect()
    }

    /// Writes `id<TAB>stem<TAB>label<TAB>count` lines.
    pub fn write_tsv(&self, mut out: impl Write) -> std::io::Result<()> {
        for (id, word) in self.id_to_word.iter().enumerate() {
            writeln!(
                out,
                "{id}\t{word}\t{}\t{}",
                self.label_map[id], self.counts[id]
            )?;
        }
        Ok(())
    }

    pub fn read_tsv(input: impl BufRead) -> Result<Self> {
        let mut entries = Vec::new();
        let mut labels = BTreeMap::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::parse("vocabulary", idx + 1, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::parse("vocabulary", idx + 1, "expected 4 tab-separated fields"));
            }
            let id: WordId = fields[0]
                .parse()
                .map_err(|_| Error::parse("vocabulary", idx + 1, "bad id"))?;
            let count: u64 = fields[3]
                .parse()
                .map_err(|_| Error::parse("vocabulary", idx + 1, "bad count"))?;
            if id as usize != entries.len() {
                return Err(Error::parse("vocabulary", idx + 1, "ids must be dense and ascending"));
            }
            entries.push((fields[1].to_string(), count));
            labels.insert(id, fields[2].to_string());
        }
        let mut vocab = Self::from_counts(entries.iter().cloned());
        if vocab.len() != entries.len()
            || entries.iter().enumerate().any(|(i, (w, _))| vocab.id(w) != Some(i as WordId))
        {
            return Err(Error::parse(
                "vocabulary",
                0,
                "stems must be unique and listed in lexicographic id order",
            ));
        }
        vocab.set_labels(&labels);
        Ok(vocab)
    }
}

/// Counts, for each stem, the number of documents containing it and keeps
/// those with count at least `min_count`.
pub fn build_vocabulary(corpus: &BinnedCorpus, min_count: u64) -> Result<VocabularyIndex> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus { skipped: 0 });
    }
    let counts = corpus
        .subsets
        .par_iter()
        .flat_map(|s| s.par_iter())
        .fold(HashMap::<&str, u64>::new, |mut acc, doc| {
            for t in &doc.tokens {
                *acc.entry(t.as_str()).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let kept: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(w, c)| (w.to_string(), c))
        .collect();
    if kept.is_empty() {
        return Err(Error::Config(format!(
            "vocabulary is empty after discarding words seen fewer than {min_count} times"
        )));
    }
    Ok(VocabularyIndex::from_counts(kept))
}

/// Picks a readable surface form for each stem in `active_ids`.
///
/// For every surface form of a stem, count its co-occurrences with the other
/// active stems over the raw titles; the form with the most co-occurrences
/// wins, then the more frequent form, then the lexicographically smaller.
/// Stems with no surface occurrence keep the stem itself.
pub fn restore_labels(
    vocab: &VocabularyIndex,
    raw_corpus: &[Document],
    active_ids: &BTreeSet<WordId>,
    preprocessor: &Preprocessor,
) -> BTreeMap<WordId, String> {
    // (id, surface) -> (co-occurrences, frequency)
    let tallies = raw_corpus
        .par_iter()
        .fold(HashMap::<(WordId, String), (u64, u64)>::new, |mut acc, doc| {
            let mut forms: BTreeMap<WordId, BTreeSet<String>> = BTreeMap::new();
            for (surface, stem) in preprocessor.stemmed_pairs(&doc.title) {
                if let Some(id) = vocab.id(&stem).filter(|id| active_ids.contains(id)) {
                    forms.entry(id).or_default().insert(surface);
                }
            }
            let others = forms.len() as u64 - u64::from(!forms.is_empty());
            for (id, surfaces) in forms {
                for s in surfaces {
                    let e = acc.entry((id, s)).or_default();
                    e.0 += others;
                    e.1 += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, (c, f)) in b {
                let e = a.entry(k).or_default();
                e.0 += c;
                e.1 += f;
            }
            a
        });

    let mut best: BTreeMap<WordId, (u64, u64, String)> = BTreeMap::new();
    for ((id, surface), (co, freq)) in tallies {
        let better = match best.get(&id) {
            None => true,
            Some((bc, bf, bs)) => (co, freq, std::cmp::Reverse(&surface)) > (*bc, *bf, std::cmp::Reverse(bs)),
        };
        if better {
            best.insert(id, (co, freq, surface));
        }
    }
    active_ids
        .iter()
        .filter_map(|&id| {
            let label = match best.remove(&id) {
                Some((_, _, s)) => s,
                None => vocab.word(id)?.to_string(),
            };
            Some((id, label))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, title: &str, year: i32) -> Document {
        Document {
            id: id.into(),
            title: title.into(),
            year,
        }
    }

    fn tokdoc(id: &str, year: i32, tokens: &[&str]) -> TokenizedDocument {
        TokenizedDocument {
            id: id.into(),
            year,
            period: None,
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn preprocess_examples() {
        let p = Preprocessor::default();
        let t = p.preprocess(&doc("1", "A Fast Algorithm for Tracking?", 2010));
        assert_eq!(t.tokens, ["fast", "algorithm", "track"]);
        assert!(p.preprocess(&doc("2", "the from a", 2010)).is_empty());
        let t = p.preprocess(&doc("3", "Tracking tracked tracks", 2010));
        assert_eq!(t.tokens, ["track"]);
    }

    #[test]
    fn symbols_hyphens_and_numbers() {
        let p = Preprocessor::default();
        assert_eq!(
            p.surface_tokens("Real-time 3D: 2018 --- x -edge- networks!"),
            ["real-time", "3d", "edge", "networks"]
        );
        assert_eq!(p.surface_tokens("1-2 100"), Vec::<String>::new());
    }

    #[test]
    fn tokens_are_not_stopwords() {
        let p = Preprocessor::default();
        // "doing" stems to "do", which is itself a stop word.
        let t = p.preprocess(&doc("1", "Ours doings", 2000));
        for tok in &t.tokens {
            assert!(!p.stopwords.contains(tok));
        }
    }

    #[test]
    fn bin_sixteen_years() {
        let docs: Vec<_> = (2003..=2018).map(|y| tokdoc(&y.to_string(), y, &["x"])).collect();
        let spec = BinSpec::new(2003, 2018, 2).unwrap();
        let c = bin(docs.clone(), spec).unwrap();
        assert_eq!(c.periods(), 8);
        assert_eq!(c.omega_sizes(), vec![2; 8]);
        assert_eq!(c.subsets[7][1].period, Some(8));
        let c = bin(docs, BinSpec::new(2003, 2018, 16).unwrap()).unwrap();
        assert_eq!(c.periods(), 1);
    }

    #[test]
    fn bin_rejects_out_of_range_year() {
        let docs = vec![tokdoc("a", 2003, &["x"]), tokdoc("late", 2020, &["y"])];
        let err = bin(docs, BinSpec::new(2003, 2018, 16).unwrap()).unwrap_err();
        match err {
            Error::Config(msg) => assert!(msg.contains("late (2020)"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bin_rejects_empty_period() {
        let docs = vec![tokdoc("a", 2000, &["x"]), tokdoc("b", 2003, &["y"])];
        assert!(matches!(
            bin(docs, BinSpec::new(2000, 2003, 1).unwrap()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn empty_titles_still_count_in_omega() {
        let docs = vec![tokdoc("a", 2000, &["x"]), tokdoc("b", 2000, &[])];
        let c = bin(docs, BinSpec::new(2000, 2000, 1).unwrap()).unwrap();
        assert_eq!(c.omega_sizes(), vec![2]);
    }

    #[test]
    fn vocabulary_min_count() {
        let docs = vec![
            tokdoc("a", 2000, &["gamma", "alpha"]),
            tokdoc("b", 2000, &["beta", "alpha"]),
        ];
        let c = bin(docs, BinSpec::new(2000, 2000, 1).unwrap()).unwrap();
        let v = build_vocabulary(&c, 1).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.id("alpha"), Some(0));
        assert_eq!(v.id("beta"), Some(1));
        assert_eq!(v.id("gamma"), Some(2));
        assert_eq!(v.count(0), Some(2));
        let v2 = build_vocabulary(&c, 2).unwrap();
        assert_eq!(v2.len(), 1);
        assert!(matches!(build_vocabulary(&c, 3), Err(Error::Config(_))));
    }

    #[test]
    fn vocabulary_tsv_round_trip() {
        let mut v = VocabularyIndex::from_counts([("network".into(), 4), ("learn".into(), 2)]);
        v.set_labels(&BTreeMap::from([(1, "networks".to_string())]));
        let mut buf = Vec::new();
        v.write_tsv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0\tlearn\tlearn\t2\n1\tnetwork\tnetworks\t4\n");
        let back = VocabularyIndex::read_tsv(&buf[..]).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn restore_prefers_most_cooccurring_form() {
        let p = Preprocessor::default();
        let raw = vec![
            doc("1", "Neural networks for learning", 2000),
            doc("2", "Deep networks and neural learning", 2000),
            doc("3", "A network", 2000),
            doc("4", "Network", 2000),
            doc("5", "Network design", 2000),
        ];
        let vocab = VocabularyIndex::from_counts(
            ["network", "neural", "learn", "deep", "design"]
                .iter()
                .map(|w| (w.to_string(), 1)),
        );
        let net = vocab.id("network").unwrap();
        let learn = vocab.id("learn").unwrap();
        let neural = vocab.id("neural").unwrap();
        let active = BTreeSet::from([net, learn, neural]);
        let labels = restore_labels(&vocab, &raw, &active, &p);
        // "network" is more frequent overall but "networks" co-occurs with
        // the other map words.
        assert_eq!(labels[&net], "networks");
        assert_eq!(labels[&learn], "learning");
        assert_eq!(labels.len(), 3);
    }

    #[test]
    fn restore_tie_breaks_and_fallback() {
        let p = Preprocessor::default();
        let vocab = VocabularyIndex::from_counts([("alpha".to_string(), 1), ("zeta".to_string(), 1)]);
        let raw = vec![doc("1", "Alphas", 2000), doc("2", "Alpha", 2000)];
        // Both "alpha" and "alphas" stem to "alpha", one occurrence each.
        let labels = restore_labels(&vocab, &raw, &BTreeSet::from([0, 1]), &p);
        assert_eq!(labels[&0], "alpha");
        assert_eq!(labels[&1], "zeta");
    }

    #[test]
    fn restore_single_form() {
        let p = Preprocessor::default();
        let vocab = VocabularyIndex::from_counts([("segment".to_string(), 1)]);
        let raw = vec![doc("1", "Segmentation", 2000)];
        let labels = restore_labels(&vocab, &raw, &BTreeSet::from([0]), &p);
        assert_eq!(labels[&0], "segmentation");
    }
}
