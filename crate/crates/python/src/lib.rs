//! Python bindings for the `coburst` crate.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use coburst::baselines::{self, BurstPoint, BurstSet, KleinbergParams};
use coburst::corpus::{self, BinSpec, FieldSchema, Preprocessor, StopWords};
use coburst::coword::{self, PairKey};
use coburst::decomp::{self, DecompositionResult, SolverConfig};
use coburst::eval::{self, BenchmarkConfig, PrPoint};
use coburst::graph::{self, ExportFormat, WeightedGraph};
use coburst::synth::{self, GroundTruth, InjectionConfig, StableConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: coburst::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn keys(pairs: &[(u32, u32)]) -> PyResult<Vec<PairKey>> {
    pairs.iter().map(|&(i, j)| PairKey::new(i, j).map_err(err)).collect()
}

fn rows_of(flat: &[f64], t: usize) -> Vec<Vec<f64>> {
    flat.chunks_exact(t).map(<[f64]>::to_vec).collect()
}

fn points(set: &BurstSet) -> Vec<(u32, u32, usize, f64)> {
    set.bursts()
        .iter()
        .map(|b| (b.pair.i, b.pair.j, b.period, b.score))
        .collect()
}

/// Stacked pair-by-period weight matrix.
#[pyclass(name = "PairSeries", module = "coburst")]
struct PyPairSeries {
    inner: coword::PairSeries,
}

#[pymethods]
impl PyPairSeries {
    /// `pairs` are `(i, j)` word ids with `i < j`; `weights` has one row of
    /// per-period weights per pair.
    #[new]
    #[pyo3(signature = (pairs, weights, omega_sizes=None, vocab_size=None))]
    fn new(
        pairs: Vec<(u32, u32)>,
        weights: Vec<Vec<f64>>,
        omega_sizes: Option<Vec<u64>>,
        vocab_size: Option<usize>,
    ) -> PyResult<Self> {
        let t = weights.first().map_or(0, Vec::len);
        if weights.iter().any(|r| r.len() != t) {
            return Err(PyValueError::new_err("weight rows differ in length"));
        }
        let pairs = keys(&pairs)?;
        let m = vocab_size.unwrap_or_else(|| pairs.iter().map(|p| p.j as usize + 1).max().unwrap_or(0));
        let omega = omega_sizes.unwrap_or_else(|| vec![1; t]);
        let inner = coword::PairSeries::from_rows(pairs, weights.concat(), t, m, omega).map_err(err)?;
        Ok(PyPairSeries { inner })
    }

    /// Reads the text form written by `write` or the `matrix` command.
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        let file = std::fs::File::open(&path).map_err(|e| PyValueError::new_err(format!("{}: {e}", path.display())))?;
        let inner = coword::PairSeries::read_text(std::io::BufReader::new(file)).map_err(err)?;
        Ok(PyPairSeries { inner })
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        let mut buf = Vec::new();
        self.inner.write_text(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn periods(&self) -> usize {
        self.inner.periods()
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.inner.vocab_size()
    }

    fn pairs(&self) -> Vec<(u32, u32)> {
        self.inner.pairs().iter().map(|p| (p.i, p.j)).collect()
    }

    fn row(&self, r: usize) -> PyResult<Vec<f64>> {
        if r >= self.inner.rows() {
            return Err(PyValueError::new_err(format!("row {r} out of range")));
        }
        Ok(self.inner.row(r).to_vec())
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.weights(), self.inner.periods())
    }

    fn __len__(&self) -> usize {
        self.inner.rows()
    }

    fn __repr__(&self) -> String {
        format!("PairSeries(rows={}, periods={})", self.inner.rows(), self.inner.periods())
    }
}

/// Burst matrix `S` and solver diagnostics.
#[pyclass(name = "Decomposition", module = "coburst")]
struct PyDecomposition {
    inner: DecompositionResult,
    pairs: Vec<PairKey>,
}

#[pymethods]
impl PyDecomposition {
    #[getter]
    fn burst(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.burst(), self.inner.periods())
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn unconverged_rows(&self) -> usize {
        self.inner.unconverged_rows
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn kkt_residual(&self) -> f64 {
        self.inner.kkt_residual
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    /// Positive entries as `(i, j, period, value)`, periods 1-based.
    fn bursts(&self) -> Vec<(u32, u32, usize, f64)> {
        self.inner
            .nonzeros()
            .filter(|&(_, _, v)| v > 0.0)
            .map(|(r, t, v)| (self.pairs[r].i, self.pairs[r].j, t, v))
            .collect()
    }

    fn write_triplets(&self, path: PathBuf) -> PyResult<()> {
        let mut buf = Vec::new();
        self.inner.write_triplets(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    fn __repr__(&self) -> String {
        format!(
            "Decomposition(lam={}, nnz={}, kkt_residual={:.3e})",
            self.inner.lambda,
            self.inner.nnz(),
            self.inner.kkt_residual
        )
    }
}

/// Word ids, stems and display labels of an ingested corpus.
#[pyclass(name = "Vocabulary", module = "coburst")]
struct PyVocabulary {
    inner: corpus::VocabularyIndex,
}

#[pymethods]
impl PyVocabulary {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn word(&self, id: u32) -> Option<String> {
        self.inner.word(id).map(str::to_string)
    }

    fn label(&self, id: u32) -> Option<String> {
        self.inner.label(id).map(str::to_string)
    }

    fn id(&self, word: &str) -> Option<u32> {
        self.inner.id(word)
    }
}

#[pyfunction]
#[pyo3(signature = (w, lam, lipschitz=4.0, tol=1e-6, max_iters=1000))]
fn decompose(w: &PyPairSeries, lam: f64, lipschitz: f64, tol: f64, max_iters: usize) -> PyResult<PyDecomposition> {
    let cfg = SolverConfig {
        lambda: lam,
        lipschitz,
        tol,
        max_iters,
        record_trace: false,
    };
    let inner = decomp::decompose(&w.inner, &cfg).map_err(err)?;
    Ok(PyDecomposition {
        inner,
        pairs: w.inner.pairs().to_vec(),
    })
}

/// Smallest lambda at which `S = 0` is optimal.
#[pyfunction]
fn zero_solution_threshold(w: &PyPairSeries) -> f64 {
    decomp::zero_solution_threshold(&w.inner)
}

#[pyfunction]
fn objective(w: &PyPairSeries, burst: Vec<Vec<f64>>, lam: f64) -> PyResult<f64> {
    decomp::objective(&w.inner, &burst.concat(), lam).map_err(err)
}

/// KKT residual of `burst` as a solution at `lam`.
#[pyfunction]
fn verify_optimality(w: &PyPairSeries, burst: Vec<Vec<f64>>, lam: f64) -> PyResult<f64> {
    decomp::verify_optimality(&w.inner, &burst.concat(), lam).map_err(err)
}

#[pyfunction]
fn threshold_raw(w: &PyPairSeries, tau: f64) -> PyResult<Vec<(u32, u32, usize, f64)>> {
    baselines::threshold_raw(&w.inner, tau).map(|s| points(&s)).map_err(err)
}

#[pyfunction]
fn threshold_derivative(w: &PyPairSeries, tau: f64) -> PyResult<Vec<(u32, u32, usize, f64)>> {
    baselines::threshold_derivative(&w.inner, tau).map(|s| points(&s)).map_err(err)
}

#[pyfunction]
fn threshold_mean_deviation(w: &PyPairSeries, tau: f64) -> PyResult<Vec<(u32, u32, usize, f64)>> {
    baselines::threshold_mean_deviation(&w.inner, tau).map(|s| points(&s)).map_err(err)
}

/// Two-state Kleinberg automaton on successes `counts` out of `totals`;
/// returns the burst-state flag per period.
#[pyfunction]
#[pyo3(signature = (counts, totals, s=2.0, gamma=1.0))]
fn kleinberg(counts: Vec<f64>, totals: Vec<f64>, s: f64, gamma: f64) -> PyResult<Vec<bool>> {
    baselines::kleinberg(&counts, &totals, &KleinbergParams { s, gamma })
        .map(|o| o.states)
        .map_err(err)
}

#[pyfunction]
fn stem(word: &str) -> String {
    corpus::porter::stem(word)
}

/// Ingests a JSON-lines titles corpus and builds its pair matrix.
#[pyfunction]
#[pyo3(signature = (path, bin_years=1, min_count=2, stopwords=None))]
fn build_series(
    path: PathBuf,
    bin_years: u32,
    min_count: u64,
    stopwords: Option<PathBuf>,
) -> PyResult<(PyPairSeries, PyVocabulary)> {
    let report = corpus::ingest(&path, &FieldSchema::default(), None).map_err(err)?;
    let pre = match stopwords {
        Some(p) => Preprocessor::new(StopWords::load(p).map_err(err)?),
        None => Preprocessor::default(),
    };
    let docs = pre.preprocess_all(&report.documents);
    let spec = BinSpec::covering(docs.iter().map(|d| d.year), bin_years).map_err(err)?;
    let binned = corpus::bin(docs, spec).map_err(err)?;
    let mut vocab = corpus::build_vocabulary(&binned, min_count).map_err(err)?;
    let w = coword::build_pair_series(&binned, &vocab).map_err(err)?;
    let active: BTreeSet<u32> = w.pairs().iter().flat_map(|p| [p.i, p.j]).collect();
    let labels = corpus::restore_labels(&vocab, &report.documents, &active, &pre);
    vocab.set_labels(&labels);
    Ok((PyPairSeries { inner: w }, PyVocabulary { inner: vocab }))
}

/// Writes one clustered burst graph per period; returns the file paths.
#[pyfunction]
#[pyo3(signature = (w, result, vocab, out_dir, format="json", seed=None))]
fn export_graphs(
    w: &PyPairSeries,
    result: &PyDecomposition,
    vocab: &PyVocabulary,
    out_dir: PathBuf,
    format: &str,
    seed: Option<u64>,
) -> PyResult<Vec<PathBuf>> {
    let format: ExportFormat = format.parse().map_err(err)?;
    std::fs::create_dir_all(&out_dir)?;
    (1..=w.inner.periods())
        .map(|t| {
            let mut g = graph::extract_graph(&w.inner, &result.inner, t, &vocab.inner).map_err(err)?;
            g.cluster(seed);
            graph::export(&g, format, &out_dir).map_err(err)
        })
        .collect()
}

/// Louvain on an undirected weighted edge list; returns the community of
/// each node and the modularity.
#[pyfunction]
#[pyo3(signature = (nodes, edges, seed=None))]
fn louvain(nodes: usize, edges: Vec<(usize, usize, f64)>, seed: Option<u64>) -> PyResult<(Vec<usize>, f64)> {
    if edges.iter().any(|&(a, b, _)| a >= nodes || b >= nodes) {
        return Err(PyValueError::new_err("edge endpoint out of range"));
    }
    let out = graph::louvain_partition(&WeightedGraph::from_edges(nodes, edges), seed);
    Ok((out.assignment, out.modularity))
}

type TruthRows = Vec<(u32, u32, usize, String)>;

/// Synthetic instance: the injected pair matrix (collection size 50) and
/// ground-truth onsets as `(i, j, period, "A" | "B")`.
#[pyfunction]
#[pyo3(signature = (seed, pairs=2000, periods=50))]
fn synthesize(seed: u64, pairs: usize, periods: usize) -> PyResult<(PyPairSeries, TruthRows)> {
    let cfg = BenchmarkConfig::with_seed(seed);
    let stable = synth::generate_stable(&StableConfig {
        num_pairs: pairs,
        periods,
        ..cfg.stable
    })
    .map_err(err)?;
    let injection: InjectionConfig = cfg.injection;
    let (series, truth) = synth::inject_bursts(&stable, &injection).map_err(err)?;
    let w = synth::to_pair_series(&series, cfg.omega_size).map_err(err)?;
    let truth = truth
        .bursts
        .iter()
        .map(|(&(p, t), ty)| (p.i, p.j, t, ty.to_string()))
        .collect();
    Ok((PyPairSeries { inner: w }, truth))
}

/// Precision and recall of detections `(i, j, period)` against truth.
#[pyfunction]
fn precision_recall(detected: Vec<(u32, u32, usize)>, truth: Vec<(u32, u32, usize)>) -> PyResult<(f64, f64)> {
    let mut points = Vec::with_capacity(detected.len());
    for (i, j, period) in detected {
        points.push(BurstPoint {
            pair: PairKey::new(i, j).map_err(err)?,
            period,
            score: 1.0,
        });
    }
    let mut bursts = BTreeMap::new();
    for (i, j, t) in truth {
        bursts.insert((PairKey::new(i, j).map_err(err)?, t), synth::BurstType::A);
    }
    eval::precision_recall(&BurstSet::new("python", [], points), &GroundTruth { bursts }).map_err(err)
}

/// Area under a PR curve given as `(recall, precision)` points.
#[pyfunction]
fn auc(points: Vec<(f64, f64)>) -> PyResult<f64> {
    let pts: Vec<PrPoint> = points
        .into_iter()
        .map(|(recall, precision)| PrPoint { param: 0.0, recall, precision })
        .collect();
    eval::auc(&pts).map_err(err)
}

/// Generates and evaluates one benchmark instance; returns AUC per detector.
#[pyfunction]
#[pyo3(signature = (seed, pairs=2000, periods=50, grid=40))]
fn run_benchmark(py: Python<'_>, seed: u64, pairs: usize, periods: usize, grid: usize) -> PyResult<BTreeMap<String, f64>> {
    let mut cfg = BenchmarkConfig::with_seed(seed);
    cfg.stable.num_pairs = pairs;
    cfg.stable.periods = periods;
    cfg.detectors.grid_points = grid;
    let report = py.detach(|| eval::run_benchmark(&cfg)).map_err(err)?;
    Ok(report.curves.into_iter().map(|c| (c.detector, c.auc)).collect())
}

#[pymodule(name = "coburst")]
fn coburst_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPairSeries>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_class::<PyVocabulary>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(zero_solution_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(objective, m)?)?;
    m.add_function(wrap_pyfunction!(verify_optimality, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_raw, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_mean_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(kleinberg, m)?)?;
    m.add_function(wrap_pyfunction!(stem, m)?)?;
    m.add_function(wrap_pyfunction!(build_series, m)?)?;
    m.add_function(wrap_pyfunction!(export_graphs, m)?)?;
    m.add_function(wrap_pyfunction!(louvain, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(precision_recall, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(run_benchmark, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
