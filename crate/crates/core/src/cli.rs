//! Command-line front end.
//!
//! Each subcommand reads its inputs, writes its outputs plus a
//! `manifest.json` into the output directory, and returns an exit code:
//! 0 on success, 1 on a runtime failure, 2 on a usage error.
//!
//! Tunables resolve in the order flag, `--config` file, built-in default.
//! The config file holds `key = value` lines whose keys are flag names
//! without the leading dashes (`lambda = 4e-4`, `max-iters = 2000`).
//! `COBURST_OUTPUT_DIR` sets the default output directory.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::baselines::{self, BurstSet, KleinbergParams};
use crate::corpus::{self, BinnedCorpus, BinSpec, Document, FieldSchema, Preprocessor, SkippedRecord, StopWords, VocabularyIndex};
use crate::coword::{self, PairSeries};
use crate::decomp::{self, DecompositionResult, SolverConfig};
use crate::error::{Error, Result};
use crate::eval::{self, BenchmarkConfig, EvaluationReport};
use crate::graph::{self, ExportFormat};
use crate::synth::{self, GroundTruth, StableSeries};

pub const DEFAULT_LAMBDA: f64 = 4.0e-4;
pub const OUTPUT_DIR_ENV: &str = "COBURST_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "coburst", version, about = "Burst detection on dynamic co-word networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read a JSON-lines corpus, bin it by year and build the vocabulary.
    Ingest(IngestArgs),
    /// Build the stacked co-word matrix from an ingest directory.
    Matrix(MatrixArgs),
    /// Solve the sparse plus smooth decomposition of a pair matrix.
    Decompose(DecomposeArgs),
    /// Run one baseline detector on a pair matrix.
    Baseline(BaselineArgs),
    /// Generate a synthetic benchmark instance, optionally evaluating it.
    Synth(SynthArgs),
    /// Evaluate all detectors on a synthetic instance directory.
    Eval(EvalArgs),
    /// Write per-period burst graphs from a decomposition directory.
    Export(ExportArgs),
    /// ingest, matrix, decompose and export in one run.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Output directory [env: COBURST_OUTPUT_DIR, default: .]
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// key = value file supplying defaults for the other flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
struct CorpusFlags {
    /// Years per period.
    #[arg(long)]
    bin_years: Option<u32>,
    /// Minimum document frequency of a kept stem.
    #[arg(long)]
    min_count: Option<u64>,
    /// First year kept (inclusive).
    #[arg(long)]
    year_min: Option<i32>,
    /// Last year kept (inclusive).
    #[arg(long)]
    year_max: Option<i32>,
    /// Stop-word list, one word per line; replaces the built-in list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct SolverFlags {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// JSON-lines corpus with `title` and `year` fields.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    corpus: CorpusFlags,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    /// Directory written by `ingest`.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    /// Pair matrix written by `matrix` (pairs.tsv).
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    /// Pair matrix written by `matrix` (pairs.tsv).
    #[arg(long)]
    input: PathBuf,
    /// raw, derivative, mean_deviation or kleinberg.
    #[arg(long)]
    method: String,
    /// Threshold for the threshold detectors, gamma for kleinberg.
    #[arg(long)]
    param: Option<f64>,
    /// Kleinberg rate ratio.
    #[arg(long)]
    scale: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Number of word pairs.
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    periods: Option<usize>,
    /// Evaluate all detectors on the generated instance.
    #[arg(long)]
    eval: bool,
    /// Points per detector sweep.
    #[arg(long)]
    grid: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Directory written by `synth`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    grid: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// Directory holding pairs.tsv, s_triplets.tsv and vocab.tsv.
    #[arg(long)]
    input: PathBuf,
    /// graphml, dot or json.
    #[arg(long)]
    format: Option<String>,
    /// Export only this period.
    #[arg(long)]
    period: Option<usize>,
    /// Louvain visit-order seed; index order when absent.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// JSON-lines corpus.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    corpus: CorpusFlags,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

/// Parsed `key = value` config file.
#[derive(Debug, Default, Clone)]
struct ConfigFile(BTreeMap<String, String>);

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut map = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("config", k + 1, "expected `key = value`"))?;
            map.insert(key.trim().replace('_', "-"), value.trim().to_string());
        }
        Ok(ConfigFile(map))
    }
}

/// Effective settings of one run, echoed into the manifest.
struct Resolver {
    file: ConfigFile,
    effective: BTreeMap<String, String>,
}

impl Resolver {
    fn new(file: ConfigFile) -> Self {
        Resolver {
            file,
            effective: BTreeMap::new(),
        }
    }

    fn get<T: FromStr + ToString>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let value = match flag {
            Some(v) => v,
            None => match self.file.0.get(key) {
                Some(s) => s
                    .parse()
                    .map_err(|_| Error::Config(format!("config key `{key}`: cannot parse `{s}`")))?,
                None => default,
            },
        };
        self.effective.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    fn get_opt<T: FromStr + ToString>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.0.get(key) {
                Some(s) => Some(
                    s.parse()
                        .map_err(|_| Error::Config(format!("config key `{key}`: cannot parse `{s}`")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.effective.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    fn path(&mut self, key: &str, flag: Option<PathBuf>) -> Option<PathBuf> {
        let value = flag.or_else(|| self.file.0.get(key).map(PathBuf::from));
        if let Some(p) = &value {
            self.effective.insert(key.to_string(), p.display().to_string());
        }
        value
    }

    fn output_dir(&mut self, flag: Option<PathBuf>) -> PathBuf {
        let dir = flag
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .or_else(|| self.file.0.get("output-dir").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        self.effective.insert("output-dir".into(), dir.display().to_string());
        dir
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    inputs: Vec<String>,
    outputs: Vec<String>,
    config: &'a BTreeMap<String, String>,
    seed: Option<u64>,
    wall_time_seconds: f64,
}

/// What ingest stores for the later steps.
#[derive(Debug, Serialize, Deserialize)]
struct CorpusFile {
    bin_spec: BinSpec,
    stopwords: Option<PathBuf>,
    documents: Vec<Document>,
    skipped: Vec<SkippedRecord>,
    binned: BinnedCorpus,
}

#[derive(Debug, Serialize, Deserialize)]
struct Diagnostics {
    rows: usize,
    periods: usize,
    lambda: f64,
    lipschitz: f64,
    tol: f64,
    max_iters: usize,
    iterations: usize,
    unconverged_rows: usize,
    objective: f64,
    kkt_residual: f64,
    nonzeros: usize,
    zero_solution_threshold: f64,
    wall_time_seconds: f64,
    objective_trace: Vec<f64>,
}

/// Collects what a subcommand read and wrote.
struct Run {
    command: &'static str,
    started: Instant,
    out_dir: PathBuf,
    inputs: Vec<String>,
    outputs: Vec<String>,
    seed: Option<u64>,
}

impl Run {
    fn new(command: &'static str, out_dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
        Ok(Run {
            command,
            started: Instant::now(),
            out_dir,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        if !path.exists() {
            return Err(Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "input does not exist"),
            ));
        }
        self.inputs.push(path.display().to_string());
        Ok(())
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        body(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write(name, |out| out.write_all(text.as_bytes()))
    }

    fn finish(mut self, config: &BTreeMap<String, String>) -> Result<()> {
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            inputs: std::mem::take(&mut self.inputs),
            outputs: std::mem::take(&mut self.outputs),
            config,
            seed: self.seed,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(())
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    Ok(BufReader::new(fs::File::open(path).map_err(|e| Error::io(path, e))?))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}

fn preprocessor(stopwords: Option<&Path>) -> Result<Preprocessor> {
    Ok(match stopwords {
        Some(p) => Preprocessor::new(StopWords::load(p)?),
        None => Preprocessor::default(),
    })
}

fn category(e: &Error) -> &'static str {
    match e {
        Error::Io { .. } => "io",
        Error::Parse { .. } | Error::Json(_) => "input",
        Error::Config(_) | Error::UnknownFormat(_) => "config",
        Error::Numerical { .. } => "numerical",
        _ => "data",
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if args.len() <= 1 {
        let mut cmd = <Cli as clap::CommandFactory>::command();
        eprintln!("{}", cmd.render_usage());
        let _ = cmd.write_help(&mut std::io::stderr());
        return 2;
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error [{}]: {e}", category(&e));
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    let common = match &command {
        Command::Ingest(a) => &a.common,
        Command::Matrix(a) => &a.common,
        Command::Decompose(a) => &a.common,
        Command::Baseline(a) => &a.common,
        Command::Synth(a) => &a.common,
        Command::Eval(a) => &a.common,
        Command::Export(a) => &a.common,
        Command::Pipeline(a) => &a.common,
    }
    .clone();
    let mut res = Resolver::new(ConfigFile::load(common.config.as_deref())?);
    let threads = res.get_opt("threads", common.threads)?;
    let out_dir = res.output_dir(common.output_dir);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match command {
        Command::Ingest(a) => {
            let mut run = Run::new("ingest", out_dir)?;
            ingest_step(&mut run, &mut res, &a.input, &a.corpus)?;
            run.finish(&res.effective)
        }
        Command::Matrix(a) => {
            let mut run = Run::new("matrix", out_dir)?;
            matrix_step(&mut run, &a.input)?;
            run.finish(&res.effective)
        }
        Command::Decompose(a) => {
            let mut run = Run::new("decompose", out_dir)?;
            let cfg = solver_config(&mut res, &a.solver)?;
            decompose_step(&mut run, &a.input, &cfg)?;
            run.finish(&res.effective)
        }
        Command::Baseline(a) => baseline_cmd(a, res, out_dir),
        Command::Synth(a) => synth_cmd(a, res, out_dir),
        Command::Eval(a) => eval_cmd(a, res, out_dir),
        Command::Export(a) => {
            let mut run = Run::new("export", out_dir)?;
            let format = export_format(&mut res, a.format)?;
            let seed = res.get_opt("seed", a.seed)?;
            run.seed = seed;
            let period = res.get_opt("period", a.period)?;
            export_step(&mut run, &a.input, format, period, seed)?;
            run.finish(&res.effective)
        }
        Command::Pipeline(a) => {
            let mut run = Run::new("pipeline", out_dir.clone())?;
            let cfg = solver_config(&mut res, &a.solver)?;
            let format = export_format(&mut res, a.format)?;
            let seed = res.get_opt("seed", a.seed)?;
            run.seed = seed;
            ingest_step(&mut run, &mut res, &a.input, &a.corpus)?;
            matrix_step(&mut run, &out_dir)?;
            decompose_step(&mut run, &out_dir.join("pairs.tsv"), &cfg)?;
            export_step(&mut run, &out_dir, format, None, seed)?;
            run.finish(&res.effective)
        }
    })
}

fn solver_config(res: &mut Resolver, f: &SolverFlags) -> Result<SolverConfig> {
    let d = SolverConfig::default();
    let cfg = SolverConfig {
        lambda: res.get("lambda", f.lambda, DEFAULT_LAMBDA)?,
        lipschitz: res.get("lipschitz", f.lipschitz, d.lipschitz)?,
        tol: res.get("tol", f.tol, d.tol)?,
        max_iters: res.get("max-iters", f.max_iters, d.max_iters)?,
        record_trace: true,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn export_format(res: &mut Resolver, flag: Option<String>) -> Result<ExportFormat> {
    res.get("format", flag, "json".to_string())?.parse()
}

fn ingest_step(run: &mut Run, res: &mut Resolver, input: &Path, f: &CorpusFlags) -> Result<()> {
    let bin_years = res.get("bin-years", f.bin_years, 1)?;
    let min_count = res.get("min-count", f.min_count, 2)?;
    let year_min = res.get_opt("year-min", f.year_min)?;
    let year_max = res.get_opt("year-max", f.year_max)?;
    let stopwords = res.path("stopwords", f.stopwords.clone());
    run.input(input)?;
    if let Some(p) = &stopwords {
        run.input(p)?;
    }
    let range = match (year_min, year_max) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(i32::MIN), hi.unwrap_or(i32::MAX))),
    };
    let report = corpus::ingest(input, &FieldSchema::default(), range)?;
    if !report.skipped.is_empty() {
        eprintln!("ingest: skipped {} malformed record(s)", report.skipped.len());
    }
    let pre = preprocessor(stopwords.as_deref())?;
    let tokenized = pre.preprocess_all(&report.documents);
    let spec = BinSpec::covering(tokenized.iter().map(|d| d.year), bin_years)?;
    let binned = corpus::bin(tokenized, spec)?;
    let vocab = corpus::build_vocabulary(&binned, min_count)?;
    eprintln!(
        "ingest: {} documents, {} periods, {} stems",
        binned.len(),
        binned.periods(),
        vocab.len()
    );
    run.write("vocab.tsv", |out| vocab.write_tsv(out))?;
    run.write_json(
        "corpus.json",
        &CorpusFile {
            bin_spec: spec,
            stopwords,
            documents: report.documents,
            skipped: report.skipped,
            binned,
        },
    )?;
    Ok(())
}

fn matrix_step(run: &mut Run, dir: &Path) -> Result<()> {
    let corpus_path = dir.join("corpus.json");
    let vocab_path = dir.join("vocab.tsv");
    run.input(&corpus_path)?;
    run.input(&vocab_path)?;
    let corpus: CorpusFile = read_json(&corpus_path)?;
    let vocab = VocabularyIndex::read_tsv(open(&vocab_path)?)?;
    let w = coword::build_pair_series(&corpus.binned, &vocab)?;
    eprintln!("matrix: {} observed pairs x {} periods", w.rows(), w.periods());
    run.write("pairs.tsv", |out| w.write_text(out))?;
    Ok(())
}

fn decompose_step(run: &mut Run, input: &Path, cfg: &SolverConfig) -> Result<()> {
    run.input(input)?;
    let w = PairSeries::read_text(open(input)?)?;
    let started = Instant::now();
    let result = decomp::decompose(&w, cfg)?;
    let wall = started.elapsed().as_secs_f64();
    eprintln!(
        "decompose: {} rows, {} nonzeros, {} iterations, {:.3} s",
        w.rows(),
        result.nnz(),
        result.iterations,
        wall
    );
    if result.unconverged_rows > 0 {
        eprintln!("decompose: {} row(s) hit max-iters", result.unconverged_rows);
    }
    run.write("s_triplets.tsv", |out| result.write_triplets(out))?;
    run.write("pair_keys.tsv", |out| decomp::write_pair_keys(w.pairs(), out))?;
    run.write_json(
        "diagnostics.json",
        &Diagnostics {
            rows: w.rows(),
            periods: w.periods(),
            lambda: cfg.lambda,
            lipschitz: cfg.lipschitz,
            tol: cfg.tol,
            max_iters: cfg.max_iters,
            iterations: result.iterations,
            unconverged_rows: result.unconverged_rows,
            objective: result.objective,
            kkt_residual: result.kkt_residual,
            nonzeros: result.nnz(),
            zero_solution_threshold: decomp::zero_solution_threshold(&w),
            wall_time_seconds: wall,
            objective_trace: result.objective_trace.clone(),
        },
    )?;
    Ok(())
}

fn export_step(
    run: &mut Run,
    dir: &Path,
    format: ExportFormat,
    period: Option<usize>,
    seed: Option<u64>,
) -> Result<()> {
    let pairs_path = dir.join("pairs.tsv");
    let s_path = dir.join("s_triplets.tsv");
    let vocab_path = dir.join("vocab.tsv");
    for p in [&pairs_path, &s_path, &vocab_path] {
        run.input(p)?;
    }
    let w = PairSeries::read_text(open(&pairs_path)?)?;
    let (burst, rows, periods) = DecompositionResult::read_triplets(open(&s_path)?)?;
    if rows != w.rows() || periods != w.periods() {
        return Err(Error::Shape {
            expected: format!("{} x {}", w.rows(), w.periods()),
            found: format!("{rows} x {periods}"),
        });
    }
    let diag_path = dir.join("diagnostics.json");
    let lambda = if diag_path.exists() {
        read_json::<Diagnostics>(&diag_path)?.lambda
    } else {
        0.0
    };
    let result = DecompositionResult::from_burst(&w, burst, lambda)?;
    let mut vocab = VocabularyIndex::read_tsv(open(&vocab_path)?)?;

    let corpus_path = dir.join("corpus.json");
    if corpus_path.exists() {
        run.input(&corpus_path)?;
        let corpus: CorpusFile = read_json(&corpus_path)?;
        let active: BTreeSet<u32> = result
            .nonzeros()
            .filter(|&(_, _, v)| v > 0.0)
            .flat_map(|(r, _, _)| [w.pairs()[r].i, w.pairs()[r].j])
            .collect();
        let pre = preprocessor(corpus.stopwords.as_deref())?;
        let labels = corpus::restore_labels(&vocab, &corpus.documents, &active, &pre);
        vocab.set_labels(&labels);
    }

    let periods: Vec<usize> = match period {
        Some(t) => vec![t],
        None => (1..=w.periods()).collect(),
    };
    let graphs = periods
        .iter()
        .map(|&t| {
            let mut g = graph::extract_graph(&w, &result, t, &vocab)?;
            g.cluster(seed);
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut non_empty = 0;
    for g in &graphs {
        let text = graph::render(g, format)?;
        run.write(&graph::export_file_name(g.period, format), |out| out.write_all(text.as_bytes()))?;
        non_empty += usize::from(!g.is_empty());
    }
    eprintln!("export: {} graph(s), {non_empty} non-empty", graphs.len());
    Ok(())
}

fn baseline_cmd(a: BaselineArgs, mut res: Resolver, out_dir: PathBuf) -> Result<()> {
    let mut run = Run::new("baseline", out_dir)?;
    run.input(&a.input)?;
    let method = res.get("method", Some(a.method), String::new())?;
    let w = PairSeries::read_text(open(&a.input)?)?;
    let set: BurstSet = match method.as_str() {
        "raw" => baselines::threshold_raw(&w, res.get("param", a.param, 0.1)?)?,
        "derivative" => baselines::threshold_derivative(&w, res.get("param", a.param, 0.05)?)?,
        "mean_deviation" => baselines::threshold_mean_deviation(&w, res.get("param", a.param, 0.05)?)?,
        "kleinberg" => {
            let d = KleinbergParams::default();
            let params = KleinbergParams {
                s: res.get("scale", a.scale, d.s)?,
                gamma: res.get("param", a.param, d.gamma)?,
            };
            baselines::kleinberg_series(&w, &params)?
        }
        other => return Err(Error::Config(format!("unknown baseline method `{other}`"))),
    };
    eprintln!("baseline {method}: {} burst(s)", set.len());
    run.write(&format!("bursts_{method}.tsv"), |out| set.write_tsv(out))?;
    run.finish(&res.effective)
}

fn synth_cmd(a: SynthArgs, mut res: Resolver, out_dir: PathBuf) -> Result<()> {
    let mut run = Run::new("synth", out_dir)?;
    let seed = res.get("seed", a.seed, 0)?;
    run.seed = Some(seed);
    let mut cfg = BenchmarkConfig::with_seed(seed);
    cfg.stable.num_pairs = res.get("pairs", a.pairs, cfg.stable.num_pairs)?;
    cfg.stable.periods = res.get("periods", a.periods, cfg.stable.periods)?;
    cfg.detectors.grid_points = res.get("grid", a.grid, cfg.detectors.grid_points)?;
    let stable = synth::generate_stable(&cfg.stable)?;
    let (series, truth) = synth::inject_bursts(&stable, &cfg.injection)?;
    eprintln!("synth: {} pairs, {} injected burst(s)", series.rows(), truth.len());
    run.write("series.tsv", |out| series.write_tsv(out))?;
    run.write("truth.tsv", |out| truth.write_tsv(out))?;
    run.write_json("synth_config.json", &cfg)?;
    if a.eval {
        let report = eval::evaluate_series(&series, &truth, cfg.omega_size, &cfg.detectors)?;
        write_report(&mut run, &report)?;
    }
    run.finish(&res.effective)
}

fn eval_cmd(a: EvalArgs, mut res: Resolver, out_dir: PathBuf) -> Result<()> {
    let mut run = Run::new("eval", out_dir)?;
    let series_path = a.input.join("series.tsv");
    let truth_path = a.input.join("truth.tsv");
    let cfg_path = a.input.join("synth_config.json");
    run.input(&series_path)?;
    run.input(&truth_path)?;
    let mut cfg = if cfg_path.exists() {
        run.input(&cfg_path)?;
        read_json::<BenchmarkConfig>(&cfg_path)?
    } else {
        BenchmarkConfig::default()
    };
    cfg.detectors.grid_points = res.get("grid", a.grid, cfg.detectors.grid_points)?;
    let series = StableSeries::read_tsv(open(&series_path)?, None)?;
    let truth = GroundTruth::read_tsv(open(&truth_path)?)?;
    let report = eval::evaluate_series(&series, &truth, cfg.omega_size, &cfg.detectors)?;
    write_report(&mut run, &report)?;
    run.finish(&res.effective)
}

fn write_report(run: &mut Run, report: &EvaluationReport) -> Result<()> {
    for c in &report.curves {
        eprintln!("eval: {:<15} AUC {:.4}", c.detector, c.auc);
        run.write(&format!("pr_{}.csv", c.detector), |out| c.write_csv(out))?;
    }
    run.write_json("report.json", report)?;
    Ok(())
}
