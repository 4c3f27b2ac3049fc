//! Command-line front end.
//!
//! Every option can also come from a TOML file given with `--config`, either
//! at the top level or in a table named after the subcommand. Flags win over
//! the file, and `SEISMIC_THREADS` sits between the two for `--threads`.

use std::fmt::{self, Display};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::eval::bench::{bench, default_budgets, BenchConfig, BenchContext, System};
use crate::eval::synthetic::{gen_synthetic_hybrid, gen_synthetic_sparse, weight_queries, SparseSyntheticSpec, SyntheticHybridSpec};
use crate::eval::theorems::{faithful, validate_all};
use crate::eval::{results_to_tsv, GroundTruth};
use crate::format::{read_dataset, write_dataset};
use crate::hash::keyed_hash;
use crate::inverted::{build_partitioned_index, index_overhead_report, read_inverted, write_inverted, Budget, PartitionedInvertedIndex};
use crate::ivf::{build_ivf, build_ivf_hybrid, default_partitions, read_index, write_index, DatasetStorage, Ell, Exhaustive, IvfConfig, IvfIndex, SubAlgorithm};
use crate::kmeans::{KMeansConfig, Variant};
use crate::sketch::{Transform, TransformKind, DEFAULT_SKETCH_DIM};
use crate::topk::TopKResult;
use crate::vector::VectorDataset;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_) => EXIT_USAGE,
            Error::Io(io) if io.kind() == io::ErrorKind::NotFound => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn at<T>(path: &Path, r: crate::Result<T>) -> CliResult<T> {
    r.map_err(|e| {
        let mut c = CliError::from(e);
        c.message = format!("{}: {}", path.display(), c.message);
        c
    })
}

/// Comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<T>().map_err(|e| Error::invalid(e.to_string())))
            .collect::<crate::Result<Vec<T>>>()
            .map(List)
    }
}

impl<T: Display> Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionCount {
    Auto,
    Fixed(usize),
}

impl FromStr for PartitionCount {
    type Err = Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        if s == "auto" {
            return Ok(PartitionCount::Auto);
        }
        match s.parse::<usize>() {
            Ok(p) if p > 0 => Ok(PartitionCount::Fixed(p)),
            _ => Err(Error::invalid(format!("partitions must be 'auto' or a positive integer, got '{s}'"))),
        }
    }
}

impl Display for PartitionCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionCount::Auto => f.write_str("auto"),
            PartitionCount::Fixed(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    Sparse,
    Hybrid,
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "sparse" => Ok(SyntheticKind::Sparse),
            "hybrid" => Ok(SyntheticKind::Hybrid),
            other => Err(Error::invalid(format!("unknown synthetic kind '{other}'"))),
        }
    }
}

impl Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntheticKind::Sparse => "sparse",
            SyntheticKind::Hybrid => "hybrid",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubKind {
    Exhaustive,
    Inverted,
}

impl FromStr for SubKind {
    type Err = Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "exhaustive" => Ok(SubKind::Exhaustive),
            "inverted" => Ok(SubKind::Inverted),
            other => Err(Error::invalid(format!("unknown sub-algorithm '{other}'"))),
        }
    }
}

impl Display for SubKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubKind::Exhaustive => "exhaustive",
            SubKind::Inverted => "inverted",
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "sparse-ivf", version, about = "IVF retrieval over sketches of sparse and hybrid vectors")]
pub struct Cli {
    /// TOML file with default option values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic document and query collection.
    GenSynthetic(GenArgs),
    /// Compute exact top-k results by exhaustive search.
    ExactTopk(ExactArgs),
    /// Sketch, cluster and store an IVF index.
    BuildIndex(BuildArgs),
    /// Answer queries from an IVF index.
    Search(SearchArgs),
    /// Measure accuracy and throughput over a sweep.
    Bench(BenchArgs),
    /// Monte-Carlo checks of the sketching guarantees.
    ValidateTheorems(TheoremArgs),
    /// Print index sizes and partition statistics.
    IndexStats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// sparse or hybrid
    #[arg(long)]
    pub kind: Option<SyntheticKind>,
    #[arg(long)]
    pub docs: Option<usize>,
    #[arg(long)]
    pub num_queries: Option<usize>,
    #[arg(long)]
    pub docs_out: Option<PathBuf>,
    #[arg(long)]
    pub queries_out: Option<PathBuf>,
    #[arg(long)]
    pub dense_dim: Option<u32>,
    #[arg(long)]
    pub sparse_dim: Option<u32>,
    /// Expected nonzeros per sparse part (hybrid).
    #[arg(long)]
    pub psi: Option<f64>,
    /// Mean of the exponential value distribution.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Mean term draws per document (sparse).
    #[arg(long)]
    pub doc_terms: Option<f64>,
    /// Mean term draws per query (sparse).
    #[arg(long)]
    pub query_terms: Option<f64>,
    #[arg(long)]
    pub topics: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(short, long)]
    pub k: Option<usize>,
    /// Weight of the dense part of hybrid queries.
    #[arg(long)]
    pub w_dense: Option<f32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "SEISMIC_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// jl, ws or sinnamon
    #[arg(long)]
    pub transform: Option<TransformKind>,
    /// Total sketch width (n for jl, 2m for ws).
    #[arg(long)]
    pub sketch_dim: Option<u32>,
    /// Number of random mappings (sinnamon).
    #[arg(long)]
    pub mappings: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// standard or spherical
    #[arg(long)]
    pub clustering: Option<Variant>,
    /// Partition count, or auto for ceil(4 sqrt(count)).
    #[arg(long)]
    pub partitions: Option<PartitionCount>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Also write a partitioned inverted index here.
    #[arg(long)]
    pub inverted_out: Option<PathBuf>,
    /// Keep original document ids in the inverted index.
    #[arg(long)]
    pub no_remap: bool,
    /// Store a reference to the dataset file instead of a copy.
    #[arg(long)]
    pub reference_dataset: bool,
    #[arg(long, env = "SEISMIC_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(short, long)]
    pub k: Option<usize>,
    /// Documents to examine: a count, or a fraction such as 0.1.
    #[arg(long)]
    pub ell: Option<Ell>,
    /// exhaustive or inverted
    #[arg(long)]
    pub sub: Option<SubKind>,
    /// Inverted index file for --sub inverted (built in memory if absent).
    #[arg(long)]
    pub inverted: Option<PathBuf>,
    #[arg(long)]
    pub w_dense: Option<f32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "SEISMIC_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Ground truth file; computed when absent.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub inverted: Option<PathBuf>,
    /// Comma-separated: ivf-exhaustive, ivf-inverted, linscan-budgeted.
    #[arg(long)]
    pub systems: Option<List<System>>,
    #[arg(long)]
    pub ell: Option<List<Ell>>,
    /// Comma-separated LinScan budgets such as 50us,1ms,inf.
    #[arg(long)]
    pub budgets: Option<List<Budget>>,
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub w_dense: Option<f32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "SEISMIC_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TheoremArgs {
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "SEISMIC_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub inverted: Option<PathBuf>,
}

/// Looks up option values and records the resolved configuration.
struct Resolver {
    file: Option<toml::Table>,
    section: &'static str,
    resolved: Vec<(String, String)>,
}

fn toml_to_string(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Array(items) => items.iter().map(toml_to_string).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

impl Resolver {
    fn new(config: Option<&Path>, section: &'static str) -> CliResult<Self> {
        let file = match config {
            None => None,
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
                Some(text.parse::<toml::Table>().map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))?)
            }
        };
        Ok(Self { file, section, resolved: Vec::new() })
    }

    fn from_file(&self, key: &str) -> Option<String> {
        let file = self.file.as_ref()?;
        let alt = key.replace('-', "_");
        let lookup = |t: &toml::Table| t.get(key).or_else(|| t.get(&alt)).map(toml_to_string);
        file.get(self.section)
            .and_then(|s| s.as_table())
            .and_then(lookup)
            .or_else(|| lookup(file))
    }

    fn opt<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.from_file(key) {
                Some(s) => Some(s.parse::<T>().map_err(|e| CliError::usage(format!("config key '{key}': {e}")))?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.resolved.push((key.to_string(), v.to_string()));
        }
        Ok(value)
    }

    fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T::Err: Display,
    {
        match self.opt(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.resolved.push((key.to_string(), default.to_string()));
                Ok(default)
            }
        }
    }

    fn path(&mut self, key: &str, flag: Option<PathBuf>) -> CliResult<Option<PathBuf>> {
        let value = flag.or_else(|| self.from_file(key).map(PathBuf::from));
        if let Some(p) = &value {
            self.resolved.push((key.to_string(), p.display().to_string()));
        }
        Ok(value)
    }

    fn required_path(&mut self, key: &str, flag: Option<PathBuf>) -> CliResult<PathBuf> {
        self.path(key, flag)?.ok_or_else(|| CliError::usage(format!("--{key} is required")))
    }

    fn flag(&mut self, key: &str, flag: bool) -> CliResult<bool> {
        let v = if flag { true } else { self.opt::<bool>(key, None)?.unwrap_or(false) };
        if flag {
            self.resolved.push((key.to_string(), "true".into()));
        }
        Ok(v)
    }

    fn note(&mut self, key: &str, value: impl Display) {
        self.resolved.push((key.to_string(), value.to_string()));
    }

    fn print(&self) {
        let mut err = io::stderr().lock();
        let _ = writeln!(err, "[{}] resolved config:", self.section);
        for (k, v) in &self.resolved {
            let _ = writeln!(err, "  {k} = {v}");
        }
    }
}

fn pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::usage(format!("cannot create thread pool: {e}")))
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => at(p, fs::write(p, text).map_err(Error::from))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_queries(path: &Path, w_dense: Option<f32>) -> CliResult<VectorDataset> {
    let q = at(path, read_dataset(path))?;
    Ok(match w_dense {
        Some(w) => weight_queries(&q, w)?,
        None => q,
    })
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::GenSynthetic(a) => gen_synthetic(config, a),
        Command::ExactTopk(a) => exact_topk(config, a),
        Command::BuildIndex(a) => build_index(config, a),
        Command::Search(a) => search(config, a),
        Command::Bench(a) => bench_cmd(config, a),
        Command::ValidateTheorems(a) => validate_theorems(config, a),
        Command::IndexStats(a) => index_stats(config, a),
    }
}

fn gen_synthetic(config: Option<&Path>, a: GenArgs) -> CliResult<()> {
    let mut r = Resolver::new(config, "gen-synthetic")?;
    let kind = r.get("kind", a.kind, SyntheticKind::Sparse)?;
    let seed = r.get("seed", a.seed, 1)?;
    let docs_out = r.required_path("docs-out", a.docs_out)?;
    let queries_out = r.required_path("queries-out", a.queries_out)?;
    let (docs, queries) = match kind {
        SyntheticKind::Hybrid => {
            let d = SyntheticHybridSpec::default();
            let spec = SyntheticHybridSpec {
                docs: r.get("docs", a.docs, d.docs)?,
                queries: r.get("num-queries", a.num_queries, d.queries)?,
                dense_dim: r.get("dense-dim", a.dense_dim, d.dense_dim)?,
                sparse_dim: r.get("sparse-dim", a.sparse_dim, d.sparse_dim)?,
                psi: r.get("psi", a.psi, d.psi)?,
                scale: r.get("scale", a.scale, d.scale)?,
                doc_seed: keyed_hash(seed, 0, 0),
                query_seed: keyed_hash(seed, 1, 0),
            };
            r.print();
            gen_synthetic_hybrid(&spec)?
        }
        SyntheticKind::Sparse => {
            let d = SparseSyntheticSpec::default();
            let spec = SparseSyntheticSpec {
                docs: r.get("docs", a.docs, d.docs)?,
                queries: r.get("num-queries", a.num_queries, d.queries)?,
                dim: r.get("sparse-dim", a.sparse_dim, d.dim)?,
                doc_terms: r.get("doc-terms", a.doc_terms, d.doc_terms)?,
                query_terms: r.get("query-terms", a.query_terms, d.query_terms)?,
                topics: r.get("topics", a.topics, d.topics)?,
                scale: r.get("scale", a.scale, d.scale)?,
                world_seed: keyed_hash(seed, 2, 0),
                doc_seed: keyed_hash(seed, 0, 0),
                query_seed: keyed_hash(seed, 1, 0),
                ..d
            };
            r.print();
            gen_synthetic_sparse(&spec)?
        }
    };
    at(&docs_out, write_dataset(&docs, &docs_out))?;
    at(&queries_out, write_dataset(&queries, &queries_out))?;
    eprintln!("wrote {} documents and {} queries", docs.len(), queries.len());
    Ok(())
}

fn exact_topk(config: Option<&Path>, a: ExactArgs) -> CliResult<()> {
    let mut r = Resolver::new(config, "exact-topk")?;
    let data = r.required_path("data", a.data)?;
    let queries = r.required_path("queries", a.queries)?;
    let k = r.get("k", a.k, 10)?;
    let w_dense = r.opt("w-dense", a.w_dense)?;
    let threads = r.get("threads", a.threads, 1)?;
    let out = r.path("out", a.out)?;
    r.print();
    let ds = at(&data, read_dataset(&data))?;
    let qs = load_queries(&queries, w_dense)?;
    let truth = pool(threads)?.install(|| GroundTruth::compute(&ds, &qs, k))?;
    write_output(out.as_deref(), &truth.to_tsv())
}

fn build_index(config: Option<&Path>, a: BuildArgs) -> CliResult<()> {
    let mut r = Resolver::new(config, "build-index")?;
    let data = r.required_path("data", a.data)?;
    let out = r.required_path("out", a.out)?;
    let kind = r.get("transform", a.transform, TransformKind::WeakSinnamon)?;
    let width = r.get("sketch-dim", a.sketch_dim, DEFAULT_SKETCH_DIM)?;
    let mappings = r.get("mappings", a.mappings, 1)?;
    let seed = r.get("seed", a.seed, 0)?;
    let variant = r.get("clustering", a.clustering, Variant::Spherical)?;
    let partitions = r.get("partitions", a.partitions, PartitionCount::Auto)?;
    let max_iters = r.get("max-iters", a.max_iters, KMeansConfig::default().max_iters)?;
    let inverted_out = r.path("inverted-out", a.inverted_out)?;
    let no_remap = r.flag("no-remap", a.no_remap)?;
    let reference = r.flag("reference-dataset", a.reference_dataset)?;
    let threads = r.get("threads", a.threads, 1)?;
    if kind == TransformKind::Sinnamon {
        r.print();
        return Err(CliError::usage(
            "sinnamon sketches have no linear inner product and cannot be clustered; use jl or ws",
        ));
    }
    let ds = Arc::new(at(&data, read_dataset(&data))?);
    let p = match partitions {
        PartitionCount::Auto => default_partitions(ds.len()),
        PartitionCount::Fixed(p) => p,
    };
    r.note("resolved-partitions", p);
    let non_negative = kind == TransformKind::WeakSinnamon && !ds.has_negative_sparse();
    r.note("non-negative-sketch", non_negative);
    r.print();
    if inverted_out.is_some() && !ds.is_sparse_only() {
        return Err(CliError::usage("--inverted-out needs a sparse-only dataset"));
    }
    let transform = Transform::build(kind, ds.sparse_dim(), width, seed, mappings, non_negative)?;
    let cfg = IvfConfig {
        partitions: Some(p),
        variant,
        kmeans: KMeansConfig { max_iters, seed: keyed_hash(seed, 3, 0), ..Default::default() },
    };
    let mut index = pool(threads)?.install(|| {
        if ds.dense_dim() > 0 {
            build_ivf_hybrid(ds.clone(), transform, &cfg)
        } else {
            build_ivf(ds.clone(), transform, &cfg)
        }
    })?;
    if reference {
        index.set_storage(DatasetStorage::Path(relative_to(&data, &out)));
    }
    at(&out, write_index(&index, &out))?;
    eprintln!(
        "indexed {} documents into {} partitions ({} kmeans iterations)",
        index.len(),
        index.num_partitions(),
        index.model().iterations_run()
    );
    if let Some(path) = inverted_out {
        let inv = build_partitioned_index(index.dataset(), index.partitions(), !no_remap)?;
        let report = index_overhead_report(&inv, Some(&index));
        at(&path, write_inverted(&inv, &path))?;
        eprintln!(
            "inverted index: {} postings, {} skip integers (bound {})",
            report.posting_entries, report.skip_integers, report.skip_bound
        );
    }
    Ok(())
}

/// `data` as seen from the directory of `index`, when both are relative to
/// the same place; otherwise `data` made absolute.
fn relative_to(data: &Path, index: &Path) -> PathBuf {
    let abs = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    let data_abs = abs(data);
    let dir = index.parent().filter(|d| !d.as_os_str().is_empty()).map(abs).unwrap_or_else(|| abs(Path::new(".")));
    match data_abs.strip_prefix(&dir) {
        Ok(rel) => rel.to_path_buf(),
        Err(_) => data_abs,
    }
}

fn load_or_build_inverted(path: Option<&Path>, index: &IvfIndex) -> CliResult<PartitionedInvertedIndex> {
    let inv = match path {
        Some(p) => at(p, read_inverted(p))?,
        None => build_partitioned_index(index.dataset(), index.partitions(), true)?,
    };
    if inv.doc_count() as usize != index.len() || inv.num_partitions() as usize != index.num_partitions() {
        return Err(CliError::data("inverted index does not match the IVF index"));
    }
    Ok(inv)
}

fn search(config: Option<&Path>, a: SearchArgs) -> CliResult<()> {
    let mut r = Resolver::new(config, "search")?;
    let index_path = r.required_path("index", a.index)?;
    let queries = r.required_path("queries", a.queries)?;
    let k = r.get("k", a.k, 10)?;
    let ell = r.get("ell", a.ell, Ell::Fraction(0.1))?;
    let sub = r.get("sub", a.sub, SubKind::Exhaustive)?;
    let inverted = r.path("inverted", a.inverted)?;
    let w_dense = r.opt("w-dense", a.w_dense)?;
    let threads = r.get("threads", a.threads, 1)?;
    let out = r.path("out", a.out)?;
    let index = at(&index_path, read_index(&index_path))?;
    let ell_abs = ell.resolve(index.len())?;
    r.note("resolved-ell", ell_abs);
    r.note("partitions", index.num_partitions());
    r.print();
    let qs = load_queries(&queries, w_dense)?;
    let inv;
    let algo: &(dyn SubAlgorithm + Sync) = match sub {
        SubKind::Exhaustive => &Exhaustive,
        SubKind::Inverted => {
            inv = load_or_build_inverted(inverted.as_deref(), &index)?;
            &inv
        }
    };
    let results = pool(threads)?.install(|| {
        use rayon::prelude::*;
        qs.vectors()
            .par_iter()
            .map(|q| index.retrieve_hybrid(q, k, ell_abs, algo).map(|r| r.top))
            .collect::<crate::Result<Vec<TopKResult>>>()
    })?;
    write_output(out.as_deref(), &results_to_tsv(&results))
}

fn bench_cmd(config: Option<&Path>, a: BenchArgs) -> CliResult<()> {
    let mut r = Resolver::new(config, "bench")?;
    let index_path = r.required_path("index", a.index)?;
    let queries = r.required_path("queries", a.queries)?;
    let truth_path = r.path("truth", a.truth)?;
    let inverted = r.path("inverted", a.inverted)?;
    let index = at(&index_path, read_index(&index_path))?;
    let default_systems = if index.is_hybrid() {
        vec![System::IvfExhaustive]
    } else {
        vec![System::IvfExhaustive, System::IvfInverted, System::LinscanBudgeted]
    };
    let systems = r.get("systems", a.systems, List(default_systems))?;
    let defaults = BenchConfig::default();
    let ells = r.get("ell", a.ell, List(defaults.ells.clone()))?;
    let budgets = r.get("budgets", a.budgets, List(default_budgets(ells.0.len())))?;
    let k = r.get("k", a.k, defaults.k)?;
    let repeats = r.get("repeats", a.repeats, defaults.repeats)?;
    let w_dense = r.opt("w-dense", a.w_dense)?;
    let threads = r.get("threads", a.threads, 1)?;
    let out = r.path("out", a.out)?;
    r.note("partitions", index.num_partitions());
    r.print();
    let qs = load_queries(&queries, w_dense)?;
    let truth = match truth_path {
        Some(p) => {
            let t = at(&p, GroundTruth::read(&p))?;
            if t.len() != qs.len() {
                return Err(CliError::data(format!("ground truth has {} lines for {} queries", t.len(), qs.len())));
            }
            GroundTruth { k, ..t }
        }
        None => GroundTruth::compute(index.dataset(), &qs, k)?,
    };
    let inv = match (inverted.as_deref(), systems.0.contains(&System::IvfInverted)) {
        (Some(p), _) => Some(load_or_build_inverted(Some(p), &index)?),
        (None, true) => Some(load_or_build_inverted(None, &index)?),
        _ => None,
    };
    let cfg = BenchConfig { k, ells: ells.0, budgets: budgets.0, repeats, threads };
    let ctx = BenchContext { ivf: &index, inverted: inv.as_ref(), plain: None };
    let report = bench(ctx, &qs, &truth, &systems.0, &cfg)?;
    write_output(out.as_deref(), &report.to_csv())
}

fn validate_theorems(config: Option<&Path>, a: TheoremArgs) -> CliResult<()> {
    let mut r = Resolver::new(config, "validate-theorems")?;
    let trials = r.get("trials", a.trials, 10_000)?;
    let seed = r.get("seed", a.seed, 0)?;
    let threads = r.get("threads", a.threads, 1)?;
    r.print();
    let report = pool(threads)?.install(|| validate_all(trials, seed, &faithful))?;
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::data("one or more theorem checks failed"))
    }
}

fn index_stats(config: Option<&Path>, a: StatsArgs) -> CliResult<()> {
    let mut r = Resolver::new(config, "index-stats")?;
    let index_path = r.required_path("index", a.index)?;
    let inverted = r.path("inverted", a.inverted)?;
    r.print();
    let index = at(&index_path, read_index(&index_path))?;
    let sizes: Vec<usize> = index.partitions().iter().map(Vec::len).collect();
    let mut out = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(out, "documents\t{}", index.len());
    let _ = writeln!(out, "dense_dim\t{}", index.dataset().dense_dim());
    let _ = writeln!(out, "sparse_dim\t{}", index.dataset().sparse_dim());
    let _ = writeln!(out, "transform\t{}", index.transform().kind());
    let _ = writeln!(out, "sketch_width\t{}", index.transform().width());
    let _ = writeln!(out, "clustering\t{}", index.model().variant());
    let _ = writeln!(out, "partitions\t{}", index.num_partitions());
    let _ = writeln!(out, "centroid_floats\t{}", index.model().num_partitions() * index.model().width());
    let _ = writeln!(out, "partition_size_min\t{}", sizes.iter().min().copied().unwrap_or(0));
    let _ = writeln!(out, "partition_size_max\t{}", sizes.iter().max().copied().unwrap_or(0));
    let _ = writeln!(out, "empty_partitions\t{}", sizes.iter().filter(|&&s| s == 0).count());
    let _ = writeln!(out, "kmeans_iterations\t{}", index.model().iterations_run());
    let _ = writeln!(out, "kmeans_inertia\t{}", index.model().inertia());
    if let Some(p) = inverted {
        let inv = load_or_build_inverted(Some(&p), &index)?;
        let rep = index_overhead_report(&inv, Some(&index));
        let _ = writeln!(out, "posting_entries\t{}", rep.posting_entries);
        let _ = writeln!(out, "skip_integers\t{}", rep.skip_integers);
        let _ = writeln!(out, "skip_bound_2NP\t{}", rep.skip_bound);
        let _ = writeln!(out, "skip_within_bound\t{}", rep.within_bound());
        let _ = writeln!(out, "remapped\t{}", inv.is_remapped());
    }
    write_output(None, &out)
}
