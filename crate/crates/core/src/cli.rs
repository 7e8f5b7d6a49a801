//! The `elastic-shapes` command line.
//!
//! Exit codes: 0 success, 2 malformed input or usage, 3 validation failure,
//! 4 numeric failure, 5 i/o failure.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::geodesic::{geodesic, path_energy};
use crate::io::{self, PairCache, PairKey, RunManifest};
use crate::learning::{
    complete_linkage, default_a_grid, grid_search_with, nn_classify, pair_distance, rand_index, roc_curves,
    train_test_split, DistanceMatrix, LabeledShapeSet, Loss,
};
use crate::params::MetricParams;
use crate::registration::{register, Method, RegistrationOptions, DEFAULT_WINDOW};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_IO: i32 = 5;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => EXIT_PARSE,
        Error::Numeric(_) => EXIT_NUMERIC,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

#[derive(Debug, Parser)]
#[command(name = "elastic-shapes", version, about = "Elastic shape distances, registration, geodesics and metric learning")]
pub struct JobConfig {
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "ELASTIC_THREADS", default_value_t = 0, global = true)]
    pub threads: usize,

    /// Run-manifest path. Defaults to `<output>.manifest.json` beside the
    /// first file output, or `<out-dir>/manifest.json`.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    /// Suppress progress messages.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dp,
    Exact,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dp => Method::Dp,
            MethodArg::Exact => Method::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Ratio,
    Softmax,
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    /// Bending weight; 0 selects the arc-length closed form.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,

    /// Stretching weight.
    #[arg(long, default_value_t = 0.5)]
    pub b: f64,

    #[arg(long, value_enum, default_value_t = MethodArg::Dp)]
    pub method: MethodArg,

    /// DP window: the largest index step per move.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,

    /// Treat every input curve as closed (CSV files carry no flag).
    #[arg(long)]
    pub closed: bool,
}

impl MetricArgs {
    fn closed_override(&self) -> Option<bool> {
        self.closed.then_some(true)
    }

    fn registration(&self) -> Result<RegistrationOptions> {
        if self.window == 0 {
            return Err(Error::InvalidGrid("window must be at least 1".into()));
        }
        Ok(RegistrationOptions { grid: None, window: Some(self.window) })
    }

    fn check(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(Error::InvalidParams(format!("a must be finite and nonnegative, got {}", self.a)));
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::InvalidParams(format!("b must be positive and finite, got {}", self.b)));
        }
        self.registration().map(|_| ())
    }

    fn params_json(&self) -> serde_json::Value {
        json!({ "a": self.a, "b": self.b, "method": Method::from(self.method).as_str(), "window": self.window })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shape distance between two curves.
    Dist {
        #[command(flatten)]
        metric: MetricArgs,
        c1: PathBuf,
        c2: PathBuf,
        /// Also write `{"distance", "seed_index"}` as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal registration of the second curve against the first.
    Register {
        #[command(flatten)]
        metric: MetricArgs,
        c1: PathBuf,
        c2: PathBuf,
        /// JSON output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frames along the geodesic between two registered curves.
    Geodesic {
        #[command(flatten)]
        metric: MetricArgs,
        c1: PathBuf,
        c2: PathBuf,
        /// Number of frames, endpoints included.
        #[arg(long, default_value_t = 7)]
        steps: usize,
        /// SVG strip of the frames (planar curves only).
        #[arg(long)]
        svg: Option<PathBuf>,
        /// JSON frames; stdout when neither output is given.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Pairwise distance matrix of a dataset manifest or a list of curves.
    Matrix {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-pair cache file, reused across runs.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Choose `a` on a labeled dataset by grid search.
    Learn {
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = LossArg::Ratio)]
        loss: LossArg,
        /// Softmax temperature.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long, default_value = "0:2:0.1")]
        grid: String,
        #[arg(long, default_value_t = 0.5)]
        b: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Dp)]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        /// Training items per class; 0 trains and evaluates on everything.
        #[arg(long, default_value_t = 7)]
        per_class: usize,
        /// Seed of the train/test split.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Nearest-neighbor classification and ROC of test curves against a
    /// labeled training set.
    Classify {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Dist { .. } => "dist",
            Command::Register { .. } => "register",
            Command::Geodesic { .. } => "geodesic",
            Command::Matrix { .. } => "matrix",
            Command::Learn { .. } => "learn",
            Command::Classify { .. } => "classify",
        }
    }
}

/// Parses `start:stop:step` (inclusive, with `stop − start` a multiple of
/// `step`) or `v1,v2,...`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad grid value {s:?}")));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.len() {
        1 => spec.split(',').map(num).collect::<Result<Vec<f64>>>()?,
        3 => {
            let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0 && stop >= start) {
                return Err(Error::InvalidArgument(format!("grid {spec:?} must have step > 0 and stop >= start")));
            }
            let count = ((stop - start) / step).round();
            if ((stop - start) - count * step).abs() > 1e-9 * step.max(stop - start) {
                return Err(Error::InvalidArgument(format!("grid {spec:?}: range is not a multiple of the step")));
            }
            let count = count as usize;
            if count == 0 {
                vec![start]
            } else {
                // Computed as one rounded quotient so 0:2:0.1 yields exactly i/10.
                (0..=count).map(|i| start + (stop - start) * i as f64 / count as f64).collect()
            }
        }
        _ => return Err(Error::Parse(format!("bad grid {spec:?}"))),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("bad grid {spec:?}")));
    }
    Ok(values)
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main() -> i32 {
    let config = match JobConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&config) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(config: &JobConfig) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let start = Instant::now();
    let report = pool.install(|| dispatch(config))?;
    let manifest_path = config.manifest.clone().or_else(|| match (&report.out_dir, report.outputs.first()) {
        (Some(dir), _) => Some(dir.join("manifest.json")),
        (None, Some(first)) => Some(PathBuf::from(format!("{}.manifest.json", first.display()))),
        (None, None) => None,
    });
    if let Some(path) = manifest_path {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: config.command.name().into(),
            inputs: io::inputs_record(&report.inputs)?,
            params: report.params,
            seed: report.seed,
            threads,
            outputs: report.outputs.iter().map(|p| p.display().to_string()).collect(),
            wall_time_s: start.elapsed().as_secs_f64(),
        };
        io::write_json(&path, &manifest)?;
    }
    Ok(())
}

struct Report {
    inputs: Vec<PathBuf>,
    params: serde_json::Value,
    seed: Option<u64>,
    outputs: Vec<PathBuf>,
    out_dir: Option<PathBuf>,
}

impl Report {
    fn new(inputs: Vec<PathBuf>, params: serde_json::Value) -> Self {
        Self { inputs, params, seed: None, outputs: Vec::new(), out_dir: None }
    }
}

fn dispatch(config: &JobConfig) -> Result<Report> {
    let quiet = config.quiet;
    match &config.command {
        Command::Dist { metric, c1, c2, out } => {
            metric.check()?;
            let (a, b) = read_pair(c1, c2, metric)?;
            let (distance, seed) = if metric.a == 0.0 {
                (pair_distance(&a, &b, 0.0, metric.b, metric.method.into(), &metric.registration()?)?, None)
            } else {
                let p = MetricParams::new(metric.a, metric.b)?;
                let r = register(&a, &b, &p, metric.method.into(), &metric.registration()?)?;
                (r.distance, r.seed_index)
            };
            println!("{}", io::fmt_f64(distance));
            let mut report = Report::new(vec![c1.clone(), c2.clone()], metric.params_json());
            if let Some(out) = out {
                io::write_json(out, &json!({ "distance": distance, "seed_index": seed }))?;
                report.outputs.push(out.clone());
            }
            Ok(report)
        }
        Command::Register { metric, c1, c2, out } => {
            metric.check()?;
            let p = positive_params(metric)?;
            let (a, b) = read_pair(c1, c2, metric)?;
            let r = register(&a, &b, &p, metric.method.into(), &metric.registration()?)?;
            let mut report = Report::new(vec![c1.clone(), c2.clone()], metric.params_json());
            emit_json(out.as_deref(), &r, &mut report)?;
            Ok(report)
        }
        Command::Geodesic { metric, c1, c2, steps, svg, json: json_out } => {
            metric.check()?;
            let p = positive_params(metric)?;
            let (a, b) = read_pair(c1, c2, metric)?;
            let r = register(&a, &b, &p, metric.method.into(), &metric.registration()?)?;
            let b = match r.seed_index {
                Some(k) => b.rotated(k)?,
                None => b,
            };
            let path = geodesic(&a, &b, &r.reparam, &p, *steps)?;
            if !path.apex_cells.is_empty() && !quiet {
                eprintln!("geodesic: {} cells pass through the apex", path.apex_cells.len());
            }
            let mut params = metric.params_json();
            params["steps"] = json!(steps);
            let mut report = Report::new(vec![c1.clone(), c2.clone()], params);
            if let Some(svg) = svg {
                io::write_string(svg, &path.to_svg()?)?;
                report.outputs.push(svg.clone());
            }
            if json_out.is_some() || svg.is_none() {
                let body = json!({
                    "distance": r.distance,
                    "path_energy": path_energy(&path, &p)?,
                    "seed_index": r.seed_index,
                    "reparam": r.reparam,
                    "geodesic": path,
                });
                emit_json(json_out.as_deref(), &body, &mut report)?;
            }
            Ok(report)
        }
        Command::Matrix { metric, inputs, out, cache } => {
            metric.check()?;
            let (curves, paths) = read_inputs(inputs, metric.closed_override())?;
            let cache = cache.as_deref().map(PairCache::open).transpose()?;
            let method = metric.method.into();
            let dm = cached_matrix(&curves, metric.a, metric.b, method, metric.window, cache.as_ref(), quiet)?;
            let mut params = metric.params_json();
            params["curves"] = json!(paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
            let mut report = Report::new(paths, params);
            match out {
                Some(out) => {
                    io::write_matrix_csv(out, &dm)?;
                    report.outputs.push(out.clone());
                }
                None => print!("{}", io::matrix_to_csv(&dm)),
            }
            Ok(report)
        }
        Command::Learn { dataset, loss, beta, grid, b, method, window, per_class, seed, out_dir, cache } => {
            learn(dataset, *loss, *beta, grid, *b, (*method).into(), *window, *per_class, *seed, out_dir, cache.as_deref(), quiet)
        }
        Command::Classify { metric, train, test, out_dir, cache } => {
            metric.check()?;
            let train_set = io::read_dataset(train)?;
            let test_set = io::read_dataset(test)?;
            let cache = cache.as_deref().map(PairCache::open).transpose()?;
            let rows = cross_distances(&test_set.set, &train_set.set, metric, cache.as_ref(), quiet)?;
            let truth = test_set.set.labels();
            let nn = nn_classify(&rows, train_set.set.labels(), Some(truth))?;
            let roc = roc_curves(&rows, train_set.set.labels(), truth)?;
            let mean_auc = roc.per_query.iter().map(|r| r.auc).sum::<f64>() / roc.per_query.len() as f64;
            println!("accuracy {}", io::fmt_f64(nn.accuracy.unwrap_or(0.0)));
            println!("mean_auc {}", io::fmt_f64(mean_auc));
            println!("aggregate_auc {}", io::fmt_f64(roc.aggregate.auc));
            let mut inputs = vec![train.clone(), test.clone()];
            inputs.extend(train_set.paths);
            inputs.extend(test_set.paths);
            let mut report = Report::new(inputs, metric.params_json());
            if let Some(dir) = out_dir {
                create_dir(dir)?;
                let out = dir.join("classify.json");
                io::write_json(&out, &json!({ "nearest_neighbor": nn, "mean_auc": mean_auc, "roc": roc }))?;
                let dm = dir.join("test_train_distances.csv");
                write_rect_csv(&dm, &rows)?;
                report.outputs.extend([out, dm]);
                report.out_dir = Some(dir.clone());
            }
            Ok(report)
        }
    }
}

fn positive_params(metric: &MetricArgs) -> Result<MetricParams> {
    if metric.a == 0.0 {
        return Err(Error::InvalidParams("this command needs a > 0".into()));
    }
    MetricParams::new(metric.a, metric.b)
}

fn read_pair(c1: &Path, c2: &Path, metric: &MetricArgs) -> Result<(DiscreteCurve, DiscreteCurve)> {
    Ok((io::read_curve(c1, metric.closed_override())?, io::read_curve(c2, metric.closed_override())?))
}

fn read_inputs(inputs: &[PathBuf], closed: Option<bool>) -> Result<(Vec<DiscreteCurve>, Vec<PathBuf>)> {
    if inputs.len() == 1 && io::is_dataset_manifest(&inputs[0]) {
        let d = io::read_dataset(&inputs[0])?;
        let mut paths = vec![inputs[0].clone()];
        paths.extend(d.paths);
        return Ok((d.set.curves().to_vec(), paths));
    }
    let curves = inputs.iter().map(|p| io::read_curve(p, closed)).collect::<Result<Vec<_>>>()?;
    Ok((curves, inputs.to_vec()))
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T, report: &mut Report) -> Result<()> {
    match out {
        Some(out) => {
            io::write_json(out, value)?;
            report.outputs.push(out.to_path_buf());
        }
        None => println!("{}", serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(e.to_string()))?),
    }
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

fn write_rect_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let text: String = rows
        .iter()
        .map(|r| r.iter().map(|&v| io::fmt_f64(v)).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    io::write_string(path, &text)
}

struct Progress {
    label: &'static str,
    total: usize,
    done: AtomicUsize,
    quiet: bool,
}

impl Progress {
    fn new(label: &'static str, total: usize, quiet: bool) -> Self {
        Self { label, total, done: AtomicUsize::new(0), quiet }
    }

    fn tick(&self) {
        let done = self.done.fetch_add(1, Ordering::Relaxed) + 1;
        let step = (self.total / 10).max(1);
        if !self.quiet && (done.is_multiple_of(step) || done == self.total) {
            eprintln!("{}: {done}/{} pairs", self.label, self.total);
        }
    }
}

/// One pair's distance through the optional cache.
fn cached_pair(
    c1: &DiscreteCurve,
    c2: &DiscreteCurve,
    h1: &str,
    h2: &str,
    a: f64,
    b: f64,
    method: Method,
    window: usize,
    cache: Option<&PairCache>,
) -> Result<f64> {
    let key = cache.map(|_| PairKey { h1, h2, a, b, method, window, grid: None }.digest());
    if let (Some(cache), Some(key)) = (cache, &key) {
        if let Some(d) = cache.get(key) {
            return Ok(d);
        }
    }
    let opts = RegistrationOptions { grid: None, window: Some(window) };
    let d = pair_distance(c1, c2, a, b, method, &opts)?;
    if let (Some(cache), Some(key)) = (cache, key) {
        cache.insert(key, d)?;
    }
    Ok(d)
}

fn cached_matrix(
    curves: &[DiscreteCurve],
    a: f64,
    b: f64,
    method: Method,
    window: usize,
    cache: Option<&PairCache>,
    quiet: bool,
) -> Result<DistanceMatrix> {
    let hashes: Vec<String> = curves.iter().map(io::curve_hash).collect();
    let n = curves.len();
    let both = method == Method::Dp && a > 0.0;
    let total = if both { n * n.saturating_sub(1) } else { n * n.saturating_sub(1) / 2 };
    let progress = Progress::new("matrix", total, quiet);
    DistanceMatrix::fill(n, a, b, method, both, |i, j| {
        let d = cached_pair(&curves[i], &curves[j], &hashes[i], &hashes[j], a, b, method, window, cache)?;
        progress.tick();
        Ok(d)
    })
}

fn cross_distances(
    queries: &LabeledShapeSet,
    train: &LabeledShapeSet,
    metric: &MetricArgs,
    cache: Option<&PairCache>,
    quiet: bool,
) -> Result<Vec<Vec<f64>>> {
    let qh: Vec<String> = queries.curves().iter().map(io::curve_hash).collect();
    let th: Vec<String> = train.curves().iter().map(io::curve_hash).collect();
    let (nq, nt) = (queries.len(), train.len());
    let progress = Progress::new("classify", nq * nt, quiet);
    let method = metric.method.into();
    let flat = (0..nq * nt)
        .into_par_iter()
        .map(|k| {
            let (q, t) = (k / nt, k % nt);
            let d = cached_pair(
                &queries.curves()[q],
                &train.curves()[t],
                &qh[q],
                &th[t],
                metric.a,
                metric.b,
                method,
                metric.window,
                cache,
            )?;
            progress.tick();
            Ok(d)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(flat.chunks(nt).map(|c| c.to_vec()).collect())
}

#[allow(clippy::too_many_arguments)]
fn learn(
    dataset: &Path,
    loss: LossArg,
    beta: f64,
    grid: &str,
    b: f64,
    method: Method,
    window: usize,
    per_class: usize,
    seed: u64,
    out_dir: &Path,
    cache: Option<&Path>,
    quiet: bool,
) -> Result<Report> {
    let a_values = if grid == "default" { default_a_grid() } else { parse_grid(grid)? };
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidParams(format!("b must be positive and finite, got {b}")));
    }
    if window == 0 {
        return Err(Error::InvalidGrid("window must be at least 1".into()));
    }
    let loss = match loss {
        LossArg::Ratio => Loss::Ratio,
        LossArg::Softmax => Loss::Softmax { beta },
    };
    let data = io::read_dataset(dataset)?;
    let set = &data.set;
    let split = if per_class == 0 {
        None
    } else {
        Some(train_test_split(set.labels(), per_class, seed)?)
    };
    let train_idx: Vec<usize> = match &split {
        Some(s) => s.train.clone(),
        None => (0..set.len()).collect(),
    };
    let train = set.subset(&train_idx)?;
    let cache = cache.map(PairCache::open).transpose()?;
    let result = grid_search_with(&a_values, loss, train.labels(), |a| {
        cached_matrix(train.curves(), a, b, method, window, cache.as_ref(), quiet)
    })?;
    let a_star = result.a_star;
    println!("a_star {a_star}");

    create_dir(out_dir)?;
    let mut outputs = Vec::new();
    let losses_path = out_dir.join("losses.csv");
    io::write_losses_csv(&losses_path, &result.losses)?;
    outputs.push(losses_path);

    let k = set.class_count();
    let train_dm = cached_matrix(train.curves(), a_star, b, method, window, cache.as_ref(), quiet)?;
    let train_partition = complete_linkage(&train_dm, k)?;
    let train_ri = rand_index(&train_partition, train.labels())?;
    let train_path = out_dir.join("matrix_train.csv");
    io::write_matrix_csv(&train_path, &train_dm)?;
    outputs.push(train_path);

    let mut test_eval = serde_json::Value::Null;
    if let Some(s) = &split {
        let labels: Vec<usize> = s.test.iter().map(|&i| set.labels()[i]).collect();
        let curves: Vec<DiscreteCurve> = s.test.iter().map(|&i| set.curves()[i].clone()).collect();
        let test_dm = cached_matrix(&curves, a_star, b, method, window, cache.as_ref(), quiet)?;
        let partition = complete_linkage(&test_dm, k.min(curves.len()))?;
        let ri = if curves.len() >= 2 { Some(rand_index(&partition, &labels)?) } else { None };
        if let Some(ri) = ri {
            println!("test_rand_index {ri}");
        }
        let test_path = out_dir.join("matrix_test.csv");
        io::write_matrix_csv(&test_path, &test_dm)?;
        outputs.push(test_path);
        test_eval = json!({ "indices": s.test, "partition": partition, "rand_index": ri });
    }
    println!("train_rand_index {train_ri}");

    let summary = json!({
        "loss": loss,
        "b": b,
        "method": method.as_str(),
        "window": window,
        "a_star": a_star,
        "loss_star": result.loss_star,
        "losses": result.losses,
        "split": split,
        "train": { "indices": train_idx, "partition": train_partition, "rand_index": train_ri },
        "test": test_eval,
    });
    let summary_path = out_dir.join("result.json");
    io::write_json(&summary_path, &summary)?;
    outputs.push(summary_path);

    let mut inputs = vec![dataset.to_path_buf()];
    inputs.extend(data.paths.iter().cloned());
    let params = json!({ "loss": loss, "grid": a_values, "b": b, "method": method.as_str(), "window": window, "per_class": per_class });
    Ok(Report { inputs, params, seed: Some(seed), outputs, out_dir: Some(out_dir.to_path_buf()) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec() {
        assert_eq!(parse_grid("0:2:0.1").unwrap(), default_a_grid());
        assert_eq!(parse_grid("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_grid("1, 0.25,2").unwrap(), vec![1.0, 0.25, 2.0]);
        assert_eq!(parse_grid("1:1:0.5").unwrap(), vec![1.0]);
        assert!(matches!(parse_grid("0:1:0.3"), Err(Error::InvalidArgument(_))));
        assert!(matches!(parse_grid("0:x:1"), Err(Error::Parse(_))));
        assert!(parse_grid("1:0:0.1").is_err());
    }

    #[test]
    fn exit_codes_distinct() {
        assert_eq!(exit_code(&Error::Parse(String::new())), EXIT_PARSE);
        assert_eq!(exit_code(&Error::InvalidCurve(String::new())), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::Numeric(String::new())), EXIT_NUMERIC);
        assert_eq!(exit_code(&Error::Io(String::new())), EXIT_IO);
    }

    #[test]
    fn config_parses() {
        let c = JobConfig::try_parse_from(["elastic-shapes", "dist", "--a", "0.3", "--method", "exact", "x", "y"]).unwrap();
        match c.command {
            Command::Dist { metric, .. } => {
                assert_eq!(metric.a, 0.3);
                assert_eq!(metric.b, 0.5);
                assert_eq!(metric.method, MethodArg::Exact);
                assert_eq!(metric.window, DEFAULT_WINDOW);
            }
            _ => panic!("wrong command"),
        }
        assert!(JobConfig::try_parse_from(["elastic-shapes", "dist", "--method", "fast", "x", "y"]).is_err());
    }
}
