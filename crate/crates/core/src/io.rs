//! File formats: curves (JSON, CSV), distance matrices (CSV), dataset and
//! run manifests, and the per-pair distance cache.
//!
//! JSON floats use the shortest representation that parses back to the same
//! `f64`; CSV floats use 17 significant digits. Both round-trip exactly.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::learning::{DistanceMatrix, LabeledShapeSet};
use crate::registration::Method;

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CurveRecord {
    points: Vec<Vec<f64>>,
    #[serde(default)]
    closed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    knots: Option<Vec<f64>>,
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{}: {e}", origin.display())))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        Error::Io(format!("{}: {e}", path.display()))
    } else {
        Error::Parse(format!("{}: {e}", path.display()))
    }
}

fn parse_float(field: &str, path: &Path, row: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{}: row {}: not a number: {field:?}", path.display(), row + 1)))
}

fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut rows = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        rows.push(rec.iter().map(|f| parse_float(f, path, r)).collect::<Result<Vec<f64>>>()?);
    }
    Ok(rows)
}

fn write_csv_rows<I, R>(path: &Path, header: Option<&[&str]>, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    if let Some(h) = header {
        w.write_record(h).map_err(|e| csv_err(path, e))?;
    }
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads a curve by extension: `.csv` is one vertex per row; anything else
/// is JSON `{"points": [...], "closed": bool}`. `closed` overrides the
/// file's flag (CSV files carry none and default to open).
pub fn read_curve(path: &Path, closed: Option<bool>) -> Result<DiscreteCurve> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let rec = if is_csv {
        CurveRecord { points: read_csv_rows(path)?, closed: false, knots: None }
    } else {
        parse_json(&read_text(path)?, path)?
    };
    let c = DiscreteCurve::new(rec.points, closed.unwrap_or(rec.closed))?;
    match rec.knots {
        Some(k) => c.with_knots(k),
        None => Ok(c),
    }
}

pub fn curve_to_json(c: &DiscreteCurve) -> String {
    let rec = CurveRecord {
        points: c.points().to_vec(),
        closed: c.is_closed(),
        knots: (!c.has_uniform_grid()).then(|| c.knots()),
    };
    serde_json::to_string(&rec).expect("curve serializes")
}

pub fn write_curve_json(path: &Path, c: &DiscreteCurve) -> Result<()> {
    write_text(path, &(curve_to_json(c) + "\n"))
}

/// Vertices only; the closed flag and knots are not representable.
pub fn write_curve_csv(path: &Path, c: &DiscreteCurve) -> Result<()> {
    write_csv_rows(path, None, c.points().iter().map(|p| p.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>()))
}

pub fn write_matrix_csv(path: &Path, dm: &DistanceMatrix) -> Result<()> {
    write_csv_rows(path, None, (0..dm.n()).map(|i| dm.row(i).iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>()))
}

pub fn matrix_to_csv(dm: &DistanceMatrix) -> String {
    let mut s = String::new();
    for i in 0..dm.n() {
        let row: Vec<String> = dm.row(i).iter().map(|&v| fmt_f64(v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn read_matrix_csv(path: &Path, a: f64, b: f64, method: Method) -> Result<DistanceMatrix> {
    DistanceMatrix::new(read_csv_rows(path)?, a, b, method)
}

/// `a,loss` rows under a header.
pub fn write_losses_csv(path: &Path, losses: &[(f64, f64)]) -> Result<()> {
    write_csv_rows(path, Some(&["a", "loss"]), losses.iter().map(|&(a, l)| vec![fmt_f64(a), fmt_f64(l)]))
}

/// `{"curves": [paths], "labels": [ints], "closed": bool}`. Relative curve
/// paths resolve against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub curves: Vec<String>,
    pub labels: Vec<usize>,
    #[serde(default)]
    pub closed: bool,
}

pub struct Dataset {
    pub set: LabeledShapeSet,
    pub paths: Vec<PathBuf>,
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let m: DatasetManifest = parse_json(&read_text(path)?, path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let paths: Vec<PathBuf> = m.curves.iter().map(|c| dir.join(c)).collect();
    let curves = paths.iter().map(|p| read_curve(p, Some(m.closed))).collect::<Result<Vec<_>>>()?;
    Ok(Dataset { set: LabeledShapeSet::new(curves, m.labels)?, paths })
}

/// True when `path` holds a dataset manifest rather than a single curve.
pub fn is_dataset_manifest(path: &Path) -> bool {
    let Ok(text) = fs::read_to_string(path) else { return false };
    serde_json::from_str::<serde_json::Value>(&text)
        .map(|v| v.get("curves").is_some_and(|c| c.is_array()))
        .unwrap_or(false)
}

/// SHA-256 over the closed flag, dimension, coordinates and knots, as raw
/// little-endian bits.
pub fn curve_hash(c: &DiscreteCurve) -> String {
    let mut h = Sha256::new();
    h.update([u8::from(c.is_closed())]);
    h.update((c.dim() as u64).to_le_bytes());
    h.update((c.vertex_count() as u64).to_le_bytes());
    for p in c.points() {
        for v in p {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    if !c.has_uniform_grid() {
        for k in c.knots() {
            h.update(k.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

pub fn file_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Everything that determines one pair's distance.
#[derive(Debug, Clone, PartialEq)]
pub struct PairKey<'a> {
    pub h1: &'a str,
    pub h2: &'a str,
    pub a: f64,
    pub b: f64,
    pub method: Method,
    pub window: usize,
    /// Explicit DP knots, or `None` for the per-pair default.
    pub grid: Option<&'a [f64]>,
}

impl PairKey<'_> {
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"pair-v1");
        h.update(self.h1.as_bytes());
        h.update(self.h2.as_bytes());
        h.update(self.a.to_bits().to_le_bytes());
        h.update(self.b.to_bits().to_le_bytes());
        h.update(self.method.as_str().as_bytes());
        h.update((self.window as u64).to_le_bytes());
        if let Some(g) = self.grid {
            for k in g {
                h.update(k.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    key: String,
    distance: f64,
}

/// Append-only JSON-lines store of pair distances. Stored values parse back
/// bit-exactly, so a rerun from cache reproduces the same matrix.
pub struct PairCache {
    entries: Mutex<HashMap<String, f64>>,
    file: Mutex<File>,
    path: PathBuf,
}

impl PairCache {
    /// Opens or creates `path`. A truncated last line (interrupted run) is
    /// skipped.
    pub fn open(path: &Path) -> Result<Self> {
        let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
        let text = if path.exists() { fs::read_to_string(path).map_err(io)? } else { String::new() };
        let entries: HashMap<String, f64> = text
            .lines()
            .filter_map(|l| serde_json::from_str::<CacheLine>(l).ok())
            .map(|r| (r.key, r.distance))
            .collect();
        let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        // Terminate a torn line so the next record starts fresh.
        if !text.is_empty() && !text.ends_with('\n') {
            writeln!(file).map_err(io)?;
        }
        Ok(Self { entries: Mutex::new(entries), file: Mutex::new(file), path: path.to_path_buf() })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.lock().unwrap().get(key).copied()
    }

    pub fn insert(&self, key: String, distance: f64) -> Result<()> {
        let line = serde_json::to_string(&CacheLine { key: key.clone(), distance }).expect("cache line serializes");
        {
            let mut f = self.file.lock().unwrap();
            writeln!(f, "{line}").map_err(|e| Error::Io(format!("{}: {e}", self.path.display())))?;
        }
        self.entries.lock().unwrap().insert(key, distance);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

/// Written next to every run's outputs. Wall time makes it the one
/// artifact that is not byte-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputRecord>,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

pub fn inputs_record(paths: &[PathBuf]) -> Result<Vec<InputRecord>> {
    paths
        .iter()
        .map(|p| Ok(InputRecord { path: p.display().to_string(), sha256: file_hash(p)? }))
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    write_text(path, text)
}
