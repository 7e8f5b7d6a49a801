//! C ABI for `elastic-shapes`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `es_*_free`. Every fallible call returns an
//! [`EsStatus`]; on failure the message is kept per thread and read with
//! [`es_last_error_message`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use elastic_shapes::curve::DiscreteCurve;
use elastic_shapes::geodesic::{geodesic, GeodesicPath};
use elastic_shapes::io::read_curve;
use elastic_shapes::learning::DistanceMatrix;
use elastic_shapes::params::MetricParams;
use elastic_shapes::registration::{register, Method, RegistrationOptions, RegistrationResult};
use elastic_shapes::Error;

/// Result codes. Values 2 to 5 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    Validation = 3,
    Numeric = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsMethod {
    Dp = 0,
    Exact = 1,
}

/// Metric parameters and solver choice.
/// `window` is the DP search window; 0 selects the default.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EsMetric {
    pub a: f64,
    pub b: f64,
    pub method: EsMethod,
    pub window: usize,
}

/// A polyline in R^d, open or closed.
pub struct EsCurve(DiscreteCurve);

/// The outcome of registering two curves.
pub struct EsRegistration(RegistrationResult);

/// Frames sampled along a geodesic.
pub struct EsGeodesic(GeodesicPath);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EsStatus {
    match e {
        Error::Parse(_) => EsStatus::Parse,
        Error::Numeric(_) => EsStatus::Numeric,
        Error::Io(_) => EsStatus::Io,
        _ => EsStatus::Validation,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (EsStatus, String)>) -> EsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            EsStatus::Panic
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, (EsStatus, String)>;
}

impl<T> OrStatus<T> for elastic_shapes::Result<T> {
    fn or_status(self) -> Result<T, (EsStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (EsStatus, String) {
    (EsStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` is null or points to a live `T`.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (EsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<*mut T, (EsStatus, String)> {
    if p.is_null() {
        Err(null(what))
    } else {
        Ok(p)
    }
}

fn params(m: &EsMetric) -> Result<(MetricParams, Method, RegistrationOptions), (EsStatus, String)> {
    let p = MetricParams::new(m.a, m.b).or_status()?;
    let method = match m.method {
        EsMethod::Dp => Method::Dp,
        EsMethod::Exact => Method::Exact,
    };
    let opts = RegistrationOptions { grid: None, window: (m.window > 0).then_some(m.window) };
    Ok((p, method, opts))
}

/// Default metric: `a = 1`, `b = 1/2`, dynamic programming, default window.
#[no_mangle]
pub extern "C" fn es_metric_default() -> EsMetric {
    EsMetric { a: 1.0, b: 0.5, method: EsMethod::Dp, window: 0 }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn es_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null if none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn es_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a curve from `n_points * dim` row-major coordinates.
///
/// # Safety
/// `points` must be valid for `n_points * dim` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_curve_new(
    points: *const f64,
    n_points: usize,
    dim: usize,
    closed: bool,
    out: *mut *mut EsCurve,
) -> EsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if points.is_null() {
            return Err(null("points"));
        }
        let len = n_points.checked_mul(dim).ok_or((EsStatus::Validation, "size overflow".into()))?;
        let flat = std::slice::from_raw_parts(points, len);
        let rows: Vec<Vec<f64>> = if dim == 0 { vec![] } else { flat.chunks(dim).map(<[f64]>::to_vec).collect() };
        let c = if closed { DiscreteCurve::closed(rows) } else { DiscreteCurve::open(rows) }.or_status()?;
        *out = Box::into_raw(Box::new(EsCurve(c)));
        Ok(())
    })
}

/// Reads a curve from a JSON or CSV file. `closed` overrides the file's
/// closure flag: 0 open, 1 closed, any other value keeps the file's.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_curve_read(path: *const c_char, closed: i32, out: *mut *mut EsCurve) -> EsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|e| (EsStatus::Validation, format!("path is not UTF-8: {e}")))?;
        let closed = match closed {
            0 => Some(false),
            1 => Some(true),
            _ => None,
        };
        *out = Box::into_raw(Box::new(EsCurve(read_curve(Path::new(path), closed).or_status()?)));
        Ok(())
    })
}

/// # Safety
/// `curve` is null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn es_curve_free(curve: *mut EsCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Vertex count (a closed curve does not repeat its first vertex); 0 for null.
///
/// # Safety
/// `curve` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_curve_vertex_count(curve: *const EsCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.vertex_count())
}

/// Ambient dimension; 0 for null.
///
/// # Safety
/// `curve` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_curve_dim(curve: *const EsCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.dim())
}

/// # Safety
/// `curve` is null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_curve_arc_length(curve: *const EsCurve, out: *mut f64) -> EsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = deref(curve, "curve")?.0.arc_length();
        Ok(())
    })
}

/// Copies the vertices row-major into `buf`, which holds `capacity` values.
/// Fails with `BufferTooSmall` if `capacity < vertex_count * dim`.
///
/// # Safety
/// `curve` is null or a live handle; `buf` must be valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn es_curve_copy_points(curve: *const EsCurve, buf: *mut f64, capacity: usize) -> EsStatus {
    guard(|| {
        let c = &deref(curve, "curve")?.0;
        let buf = out_ptr(buf, "buf")?;
        let need = c.vertex_count() * c.dim();
        if capacity < need {
            return Err((EsStatus::BufferTooSmall, format!("need {need} values, got {capacity}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (d, s) in dst.iter_mut().zip(c.points().iter().flatten()) {
            *d = *s;
        }
        Ok(())
    })
}

/// Elastic distance between two curves modulo reparametrization.
///
/// # Safety
/// Handles are live or null; `metric` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn es_distance(
    c1: *const EsCurve,
    c2: *const EsCurve,
    metric: *const EsMetric,
    out: *mut f64,
) -> EsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (p, method, opts) = params(deref(metric, "metric")?)?;
        let r = register(&deref(c1, "c1")?.0, &deref(c2, "c2")?.0, &p, method, &opts).or_status()?;
        *out = r.distance;
        Ok(())
    })
}

/// Registers `c2` against `c1`.
///
/// # Safety
/// Handles are live or null; `metric` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn es_register(
    c1: *const EsCurve,
    c2: *const EsCurve,
    metric: *const EsMetric,
    out: *mut *mut EsRegistration,
) -> EsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (p, method, opts) = params(deref(metric, "metric")?)?;
        let r = register(&deref(c1, "c1")?.0, &deref(c2, "c2")?.0, &p, method, &opts).or_status()?;
        *out = Box::into_raw(Box::new(EsRegistration(r)));
        Ok(())
    })
}

/// # Safety
/// `reg` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_registration_free(reg: *mut EsRegistration) {
    if !reg.is_null() {
        drop(Box::from_raw(reg));
    }
}

/// Distance; NaN for null.
///
/// # Safety
/// `reg` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_registration_distance(reg: *const EsRegistration) -> f64 {
    reg.as_ref().map_or(f64::NAN, |r| r.0.distance)
}

/// Maximized registration energy; NaN for null.
///
/// # Safety
/// `reg` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_registration_energy(reg: *const EsRegistration) -> f64 {
    reg.as_ref().map_or(f64::NAN, |r| r.0.energy)
}

/// Start vertex chosen on the second curve for closed curves, -1 otherwise.
///
/// # Safety
/// `reg` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_registration_seed_index(reg: *const EsRegistration) -> i64 {
    reg.as_ref().and_then(|r| r.0.seed_index).map_or(-1, |k| k as i64)
}

/// Number of vertices of the piecewise linear reparametrization path.
///
/// # Safety
/// `reg` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_registration_vertex_count(reg: *const EsRegistration) -> usize {
    reg.as_ref().map_or(0, |r| r.0.reparam.vertices().len())
}

/// Copies the path vertices as interleaved `(x, y)` pairs into `buf`.
///
/// # Safety
/// `reg` is null or a live handle; `buf` must be valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn es_registration_copy_path(
    reg: *const EsRegistration,
    buf: *mut f64,
    capacity: usize,
) -> EsStatus {
    guard(|| {
        let v = deref(reg, "reg")?.0.reparam.vertices();
        let buf = out_ptr(buf, "buf")?;
        if capacity < 2 * v.len() {
            return Err((EsStatus::BufferTooSmall, format!("need {} values, got {capacity}", 2 * v.len())));
        }
        let dst = std::slice::from_raw_parts_mut(buf, 2 * v.len());
        for (d, (x, y)) in dst.chunks_mut(2).zip(v) {
            d[0] = *x;
            d[1] = *y;
        }
        Ok(())
    })
}

/// Symmetric `n × n` distance matrix, written row-major into `out`.
/// Pairs run in parallel on the global thread pool.
///
/// # Safety
/// `curves` must hold `n` live handles; `out` must be valid for `n * n` writes.
#[no_mangle]
pub unsafe extern "C" fn es_distance_matrix(
    curves: *const *const EsCurve,
    n: usize,
    metric: *const EsMetric,
    out: *mut f64,
) -> EsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if curves.is_null() && n > 0 {
            return Err(null("curves"));
        }
        let m = deref(metric, "metric")?;
        let (_, method, opts) = params(m)?;
        let handles = if n == 0 { &[][..] } else { std::slice::from_raw_parts(curves, n) };
        let list = handles
            .iter()
            .enumerate()
            .map(|(i, h)| deref(*h, &format!("curves[{i}]")).map(|c| c.0.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let dm = DistanceMatrix::compute(&list, m.a, m.b, method, &opts).or_status()?;
        let dst = std::slice::from_raw_parts_mut(out, n * n);
        for i in 0..n {
            dst[i * n..(i + 1) * n].copy_from_slice(dm.row(i));
        }
        Ok(())
    })
}

/// `steps` frames along the geodesic from `c1` to `c2` under `reg`, which
/// must come from [`es_register`] on the same curves and metric.
///
/// # Safety
/// Handles are live or null; `metric` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn es_geodesic(
    c1: *const EsCurve,
    c2: *const EsCurve,
    reg: *const EsRegistration,
    metric: *const EsMetric,
    steps: usize,
    out: *mut *mut EsGeodesic,
) -> EsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let (p, _, _) = params(deref(metric, "metric")?)?;
        let r = &deref(reg, "reg")?.0;
        let c1 = &deref(c1, "c1")?.0;
        let c2 = &deref(c2, "c2")?.0;
        let c2 = match r.seed_index {
            Some(k) => c2.rotated(k).or_status()?,
            None => c2.clone(),
        };
        *out = Box::into_raw(Box::new(EsGeodesic(geodesic(c1, &c2, &r.reparam, &p, steps).or_status()?)));
        Ok(())
    })
}

/// # Safety
/// `g` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_geodesic_free(g: *mut EsGeodesic) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_geodesic_frame_count(g: *const EsGeodesic) -> usize {
    g.as_ref().map_or(0, |g| g.0.frames.len())
}

/// Copy of frame `index` as a new curve handle owned by the caller.
///
/// # Safety
/// `g` is null or a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_geodesic_frame(g: *const EsGeodesic, index: usize, out: *mut *mut EsCurve) -> EsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let frames = &deref(g, "geodesic")?.0.frames;
        let f = frames
            .get(index)
            .ok_or_else(|| (EsStatus::Validation, format!("frame {index} out of range 0..{}", frames.len())))?;
        *out = Box::into_raw(Box::new(EsCurve(f.clone())));
        Ok(())
    })
}
