//! Polyline curves and the square-root-velocity representation.
//!
//! A [`DiscreteCurve`] is a piecewise-linear map from a parameter grid
//! `0 = u_0 < … < u_n = 1` into `R^d`. Closed curves carry an implicit
//! closing segment from the last vertex back to the first, so a closed curve
//! with `n` vertices has `n` segments. All continuous quantities are evaluated
//! exactly on this piecewise-linear data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, lerp, norm};
use crate::params::DEFAULT_ZERO_EPS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCurve {
    points: Vec<Vec<f64>>,
    closed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    knots: Option<Vec<f64>>,
}

fn uniform_knots(segments: usize) -> Vec<f64> {
    (0..=segments).map(|i| i as f64 / segments as f64).collect()
}

fn check_knots(knots: &[f64], segments: usize) -> Result<()> {
    if knots.len() != segments + 1 {
        return Err(Error::InvalidGrid(format!(
            "expected {} knots for {} segments, got {}",
            segments + 1,
            segments,
            knots.len()
        )));
    }
    if knots[0] != 0.0 || knots[segments] != 1.0 {
        return Err(Error::InvalidGrid("knots must start at 0 and end at 1".into()));
    }
    if knots.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("knots must be strictly increasing".into()));
    }
    Ok(())
}

impl DiscreteCurve {
    /// Validates and builds a curve on the uniform parameter grid.
    pub fn new(points: Vec<Vec<f64>>, closed: bool) -> Result<Self> {
        let min = if closed { 3 } else { 2 };
        if points.len() < min {
            return Err(Error::InvalidCurve(format!(
                "{} curve needs at least {min} vertices, got {}",
                if closed { "closed" } else { "open" },
                points.len()
            )));
        }
        let d = points[0].len();
        if d < 2 {
            return Err(Error::InvalidCurve(format!("dimension must be >= 2, got {d}")));
        }
        for p in &points {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidCurve("non-finite coordinate".into()));
            }
        }
        Ok(Self { points, closed, knots: None })
    }

    pub fn open(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(points, false)
    }

    pub fn closed(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(points, true)
    }

    /// Attaches an explicit, strictly increasing parameter grid.
    pub fn with_knots(mut self, knots: Vec<f64>) -> Result<Self> {
        check_knots(&knots, self.segment_count())?;
        let uniform = uniform_knots(self.segment_count());
        self.knots = if knots == uniform { None } else { Some(knots) };
        Ok(self)
    }

    /// Checks a deserialized value against the same invariants as [`new`](Self::new).
    pub fn validated(self) -> Result<Self> {
        let knots = self.knots.clone();
        let c = Self::new(self.points, self.closed)?;
        match knots {
            Some(k) => c.with_knots(k),
            None => Ok(c),
        }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.points.len()
        } else {
            self.points.len() - 1
        }
    }

    pub fn has_uniform_grid(&self) -> bool {
        self.knots.is_none()
    }

    /// Parameter knots, `segment_count() + 1` values from 0 to 1.
    pub fn knots(&self) -> Vec<f64> {
        match &self.knots {
            Some(k) => k.clone(),
            None => uniform_knots(self.segment_count()),
        }
    }

    /// Endpoints of segment `i`, including the closing segment of a closed curve.
    pub fn segment(&self, i: usize) -> (&[f64], &[f64]) {
        let n = self.points.len();
        (&self.points[i], &self.points[(i + 1) % n])
    }

    /// Parameter-space derivative on each segment.
    pub fn velocities(&self) -> Vec<Vec<f64>> {
        let knots = self.knots();
        (0..self.segment_count())
            .map(|i| {
                let (p, q) = self.segment(i);
                let w = knots[i + 1] - knots[i];
                p.iter().zip(q).map(|(a, b)| (b - a) / w).collect()
            })
            .collect()
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        (0..self.segment_count())
            .map(|i| {
                let (p, q) = self.segment(i);
                dist(p, q)
            })
            .collect()
    }

    /// Indices of segments shorter than the zero threshold.
    pub fn zero_segments(&self) -> Vec<usize> {
        self.segment_lengths()
            .iter()
            .enumerate()
            .filter(|(_, l)| **l <= DEFAULT_ZERO_EPS)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_fully_degenerate(&self) -> bool {
        self.zero_segments().len() == self.segment_count()
    }

    pub fn arc_length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    pub fn basepoint(&self) -> &[f64] {
        &self.points[0]
    }

    /// Curve position at parameter `u ∈ [0, 1]`.
    pub fn point_at(&self, u: f64) -> Vec<f64> {
        let knots = self.knots();
        let u = u.clamp(0.0, 1.0);
        let m = self.segment_count();
        let i = match knots.binary_search_by(|k| k.partial_cmp(&u).unwrap()) {
            Ok(i) => {
                return self.points[i % self.points.len()].clone();
            }
            Err(i) => i.saturating_sub(1).min(m - 1),
        };
        let (p, q) = self.segment(i);
        let t = (u - knots[i]) / (knots[i + 1] - knots[i]);
        lerp(p, q, t)
    }

    /// Same geometry with extra vertices inserted at the given parameters.
    ///
    /// Parameters already present in the grid are ignored; the result's grid
    /// is the union of both.
    pub fn refine(&self, params: &[f64]) -> Result<Self> {
        let mut all = self.knots();
        all.extend(params.iter().copied().filter(|u| *u > 0.0 && *u < 1.0));
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        let mut pts: Vec<Vec<f64>> = all.iter().map(|&u| self.point_at(u)).collect();
        if self.closed {
            pts.pop();
        }
        Self::new(pts, self.closed)?.with_knots(all)
    }

    /// The curve `c∘γ` for a monotone piecewise-linear warp `γ` given by its
    /// vertices `(u, γ(u))`. The result is exact: vertices sit at the warp's
    /// breakpoints and at the preimages of this curve's knots. Flats in `γ`
    /// produce zero-length segments.
    pub fn compose(&self, warp: &[(f64, f64)]) -> Result<Self> {
        if warp.len() < 2 || warp[0] != (0.0, 0.0) || *warp.last().unwrap() != (1.0, 1.0) {
            return Err(Error::InvalidReparametrization("warp must run from (0, 0) to (1, 1)".into()));
        }
        if warp.windows(2).any(|w| !(w[1].0 > w[0].0) || w[1].1 < w[0].1) {
            return Err(Error::InvalidReparametrization(
                "warp must be strictly increasing in u and nondecreasing in value".into(),
            ));
        }
        let knots = self.knots();
        let mut us: Vec<f64> = warp.iter().map(|w| w.0).collect();
        for w in warp.windows(2) {
            let ((u0, g0), (u1, g1)) = (w[0], w[1]);
            if g1 > g0 {
                let lo = knots.partition_point(|k| *k <= g0);
                let hi = knots.partition_point(|k| *k < g1);
                for k in &knots[lo..hi] {
                    us.push(u0 + (k - g0) / (g1 - g0) * (u1 - u0));
                }
            }
        }
        us.sort_by(|a, b| a.partial_cmp(b).unwrap());
        us.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        let eval = |u: f64| -> f64 {
            let i = warp.partition_point(|w| w.0 <= u).clamp(1, warp.len() - 1);
            let ((u0, g0), (u1, g1)) = (warp[i - 1], warp[i]);
            if u == u1 {
                return g1;
            }
            (g0 + (g1 - g0) * (u - u0) / (u1 - u0)).clamp(0.0, 1.0)
        };
        let mut pts: Vec<Vec<f64>> = us.iter().map(|&u| self.point_at(eval(u))).collect();
        if self.closed {
            pts.pop();
        }
        Self::new(pts, self.closed)?.with_knots(us)
    }

    /// Linear interpolation at `m` uniform parameters (`m` vertices).
    pub fn resample(&self, m: usize) -> Result<Self> {
        if m < 2 || (self.closed && m < 3) {
            return Err(Error::InvalidArgument(format!("cannot resample to {m} vertices")));
        }
        let segs = if self.closed { m } else { m - 1 };
        let pts = (0..m).map(|i| self.point_at(i as f64 / segs as f64)).collect();
        Self::new(pts, self.closed)
    }

    /// Constant-speed reparametrization with the same image.
    ///
    /// Vertices are placed at `m` arc-length-uniform positions plus every
    /// original vertex, and the knots are the normalized arc-length values, so
    /// the speed equals the total length on every segment and the length is
    /// preserved exactly. Zero-length segments are dropped.
    pub fn to_constant_speed(&self, m: usize) -> Result<Self> {
        let (total, cum) = self.arc_length_table(m)?;
        let segs = if self.closed { m } else { m - 1 };
        let mut params: Vec<f64> = (0..=segs).map(|k| k as f64 / segs as f64).collect();
        params.extend(cum.iter().map(|s| s / total));
        params.sort_by(|a, b| a.partial_cmp(b).unwrap());
        params.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
        *params.last_mut().unwrap() = 1.0;
        let mut pts: Vec<Vec<f64>> = params.iter().map(|&u| self.point_at_arc(&cum, u * total)).collect();
        if self.closed {
            pts.pop();
        } else {
            *pts.last_mut().unwrap() = self.points.last().unwrap().clone();
        }
        Self::new(pts, self.closed)?.with_knots(params)
    }

    /// `m` vertices equally spaced in arc length, on the uniform grid.
    ///
    /// Corners between samples are cut, so the length can shrink slightly.
    pub fn resample_arc_length(&self, m: usize) -> Result<Self> {
        let (total, cum) = self.arc_length_table(m)?;
        let segs = if self.closed { m } else { m - 1 };
        let mut pts: Vec<Vec<f64>> =
            (0..m).map(|k| self.point_at_arc(&cum, total * k as f64 / segs as f64)).collect();
        if !self.closed {
            pts[m - 1] = self.points.last().unwrap().clone();
        }
        Self::new(pts, self.closed)
    }

    fn arc_length_table(&self, m: usize) -> Result<(f64, Vec<f64>)> {
        if m < 2 || (self.closed && m < 3) {
            return Err(Error::InvalidArgument(format!("cannot resample to {m} vertices")));
        }
        let lens = self.segment_lengths();
        let mut cum = Vec::with_capacity(lens.len() + 1);
        cum.push(0.0);
        for l in &lens {
            cum.push(cum.last().unwrap() + l);
        }
        let total = *cum.last().unwrap();
        if total <= DEFAULT_ZERO_EPS {
            return Err(Error::DegenerateCurve);
        }
        Ok((total, cum))
    }

    fn point_at_arc(&self, cum: &[f64], s: f64) -> Vec<f64> {
        let m = cum.len() - 1;
        let mut seg = cum.partition_point(|c| *c <= s).saturating_sub(1).min(m - 1);
        while seg + 1 < m && cum[seg + 1] - cum[seg] <= 0.0 {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let (p, q) = self.segment(seg);
        let t = if len > 0.0 { ((s - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
        lerp(p, q, t)
    }

    /// Uniformly scaled copy with unit arc length (about the basepoint).
    pub fn normalized_length(&self) -> Result<Self> {
        let l = self.arc_length();
        if l <= DEFAULT_ZERO_EPS {
            return Err(Error::DegenerateCurve);
        }
        let base = self.points[0].clone();
        let pts = self
            .points
            .iter()
            .map(|p| p.iter().zip(&base).map(|(x, b)| b + (x - b) / l).collect())
            .collect();
        let mut c = Self::new(pts, self.closed)?;
        c.knots = self.knots.clone();
        Ok(c)
    }

    /// Cyclic relabeling of a closed curve: vertex `k` becomes vertex 0.
    pub fn rotated(&self, k: usize) -> Result<Self> {
        if !self.closed {
            return Err(Error::ClosureMismatch("only closed curves can be rotated".into()));
        }
        let n = self.points.len();
        let k = k % n;
        let pts = (0..n).map(|i| self.points[(i + k) % n].clone()).collect();
        let c = Self::new(pts, true)?;
        match &self.knots {
            None => Ok(c),
            Some(knots) => {
                let start = knots[k];
                let mut shifted: Vec<f64> = (0..n)
                    .map(|i| {
                        let u = knots[(i + k) % n] - start;
                        if u < 0.0 { u + 1.0 } else { u }
                    })
                    .collect();
                shifted.push(1.0);
                c.with_knots(shifted)
            }
        }
    }

    /// Cuts a closed curve at vertex 0, returning the open polyline that
    /// traverses all segments and ends back at the first vertex.
    pub fn cut_open(&self) -> Result<Self> {
        if !self.closed {
            return Err(Error::ClosureMismatch("curve is already open".into()));
        }
        let mut pts = self.points.clone();
        pts.push(self.points[0].clone());
        let c = Self::new(pts, false)?;
        match &self.knots {
            None => Ok(c),
            Some(k) => c.with_knots(k.clone()),
        }
    }
}

/// Piecewise-constant SRV representation `q = c'/√|c'|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrvCurve {
    q_values: Vec<Vec<f64>>,
    cell_widths: Vec<f64>,
}

impl SrvCurve {
    pub fn new(q_values: Vec<Vec<f64>>, cell_widths: Vec<f64>) -> Result<Self> {
        if q_values.is_empty() || q_values.len() != cell_widths.len() {
            return Err(Error::InvalidArgument(format!(
                "{} q values for {} cells",
                q_values.len(),
                cell_widths.len()
            )));
        }
        let d = q_values[0].len();
        if q_values.iter().any(|q| q.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: q_values.iter().map(Vec::len).find(|l| *l != d).unwrap_or(d),
            });
        }
        if q_values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite q value".into()));
        }
        if cell_widths.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("cell widths must be positive".into()));
        }
        let total: f64 = cell_widths.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("cell widths sum to {total}, not 1")));
        }
        Ok(Self { q_values, cell_widths })
    }

    pub fn q_values(&self) -> &[Vec<f64>] {
        &self.q_values
    }

    pub fn cell_widths(&self) -> &[f64] {
        &self.cell_widths
    }

    pub fn dim(&self) -> usize {
        self.q_values[0].len()
    }

    /// Length of the underlying curve, `Σ |q_i|² w_i`.
    pub fn curve_length(&self) -> f64 {
        self.q_values
            .iter()
            .zip(&self.cell_widths)
            .map(|(q, w)| crate::linalg::dot(q, q) * w)
            .sum()
    }
}

/// SRV transform of a polyline: per segment `q = v/√|v|`, or 0 where `|v|`
/// vanishes.
pub fn srv_transform(c: &DiscreteCurve) -> Result<SrvCurve> {
    if c.is_fully_degenerate() {
        return Err(Error::DegenerateCurve);
    }
    Ok(srv_transform_unchecked(c))
}

/// SRV transform without the degeneracy check; constant curves map to zero.
pub(crate) fn srv_transform_unchecked(c: &DiscreteCurve) -> SrvCurve {
    let knots = c.knots();
    let widths: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    let q = c
        .velocities()
        .into_iter()
        .map(|v| {
            let n = norm(&v);
            if n > DEFAULT_ZERO_EPS {
                let s = n.sqrt();
                v.into_iter().map(|x| x / s).collect()
            } else {
                vec![0.0; v.len()]
            }
        })
        .collect();
    SrvCurve { q_values: q, cell_widths: widths }
}

/// Inverse SRV transform: `c(u) = basepoint + ∫ q|q|`. Always returns an
/// open curve on the SRV curve's grid.
pub fn srv_inverse(q: &SrvCurve, basepoint: &[f64]) -> Result<DiscreteCurve> {
    if basepoint.len() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), got: basepoint.len() });
    }
    let mut pts = Vec::with_capacity(q.q_values.len() + 1);
    let mut cur = basepoint.to_vec();
    pts.push(cur.clone());
    for (qi, w) in q.q_values.iter().zip(&q.cell_widths) {
        let n = norm(qi);
        for (c, x) in cur.iter_mut().zip(qi) {
            *c += x * n * w;
        }
        pts.push(cur.clone());
    }
    let mut knots = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    knots.push(0.0);
    for w in &q.cell_widths {
        acc += w;
        knots.push(acc);
    }
    *knots.last_mut().unwrap() = 1.0;
    DiscreteCurve::open(pts)?.with_knots(knots)
}
