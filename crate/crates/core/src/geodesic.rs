//! Geodesic paths between registered curves.
//!
//! After registration both curves share one parameter grid. The geodesic in
//! SRV space is then pointwise: each cell's value follows the cone geodesic
//! between the two endpoint values, and each frame is recovered with the
//! inverse SRV transform. Basepoints are interpolated linearly; this choice
//! is for display only, since distances ignore translation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::curve::{srv_inverse, srv_transform_unchecked, DiscreteCurve, SrvCurve};
use crate::error::{Error, Result};
use crate::linalg::{lerp, norm};
use crate::metric::param_distance;
use crate::params::{MetricParams, DEFAULT_ZERO_EPS};
use crate::reparam::Reparametrization;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub frames: Vec<DiscreteCurve>,
    /// Cells whose cone geodesic passes through the apex at an interior
    /// time; those frames momentarily have zero-length segments there.
    pub apex_cells: Vec<usize>,
}

/// Both curves reparametrized by `reg` on a common grid.
///
/// The path is split at every knot line of either curve; the common
/// parameter of a path point `(x, y)` is `(x + y)/2`.
pub fn registered_pair(
    c1: &DiscreteCurve,
    c2: &DiscreteCurve,
    reg: &Reparametrization,
) -> Result<(DiscreteCurve, DiscreteCurve)> {
    if c1.is_closed() != c2.is_closed() {
        return Err(Error::ClosureMismatch("cannot pair an open with a closed curve".into()));
    }
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch { expected: c1.dim(), got: c2.dim() });
    }
    let (c1, c2) = if c1.is_closed() { (c1.cut_open()?, c2.cut_open()?) } else { (c1.clone(), c2.clone()) };
    let kx = c1.knots();
    let ky = c2.knots();
    let v = reg.vertices();
    let mut pts: Vec<(f64, f64)> = vec![v[0]];
    for w in v.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        let mut ts: Vec<f64> = Vec::new();
        if x1 > x0 {
            ts.extend(kx.iter().filter(|k| **k > x0 && **k < x1).map(|k| (k - x0) / (x1 - x0)));
        }
        if y1 > y0 {
            ts.extend(ky.iter().filter(|k| **k > y0 && **k < y1).map(|k| (k - y0) / (y1 - y0)));
        }
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for t in ts {
            pts.push((x0 + t * (x1 - x0), y0 + t * (y1 - y0)));
        }
        pts.push((x1, y1));
    }
    // Knot crossings that coincide up to roundoff would leave sliver cells
    // whose SRV values cannot be recovered from the vertices; merge them.
    let mut us: Vec<f64> = Vec::with_capacity(pts.len());
    let mut kept: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (x, y) in pts {
        let u = 0.5 * (x + y);
        if us.last().is_none_or(|last| u > *last + DEFAULT_ZERO_EPS) {
            us.push(u);
            kept.push((x, y));
        }
    }
    *us.last_mut().unwrap() = 1.0;
    *kept.last_mut().unwrap() = (1.0, 1.0);
    if us.len() < 2 {
        return Err(Error::InvalidReparametrization("path has no extent".into()));
    }
    let r1 = DiscreteCurve::open(kept.iter().map(|p| c1.point_at(p.0)).collect())?.with_knots(us.clone())?;
    let r2 = DiscreteCurve::open(kept.iter().map(|p| c2.point_at(p.1)).collect())?.with_knots(us)?;
    Ok((r1, r2))
}

/// `steps` frames at equally spaced times along the geodesic from `c1` to
/// `c2` under the registration `reg`. The first and last frames are the
/// registered curves themselves.
pub fn geodesic(
    c1: &DiscreteCurve,
    c2: &DiscreteCurve,
    reg: &Reparametrization,
    p: &MetricParams,
    steps: usize,
) -> Result<GeodesicPath> {
    if steps < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 frames, got {steps}")));
    }
    let (r1, r2) = registered_pair(c1, c2, reg)?;
    let q1 = srv_transform_unchecked(&r1);
    let q2 = srv_transform_unchecked(&r2);
    let cone = Cone::new(p.lambda())?;
    let apex_cells = q1
        .q_values()
        .iter()
        .zip(q2.q_values())
        .enumerate()
        .filter(|(_, (a, b))| {
            norm(a) > DEFAULT_ZERO_EPS
                && norm(b) > DEFAULT_ZERO_EPS
                && cone.geodesic_through_apex(a, b).unwrap_or(false)
        })
        .map(|(i, _)| i)
        .collect();

    let times: Vec<f64> = (0..steps).map(|k| k as f64 / (steps - 1) as f64).collect();
    let mut frames = Vec::with_capacity(steps);
    for (k, &t) in times.iter().enumerate() {
        if k == 0 {
            frames.push(r1.clone());
        } else if k == steps - 1 {
            frames.push(r2.clone());
        } else {
            let q: Vec<Vec<f64>> = q1
                .q_values()
                .iter()
                .zip(q2.q_values())
                .map(|(a, b)| cone.geodesic_unchecked(a, b, t))
                .collect();
            let srv = SrvCurve::new(q, q1.cell_widths().to_vec())?;
            let base = lerp(r1.basepoint(), r2.basepoint(), t);
            frames.push(srv_inverse(&srv, &base)?);
        }
    }
    Ok(GeodesicPath { times, frames, apex_cells })
}

/// Discrete length of a path: the sum of distances between consecutive frames.
pub fn path_energy(path: &GeodesicPath, p: &MetricParams) -> Result<f64> {
    let mut total = 0.0;
    for w in path.frames.windows(2) {
        total += param_distance(&w[0], &w[1], p)?;
    }
    Ok(total)
}

impl GeodesicPath {
    /// A horizontal strip of planar frames, one `<g>` per frame.
    pub fn to_svg(&self) -> Result<String> {
        let first = self.frames.first().ok_or_else(|| Error::InvalidArgument("empty path".into()))?;
        if first.dim() != 2 {
            return Err(Error::InvalidArgument(format!(
                "SVG export needs planar curves, got dimension {}",
                first.dim()
            )));
        }
        let bbox = |c: &DiscreteCurve| {
            let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
            for p in c.points() {
                b[0] = b[0].min(p[0]);
                b[1] = b[1].min(p[1]);
                b[2] = b[2].max(p[0]);
                b[3] = b[3].max(p[1]);
            }
            b
        };
        let boxes: Vec<[f64; 4]> = self.frames.iter().map(bbox).collect();
        let extent = boxes
            .iter()
            .map(|b| (b[2] - b[0]).max(b[3] - b[1]))
            .fold(0.0f64, f64::max)
            .max(1e-12);
        let cell = 120.0;
        let pad = 10.0;
        let scale = (cell - 2.0 * pad) / extent;
        let width = cell * self.frames.len() as f64;
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{cell}" viewBox="0 0 {width} {cell}">"#
        )
        .unwrap();
        for (k, (frame, b)) in self.frames.iter().zip(&boxes).enumerate() {
            let cx = (b[0] + b[2]) / 2.0;
            let cy = (b[1] + b[3]) / 2.0;
            writeln!(out, r#"  <g id="frame-{k}" data-t="{}">"#, self.times[k]).unwrap();
            let mut pts: Vec<String> = frame
                .points()
                .iter()
                .map(|p| {
                    let x = cell * (k as f64 + 0.5) + (p[0] - cx) * scale;
                    let y = cell / 2.0 - (p[1] - cy) * scale;
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            if frame.is_closed() {
                pts.push(pts[0].clone());
            }
            writeln!(
                out,
                r#"    <polyline fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            )
            .unwrap();
            writeln!(out, "  </g>").unwrap();
        }
        out.push_str("</svg>\n");
        Ok(out)
    }
}
