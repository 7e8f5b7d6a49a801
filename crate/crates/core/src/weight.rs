//! Piecewise-constant registration weight on the unit square.

use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::metric::f_ab;
use crate::params::MetricParams;

/// A function on `[0,1]²` that is constant on each rectangle of a product
/// partition. Rectangle `(r, s)` spans `[x_r, x_{r+1}] × [y_s, y_{s+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectangularWeight {
    x_breaks: Vec<f64>,
    y_breaks: Vec<f64>,
    values: Vec<f64>,
}

impl RectangularWeight {
    pub fn new(x_breaks: Vec<f64>, y_breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        for b in [&x_breaks, &y_breaks] {
            if b.len() < 2 || b[0] != 0.0 || *b.last().unwrap() != 1.0 {
                return Err(Error::InvalidGrid("breaks must run from 0 to 1".into()));
            }
            if b.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidGrid("breaks must be strictly increasing".into()));
            }
        }
        let m = x_breaks.len() - 1;
        let n = y_breaks.len() - 1;
        if values.len() != m * n {
            return Err(Error::InvalidGrid(format!("expected {} values, got {}", m * n, values.len())));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidGrid("weights must be finite and nonnegative".into()));
        }
        Ok(Self { x_breaks, y_breaks, values })
    }

    /// Weight whose rectangle values are `f(v1_r, v2_s)` on the segment
    /// derivatives of the two curves.
    pub fn from_fn(
        c1: &DiscreteCurve,
        c2: &DiscreteCurve,
        f: impl Fn(&[f64], &[f64]) -> f64,
    ) -> Result<Self> {
        if c1.dim() != c2.dim() {
            return Err(Error::DimensionMismatch { expected: c1.dim(), got: c2.dim() });
        }
        let v1 = c1.velocities();
        let v2 = c2.velocities();
        let mut values = Vec::with_capacity(v1.len() * v2.len());
        for a in &v1 {
            for b in &v2 {
                values.push(f(a, b));
            }
        }
        Self::new(c1.knots(), c2.knots(), values)
    }

    pub fn x_breaks(&self) -> &[f64] {
        &self.x_breaks
    }

    pub fn y_breaks(&self) -> &[f64] {
        &self.y_breaks
    }

    pub fn rows(&self) -> usize {
        self.x_breaks.len() - 1
    }

    pub fn cols(&self) -> usize {
        self.y_breaks.len() - 1
    }

    #[inline]
    pub fn value(&self, r: usize, s: usize) -> f64 {
        self.values[r * self.cols() + s]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `∫ √(ẋ ẏ) w(x, y) du` along the straight segment from `p` to `q`,
    /// split exactly at every rectangle boundary. Zero unless the segment is
    /// strictly increasing in both coordinates.
    pub fn line_energy(&self, p: (f64, f64), q: (f64, f64)) -> f64 {
        let dx = q.0 - p.0;
        let dy = q.1 - p.1;
        if !(dx > 0.0 && dy > 0.0) {
            return 0.0;
        }
        let m = self.rows();
        let n = self.cols();
        let mut r = (self.x_breaks.partition_point(|b| *b <= p.0).max(1) - 1).min(m - 1);
        let mut s = (self.y_breaks.partition_point(|b| *b <= p.1).max(1) - 1).min(n - 1);
        let mut t = 0.0;
        let mut acc = 0.0;
        loop {
            let tx = if r + 1 < m { (self.x_breaks[r + 1] - p.0) / dx } else { f64::INFINITY };
            let ty = if s + 1 < n { (self.y_breaks[s + 1] - p.1) / dy } else { f64::INFINITY };
            let tn = tx.min(ty).min(1.0);
            if tn > t {
                acc += self.value(r, s) * (tn - t);
                t = tn;
            }
            if t >= 1.0 {
                break;
            }
            if tx <= ty {
                r += 1;
            }
            if ty <= tx {
                s += 1;
            }
        }
        acc * (dx * dy).sqrt()
    }

    /// Total energy of a monotone polyline path.
    pub fn path_energy(&self, vertices: &[(f64, f64)]) -> f64 {
        vertices.windows(2).map(|w| self.line_energy(w[0], w[1])).sum()
    }
}

/// The registration weight `f_ab` of two curves, with breaks at their knots.
pub fn build_weight(c1: &DiscreteCurve, c2: &DiscreteCurve, p: &MetricParams) -> Result<RectangularWeight> {
    RectangularWeight::from_fn(c1, c2, |a, b| f_ab(a, b, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(pts: &[[f64; 2]]) -> DiscreteCurve {
        DiscreteCurve::open(pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn identical_single_segments() {
        let c = curve(&[[0.0, 0.0], [3.0, 4.0]]);
        let w = build_weight(&c, &c, &MetricParams::new(1.0, 0.5).unwrap()).unwrap();
        assert_eq!((w.rows(), w.cols()), (1, 1));
        assert!((w.value(0, 0) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn perpendicular_is_clamped() {
        let c1 = curve(&[[0.0, 0.0], [1.0, 0.0]]);
        let c2 = curve(&[[0.0, 0.0], [0.0, 1.0]]);
        let w = build_weight(&c1, &c2, &MetricParams::new(1.0, 0.5).unwrap()).unwrap();
        assert!(w.value(0, 0).abs() < 1e-16);
    }

    #[test]
    fn matches_elementwise_f_ab() {
        let c1 = curve(&[[0.0, 0.0], [1.0, 0.2], [1.5, 1.0]]);
        let c2 = curve(&[[0.0, 0.0], [0.3, 0.9], [2.0, 1.0]]);
        let p = MetricParams::new(0.7, 0.5).unwrap();
        let w = build_weight(&c1, &c2, &p).unwrap();
        let v1 = c1.velocities();
        let v2 = c2.velocities();
        for r in 0..2 {
            for s in 0..2 {
                assert_eq!(w.value(r, s), f_ab(&v1[r], &v2[s], &p));
            }
        }
    }

    #[test]
    fn line_energy_matches_quadrature() {
        let w = RectangularWeight::new(
            vec![0.0, 0.3, 1.0],
            vec![0.0, 0.5, 0.8, 1.0],
            vec![1.0, 2.0, 0.5, 3.0, 0.0, 4.0],
        )
        .unwrap();
        let (p, q) = ((0.1, 0.05), (0.9, 0.97));
        let exact = w.line_energy(p, q);
        let k = 200_000;
        let mut quad = 0.0;
        for i in 0..k {
            let t = (i as f64 + 0.5) / k as f64;
            let x = p.0 + t * (q.0 - p.0);
            let y = p.1 + t * (q.1 - p.1);
            let r = if x < 0.3 { 0 } else { 1 };
            let s = if y < 0.5 { 0 } else if y < 0.8 { 1 } else { 2 };
            quad += w.value(r, s) / k as f64;
        }
        quad *= ((q.0 - p.0) * (q.1 - p.1)).sqrt();
        assert!((exact - quad).abs() < 1e-4, "{exact} vs {quad}");
        assert_eq!(w.line_energy((0.2, 0.1), (0.2, 0.9)), 0.0);
    }
}
