//! Generalized reparametrization pairs as monotone polylines in the unit square.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graph of a monotone piecewise-linear path from `(0, 0)` to `(1, 1)`.
///
/// Each vertex is `(x, y) = (γ1(u), γ2(u))`. Horizontal and vertical runs are
/// allowed; they carry no registration energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reparametrization {
    vertices: Vec<(f64, f64)>,
}

impl Reparametrization {
    pub fn new(vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidReparametrization("need at least two vertices".into()));
        }
        if vertices.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidReparametrization("non-finite vertex".into()));
        }
        if vertices[0] != (0.0, 0.0) || *vertices.last().unwrap() != (1.0, 1.0) {
            return Err(Error::InvalidReparametrization(
                "path must run from (0, 0) to (1, 1)".into(),
            ));
        }
        for (i, w) in vertices.windows(2).enumerate() {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::InvalidReparametrization(format!(
                    "not monotone between vertices {i} and {}",
                    i + 1
                )));
            }
        }
        Ok(Self { vertices })
    }

    pub fn identity() -> Self {
        Self { vertices: vec![(0.0, 0.0), (1.0, 1.0)] }
    }

    /// Checks a deserialized value.
    pub fn validated(self) -> Result<Self> {
        Self::new(self.vertices)
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    /// The same path with the roles of the two curves swapped.
    pub fn transposed(&self) -> Self {
        Self { vertices: self.vertices.iter().map(|&(x, y)| (y, x)).collect() }
    }

    /// Drops repeated vertices and merges collinear consecutive runs.
    pub fn simplified(&self) -> Self {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.vertices.len());
        for &v in &self.vertices {
            if out.last() == Some(&v) {
                continue;
            }
            if out.len() >= 2 {
                let a = out[out.len() - 2];
                let b = out[out.len() - 1];
                let cross = (b.0 - a.0) * (v.1 - b.1) - (b.1 - a.1) * (v.0 - b.0);
                if cross == 0.0 {
                    out.pop();
                }
            }
            out.push(v);
        }
        Self { vertices: out }
    }

    /// `y` as a function of `x` where the path is a graph; on vertical runs
    /// the lowest `y` is returned.
    pub fn eval_x(&self, x: f64) -> f64 {
        let v = &self.vertices;
        let i = v.partition_point(|p| p.0 < x);
        if i == 0 {
            return v[0].1;
        }
        if i >= v.len() {
            return v[v.len() - 1].1;
        }
        let (x0, y0) = v[i - 1];
        let (x1, y1) = v[i];
        if x1 == x0 {
            return y0;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}
