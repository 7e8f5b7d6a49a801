use serde::{Deserialize, Serialize};

use super::{check_open_pair, Method, RegistrationResult};
use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::metric::distance_from_energy;
use crate::params::MetricParams;
use crate::reparam::Reparametrization;
use crate::weight::{build_weight, RectangularWeight};

pub const DEFAULT_WINDOW: usize = 6;

/// Knots shared by both axes of the DP, and the maximal index step per move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentGrid {
    knots: Vec<f64>,
    window: usize,
}

impl AlignmentGrid {
    pub fn new(knots: Vec<f64>, window: usize) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidGrid("need at least two knots".into()));
        }
        if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 {
            return Err(Error::InvalidGrid("knots must run from 0 to 1".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("knots must be strictly increasing".into()));
        }
        if window == 0 {
            return Err(Error::InvalidGrid("window must be at least 1".into()));
        }
        Ok(Self { knots, window })
    }

    pub fn uniform(n: usize, window: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("need at least one cell".into()));
        }
        Self::new((0..=n).map(|i| i as f64 / n as f64).collect(), window)
    }

    /// The union of both curves' knots. For two curves on the same uniform
    /// grid this is that grid.
    pub fn default_for(c1: &DiscreteCurve, c2: &DiscreteCurve, window: usize) -> Result<Self> {
        let mut k = c1.knots();
        k.extend(c2.knots());
        k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        k.dedup();
        Self::new(k, window)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Number of cells per axis.
    pub fn n(&self) -> usize {
        self.knots.len() - 1
    }
}

/// Energy of the straight move from grid vertex `(k, l)` to `(i, j)`.
pub fn segment_energy(
    k: usize,
    l: usize,
    i: usize,
    j: usize,
    c1: &DiscreteCurve,
    c2: &DiscreteCurve,
    p: &MetricParams,
    grid: &AlignmentGrid,
) -> Result<f64> {
    let n = grid.n();
    if k > n || l > n || i > n || j > n {
        return Err(Error::IndexOutOfRange(format!("grid has {} vertices per axis", n + 1)));
    }
    if k >= i || l > j {
        return Err(Error::IndexOutOfRange(format!(
            "move ({k}, {l}) -> ({i}, {j}) must satisfy k < i and l <= j"
        )));
    }
    let w = build_weight(c1, c2, p)?;
    let x = grid.knots();
    Ok(w.line_energy((x[k], x[l]), (x[i], x[j])))
}

/// Windowed DP over the vertices of `grid`.
///
/// `H(i, j) = max H(k, l) + E(k, l, i, j)` over `i − W ≤ k < i`,
/// `j − W ≤ l < j`. Among equal maxima the lexicographically smallest
/// predecessor wins.
pub fn dp_register(
    c1: &DiscreteCurve,
    c2: &DiscreteCurve,
    p: &MetricParams,
    grid: &AlignmentGrid,
) -> Result<RegistrationResult> {
    check_open_pair(c1, c2)?;
    let weight = build_weight(c1, c2, p)?;
    let (h, pred) = dp_table(&weight, grid);
    let n = grid.n();
    let energy = h[n * (n + 1) + n];
    let x = grid.knots();
    let mut path = vec![(n, n)];
    let (mut i, mut j) = (n, n);
    while (i, j) != (0, 0) {
        let (k, l) = pred[i * (n + 1) + j];
        path.push((k, l));
        (i, j) = (k, l);
    }
    path.reverse();
    let reparam = Reparametrization::new(path.iter().map(|&(i, j)| (x[i], x[j])).collect())?;
    Ok(RegistrationResult {
        reparam,
        energy,
        distance: distance_from_energy(c1.arc_length(), c2.arc_length(), energy, p.b()),
        seed_index: None,
        method: Method::Dp,
    })
}

fn dp_table(weight: &RectangularWeight, grid: &AlignmentGrid) -> (Vec<f64>, Vec<(usize, usize)>) {
    let n = grid.n();
    let w = grid.window();
    let x = grid.knots();
    let idx = |i: usize, j: usize| i * (n + 1) + j;
    let mut h = vec![f64::NEG_INFINITY; (n + 1) * (n + 1)];
    let mut pred = vec![(0usize, 0usize); (n + 1) * (n + 1)];
    h[0] = 0.0;
    for i in 1..=n {
        for j in 1..=n {
            let mut best = f64::NEG_INFINITY;
            let mut arg = (0, 0);
            for k in i.saturating_sub(w)..i {
                for l in j.saturating_sub(w)..j {
                    let base = h[idx(k, l)];
                    if base == f64::NEG_INFINITY {
                        continue;
                    }
                    let cand = base + weight.line_energy((x[k], x[l]), (x[i], x[j]));
                    if cand > best {
                        best = cand;
                        arg = (k, l);
                    }
                }
            }
            h[idx(i, j)] = best;
            pred[idx(i, j)] = arg;
        }
    }
    (h, pred)
}
