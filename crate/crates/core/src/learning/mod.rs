//! Supervised choice of the bending weight `a` (with `b` fixed) and the
//! distance-based evaluation tools used to judge it.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::metric::a_zero_distance;
use crate::params::MetricParams;
use crate::registration::{register, Method, RegistrationOptions};

/// `b` used throughout learning; only the ratio `a / b` matters up to scale.
pub const LEARNING_B: f64 = 0.5;

/// `{0, 0.1, ..., 2}`.
pub fn default_a_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 10.0).collect()
}

/// Curves with class labels in `1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledShapeSet {
    curves: Vec<DiscreteCurve>,
    labels: Vec<usize>,
    class_count: usize,
}

impl LabeledShapeSet {
    /// `K` is the largest label; every class in `1..=K` must occur. All
    /// curves must share dimension and open/closed type.
    pub fn new(curves: Vec<DiscreteCurve>, labels: Vec<usize>) -> Result<Self> {
        let class_count = check_labels(&labels)?;
        if curves.len() != labels.len() {
            return Err(Error::InvalidLabels(format!(
                "{} curves but {} labels",
                curves.len(),
                labels.len()
            )));
        }
        let first = &curves[0];
        for c in &curves[1..] {
            if c.dim() != first.dim() {
                return Err(Error::DimensionMismatch { expected: first.dim(), got: c.dim() });
            }
            if c.is_closed() != first.is_closed() {
                return Err(Error::ClosureMismatch("dataset mixes open and closed curves".into()));
            }
        }
        Ok(Self { curves, labels, class_count })
    }

    pub fn curves(&self) -> &[DiscreteCurve] {
        &self.curves
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// The items at `indices`, in that order. Fails if a class disappears.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::IndexOutOfRange(format!("item {i} of {}", self.len())));
        }
        let labels: Vec<usize> = indices.iter().map(|&i| self.labels[i]).collect();
        if check_labels(&labels)? != self.class_count {
            return Err(Error::InvalidLabels("subset lost a class".into()));
        }
        Self::new(indices.iter().map(|&i| self.curves[i].clone()).collect(), labels)
    }

    /// Ordered pairs `(i, j)`, `i ≠ j`, with equal labels.
    pub fn same_pairs(&self) -> Vec<(usize, usize)> {
        ordered_pairs(&self.labels, true)
    }

    /// Ordered pairs with different labels.
    pub fn different_pairs(&self) -> Vec<(usize, usize)> {
        ordered_pairs(&self.labels, false)
    }
}

fn ordered_pairs(labels: &[usize], same: bool) -> Vec<(usize, usize)> {
    let n = labels.len();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && (labels[i] == labels[j]) == same)
        .collect()
}

/// Returns `K` after checking that the labels cover `1..=K`.
fn check_labels(labels: &[usize]) -> Result<usize> {
    if labels.is_empty() {
        return Err(Error::InvalidLabels("no items".into()));
    }
    if labels.contains(&0) {
        return Err(Error::InvalidLabels("labels start at 1".into()));
    }
    let k = *labels.iter().max().unwrap();
    let mut seen = vec![false; k];
    for &l in labels {
        seen[l - 1] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidLabels(format!("class {} is empty", missing + 1)));
    }
    Ok(k)
}

/// Pairwise distances at one parameter setting.
///
/// Stored symmetric with a zero diagonal: inputs are averaged with their
/// transpose on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
    a: f64,
    b: f64,
    method: Method,
}

impl DistanceMatrix {
    pub fn new(rows: Vec<Vec<f64>>, a: f64, b: f64, method: Method) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty distance matrix".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("distance matrix must be square".into()));
        }
        if rows.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Numeric("distances must be finite and nonnegative".into()));
        }
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (rows[i][j] + rows[j][i]);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Ok(Self { n, values, a, b, method })
    }

    /// Fills the matrix from `f(i, j)` in parallel.
    ///
    /// With `both_directions` every ordered pair is evaluated and the two
    /// directions averaged; otherwise only `i < j` is evaluated.
    pub fn fill<F>(n: usize, a: f64, b: f64, method: Method, both_directions: bool, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| if both_directions { i != j } else { i < j })
            .collect();
        let values = pairs.par_iter().map(|&(i, j)| f(i, j)).collect::<Result<Vec<f64>>>()?;
        let mut rows = vec![vec![0.0; n]; n];
        for (&(i, j), v) in pairs.iter().zip(values) {
            rows[i][j] = v;
            if !both_directions {
                rows[j][i] = v;
            }
        }
        Self::new(rows, a, b, method)
    }

    /// All pairwise quotient distances of `curves` at `(a, b)`.
    ///
    /// DP is evaluated in both directions since it is not exactly
    /// symmetric; the exact solver and the `a = 0` form are.
    pub fn compute(
        curves: &[DiscreteCurve],
        a: f64,
        b: f64,
        method: Method,
        opts: &RegistrationOptions,
    ) -> Result<Self> {
        let both = method == Method::Dp && a > 0.0;
        Self::fill(curves.len(), a, b, method, both, |i, j| {
            pair_distance(&curves[i], &curves[j], a, b, method, opts)
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// The rows and columns at `indices`.
    pub fn submatrix(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange(format!("item {i} of {}", self.n)));
        }
        let rows = indices.iter().map(|&i| indices.iter().map(|&j| self.get(i, j)).collect()).collect();
        Self::new(rows, self.a, self.b, self.method)
    }
}

/// Quotient distance for one pair; `a = 0` uses the closed form.
pub fn pair_distance(
    c1: &DiscreteCurve,
    c2: &DiscreteCurve,
    a: f64,
    b: f64,
    method: Method,
    opts: &RegistrationOptions,
) -> Result<f64> {
    if a == 0.0 {
        return Ok(a_zero_distance(c1, c2, b)?.0);
    }
    let p = MetricParams::new(a, b)?;
    Ok(register(c1, c2, &p, method, opts)?.distance)
}

fn check_matrix_labels(dm: &DistanceMatrix, labels: &[usize]) -> Result<usize> {
    if labels.len() != dm.n() {
        return Err(Error::InvalidLabels(format!("{} labels for {} items", labels.len(), dm.n())));
    }
    check_labels(labels)
}

/// `√(mean_S d²) / √(mean_D d²)` over ordered same-class pairs `S` and
/// different-class pairs `D`.
pub fn ratio_loss(dm: &DistanceMatrix, labels: &[usize]) -> Result<f64> {
    check_matrix_labels(dm, labels)?;
    let (mut s, mut ns, mut d, mut nd) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..dm.n() {
        for j in 0..dm.n() {
            if i == j {
                continue;
            }
            let v = dm.get(i, j).powi(2);
            if labels[i] == labels[j] {
                s += v;
                ns += 1;
            } else {
                d += v;
                nd += 1;
            }
        }
    }
    if ns == 0 {
        return Err(Error::InvalidLabels("no two items share a class".into()));
    }
    if nd == 0 {
        return Err(Error::InvalidLabels("all items are in one class".into()));
    }
    if d == 0.0 {
        return Err(Error::Numeric("all inter-class distances are zero".into()));
    }
    Ok((s / ns as f64).sqrt() / (d / nd as f64).sqrt())
}

/// Leave-one-out negative log-likelihood. For each item `j` the class
/// scores are `z_ℓ = −mean_{i≠j, y_i=ℓ} d(i, j)²` and the class
/// probabilities `softmax(β z)`.
pub fn softmax_loss(dm: &DistanceMatrix, labels: &[usize], beta: f64) -> Result<f64> {
    let k = check_matrix_labels(dm, labels)?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l - 1] += 1;
    }
    if let Some(c) = sizes.iter().position(|&s| s < 2) {
        return Err(Error::InvalidLabels(format!("class {} has a single member", c + 1)));
    }
    let mut loss = 0.0;
    for j in 0..dm.n() {
        let mut sums = vec![0.0; k];
        for i in (0..dm.n()).filter(|&i| i != j) {
            sums[labels[i] - 1] += dm.get(i, j).powi(2);
        }
        let z: Vec<f64> = (0..k)
            .map(|l| {
                let count = sizes[l] - usize::from(labels[j] == l + 1);
                -beta * sums[l] / count as f64
            })
            .collect();
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += lse - z[labels[j] - 1];
    }
    Ok(loss)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Loss {
    Ratio,
    Softmax { beta: f64 },
}

impl Loss {
    pub fn evaluate(&self, dm: &DistanceMatrix, labels: &[usize]) -> Result<f64> {
        match *self {
            Loss::Ratio => ratio_loss(dm, labels),
            Loss::Softmax { beta } => softmax_loss(dm, labels, beta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Loss::Ratio => "ratio",
            Loss::Softmax { .. } => "softmax",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    pub method: Method,
    pub b: f64,
    pub registration: RegistrationOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { method: Method::Dp, b: LEARNING_B, registration: RegistrationOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub a_star: f64,
    pub loss_star: f64,
    /// `(a, loss)` in the order of the input grid.
    pub losses: Vec<(f64, f64)>,
}

/// Evaluates `loss` at every `a`, recomputing all registrations per `a`.
pub fn grid_search(
    data: &LabeledShapeSet,
    a_values: &[f64],
    loss: Loss,
    opts: &SearchOptions,
) -> Result<GridSearchResult> {
    grid_search_with(a_values, loss, data.labels(), |a| {
        DistanceMatrix::compute(data.curves(), a, opts.b, opts.method, &opts.registration)
    })
}

/// [`grid_search`] with a caller-supplied matrix source. The minimum loss
/// wins; ties go to the smallest `a`.
pub fn grid_search_with<F>(a_values: &[f64], loss: Loss, labels: &[usize], matrix: F) -> Result<GridSearchResult>
where
    F: Fn(f64) -> Result<DistanceMatrix> + Sync,
{
    if a_values.is_empty() {
        return Err(Error::InvalidArgument("empty a grid".into()));
    }
    if let Some(a) = a_values.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
        return Err(Error::InvalidParams(format!("a must be finite and nonnegative, got {a}")));
    }
    let values = a_values
        .par_iter()
        .map(|&a| loss.evaluate(&matrix(a)?, labels))
        .collect::<Result<Vec<f64>>>()?;
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Numeric("loss is NaN".into()));
    }
    let mut best = 0;
    for i in 1..a_values.len() {
        let (v, bv) = (values[i], values[best]);
        if v < bv || (v == bv && a_values[i] < a_values[best]) {
            best = i;
        }
    }
    Ok(GridSearchResult {
        a_star: a_values[best],
        loss_star: values[best],
        losses: a_values.iter().cloned().zip(values).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Draws `per_class` training items from every class; the rest are test
/// items. Both index lists are sorted.
pub fn train_test_split(labels: &[usize], per_class: usize, seed: u64) -> Result<Split> {
    let k = check_labels(labels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in 1..=k {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() <= per_class {
            return Err(Error::InvalidLabels(format!(
                "class {class} has {} members, need more than {per_class}",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..per_class]);
        test.extend_from_slice(&members[per_class..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { seed, train, test })
}

/// Agglomerative clustering with maximum linkage, stopped at `k` clusters.
///
/// Equal linkages merge the pair whose smallest members come first. Cluster
/// labels run `1..=k` in order of first appearance.
pub fn complete_linkage(dm: &DistanceMatrix, k: usize) -> Result<Vec<usize>> {
    let n = dm.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("cannot cut {n} items into {k} clusters")));
    }
    // Clusters stay sorted by smallest member, so index order is the tie order.
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut link: Vec<Vec<f64>> = dm.rows();
    while members.len() > k {
        let m = members.len();
        let (mut bi, mut bj, mut best) = (0, 1, f64::INFINITY);
        for i in 0..m {
            for j in i + 1..m {
                if link[i][j] < best {
                    (bi, bj, best) = (i, j, link[i][j]);
                }
            }
        }
        let merged = members.remove(bj);
        members[bi].extend(merged);
        let row = link.remove(bj);
        for r in link.iter_mut() {
            r.remove(bj);
        }
        for t in 0..m - 1 {
            let other = if t < bj { row[t] } else { row[t + 1] };
            let v = link[bi][t].max(other);
            link[bi][t] = v;
            link[t][bi] = v;
        }
        link[bi][bi] = 0.0;
    }
    let mut out = vec![0; n];
    for (c, ms) in members.iter().enumerate() {
        for &i in ms {
            out[i] = c + 1;
        }
    }
    Ok(out)
}

/// Fraction of item pairs on which two partitions agree.
pub fn rand_index(p1: &[usize], p2: &[usize]) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::InvalidLabels(format!("partitions of {} and {} items", p1.len(), p2.len())));
    }
    let n = p1.len();
    if n < 2 {
        return Err(Error::InvalidLabels("need at least two items".into()));
    }
    let mut agree = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            if (p1[i] == p1[j]) == (p2[i] == p2[j]) {
                agree += 1;
            }
        }
    }
    Ok(agree as f64 / (n * (n - 1) / 2) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub predictions: Vec<usize>,
    /// Index of the nearest training item per query.
    pub nearest: Vec<usize>,
    pub distances: Vec<f64>,
    /// Present when true labels were given.
    pub accuracy: Option<f64>,
}

/// 1-NN: `rows[q][t]` is the distance from query `q` to training item `t`.
/// Ties go to the smallest training index.
pub fn nn_classify(rows: &[Vec<f64>], train_labels: &[usize], truth: Option<&[usize]>) -> Result<Classification> {
    check_rows(rows, train_labels.len())?;
    let mut out = Classification {
        predictions: Vec::with_capacity(rows.len()),
        nearest: Vec::with_capacity(rows.len()),
        distances: Vec::with_capacity(rows.len()),
        accuracy: None,
    };
    for row in rows {
        let mut best = 0;
        for t in 1..row.len() {
            if row[t] < row[best] {
                best = t;
            }
        }
        out.predictions.push(train_labels[best]);
        out.nearest.push(best);
        out.distances.push(row[best]);
    }
    if let Some(truth) = truth {
        if truth.len() != rows.len() {
            return Err(Error::InvalidLabels(format!("{} labels for {} queries", truth.len(), rows.len())));
        }
        let hits = out.predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
        out.accuracy = Some(hits as f64 / rows.len() as f64);
    }
    Ok(out)
}

fn check_rows(rows: &[Vec<f64>], width: usize) -> Result<()> {
    if rows.is_empty() || width == 0 {
        return Err(Error::InvalidArgument("need at least one query and one training item".into()));
    }
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidArgument(format!("every row needs {width} distances")));
    }
    if rows.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::Numeric("NaN distance".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)`, starting at `(0, 0)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5).sum()
}

/// ROC of a ranked list: `relevant[r]` says whether rank `r` is a true
/// positive. Needs at least one positive and one negative.
pub fn roc_from_ranking(relevant: &[bool]) -> Result<RocCurve> {
    let pos = relevant.iter().filter(|&&r| r).count();
    let neg = relevant.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidLabels("ranking needs positives and negatives".into()));
    }
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut points = vec![(0.0, 0.0)];
    for &r in relevant {
        if r {
            tp += 1;
        } else {
            fp += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    let auc = trapezoid(&points);
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocReport {
    pub per_query: Vec<RocCurve>,
    /// Counts pooled over queries at each rank position.
    pub aggregate: RocCurve,
}

/// Ranks the training items by distance for every query (ties by index) and
/// builds one ROC per query plus the pooled aggregate.
pub fn roc_curves(rows: &[Vec<f64>], train_labels: &[usize], query_labels: &[usize]) -> Result<RocReport> {
    check_rows(rows, train_labels.len())?;
    if query_labels.len() != rows.len() {
        return Err(Error::InvalidLabels(format!("{} labels for {} queries", query_labels.len(), rows.len())));
    }
    let width = train_labels.len();
    let (mut tp, mut fp) = (vec![0usize; width + 1], vec![0usize; width + 1]);
    let mut per_query = Vec::with_capacity(rows.len());
    for (row, &label) in rows.iter().zip(query_labels) {
        let mut order: Vec<usize> = (0..width).collect();
        order.sort_by(|&i, &j| row[i].total_cmp(&row[j]).then(i.cmp(&j)));
        let relevant: Vec<bool> = order.iter().map(|&t| train_labels[t] == label).collect();
        per_query.push(roc_from_ranking(&relevant)?);
        let (mut t, mut f) = (0, 0);
        for (r, &rel) in relevant.iter().enumerate() {
            if rel {
                t += 1;
            } else {
                f += 1;
            }
            tp[r + 1] += t;
            fp[r + 1] += f;
        }
    }
    let (pos, neg) = (tp[width] as f64, fp[width] as f64);
    let points: Vec<(f64, f64)> = (0..=width).map(|r| (fp[r] as f64 / neg, tp[r] as f64 / pos)).collect();
    let auc = trapezoid(&points);
    Ok(RocReport { per_query, aggregate: RocCurve { points, auc } })
}
