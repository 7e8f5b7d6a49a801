//! Globally optimal registration of piecewise-linear curves.
//!
//! The weight `f_ab` is constant on the rectangles of the product of both
//! curves' knot partitions. Inside a rectangle the optimal path between two
//! points is straight, since `w√(ΔxΔy)` is concave. At an interior point of a
//! rectangle edge where both sides carry positive weight, first-order
//! optimality in the crossing position gives a refraction law on the slope:
//!
//! * crossing a vertical edge from weight `w` into `w'`: `s' = s (w'/w)²`
//! * crossing a horizontal edge: `s' = s (w/w')²`
//!
//! Horizontal or vertical runs next to a positive-weight cell can always be
//! absorbed into the adjacent sloped piece with a strict gain, so an optimal
//! path is a chain of refracted rays, each starting and ending at a grid
//! vertex, joined by zero-energy runs along grid lines. Inside zero-weight
//! cells a ray keeps its entry coordinate (horizontal after entering through
//! a vertical edge, vertical after a horizontal one); any other traversal is
//! dominated by one of these or by a run along the grid lines.
//!
//! From a vertex, all rays are traced at once as a family indexed by the
//! initial slope `s`. After any number of crossings the current point is
//! `(A + B/s, C + D s)` with `B, D ≥ 0`, and the accumulated energy is
//! `P√s + Q/√s`. A rectangle corner is hit by exactly one `s`, which splits
//! the family into the rays leaving through the right edge and those leaving
//! through the top edge. Every corner hit is a candidate transition for a DP
//! over the grid vertices, processed in row-major order.
//!
//! Ties between equal-energy paths resolve to the first one found.

use super::{check_open_pair, Method, RegistrationResult};
use crate::curve::DiscreteCurve;
use crate::error::Result;
use crate::metric::distance_from_energy;
use crate::params::MetricParams;
use crate::reparam::Reparametrization;
use crate::weight::{build_weight, RectangularWeight};

const ROOT: usize = usize::MAX;

/// A crossing point of the ray family: `(a + b/s, c + d s)`.
#[derive(Clone, Copy)]
struct Node {
    parent: usize,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Node {
    fn at(&self, s: f64) -> (f64, f64) {
        let x = if self.b == 0.0 { self.a } else { self.a + self.b / s };
        let y = if self.d == 0.0 { self.c } else { self.c + self.d * s };
        (x, y)
    }
}

#[derive(Clone, Copy)]
struct Frame {
    r: usize,
    t: usize,
    lo: f64,
    hi: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    /// Current slope is `cf · s`.
    cf: f64,
    /// Last positive weight traversed, for refraction across zero cells.
    wlast: f64,
    p: f64,
    q: f64,
    from_left: bool,
    node: usize,
}

/// Traces every ray leaving vertex `(k, l)` into cell `(k, l)` and reports
/// each corner hit as `(i, j, s, energy, node)`. Stops early when `hit`
/// returns `true`.
fn trace<F>(w: &RectangularWeight, k: usize, l: usize, nodes: &mut Vec<Node>, mut hit: F)
where
    F: FnMut(usize, usize, f64, f64, usize) -> bool,
{
    let xs = w.x_breaks();
    let ys = w.y_breaks();
    let (m, n) = (w.rows(), w.cols());
    let w0 = w.value(k, l);
    nodes.clear();
    if !(w0 > 0.0) {
        return;
    }
    nodes.push(Node { parent: ROOT, a: xs[k], b: 0.0, c: ys[l], d: 0.0 });
    let mut stack = vec![Frame {
        r: k,
        t: l,
        lo: 0.0,
        hi: f64::INFINITY,
        a: xs[k],
        b: 0.0,
        c: ys[l],
        d: 0.0,
        cf: 1.0,
        wlast: w0,
        p: 0.0,
        q: 0.0,
        from_left: true,
        node: 0,
    }];

    while let Some(mut f) = stack.pop() {
        loop {
            let wv = w.value(f.r, f.t);
            if wv == 0.0 {
                if f.from_left {
                    if f.r + 1 >= m {
                        break;
                    }
                    f.a = xs[f.r + 1];
                    f.b = 0.0;
                    f.r += 1;
                } else {
                    if f.t + 1 >= n {
                        break;
                    }
                    f.c = ys[f.t + 1];
                    f.d = 0.0;
                    f.t += 1;
                }
                nodes.push(Node { parent: f.node, a: f.a, b: f.b, c: f.c, d: f.d });
                f.node = nodes.len() - 1;
                continue;
            }
            if wv != f.wlast {
                let ratio = wv / f.wlast;
                f.cf *= if f.from_left { ratio * ratio } else { 1.0 / (ratio * ratio) };
                f.wlast = wv;
            }

            let sq = f.cf.sqrt();
            let xr = xs[f.r + 1];
            let yt = ys[f.t + 1];
            // Height at which the ray meets the right edge: alpha + beta·s.
            let alpha = f.c - f.cf * f.b;
            let beta = f.d + f.cf * (xr - f.a);
            let s_star = (yt - alpha) / beta;
            let dp_right = wv * sq * (xr - f.a);
            let dq_right = -wv * sq * f.b;

            if f.lo < s_star && s_star < f.hi {
                let rs = s_star.sqrt();
                let e = (f.p + dp_right) * rs + (f.q + dq_right) / rs;
                if hit(f.r + 1, f.t + 1, s_star, e, f.node) {
                    return;
                }
            }

            let top_lo = f.lo.max(s_star);
            if top_lo < f.hi && f.t + 1 < n {
                let mut g = f;
                g.lo = top_lo;
                g.p = f.p - (wv / sq) * f.d;
                g.q = f.q + (wv / sq) * (yt - f.c);
                g.a = f.a - f.d / f.cf;
                g.b = f.b + (yt - f.c) / f.cf;
                g.c = yt;
                g.d = 0.0;
                g.t += 1;
                g.from_left = false;
                nodes.push(Node { parent: f.node, a: g.a, b: g.b, c: g.c, d: g.d });
                g.node = nodes.len() - 1;
                stack.push(g);
            }

            let right_hi = f.hi.min(s_star);
            if f.lo < right_hi && f.r + 1 < m {
                f.hi = right_hi;
                f.p += dp_right;
                f.q += dq_right;
                f.a = xr;
                f.b = 0.0;
                f.c = alpha;
                f.d = beta;
                f.r += 1;
                f.from_left = true;
                nodes.push(Node { parent: f.node, a: f.a, b: f.b, c: f.c, d: f.d });
                f.node = nodes.len() - 1;
                continue;
            }
            break;
        }
    }
}

#[derive(Clone, Copy)]
enum Pred {
    None,
    Flat(usize),
    Ray { from: usize, s: f64 },
}

/// Maximal registration energy and an optimal path, both exact up to rounding.
pub fn exact_register(c1: &DiscreteCurve, c2: &DiscreteCurve, p: &MetricParams) -> Result<RegistrationResult> {
    check_open_pair(c1, c2)?;
    let weight = build_weight(c1, c2, p)?;
    let (energy, vertices) = solve(&weight);
    let reparam = Reparametrization::new(vertices)?.simplified();
    Ok(RegistrationResult {
        reparam,
        energy,
        distance: distance_from_energy(c1.arc_length(), c2.arc_length(), energy, p.b()),
        seed_index: None,
        method: Method::Exact,
    })
}

fn solve(w: &RectangularWeight) -> (f64, Vec<(f64, f64)>) {
    let (m, n) = (w.rows(), w.cols());
    let cols = n + 1;
    let id = |i: usize, j: usize| i * cols + j;
    let mut value = vec![f64::NEG_INFINITY; (m + 1) * cols];
    let mut pred = vec![Pred::None; (m + 1) * cols];
    let mut nodes = Vec::new();
    value[0] = 0.0;

    for k in 0..=m {
        for l in 0..=n {
            let here = id(k, l);
            let v = value[here];
            if v == f64::NEG_INFINITY {
                continue;
            }
            if k < m && v > value[id(k + 1, l)] {
                value[id(k + 1, l)] = v;
                pred[id(k + 1, l)] = Pred::Flat(here);
            }
            if l < n && v > value[id(k, l + 1)] {
                value[id(k, l + 1)] = v;
                pred[id(k, l + 1)] = Pred::Flat(here);
            }
            if k < m && l < n {
                trace(w, k, l, &mut nodes, |i, j, s, e, _| {
                    let cand = v + e;
                    let target = id(i, j);
                    if cand > value[target] {
                        value[target] = cand;
                        pred[target] = Pred::Ray { from: here, s };
                    }
                    false
                });
            }
        }
    }

    let xs = w.x_breaks();
    let ys = w.y_breaks();
    let vertex = |v: usize| (xs[v / cols], ys[v % cols]);
    let mut rev = vec![vertex(id(m, n))];
    let mut cur = id(m, n);
    while cur != 0 {
        match pred[cur] {
            Pred::None => unreachable!("every vertex is reachable through flats"),
            Pred::Flat(from) => {
                rev.push(vertex(from));
                cur = from;
            }
            Pred::Ray { from, s } => {
                let (k, l) = (from / cols, from % cols);
                let mut found = None;
                trace(w, k, l, &mut nodes, |i, j, s2, _, node| {
                    if id(i, j) == cur && s2 == s {
                        found = Some(node);
                        true
                    } else {
                        false
                    }
                });
                let mut node = found.expect("retrace reproduces the recorded transition");
                let (tx, ty) = vertex(cur);
                let (fx, fy) = vertex(from);
                // Crossings, innermost first; the root is the source vertex.
                while nodes[node].parent != ROOT {
                    let (x, y) = nodes[node].at(s);
                    rev.push((x.clamp(fx, tx), y.clamp(fy, ty)));
                    node = nodes[node].parent;
                }
                rev.push(vertex(from));
                cur = from;
            }
        }
    }
    rev.reverse();
    // Rounding in the crossing coordinates must not break monotonicity.
    for i in 1..rev.len() {
        rev[i].0 = rev[i].0.max(rev[i - 1].0);
        rev[i].1 = rev[i].1.max(rev[i - 1].1);
    }
    (value[id(m, n)], rev)
}
