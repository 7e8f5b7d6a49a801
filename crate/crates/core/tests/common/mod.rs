//! Curve generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use elastic_shapes::curve::DiscreteCurve;
use elastic_shapes::weight::RectangularWeight;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random open polyline with `n` vertices in `R^d`, steps of random length
/// and direction.
pub fn random_open(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DiscreteCurve {
    let mut pts = vec![vec![0.0; d]];
    for _ in 1..n {
        let last = pts.last().unwrap().clone();
        let step: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        pts.push(last.iter().zip(&step).map(|(a, b)| a + b).collect());
    }
    DiscreteCurve::open(pts).unwrap()
}

/// Smooth open planar curve `(t, Σ a_k sin(kπt + φ_k))` sampled at `n`
/// points of a smooth random warp of `[0, 1]`.
pub fn smooth_open(rng: &mut ChaCha8Rng, n: usize) -> DiscreteCurve {
    let coef: Vec<(f64, f64)> = (1..=3)
        .map(|k| (rng.gen_range(-0.25..0.25) / k as f64, rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let eps = rng.gen_range(-0.1..0.1);
    smooth_from(&coef, eps, n)
}

/// A pair of smooth curves with correlated shapes and different speeds.
pub fn smooth_pair(rng: &mut ChaCha8Rng, n: usize) -> (DiscreteCurve, DiscreteCurve) {
    let coef: Vec<(f64, f64)> = (1..=3)
        .map(|k| (rng.gen_range(-0.3..0.3) / k as f64, rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let other: Vec<(f64, f64)> = coef
        .iter()
        .map(|(a, ph)| (a + rng.gen_range(-0.1..0.1), ph + rng.gen_range(-0.5..0.5)))
        .collect();
    let e1 = rng.gen_range(-0.12..0.12);
    let e2 = rng.gen_range(-0.12..0.12);
    (smooth_from(&coef, e1, n), smooth_from(&other, e2, n))
}

/// Two unrelated smooth curves of clearly different shape and length.
pub fn distinct_pair(rng: &mut ChaCha8Rng, n: usize) -> (DiscreteCurve, DiscreteCurve) {
    let mut coef = || -> Vec<(f64, f64)> {
        (1..=3).map(|k| (rng.gen_range(-0.5..0.5) / k as f64, rng.gen_range(0.0..2.0 * PI))).collect()
    };
    let (k1, k2) = (coef(), coef());
    let scale = rng.gen_range(1.3..1.7);
    let c2 = smooth_from(&k2, rng.gen_range(-0.12..0.12), n);
    let c2 = DiscreteCurve::open(c2.points().iter().map(|p| p.iter().map(|x| scale * x).collect()).collect()).unwrap();
    (smooth_from(&k1, rng.gen_range(-0.12..0.12), n), c2)
}

fn smooth_from(coef: &[(f64, f64)], eps: f64, n: usize) -> DiscreteCurve {
    let pts = (0..n)
        .map(|i| {
            let u = i as f64 / (n - 1) as f64;
            let t = u + eps * (PI * u).sin() * (PI * u).sin().signum();
            let y: f64 = coef
                .iter()
                .enumerate()
                .map(|(k, (a, ph))| a * ((k + 1) as f64 * PI * t + ph).sin())
                .sum();
            vec![t, y]
        })
        .collect();
    DiscreteCurve::open(pts).unwrap()
}

/// Star-shaped random polygon with `n` vertices.
pub fn random_polygon(rng: &mut ChaCha8Rng, n: usize) -> DiscreteCurve {
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pts = angles
        .iter()
        .map(|t| {
            let r = rng.gen_range(0.5..1.5);
            vec![r * t.cos(), r * t.sin()]
        })
        .collect();
    DiscreteCurve::closed(pts).unwrap()
}

/// The registration weight computed from its textbook definition with a
/// clamped `acos`, independent of the library's implementation.
pub fn oracle_weight(v1: &[f64], v2: &[f64], a: f64, b: f64) -> f64 {
    let n1 = v1.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n2 = v2.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n1 <= 1e-12 || n2 <= 1e-12 {
        return 0.0;
    }
    let cos = (v1.iter().zip(v2).map(|(x, y)| x * y).sum::<f64>() / (n1 * n2)).clamp(-1.0, 1.0);
    let phi = a / (2.0 * b) * cos.acos();
    if phi <= PI / 2.0 {
        (n1 * n2).sqrt() * phi.cos()
    } else {
        0.0
    }
}

/// Global maximum of the registration energy by exhaustive search over cell
/// corridors.
///
/// Every monotone path visits a monotone staircase of rectangles, and the
/// optimal path inside a rectangle is straight. For each staircase the
/// crossing positions on the shared edges are optimized by a chain DP over
/// sampled positions, refined by repeated zooming; the objective is concave
/// in the crossing positions so zooming converges to the corridor optimum.
pub fn corridor_oracle(c1: &DiscreteCurve, c2: &DiscreteCurve, a: f64, b: f64) -> f64 {
    let xs = c1.knots();
    let ys = c2.knots();
    let v1 = c1.velocities();
    let v2 = c2.velocities();
    let m = v1.len();
    let n = v2.len();
    let w: Vec<Vec<f64>> = v1.iter().map(|p| v2.iter().map(|q| oracle_weight(p, q, a, b)).collect()).collect();

    let mut best = 0.0f64;
    let mut moves = Vec::new();
    enumerate_staircases(m - 1, n - 1, &mut moves, &mut |mv: &[bool]| {
        best = best.max(corridor_optimum(mv, &xs, &ys, &w));
    });
    best
}

fn enumerate_staircases(r: usize, u: usize, acc: &mut Vec<bool>, f: &mut dyn FnMut(&[bool])) {
    if r == 0 && u == 0 {
        f(acc);
        return;
    }
    if r > 0 {
        acc.push(true);
        enumerate_staircases(r - 1, u, acc, f);
        acc.pop();
    }
    if u > 0 {
        acc.push(false);
        enumerate_staircases(r, u - 1, acc, f);
        acc.pop();
    }
}

struct Edge {
    /// `true`: vertical edge at fixed x, variable y.
    vertical: bool,
    fixed: f64,
    lo: f64,
    hi: f64,
}

impl Edge {
    fn point(&self, t: f64) -> (f64, f64) {
        if self.vertical {
            (self.fixed, t)
        } else {
            (t, self.fixed)
        }
    }
}

fn cell_energy(w: f64, p: (f64, f64), q: (f64, f64)) -> f64 {
    let dx = q.0 - p.0;
    let dy = q.1 - p.1;
    if dx < -1e-15 || dy < -1e-15 {
        return f64::NEG_INFINITY;
    }
    w * (dx.max(0.0) * dy.max(0.0)).sqrt()
}

fn corridor_optimum(moves: &[bool], xs: &[f64], ys: &[f64], w: &[Vec<f64>]) -> f64 {
    let (mut r, mut t) = (0usize, 0usize);
    let mut cells = vec![(0, 0)];
    let mut edges = Vec::new();
    for &right in moves {
        if right {
            edges.push(Edge { vertical: true, fixed: xs[r + 1], lo: ys[t], hi: ys[t + 1] });
            r += 1;
        } else {
            edges.push(Edge { vertical: false, fixed: ys[t + 1], lo: xs[r], hi: xs[r + 1] });
            t += 1;
        }
        cells.push((r, t));
    }
    let weight = |i: usize| w[cells[i].0][cells[i].1];
    if edges.is_empty() {
        return cell_energy(weight(0), (0.0, 0.0), (1.0, 1.0));
    }

    const G: usize = 41;
    let mut windows: Vec<(f64, f64)> = edges.iter().map(|e| (e.lo, e.hi)).collect();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..200 {
        let samples: Vec<Vec<f64>> = windows
            .iter()
            .map(|&(lo, hi)| (0..G).map(|g| lo + (hi - lo) * g as f64 / (G - 1) as f64).collect())
            .collect();
        // value[g] = best energy from (0,0) to sample g of the current edge.
        let mut value: Vec<f64> =
            samples[0].iter().map(|&t| cell_energy(weight(0), (0.0, 0.0), edges[0].point(t))).collect();
        let mut back: Vec<Vec<usize>> = Vec::with_capacity(edges.len());
        for e in 1..edges.len() {
            let mut next = vec![f64::NEG_INFINITY; G];
            let mut arg = vec![0usize; G];
            for (g, &t) in samples[e].iter().enumerate() {
                let q = edges[e].point(t);
                for (h, &s) in samples[e - 1].iter().enumerate() {
                    if value[h] == f64::NEG_INFINITY {
                        continue;
                    }
                    let v = value[h] + cell_energy(weight(e), edges[e - 1].point(s), q);
                    if v > next[g] {
                        next[g] = v;
                        arg[g] = h;
                    }
                }
            }
            back.push(arg);
            value = next;
        }
        let last = edges.len() - 1;
        let mut total = f64::NEG_INFINITY;
        let mut gbest = 0;
        for (g, &t) in samples[last].iter().enumerate() {
            let v = value[g] + cell_energy(weight(last + 1), edges[last].point(t), (1.0, 1.0));
            if v > total {
                total = v;
                gbest = g;
            }
        }
        if total == f64::NEG_INFINITY {
            return total;
        }
        best = best.max(total);

        let mut idx = vec![0usize; edges.len()];
        idx[last] = gbest;
        for e in (1..edges.len()).rev() {
            idx[e - 1] = back[e - 1][idx[e]];
        }
        let mut widest = 0.0f64;
        for (e, win) in windows.iter_mut().enumerate() {
            let step = (win.1 - win.0) / (G - 1) as f64;
            let center = samples[e][idx[e]];
            // Keep the width while the optimum sits on the window boundary.
            let half = if (idx[e] == 0 && win.0 > edges[e].lo) || (idx[e] == G - 1 && win.1 < edges[e].hi) {
                (win.1 - win.0) / 2.0
            } else {
                4.0 * step
            };
            let lo = (center - half).max(edges[e].lo);
            let hi = (center + half).min(edges[e].hi);
            *win = (lo, hi);
            widest = widest.max(hi - lo);
        }
        if widest < 1e-13 {
            break;
        }
    }
    best
}

/// Maximum over every strictly increasing vertex path on the grid `x × x` of
/// the energy summed left to right.
pub fn dp_brute_force(weight: &RectangularWeight, x: &[f64]) -> f64 {
    fn go(w: &RectangularWeight, x: &[f64], k: usize, l: usize, acc: f64, best: &mut f64) {
        let n = x.len() - 1;
        if k == n && l == n {
            *best = best.max(acc);
            return;
        }
        for i in k + 1..=n {
            for j in l + 1..=n {
                let e = w.line_energy((x[k], x[l]), (x[i], x[j]));
                go(w, x, i, j, acc + e, best);
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    go(weight, x, 0, 0, 0.0, &mut best);
    best
}

/// Length and midpoint of a numerically minimized discrete geodesic of the
/// cone metric `g^λ` between nonzero `q1` and `q2`.
///
/// The path is computed in the plane of `q1, q2` by minimizing the discrete
/// energy `Σ G(z_k, z_{k+1})` with the metric frozen at segment midpoints:
/// `G(a, b) = λ²|b − a|² + (1 − λ²)(|b|² − |a|²)²/|a + b|²`. The solution is
/// refined from 8 to `n` segments by L-BFGS at every level.
pub fn cone_oracle(q1: &[f64], q2: &[f64], lambda: f64, n: usize) -> (f64, Vec<f64>) {
    let r1 = q1.iter().map(|x| x * x).sum::<f64>().sqrt();
    let e1: Vec<f64> = q1.iter().map(|x| x / r1).collect();
    let along: f64 = q2.iter().zip(&e1).map(|(a, b)| a * b).sum();
    let mut e2: Vec<f64> = q2.iter().zip(&e1).map(|(y, e)| y - along * e).collect();
    let perp = e2.iter().map(|x| x * x).sum::<f64>().sqrt();
    if perp > 1e-14 {
        e2.iter_mut().for_each(|x| *x /= perp);
    } else {
        // Any unit vector orthogonal to e1.
        let i = (0..e1.len()).min_by(|&a, &b| e1[a].abs().partial_cmp(&e1[b].abs()).unwrap()).unwrap();
        let mut u = vec![0.0; e1.len()];
        u[i] = 1.0;
        let d = e1[i];
        e2 = u.iter().zip(&e1).map(|(x, e)| x - d * e).collect();
        let nn = e2.iter().map(|x| x * x).sum::<f64>().sqrt();
        e2.iter_mut().for_each(|x| *x /= nn);
    }
    let a = [r1, 0.0];
    let b = [along, perp];

    // Initial path: linear interpolation in polar coordinates.
    let rb = b[0].hypot(b[1]);
    let th = b[1].atan2(b[0]);
    let mut segs = 8;
    let mut z: Vec<[f64; 2]> = (0..=segs)
        .map(|k| {
            let t = k as f64 / segs as f64;
            let r = (1.0 - t) * r1 + t * rb;
            [r * (t * th).cos(), r * (t * th).sin()]
        })
        .collect();
    loop {
        z = minimize_path(z, lambda);
        if segs >= n {
            break;
        }
        let mut finer = Vec::with_capacity(2 * segs + 1);
        for k in 0..segs {
            finer.push(z[k]);
            finer.push([(z[k][0] + z[k + 1][0]) / 2.0, (z[k][1] + z[k + 1][1]) / 2.0]);
        }
        finer.push(z[segs]);
        z = finer;
        segs *= 2;
    }
    z[0] = a;
    z[segs] = b;
    let len: f64 = z.windows(2).map(|s| seg_g(s[0], s[1], lambda).max(0.0).sqrt()).sum();
    let mid = z[segs / 2];
    let midpoint = e1.iter().zip(&e2).map(|(u, v)| mid[0] * u + mid[1] * v).collect();
    (len, midpoint)
}

fn seg_g(a: [f64; 2], b: [f64; 2], lambda: f64) -> f64 {
    let l2 = lambda * lambda;
    let d = [b[0] - a[0], b[1] - a[1]];
    let s = [a[0] + b[0], a[1] + b[1]];
    let u = b[0] * b[0] + b[1] * b[1] - a[0] * a[0] - a[1] * a[1];
    let v = s[0] * s[0] + s[1] * s[1];
    if v == 0.0 {
        return l2 * (d[0] * d[0] + d[1] * d[1]);
    }
    l2 * (d[0] * d[0] + d[1] * d[1]) + (1.0 - l2) * u * u / v
}

/// Gradients of `seg_g` with respect to both endpoints.
fn seg_grad(a: [f64; 2], b: [f64; 2], lambda: f64) -> ([f64; 2], [f64; 2]) {
    let l2 = lambda * lambda;
    let d = [b[0] - a[0], b[1] - a[1]];
    let s = [a[0] + b[0], a[1] + b[1]];
    let u = b[0] * b[0] + b[1] * b[1] - a[0] * a[0] - a[1] * a[1];
    let v = s[0] * s[0] + s[1] * s[1];
    let mut ga = [-2.0 * l2 * d[0], -2.0 * l2 * d[1]];
    let mut gb = [2.0 * l2 * d[0], 2.0 * l2 * d[1]];
    if v > 0.0 {
        let k = 1.0 - l2;
        for i in 0..2 {
            let dv = 2.0 * s[i];
            ga[i] += k * (2.0 * u * (-2.0 * a[i]) / v - u * u * dv / (v * v));
            gb[i] += k * (2.0 * u * (2.0 * b[i]) / v - u * u * dv / (v * v));
        }
    }
    (ga, gb)
}

fn path_energy(z: &[[f64; 2]], lambda: f64) -> f64 {
    z.windows(2).map(|s| seg_g(s[0], s[1], lambda)).sum()
}

fn path_grad(z: &[[f64; 2]], lambda: f64) -> Vec<f64> {
    let inner = z.len() - 2;
    let mut g = vec![0.0; 2 * inner];
    for k in 0..z.len() - 1 {
        let (ga, gb) = seg_grad(z[k], z[k + 1], lambda);
        if k >= 1 {
            g[2 * (k - 1)] += ga[0];
            g[2 * (k - 1) + 1] += ga[1];
        }
        if k < inner {
            g[2 * k] += gb[0];
            g[2 * k + 1] += gb[1];
        }
    }
    g
}

/// L-BFGS with Armijo backtracking over the interior points.
fn minimize_path(mut z: Vec<[f64; 2]>, lambda: f64) -> Vec<[f64; 2]> {
    const MEM: usize = 12;
    let inner = z.len() - 2;
    let set = |z: &mut Vec<[f64; 2]>, x: &[f64]| {
        for k in 0..inner {
            z[k + 1] = [x[2 * k], x[2 * k + 1]];
        }
    };
    let mut x: Vec<f64> = z[1..=inner].iter().flat_map(|p| [p[0], p[1]]).collect();
    let mut f = path_energy(&z, lambda);
    let mut g = path_grad(&z, lambda);
    let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _ in 0..20_000 {
        let gn = dot(&g, &g).sqrt();
        if gn < 1e-15 * (1.0 + f) {
            break;
        }
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let al = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= al * yi);
            alphas.push(al);
        }
        if let Some((s, y, _)) = hist.last() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        } else {
            q.iter_mut().for_each(|v| *v /= gn.max(1.0));
        }
        for ((s, y, rho), al) in hist.iter().zip(alphas.iter().rev()) {
            let be = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (al - be) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            hist.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -gn * gn;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            set(&mut z, &xn);
            let fnew = path_energy(&z, lambda);
            if fnew <= f + 1e-4 * step * slope {
                accepted = Some((xn, fnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            set(&mut z, &x);
            break;
        };
        let gnew = path_grad(&z, lambda);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            hist.push((s, y, 1.0 / sy));
            if hist.len() > MEM {
                hist.remove(0);
            }
        }
        let done = (f - fnew).abs() <= 1e-16 * f.abs();
        x = xn;
        f = fnew;
        g = gnew;
        if done {
            break;
        }
    }
    set(&mut z, &x);
    z
}

/// Planar arc of length `len` turning through `bend` radians, sampled at `n`
/// vertices with a random speed profile and small normal noise.
pub fn arc(rng: &mut ChaCha8Rng, n: usize, len: f64, bend: f64) -> DiscreteCurve {
    let eps = rng.gen_range(-0.15..0.15);
    let pts = (0..n)
        .map(|i| {
            let u = i as f64 / (n - 1) as f64;
            let t = u + eps * (PI * u).sin();
            let (x, y) = if bend.abs() < 1e-9 {
                (len * t, 0.0)
            } else {
                let (p0, p) = (-0.5 * bend, bend * (t - 0.5));
                (len / bend * (p.sin() - p0.sin()), len / bend * (p0.cos() - p.cos()))
            };
            let noise = if i == 0 || i == n - 1 { 0.0 } else { rng.gen_range(-0.005..0.005) * len };
            vec![x, y + noise]
        })
        .collect();
    DiscreteCurve::open(pts).unwrap()
}

/// Two classes of arcs with equal length spread that differ only in how
/// much they bend.
pub fn bending_corpus(rng: &mut ChaCha8Rng, per_class: usize, n: usize) -> (Vec<DiscreteCurve>, Vec<usize>) {
    let mut curves = Vec::new();
    let mut labels = Vec::new();
    for (label, lo, hi) in [(1, 0.0, 0.4), (2, 2.2, 2.6)] {
        for _ in 0..per_class {
            let len = rng.gen_range(0.7..1.3);
            let bend = rng.gen_range(lo..hi);
            curves.push(arc(rng, n, len, bend));
            labels.push(label);
        }
    }
    (curves, labels)
}

/// Two classes of arcs that differ only in length, with a shared spread of
/// bending.
pub fn stretching_corpus(rng: &mut ChaCha8Rng, per_class: usize, n: usize) -> (Vec<DiscreteCurve>, Vec<usize>) {
    let mut curves = Vec::new();
    let mut labels = Vec::new();
    for (label, lo, hi) in [(1, 0.8, 0.9), (2, 1.4, 1.6)] {
        for _ in 0..per_class {
            let len = rng.gen_range(lo..hi);
            let bend = rng.gen_range(0.0..2.5);
            curves.push(arc(rng, n, len, bend));
            labels.push(label);
        }
    }
    (curves, labels)
}
