//! The elastic inner product, the parametrized distance, the registration
//! weight, and the quotient distance at a fixed registration.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::curve::{srv_transform_unchecked, DiscreteCurve};
use crate::error::{Error, Result};
use crate::linalg::{angle_between, dot, norm, sub};
use crate::params::{MetricParams, DEFAULT_ZERO_EPS};
use crate::reparam::Reparametrization;
use crate::weight::build_weight;

/// A deformation field sampled at the vertices of a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentField {
    vectors: Vec<Vec<f64>>,
}

impl TangentField {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidArgument("empty tangent field".into()));
        }
        let d = vectors[0].len();
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
        if vectors.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite tangent vector".into()));
        }
        Ok(Self { vectors })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self { vectors: vec![vec![0.0; d]; n] }
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    fn check_against(&self, c: &DiscreteCurve) -> Result<()> {
        if self.vectors.len() != c.vertex_count() {
            return Err(Error::InvalidArgument(format!(
                "tangent field has {} vectors for {} vertices",
                self.vectors.len(),
                c.vertex_count()
            )));
        }
        if self.vectors[0].len() != c.dim() {
            return Err(Error::DimensionMismatch { expected: c.dim(), got: self.vectors[0].len() });
        }
        Ok(())
    }
}

/// Discrete `G^{a,b}_c(h, k)`: per segment, the arc-length derivatives
/// `D_s h = Δh/|Δc|` are split against the unit tangent and integrated with
/// `ds = |Δc|`.
pub fn gab_inner(c: &DiscreteCurve, h: &TangentField, k: &TangentField, p: &MetricParams) -> Result<f64> {
    h.check_against(c)?;
    k.check_against(c)?;
    let n = c.vertex_count();
    let (a2, b2) = (p.a() * p.a(), p.b() * p.b());
    let mut total = 0.0;
    for i in 0..c.segment_count() {
        let j = (i + 1) % n;
        let (p0, p1) = c.segment(i);
        let dc = sub(p1, p0);
        let len = norm(&dc);
        if len <= DEFAULT_ZERO_EPS {
            return Err(Error::ZeroLengthSegment(i));
        }
        let tau: Vec<f64> = dc.iter().map(|x| x / len).collect();
        let dh: Vec<f64> = sub(&h.vectors[j], &h.vectors[i]).iter().map(|x| x / len).collect();
        let dk: Vec<f64> = sub(&k.vectors[j], &k.vectors[i]).iter().map(|x| x / len).collect();
        let ht = dot(&dh, &tau);
        let kt = dot(&dk, &tau);
        let normal = dot(&dh, &dk) - ht * kt;
        total += (a2 * normal + b2 * ht * kt) * len;
    }
    Ok(total)
}

/// The registration weight: `√(|v1||v2|) cos(λθ)` where `λθ ≤ π/2`, else 0.
/// Zero when either vector vanishes.
pub fn f_ab(v1: &[f64], v2: &[f64], p: &MetricParams) -> f64 {
    let n1 = norm(v1);
    let n2 = norm(v2);
    if n1 <= DEFAULT_ZERO_EPS || n2 <= DEFAULT_ZERO_EPS {
        return 0.0;
    }
    let phi = p.lambda() * angle_between(v1, v2);
    if phi <= FRAC_PI_2 {
        (n1 * n2).sqrt() * phi.cos()
    } else {
        0.0
    }
}

/// The integrand before clamping: `√(|v1||v2|) cos(λ min(θ, π/λ))`, which may
/// be negative.
pub fn f_ab_unclamped(v1: &[f64], v2: &[f64], p: &MetricParams) -> f64 {
    let n1 = norm(v1);
    let n2 = norm(v2);
    if n1 <= DEFAULT_ZERO_EPS || n2 <= DEFAULT_ZERO_EPS {
        return 0.0;
    }
    let phi = (p.lambda() * angle_between(v1, v2)).min(std::f64::consts::PI);
    (n1 * n2).sqrt() * phi.cos()
}

/// Refines both curves to the union of their knots so that the segment
/// derivatives are constant on common cells.
pub fn common_refinement(c1: &DiscreteCurve, c2: &DiscreteCurve) -> Result<(DiscreteCurve, DiscreteCurve)> {
    if c1.is_closed() != c2.is_closed() {
        return Err(Error::ClosureMismatch("cannot compare an open with a closed curve".into()));
    }
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch { expected: c1.dim(), got: c2.dim() });
    }
    let k1 = c1.knots();
    let k2 = c2.knots();
    if k1 == k2 {
        return Ok((c1.clone(), c2.clone()));
    }
    let r1 = c1.refine(&k2)?;
    let r2 = c2.refine(&k1)?;
    if r1.knots() != r2.knots() {
        return Err(Error::GridMismatch("knot refinement did not produce a common grid".into()));
    }
    Ok((r1, r2))
}

/// Distance between parametrized curves: `2b` times the L² distance of
/// their SRV representations in the cone metric. Curves on different grids
/// are compared on the union of both grids; no resampling error is incurred.
pub fn param_distance(c1: &DiscreteCurve, c2: &DiscreteCurve, p: &MetricParams) -> Result<f64> {
    let (r1, r2) = common_refinement(c1, c2)?;
    let q1 = srv_transform_unchecked(&r1);
    let q2 = srv_transform_unchecked(&r2);
    let cone = Cone::new(p.lambda())?;
    let sq: f64 = q1
        .q_values()
        .iter()
        .zip(q2.q_values())
        .zip(q1.cell_widths())
        .map(|((a, b), w)| cone.distance_sq_unchecked(a, b) * w)
        .sum();
    Ok(2.0 * p.b() * sq.sqrt())
}

/// `param_distance` evaluated through `2b√(ℓ1 + ℓ2 − 2∫√(|c1'||c2'|) cos(λθ))`.
/// Loses precision for nearby curves; kept as a cross-check.
pub fn param_distance_closed_form(c1: &DiscreteCurve, c2: &DiscreteCurve, p: &MetricParams) -> Result<f64> {
    let (r1, r2) = common_refinement(c1, c2)?;
    let cone = Cone::new(p.lambda())?;
    let knots = r1.knots();
    let mut inner = 0.0;
    for (i, (v1, v2)) in r1.velocities().iter().zip(r2.velocities()).enumerate() {
        let w = knots[i + 1] - knots[i];
        let theta = cone.angle_unchecked(v1, &v2);
        inner += (norm(v1) * norm(&v2)).sqrt() * (p.lambda() * theta).cos() * w;
    }
    let rad = r1.arc_length() + r2.arc_length() - 2.0 * inner;
    Ok(2.0 * p.b() * rad.max(0.0).sqrt())
}

/// `∫ √(γ̇1 γ̇2) f_ab(ċ1∘γ1, ċ2∘γ2) du` for a registration path, computed
/// exactly on the rectangle arrangement.
pub fn registration_energy(
    c1: &DiscreteCurve,
    c2: &DiscreteCurve,
    reg: &Reparametrization,
    p: &MetricParams,
) -> Result<f64> {
    if c1.is_closed() != c2.is_closed() {
        return Err(Error::ClosureMismatch("cannot register an open with a closed curve".into()));
    }
    let w = build_weight(c1, c2, p)?;
    Ok(w.path_energy(reg.vertices()))
}

/// `2b√(ℓ1 + ℓ2 − 2E)` with `E` the registration energy of `reg`.
pub fn quotient_distance_given(
    c1: &DiscreteCurve,
    c2: &DiscreteCurve,
    reg: &Reparametrization,
    p: &MetricParams,
) -> Result<f64> {
    let e = registration_energy(c1, c2, reg, p)?;
    Ok(distance_from_energy(c1.arc_length(), c2.arc_length(), e, p.b()))
}

/// `2b√(ℓ1 + ℓ2 − 2E)`, clamping a slightly negative radicand to zero.
pub fn distance_from_energy(l1: f64, l2: f64, energy: f64, b: f64) -> f64 {
    2.0 * b * (l1 + l2 - 2.0 * energy).max(0.0).sqrt()
}

/// The `a → 0` limit of the quotient distance, `2b|√ℓ1 − √ℓ2|`, together
/// with the registration aligning both curves by normalized arc length.
pub fn a_zero_distance(c1: &DiscreteCurve, c2: &DiscreteCurve, b: f64) -> Result<(f64, Reparametrization)> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidParams(format!("b must be positive and finite, got {b}")));
    }
    if c1.is_closed() != c2.is_closed() {
        return Err(Error::ClosureMismatch("cannot register an open with a closed curve".into()));
    }
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch { expected: c1.dim(), got: c2.dim() });
    }
    let l1 = c1.arc_length();
    let l2 = c2.arc_length();
    let d = 2.0 * b * (l1.sqrt() - l2.sqrt()).abs();
    if l1 <= DEFAULT_ZERO_EPS || l2 <= DEFAULT_ZERO_EPS {
        return Ok((d, Reparametrization::identity()));
    }
    let psi1 = ArcLengthMap::new(c1);
    let psi2 = ArcLengthMap::new(c2);
    let mut s: Vec<f64> = psi1.values.iter().chain(&psi2.values).copied().collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.dedup();
    let mut verts: Vec<(f64, f64)> = s.iter().map(|&s| (psi1.inverse(s), psi2.inverse(s))).collect();
    verts[0] = (0.0, 0.0);
    *verts.last_mut().unwrap() = (1.0, 1.0);
    for i in 1..verts.len() {
        verts[i].0 = verts[i].0.max(verts[i - 1].0);
        verts[i].1 = verts[i].1.max(verts[i - 1].1);
    }
    Ok((d, Reparametrization::new(verts)?.simplified()))
}

/// Normalized arc length `ψ(u) = (1/ℓ)∫₀ᵘ |ċ|` sampled at the knots.
struct ArcLengthMap {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl ArcLengthMap {
    fn new(c: &DiscreteCurve) -> Self {
        let lens = c.segment_lengths();
        let total: f64 = lens.iter().sum();
        let mut values = Vec::with_capacity(lens.len() + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for l in &lens {
            acc += l;
            values.push(acc / total);
        }
        *values.last_mut().unwrap() = 1.0;
        Self { knots: c.knots(), values }
    }

    /// Smallest parameter with `ψ(u) = s`.
    fn inverse(&self, s: f64) -> f64 {
        let i = self.values.partition_point(|v| *v < s);
        if i == 0 {
            return 0.0;
        }
        if i >= self.values.len() {
            return 1.0;
        }
        let (s0, s1) = (self.values[i - 1], self.values[i]);
        let (u0, u1) = (self.knots[i - 1], self.knots[i]);
        if s1 <= s0 {
            return u1;
        }
        u0 + (u1 - u0) * (s - s0) / (s1 - s0)
    }
}
