//! Pointwise geometry of the completed cone `(R^d_λ, d_λ)`.
//!
//! `R^d \ {0}` carries the metric `g^λ_q(v, w) = λ²(v⊥·w⊥) + (v⊤·w⊤)`, where
//! `⊤`/`⊥` split a tangent vector along and across the base point `q`. Adding
//! the origin back (the apex) gives a complete metric space whose distance
//! has the closed form
//!
//! ```text
//! d_λ(q1, q2)² = |q1|² + |q2|² − 2|q1||q2| cos(λθ),   θ = min(∠(q1, q2), π/λ)
//! ```
//!
//! with `θ = π/λ` whenever either point is the apex. Geodesics are built by
//! unfolding the 2-plane through `q1, q2` with the sector map
//! `(r cos α, r sin α) ↦ (r cos λα, r sin λα)`, interpolating linearly and
//! folding back; when `λθ ≥ π` the shortest path runs radially through the
//! apex.
//!
//! In dimension 2 the closed form is the distance of the completion; it is
//! not always realized by paths that avoid the origin. It is used uniformly
//! in every dimension.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{angle_between, dot, norm};
use crate::params::{check_lambda, DEFAULT_ZERO_EPS};

/// A point of the completed cone. The all-zero vector is the apex.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePoint(Vec<f64>);

impl ConePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "cone points need dimension >= 2, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("cone point has non-finite coordinates".into()));
        }
        Ok(Self(coords))
    }

    pub fn apex(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl AsRef<[f64]> for ConePoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// The cone metric for a fixed `λ` and apex threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone {
    lambda: f64,
    zero_eps: f64,
}

fn check_dims(q1: &[f64], q2: &[f64]) -> Result<()> {
    if q1.len() != q2.len() {
        return Err(Error::DimensionMismatch { expected: q1.len(), got: q2.len() });
    }
    Ok(())
}

impl Cone {
    pub fn new(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { lambda, zero_eps: DEFAULT_ZERO_EPS })
    }

    /// Points with norm below `zero_eps` are treated as the apex.
    pub fn with_zero_eps(mut self, zero_eps: f64) -> Self {
        self.zero_eps = zero_eps.max(0.0);
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn zero_eps(&self) -> f64 {
        self.zero_eps
    }

    fn is_apex(&self, q: &[f64]) -> bool {
        norm(q) < self.zero_eps
    }

    /// `min(∠(q1, q2), π/λ)`, or `π/λ` if either point is the apex.
    pub fn angle(&self, q1: &[f64], q2: &[f64]) -> Result<f64> {
        check_dims(q1, q2)?;
        Ok(self.angle_unchecked(q1, q2))
    }

    pub(crate) fn angle_unchecked(&self, q1: &[f64], q2: &[f64]) -> f64 {
        let cap = PI / self.lambda;
        if self.is_apex(q1) || self.is_apex(q2) {
            return cap;
        }
        angle_between(q1, q2).min(cap)
    }

    pub fn distance(&self, q1: &[f64], q2: &[f64]) -> Result<f64> {
        check_dims(q1, q2)?;
        Ok(self.distance_unchecked(q1, q2))
    }

    pub(crate) fn distance_unchecked(&self, q1: &[f64], q2: &[f64]) -> f64 {
        self.distance_sq_unchecked(q1, q2).sqrt()
    }

    /// Squared distance in the cancellation-free form
    /// `(r1 − r2)² + 4 r1 r2 sin²(λθ/2)`.
    pub(crate) fn distance_sq_unchecked(&self, q1: &[f64], q2: &[f64]) -> f64 {
        let r1 = norm(q1);
        let r2 = norm(q2);
        let theta = self.angle_unchecked(q1, q2);
        let h = (0.5 * self.lambda * theta).sin();
        (r1 - r2) * (r1 - r2) + 4.0 * r1 * r2 * h * h
    }

    /// The cone metric `g^λ_q(u, v)`: the component of each tangent vector
    /// orthogonal to `q` is scaled by `λ`. At the apex the radial direction is
    /// undefined and the Euclidean product is returned.
    pub fn inner(&self, q: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        check_dims(q, u)?;
        check_dims(q, v)?;
        let r = norm(q);
        if r < self.zero_eps {
            return Ok(dot(u, v));
        }
        let ur = dot(u, q) / r;
        let vr = dot(v, q) / r;
        let l2 = self.lambda * self.lambda;
        Ok(ur * vr + l2 * (dot(u, v) - ur * vr))
    }

    /// Whether the geodesic from `q1` to `q2` passes through the apex.
    ///
    /// The tie `λθ = π` resolves to the apex route; both routes have the same
    /// length there.
    pub fn geodesic_through_apex(&self, q1: &[f64], q2: &[f64]) -> Result<bool> {
        check_dims(q1, q2)?;
        Ok(self.through_apex_unchecked(q1, q2))
    }

    fn through_apex_unchecked(&self, q1: &[f64], q2: &[f64]) -> bool {
        self.is_apex(q1)
            || self.is_apex(q2)
            || self.lambda * angle_between(q1, q2) >= PI
    }

    /// Point at time `t ∈ [0, 1]` on the constant-speed geodesic from `q1` to `q2`.
    pub fn geodesic(&self, q1: &[f64], q2: &[f64], t: f64) -> Result<Vec<f64>> {
        check_dims(q1, q2)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("geodesic time must lie in [0, 1], got {t}")));
        }
        Ok(self.geodesic_unchecked(q1, q2, t))
    }

    pub(crate) fn geodesic_unchecked(&self, q1: &[f64], q2: &[f64], t: f64) -> Vec<f64> {
        if t <= 0.0 {
            return q1.to_vec();
        }
        if t >= 1.0 {
            return q2.to_vec();
        }
        let r1 = norm(q1);
        let r2 = norm(q2);
        if self.through_apex_unchecked(q1, q2) {
            // Radial shrink to the apex, then radial growth, at constant speed.
            let total = r1 + r2;
            if total == 0.0 {
                return vec![0.0; q1.len()];
            }
            let t0 = r1 / total;
            return if t <= t0 {
                q1.iter().map(|x| x * (1.0 - t / t0)).collect()
            } else {
                q2.iter().map(|x| x * ((t - t0) / (1.0 - t0))).collect()
            };
        }

        // Orthonormal frame (e1, e2) of the plane through q1, q2.
        let e1: Vec<f64> = q1.iter().map(|x| x / r1).collect();
        let along = dot(q2, &e1);
        let mut e2: Vec<f64> = q2.iter().zip(&e1).map(|(y, e)| y - along * e).collect();
        let perp = norm(&e2);
        let theta = angle_between(q1, q2);
        if perp > 0.0 {
            e2.iter_mut().for_each(|x| *x /= perp);
        } else {
            // Parallel inputs: the path is radial and e2 is never used.
            e2.iter_mut().for_each(|x| *x = 0.0);
        }

        // Unfold, interpolate, fold back.
        let phi = self.lambda * theta;
        let z0 = (1.0 - t) * r1 + t * r2 * phi.cos();
        let z1 = t * r2 * phi.sin();
        let rho = z0.hypot(z1);
        let alpha = z1.atan2(z0) / self.lambda;
        let (s, c) = alpha.sin_cos();
        e1.iter().zip(&e2).map(|(a, b)| rho * (c * a + s * b)).collect()
    }
}

/// `min(∠(q1, q2), π/λ)`; `π/λ` when either point is the apex.
pub fn cone_angle(q1: &[f64], q2: &[f64], lambda: f64) -> Result<f64> {
    Cone::new(lambda)?.angle(q1, q2)
}

/// Distance of the completed cone `(R^d_λ, d_λ)`.
pub fn cone_distance(q1: &[f64], q2: &[f64], lambda: f64) -> Result<f64> {
    Cone::new(lambda)?.distance(q1, q2)
}

/// Point at time `t` on the geodesic from `q1` to `q2` in `(R^d_λ, d_λ)`.
pub fn cone_geodesic(q1: &[f64], q2: &[f64], lambda: f64, t: f64) -> Result<Vec<f64>> {
    Cone::new(lambda)?.geodesic(q1, q2, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn angle_examples() {
        assert!(cone_angle(&[1.0, 0.0], &[2.0, 0.0], 1.0).unwrap().abs() < EPS);
        assert!((cone_angle(&[1.0, 0.0], &[0.0, 0.0], 0.5).unwrap() - 2.0 * PI).abs() < EPS);
        assert!((cone_angle(&[1.0, 0.0], &[-1.0, 0.0], 2.0).unwrap() - PI / 2.0).abs() < EPS);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(cone_distance(&[3.0, 4.0], &[3.0, 4.0], 0.3).unwrap(), 0.0);
        assert!((cone_distance(&[1.0, 0.0], &[0.0, 1.0], 1.0).unwrap() - 2f64.sqrt()).abs() < EPS);
        let expect = (2.0 - 2f64.sqrt()).sqrt();
        assert!((cone_distance(&[1.0, 0.0], &[0.0, 1.0], 0.5).unwrap() - expect).abs() < EPS);
        assert!((expect - 0.765367).abs() < 1e-6);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            cone_distance(&[1.0, 0.0], &[1.0, 0.0, 0.0], 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(cone_angle(&[1.0, 0.0], &[1.0], 1.0).is_err());
        assert!(cone_geodesic(&[1.0, 0.0], &[1.0], 1.0, 0.5).is_err());
    }

    #[test]
    fn invalid_lambda() {
        assert!(cone_distance(&[1.0, 0.0], &[0.0, 1.0], 0.0).is_err());
        assert!(cone_distance(&[1.0, 0.0], &[0.0, 1.0], -1.0).is_err());
    }

    #[test]
    fn cone_point_validation() {
        assert!(ConePoint::new(vec![1.0]).is_err());
        assert!(ConePoint::new(vec![1.0, f64::INFINITY]).is_err());
        assert_eq!(ConePoint::apex(3).as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn geodesic_endpoints_exact() {
        let q1 = [0.3, -1.2, 2.0];
        let q2 = [-0.7, 0.4, 1.1];
        for lambda in [0.25, 0.5, 1.0, 2.0] {
            assert_eq!(cone_geodesic(&q1, &q2, lambda, 0.0).unwrap(), q1.to_vec());
            assert_eq!(cone_geodesic(&q1, &q2, lambda, 1.0).unwrap(), q2.to_vec());
        }
    }

    #[test]
    fn geodesic_euclidean_midpoint() {
        let m = cone_geodesic(&[1.0, 0.0], &[0.0, 1.0], 1.0, 0.5).unwrap();
        assert!((m[0] - 0.5).abs() < EPS && (m[1] - 0.5).abs() < EPS);
    }

    #[test]
    fn geodesic_apex_branch() {
        // λθ = 2π ≥ π: radial through the apex, reached at t = 1/(1+2).
        let q1 = [1.0, 0.0];
        let q2 = [-2.0, 0.0];
        let m = cone_geodesic(&q1, &q2, 2.0, 1.0 / 3.0).unwrap();
        assert!(norm(&m) < EPS);
        let p = cone_geodesic(&q1, &q2, 2.0, 2.0 / 3.0).unwrap();
        assert!((p[0] + 1.0).abs() < EPS && p[1].abs() < EPS);
        assert!(Cone::new(2.0).unwrap().geodesic_through_apex(&q1, &q2).unwrap());
        // From the apex, linear growth.
        let g = cone_geodesic(&[0.0, 0.0], &[2.0, 2.0], 0.7, 0.25).unwrap();
        assert!((g[0] - 0.5).abs() < EPS && (g[1] - 0.5).abs() < EPS);
    }

    #[test]
    fn geodesic_tie_uses_apex() {
        // θ = π/2, λ = 2: λθ = π exactly.
        let cone = Cone::new(2.0).unwrap();
        assert!(cone.geodesic_through_apex(&[1.0, 0.0], &[0.0, 1.0]).unwrap());
    }

    #[test]
    fn geodesic_length_converges_to_distance() {
        let q1 = [1.0, 0.2, -0.4];
        let q2 = [-0.3, 0.9, 0.5];
        for lambda in [0.3, 0.5, 1.0, 1.5] {
            let d = cone_distance(&q1, &q2, lambda).unwrap();
            let mut prev_err = f64::INFINITY;
            for n in [4usize, 16, 64] {
                let pts: Vec<Vec<f64>> = (0..=n)
                    .map(|i| cone_geodesic(&q1, &q2, lambda, i as f64 / n as f64).unwrap())
                    .collect();
                let len: f64 = pts
                    .windows(2)
                    .map(|w| cone_distance(&w[0], &w[1], lambda).unwrap())
                    .sum();
                let err = (len - d).abs();
                assert!(err <= prev_err + 1e-12);
                prev_err = err;
            }
            assert!(prev_err < 1e-10, "lambda {lambda}: {prev_err}");
        }
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, 3)
    }

    proptest! {
        #[test]
        fn symmetric(q1 in vec3(), q2 in vec3(), lambda in 0.1f64..3.0) {
            let d12 = cone_distance(&q1, &q2, lambda).unwrap();
            let d21 = cone_distance(&q2, &q1, lambda).unwrap();
            prop_assert!((d12 - d21).abs() <= 1e-12 * (1.0 + d12));
        }

        #[test]
        fn triangle(q1 in vec3(), q2 in vec3(), q3 in vec3(), lambda in 0.1f64..3.0) {
            let d = |a: &[f64], b: &[f64]| cone_distance(a, b, lambda).unwrap();
            prop_assert!(d(&q1, &q3) <= d(&q1, &q2) + d(&q2, &q3) + 1e-12);
        }

        #[test]
        fn scale_equivariant(q1 in vec3(), q2 in vec3(), lambda in 0.1f64..3.0, s in 0.01f64..10.0) {
            let d = cone_distance(&q1, &q2, lambda).unwrap();
            let a: Vec<f64> = q1.iter().map(|x| x * s).collect();
            let b: Vec<f64> = q2.iter().map(|x| x * s).collect();
            let ds = cone_distance(&a, &b, lambda).unwrap();
            prop_assert!((ds - s * d).abs() <= 1e-10 * (1.0 + s * d));
        }

        #[test]
        fn rotation_invariant(q1 in vec3(), q2 in vec3(), lambda in 0.1f64..3.0,
                              ax in 0.0f64..6.3, ay in 0.0f64..6.3) {
            // Orthogonal matrix as a product of two plane rotations.
            let rot = |v: &[f64]| {
                let (s, c) = ax.sin_cos();
                let w = [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]];
                let (s, c) = ay.sin_cos();
                vec![w[0], c * w[1] - s * w[2], s * w[1] + c * w[2]]
            };
            let d = cone_distance(&q1, &q2, lambda).unwrap();
            let dr = cone_distance(&rot(&q1), &rot(&q2), lambda).unwrap();
            prop_assert!((d - dr).abs() <= 1e-10 * (1.0 + d));
        }

        #[test]
        fn lambda_one_is_euclidean(q1 in vec3(), q2 in vec3()) {
            let d = cone_distance(&q1, &q2, 1.0).unwrap();
            let e = crate::linalg::dist(&q1, &q2);
            prop_assert!((d - e).abs() <= 1e-12 * (1.0 + e));
        }

        #[test]
        fn apex_distance_is_norm(q in vec3(), lambda in 0.1f64..3.0) {
            let d = cone_distance(&q, &[0.0, 0.0, 0.0], lambda).unwrap();
            prop_assert!((d - norm(&q)).abs() <= 1e-12 * (1.0 + d));
        }

        #[test]
        fn geodesic_constant_speed(q1 in vec3(), q2 in vec3(), lambda in 0.1f64..3.0,
                                   t in 0.0f64..1.0, u in 0.0f64..1.0) {
            let d = cone_distance(&q1, &q2, lambda).unwrap();
            let a = cone_geodesic(&q1, &q2, lambda, t).unwrap();
            let b = cone_geodesic(&q1, &q2, lambda, u).unwrap();
            let dab = cone_distance(&a, &b, lambda).unwrap();
            prop_assert!((dab - (t - u).abs() * d).abs() <= 1e-9 * (1.0 + d));
        }

        #[test]
        fn geodesic_time_reversal(q1 in vec3(), q2 in vec3(), lambda in 0.1f64..3.0, t in 0.0f64..1.0) {
            let a = cone_geodesic(&q1, &q2, lambda, t).unwrap();
            let b = cone_geodesic(&q2, &q1, lambda, 1.0 - t).unwrap();
            prop_assert!(crate::linalg::dist(&a, &b) <= 1e-10 * (1.0 + norm(&a)));
        }
    }
}
