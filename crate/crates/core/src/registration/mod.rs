//! Optimal reparametrization of one curve against another.
//!
//! Both solvers maximize the registration energy
//! `E = ∫ √(γ̇1 γ̇2) f_ab(ċ1∘γ1, ċ2∘γ2) du` over monotone paths in the unit
//! square; the quotient distance is then `2b√(ℓ1 + ℓ2 − 2E)`.
//!
//! * [`dp_register`] searches paths through the vertices of an
//!   [`AlignmentGrid`], with slopes limited by a window.
//! * [`exact_register`] finds the global optimum over all monotone
//!   piecewise-linear paths.
//!
//! Closed curves are handled by cutting both open and trying every vertex of
//! the second curve as its starting point.

mod dp;
mod exact;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dp::{dp_register, segment_energy, AlignmentGrid, DEFAULT_WINDOW};
pub use exact::exact_register;

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::params::MetricParams;
use crate::reparam::Reparametrization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dp,
    Exact,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Dp => "dp",
            Method::Exact => "exact",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(Method::Dp),
            "exact" => Ok(Method::Exact),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationResult {
    pub reparam: Reparametrization,
    /// The maximized registration energy.
    pub energy: f64,
    pub distance: f64,
    /// For closed curves: the vertex of the second curve used as its start,
    /// i.e. the registration is between `c1.cut_open()` and
    /// `c2.rotated(seed).cut_open()`.
    pub seed_index: Option<usize>,
    pub method: Method,
}

/// Solver options shared by the open and closed entry points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegistrationOptions {
    /// DP grid; defaults to [`AlignmentGrid::default_for`] per pair.
    pub grid: Option<AlignmentGrid>,
    /// DP window when `grid` is not given.
    pub window: Option<usize>,
}

impl RegistrationOptions {
    fn grid_for(&self, c1: &DiscreteCurve, c2: &DiscreteCurve) -> Result<AlignmentGrid> {
        match &self.grid {
            Some(g) => Ok(g.clone()),
            None => AlignmentGrid::default_for(c1, c2, self.window.unwrap_or(DEFAULT_WINDOW)),
        }
    }
}

/// Registers two open curves, or two closed curves including the seed search.
pub fn register(
    c1: &DiscreteCurve,
    c2: &DiscreteCurve,
    p: &MetricParams,
    method: Method,
    opts: &RegistrationOptions,
) -> Result<RegistrationResult> {
    match (c1.is_closed(), c2.is_closed()) {
        (false, false) => match method {
            Method::Dp => dp_register(c1, c2, p, &opts.grid_for(c1, c2)?),
            Method::Exact => exact_register(c1, c2, p),
        },
        (true, true) => seed_search(c1, c2, |a, b| match method {
            Method::Dp => dp_register(a, b, p, &opts.grid_for(a, b)?),
            Method::Exact => exact_register(a, b, p),
        }),
        _ => Err(Error::ClosureMismatch("cannot register an open with a closed curve".into())),
    }
}

/// DP registration of closed curves: minimum over all starting vertices of `c2`.
pub fn closed_register(
    c1: &DiscreteCurve,
    c2: &DiscreteCurve,
    p: &MetricParams,
    grid: Option<&AlignmentGrid>,
) -> Result<RegistrationResult> {
    check_closed(c1, c2)?;
    seed_search(c1, c2, |a, b| match grid {
        Some(g) => dp_register(a, b, p, g),
        None => dp_register(a, b, p, &AlignmentGrid::default_for(a, b, DEFAULT_WINDOW)?),
    })
}

/// Exact registration of closed curves: minimum over all starting vertices of `c2`.
pub fn exact_register_closed(c1: &DiscreteCurve, c2: &DiscreteCurve, p: &MetricParams) -> Result<RegistrationResult> {
    check_closed(c1, c2)?;
    seed_search(c1, c2, |a, b| exact_register(a, b, p))
}

fn check_closed(c1: &DiscreteCurve, c2: &DiscreteCurve) -> Result<()> {
    if !c1.is_closed() || !c2.is_closed() {
        return Err(Error::ClosureMismatch("seed search needs two closed curves".into()));
    }
    Ok(())
}

/// Ties resolve to the smallest seed.
fn seed_search<F>(c1: &DiscreteCurve, c2: &DiscreteCurve, solve: F) -> Result<RegistrationResult>
where
    F: Fn(&DiscreteCurve, &DiscreteCurve) -> Result<RegistrationResult> + Sync,
{
    let open1 = c1.cut_open()?;
    let results: Vec<Result<RegistrationResult>> = (0..c2.vertex_count())
        .into_par_iter()
        .map(|tau| {
            let open2 = c2.rotated(tau)?.cut_open()?;
            let mut r = solve(&open1, &open2)?;
            r.seed_index = Some(tau);
            Ok(r)
        })
        .collect();
    let mut best: Option<RegistrationResult> = None;
    for r in results {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.distance < b.distance) {
            best = Some(r);
        }
    }
    Ok(best.expect("closed curves have at least three vertices"))
}

fn check_open_pair(c1: &DiscreteCurve, c2: &DiscreteCurve) -> Result<()> {
    if c1.is_closed() || c2.is_closed() {
        return Err(Error::ClosureMismatch(
            "open-curve registration needs open curves; use the closed variant".into(),
        ));
    }
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch { expected: c1.dim(), got: c2.dim() });
    }
    Ok(())
}
