//! Excluded area and contact-point loci built on [`closest_approach`].
//!
//! The excluded area of E₂ about E₁ at fixed orientations is
//! `½∮ d²(θ) dθ`, with `d(θ)` the contact distance along the direction at
//! polar angle θ.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contact::{closest_approach, contact_point};
use crate::error::{Error, Result};
use crate::types::{EllipseShape, PairConfiguration, UnitVec2, Vec2};

pub const MIN_PANELS: usize = 16;
const ADAPTIVE_MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureScheme {
    FixedTrapezoid,
    GaussLegendrePanels,
    AdaptiveSimpson,
}

impl QuadratureScheme {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trapezoid" | "fixed-trapezoid" => Some(QuadratureScheme::FixedTrapezoid),
            "gauss" | "gauss-legendre" | "gauss-legendre-panels" => Some(QuadratureScheme::GaussLegendrePanels),
            "simpson" | "adaptive" | "adaptive-simpson" => Some(QuadratureScheme::AdaptiveSimpson),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: QuadratureScheme,
    /// Number of panels; for adaptive Simpson, the initial partition.
    pub panels: usize,
    /// Absolute error target of the adaptive scheme.
    pub abs_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            scheme: QuadratureScheme::FixedTrapezoid,
            panels: 2048,
            abs_tol: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn with_panels(scheme: QuadratureScheme, panels: usize) -> Self {
        QuadratureSpec {
            scheme,
            panels,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.panels < MIN_PANELS {
            return Err(Error::InvalidConfig(format!(
                "quadrature needs at least {MIN_PANELS} panels, got {}",
                self.panels
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidConfig("abs_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Sum in a fixed binary tree, so the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

fn half_d_sq(cfg: &PairConfiguration, theta: f64) -> Result<f64> {
    let c = PairConfiguration {
        dhat: UnitVec2::from_angle(theta),
        ..*cfg
    };
    let d = closest_approach(&c)?.d;
    Ok(0.5 * d * d)
}

fn eval_all(cfg: &PairConfiguration, thetas: &[f64]) -> Result<Vec<f64>> {
    thetas.par_iter().map(|&t| half_d_sq(cfg, t)).collect()
}

// 5-point Gauss–Legendre on [−1, 1].
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Excluded area of E₂ (orientation `k2`) about E₁ (orientation `k1`).
pub fn excluded_area(
    shape1: EllipseShape,
    shape2: EllipseShape,
    k1: UnitVec2,
    k2: UnitVec2,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    let cfg = PairConfiguration::new(shape1, shape2, k1, k2, UnitVec2::from_angle(0.0));
    let n = spec.panels;
    let h = TAU / n as f64;
    match spec.scheme {
        QuadratureScheme::FixedTrapezoid => {
            // periodic integrand: the trapezoid rule is the plain sum
            let thetas: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
            Ok(h * pairwise_sum(&eval_all(&cfg, &thetas)?))
        }
        QuadratureScheme::GaussLegendrePanels => {
            let mut thetas = Vec::with_capacity(5 * n);
            for i in 0..n {
                let mid = (i as f64 + 0.5) * h;
                thetas.extend(GL_NODES.iter().map(|x| mid + 0.5 * h * x));
            }
            let vals = eval_all(&cfg, &thetas)?;
            let weighted: Vec<f64> = vals.iter().enumerate().map(|(j, v)| GL_WEIGHTS[j % 5] * v).collect();
            Ok(0.5 * h * pairwise_sum(&weighted))
        }
        QuadratureScheme::AdaptiveSimpson => {
            let parts: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                    let m = 0.5 * (a + b);
                    let (fa, fm, fb) = (half_d_sq(&cfg, a)?, half_d_sq(&cfg, m)?, half_d_sq(&cfg, b)?);
                    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
                    simpson(&cfg, a, b, fa, fm, fb, whole, spec.abs_tol / n as f64, 0)
                        .map_err(|_| Error::AdaptiveLimitReached { tol: spec.abs_tol })
                })
                .collect::<Result<_>>()?;
            Ok(pairwise_sum(&parts))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    cfg: &PairConfiguration,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (half_d_sq(cfg, lm)?, half_d_sq(cfg, rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol {
        return Ok(left + right + err / 15.0);
    }
    if depth >= ADAPTIVE_MAX_DEPTH {
        return Err(Error::AdaptiveLimitReached { tol });
    }
    Ok(simpson(cfg, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + simpson(cfg, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}

/// Excluded area of two shapes with E₁ along x and E₂ at each of `angles_deg`.
pub fn excluded_area_sweep(
    shape1: EllipseShape,
    shape2: EllipseShape,
    angles_deg: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<(f64, f64)>> {
    angles_deg
        .iter()
        .map(|&t| {
            let k2 = UnitVec2::from_degrees(t);
            excluded_area(shape1, shape2, UnitVec2::from_angle(0.0), k2, spec).map(|a| (t, a))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocusSample {
    /// Sweep angle in radians.
    pub angle: f64,
    pub point: Vec2,
}

/// An ordered sequence of points; `closed` when the last joins the first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocusCurve {
    pub samples: Vec<LocusSample>,
    pub closed: bool,
}

impl LocusCurve {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.samples.iter().map(|s| s.point)
    }

    fn segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.samples.len();
        let m = if self.closed { n } else { n.saturating_sub(1) };
        (0..m).map(move |i| (self.samples[i].point, self.samples[(i + 1) % n].point))
    }

    /// Signed area by the shoelace formula (positive when counterclockwise).
    pub fn shoelace_area(&self) -> f64 {
        let terms: Vec<f64> = self.segments().map(|(p, q)| p.cross(q)).collect();
        0.5 * pairwise_sum(&terms)
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(p, q)| (q - p).norm()).sum()
    }

    pub fn max_gap(&self) -> f64 {
        self.segments().map(|(p, q)| (q - p).norm()).fold(0.0, f64::max)
    }

    /// Consecutive points no further apart than ten times the mean spacing.
    pub fn is_continuous(&self) -> bool {
        let n = self.segments().count();
        n == 0 || self.max_gap() <= 10.0 * self.length() / n as f64
    }
}

fn sweep_angles(n: usize) -> Result<Vec<f64>> {
    if n < MIN_PANELS {
        return Err(Error::InvalidConfig(format!(
            "a curve needs at least {MIN_PANELS} samples, got {n}"
        )));
    }
    Ok((0..n).map(|i| TAU * i as f64 / n as f64).collect())
}

/// Boundary of the excluded region: the center positions `d(θ) d̂(θ)` of E₂
/// in contact with E₁.
pub fn excluded_boundary(
    shape1: EllipseShape,
    shape2: EllipseShape,
    k1: UnitVec2,
    k2: UnitVec2,
    n: usize,
) -> Result<LocusCurve> {
    let thetas = sweep_angles(n)?;
    let samples = thetas
        .par_iter()
        .map(|&angle| {
            let dhat = UnitVec2::from_angle(angle);
            let sol = closest_approach(&PairConfiguration::new(shape1, shape2, k1, k2, dhat))?;
            Ok(LocusSample {
                angle,
                point: dhat.vec() * sol.d,
            })
        })
        .collect::<Result<_>>()?;
    Ok(LocusCurve { samples, closed: true })
}

/// Contact point, relative to the center of E₁, as E₁ turns through a full
/// revolution while E₂ and the center line stay fixed.
pub fn contact_locus(
    shape1: EllipseShape,
    shape2: EllipseShape,
    k2: UnitVec2,
    dhat: UnitVec2,
    n: usize,
) -> Result<LocusCurve> {
    let thetas = sweep_angles(n)?;
    let samples = thetas
        .par_iter()
        .map(|&angle| {
            let k1 = UnitVec2::from_angle(angle);
            let (point, _) = contact_point(&PairConfiguration::new(shape1, shape2, k1, k2, dhat))?;
            Ok(LocusSample { angle, point })
        })
        .collect::<Result<_>>()?;
    Ok(LocusCurve { samples, closed: true })
}

/// π(r₁+r₂)², the excluded area of two circles.
pub fn circle_excluded_area(r1: f64, r2: f64) -> f64 {
    PI * (r1 + r2) * (r1 + r2)
}
