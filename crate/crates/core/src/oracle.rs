//! Brute-force ground truth for the analytic kernel.
//!
//! Nothing here shares code with the closed-form path: the contact distance
//! is found by bisecting the center separation on a sampled overlap test
//! (boundary points of one ellipse tested against the other's quadratic
//! form, with golden-section refinement of every sampled local minimum), and
//! quartic roots come from a Durand–Kerner iteration. Speed is not a goal.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quartic::QuarticCoeffs;
use crate::transform::{scaling_transform, transformed_pair};
use crate::types::{ellipse_matrix, EllipseShape, PairConfiguration, SymMat2, UnitVec2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    /// Points sampled on each boundary; at least 64.
    pub boundary_samples: usize,
    /// Relative width at which the separation bisection stops.
    pub bisection_tol: f64,
    /// Golden-section iterations per refined local minimum.
    pub refine_iters: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            boundary_samples: 4096,
            bisection_tol: 1e-10,
            refine_iters: 64,
        }
    }
}

impl OracleSettings {
    pub fn validate(&self) -> Result<()> {
        if self.boundary_samples < 64 {
            return Err(Error::InvalidConfig(format!(
                "boundary_samples must be at least 64, got {}",
                self.boundary_samples
            )));
        }
        if self.bisection_tol.is_nan() || self.bisection_tol <= 0.0 || self.refine_iters == 0 {
            return Err(Error::InvalidConfig("oracle tolerances must be positive".into()));
        }
        Ok(())
    }
}

const MAX_BISECTIONS: usize = 400;
const DK_MAX_ITERS: usize = 2000;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// One ellipse's boundary, pre-sampled, tested against the other's form.
struct BoundaryProbe {
    shape: EllipseShape,
    axis: UnitVec2,
    samples: Vec<Vec2>,
    other: SymMat2,
    step: f64,
}

impl BoundaryProbe {
    fn new(shape: EllipseShape, axis: UnitVec2, other: SymMat2, n: usize) -> Self {
        let step = std::f64::consts::TAU / n as f64;
        let samples = (0..n).map(|i| shape.boundary_point(axis, i as f64 * step)).collect();
        BoundaryProbe {
            shape,
            axis,
            samples,
            other,
            step,
        }
    }

    /// Whether some boundary point, shifted by `offset`, lies strictly inside
    /// the other ellipse.
    fn penetrates(&self, offset: Vec2, buf: &mut Vec<f64>, refine_iters: usize) -> bool {
        buf.clear();
        for &p in &self.samples {
            let v = self.other.quad_form(p + offset);
            if v < 1.0 {
                return true;
            }
            buf.push(v);
        }
        let n = buf.len();
        let f = |t: f64| self.other.quad_form(self.shape.boundary_point(self.axis, t) + offset);
        for i in 0..n {
            let prev = buf[(i + n - 1) % n];
            let next = buf[(i + 1) % n];
            if buf[i] <= prev && buf[i] <= next {
                let centre = i as f64 * self.step;
                if golden_min(&f, centre - self.step, centre + self.step, refine_iters) < 1.0 {
                    return true;
                }
            }
        }
        false
    }
}

fn golden_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = f1.min(f2);
    for _ in 0..iters {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        best = best.min(f1).min(f2);
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    best
}

/// Sampled overlap test for ellipse 2 centered at `t·d̂` relative to ellipse 1.
pub struct SampledOverlap {
    forward: BoundaryProbe,
    reverse: BoundaryProbe,
    dhat: Vec2,
    refine_iters: usize,
    buf: Vec<f64>,
}

impl SampledOverlap {
    pub fn new(cfg: &PairConfiguration, s: &OracleSettings) -> Self {
        let m1 = ellipse_matrix(cfg.shape1, cfg.k1);
        let m2 = ellipse_matrix(cfg.shape2, cfg.k2);
        SampledOverlap {
            forward: BoundaryProbe::new(cfg.shape1, cfg.k1, m2, s.boundary_samples),
            reverse: BoundaryProbe::new(cfg.shape2, cfg.k2, m1, s.boundary_samples),
            dhat: cfg.dhat.vec(),
            refine_iters: s.refine_iters,
            buf: Vec::with_capacity(s.boundary_samples),
        }
    }

    /// True when the interiors intersect at center separation `t`.
    pub fn overlaps_at(&mut self, t: f64) -> bool {
        let shift = self.dhat * t;
        self.forward.penetrates(-shift, &mut self.buf, self.refine_iters)
            || self.reverse.penetrates(shift, &mut self.buf, self.refine_iters)
    }
}

/// Contact distance by bisection on the sampled overlap test.
pub fn oracle_distance(cfg: &PairConfiguration, s: &OracleSettings) -> Result<f64> {
    s.validate()?;
    let lower = cfg.shape1.b() + cfg.shape2.b();
    let upper = cfg.shape1.a() + cfg.shape2.a();
    let mut lo = 0.99 * lower;
    let mut hi = 1.01 * upper;
    let mut probe = SampledOverlap::new(cfg, s);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= s.bisection_tol * hi {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if probe.overlaps_at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        what: "oracle bisection",
        iterations: MAX_BISECTIONS,
    })
}

/// Contact distance of a unit circle and an ellipse (semi-axes `a2p ≥ b2p`,
/// major axis `axis`) along `dhat`.
pub fn oracle_circle_ellipse_distance(
    a2p: f64,
    b2p: f64,
    axis: UnitVec2,
    dhat: UnitVec2,
    s: &OracleSettings,
) -> Result<f64> {
    let cfg = PairConfiguration::new(
        EllipseShape::circle(1.0)?,
        EllipseShape::new(a2p, b2p)?,
        axis,
        axis,
        dhat,
    );
    oracle_distance(&cfg, s)
}

/// All four complex roots by Durand–Kerner, each Newton-polished and checked
/// against a residual bound.
pub fn oracle_quartic_roots(c: &QuarticCoeffs) -> Result<[Complex64; 4]> {
    if c.a == 0.0 || !c.a.is_finite() {
        return Err(Error::InvalidConfig("leading coefficient must be non-zero".into()));
    }
    let coef = c.as_array();
    let monic: Vec<f64> = coef.iter().map(|v| v / c.a).collect();
    // Fujiwara's bound on the root moduli
    let radius = 2.0
        * monic[1..]
            .iter()
            .enumerate()
            .map(|(k, v)| v.abs().powf(1.0 / (k + 1) as f64))
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
    let eval_monic = |z: Complex64| (((z + monic[1]) * z + monic[2]) * z + monic[3]) * z + monic[4];

    let seed = Complex64::new(0.4, 0.9);
    let mut roots = [Complex64::new(0.0, 0.0); 4];
    let mut w = Complex64::new(1.0, 0.0);
    for r in roots.iter_mut() {
        *r = w * radius;
        w *= seed;
    }

    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..DK_MAX_ITERS {
        let mut change = 0.0f64;
        for i in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-300, 0.0);
            }
            let step = eval_monic(roots[i]) / denom;
            roots[i] -= step;
            change = change.max(step.norm() / (1.0 + roots[i].norm()));
        }
        if change < 1e-15 {
            break;
        }
        // rounding noise: stop once the updates no longer shrink
        if change < 0.5 * best {
            best = change;
            stalled = 0;
        } else if change < 1e-6 {
            stalled += 1;
            if stalled > 8 {
                break;
            }
        }
    }

    let deriv = |z: Complex64| ((z * (4.0 * c.a) + 3.0 * c.b) * z + 2.0 * c.c) * z + c.d;
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = c.eval_complex(*r);
            let df = deriv(*r);
            if df.norm() == 0.0 {
                break;
            }
            let next = *r - f / df;
            if c.eval_complex(next).norm() < f.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }

    for r in &roots {
        let m = r.norm();
        let scale = coef
            .iter()
            .enumerate()
            .map(|(k, v)| v.abs() * m.powi(4 - k as i32))
            .fold(0.0f64, f64::max);
        let residual = c.eval_complex(*r).norm();
        if residual.is_nan() || residual > 1e-9 * scale {
            return Err(Error::NonConvergence {
                what: "Durand-Kerner",
                iterations: DK_MAX_ITERS,
            });
        }
    }
    Ok(roots)
}

/// Regimes the random configuration generator over-samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Stratum {
    /// Axes within 1e-4 rad of parallel or anti-parallel.
    NearParallel,
    /// Transformed center line within 1e-4 of the transformed major axis.
    NearPerpendicular,
    /// At least one shape with eccentricity below 1e-4.
    NearCircular,
    Uniform,
    /// Both shapes exact circles.
    Circles,
}

impl Stratum {
    pub const ALL: [Stratum; 5] = [
        Stratum::NearParallel,
        Stratum::NearPerpendicular,
        Stratum::NearCircular,
        Stratum::Uniform,
        Stratum::Circles,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Stratum::NearParallel => "near-parallel",
            Stratum::NearPerpendicular => "near-perpendicular",
            Stratum::NearCircular => "near-circular",
            Stratum::Uniform => "uniform",
            Stratum::Circles => "circles",
        }
    }

    pub fn parse(s: &str) -> Option<Stratum> {
        Stratum::ALL.into_iter().find(|st| st.name() == s)
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_shape<R: Rng>(rng: &mut R, max_aspect: f64) -> EllipseShape {
    let b = log_uniform(rng, 0.1, 3.0);
    let aspect = if max_aspect > 1.0 {
        log_uniform(rng, 1.0, max_aspect)
    } else {
        1.0
    };
    EllipseShape::new(b * aspect, b).expect("aspect >= 1")
}

fn near_circle<R: Rng>(rng: &mut R) -> EllipseShape {
    let b = log_uniform(rng, 0.1, 3.0);
    // e² ≈ 2ε, so ε < 5e-9 keeps e below 1e-4
    let eps = if rng.gen_bool(0.2) {
        0.0
    } else {
        log_uniform(rng, 1e-16, 5e-9)
    };
    EllipseShape::new(b * (1.0 + eps), b).expect("a >= b")
}

fn random_direction<R: Rng>(rng: &mut R) -> UnitVec2 {
    UnitVec2::from_angle(rng.gen_range(0.0..std::f64::consts::TAU))
}

/// A random configuration from one stratum, aspect ratios up to `max_aspect`.
pub fn random_configuration<R: Rng>(rng: &mut R, stratum: Stratum, max_aspect: f64) -> PairConfiguration {
    match stratum {
        Stratum::Uniform => PairConfiguration::new(
            random_shape(rng, max_aspect),
            random_shape(rng, max_aspect),
            random_direction(rng),
            random_direction(rng),
            random_direction(rng),
        ),
        Stratum::Circles => {
            let r1 = log_uniform(rng, 0.1, 3.0);
            let r2 = log_uniform(rng, 0.1, 3.0);
            PairConfiguration::new(
                EllipseShape::circle(r1).unwrap(),
                EllipseShape::circle(r2).unwrap(),
                random_direction(rng),
                random_direction(rng),
                random_direction(rng),
            )
        }
        Stratum::NearCircular => {
            let (s1, s2) = match rng.gen_range(0..3) {
                0 => (near_circle(rng), random_shape(rng, max_aspect)),
                1 => (random_shape(rng, max_aspect), near_circle(rng)),
                _ => (near_circle(rng), near_circle(rng)),
            };
            PairConfiguration::new(
                s1,
                s2,
                random_direction(rng),
                random_direction(rng),
                random_direction(rng),
            )
        }
        Stratum::NearParallel => {
            let k1 = random_direction(rng);
            let tilt = if rng.gen_bool(0.25) {
                0.0
            } else {
                rng.gen_range(-1e-4..1e-4)
            };
            let mut k2 = k1.rotated(tilt);
            if rng.gen_bool(0.5) {
                k2 = -k2;
            }
            PairConfiguration::new(
                random_shape(rng, max_aspect),
                random_shape(rng, max_aspect),
                k1,
                k2,
                random_direction(rng),
            )
        }
        Stratum::NearPerpendicular => {
            let mut cfg = random_configuration(rng, Stratum::Uniform, max_aspect);
            let tp = transformed_pair(&cfg);
            let eps = if rng.gen_bool(0.25) {
                0.0
            } else {
                rng.gen_range(-1e-4..1e-4)
            };
            let target = tp.kminus.vec() + tp.kplus.vec() * eps;
            let t = scaling_transform(cfg.shape1, cfg.k1);
            if let Ok(d) = UnitVec2::new(t.inverse_apply(target)) {
                cfg.dhat = if rng.gen_bool(0.5) { d } else { -d };
            }
            cfg
        }
    }
}

/// `n` configurations from a seeded stream: 20% near-parallel, 20%
/// near-perpendicular, 20% near-circular, 40% uniform.
pub fn stratified_configurations(n: usize, seed: u64, max_aspect: f64) -> Vec<(Stratum, PairConfiguration)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let stratum = match i % 5 {
                0 => Stratum::NearParallel,
                1 => Stratum::NearPerpendicular,
                2 => Stratum::NearCircular,
                _ => Stratum::Uniform,
            };
            (stratum, random_configuration(&mut rng, stratum, max_aspect))
        })
        .collect()
}
