//! Distance of closest approach and point of contact of two ellipses.
//!
//! Pipeline: scale ellipse 1 to the unit circle ([`transformed_pair`]),
//! solve the circle–ellipse tangency for `q` and the transformed distance
//! `d′`, then map back: `d = d′/|T d̂|` and `r_c = T⁻¹ n̂′`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quartic::{quartic_coefficients, solve_contact_quartic, FerrariIntermediates};
use crate::transform::{transformed_pair, TransformBranch, TransformedPair};
use crate::types::{ellipse_matrix, EllipseShape, PairConfiguration, UnitVec2, Vec2};

/// δ below which E′₂ is treated as a circle.
pub const CIRCLE_THRESHOLD: f64 = 1e-12;
/// |cos φ| below which the center line is taken along E′₂'s major axis.
pub const RIGHT_ANGLE_THRESHOLD: f64 = 1e-12;
/// Relative band around `d` reported as tangency by [`overlap`].
pub const TANGENT_TOL: f64 = 1e-9;
/// Center separations below this are reported as concentric.
pub const CONCENTRIC_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ContactBranch {
    General,
    /// δ = 0: the transformed ellipse is a circle.
    CircleLike,
    /// φ = π/2: center line along the transformed major axis.
    PhiRightAngle,
    ParallelAxes2a,
    ParallelAxes2b,
}

impl ContactBranch {
    pub fn name(&self) -> &'static str {
        match self {
            ContactBranch::General => "general",
            ContactBranch::CircleLike => "circle-like",
            ContactBranch::PhiRightAngle => "phi-right-angle",
            ContactBranch::ParallelAxes2a => "parallel-2a",
            ContactBranch::ParallelAxes2b => "parallel-2b",
        }
    }
}

/// Transformed distance and the root it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedDistance {
    pub d_prime: f64,
    pub q: f64,
    /// Present only when the quartic was actually solved.
    pub quartic: Option<FerrariIntermediates>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactSolution {
    pub d: f64,
    pub d_prime: f64,
    pub q: f64,
    pub sin_psi: f64,
    pub cos_psi: f64,
    /// Components of k′₊ on the frame A′ was evaluated in.
    pub sin_gamma: f64,
    pub cos_gamma: f64,
    /// Contact point relative to the center of ellipse 1.
    pub contact_point: Vec2,
    /// Outward normal of ellipse 1 at the contact point.
    pub contact_normal: UnitVec2,
    /// n̂′: contact normal in the transformed frame.
    pub normal_prime: UnitVec2,
    pub branch: ContactBranch,
    pub transformed: TransformedPair,
    pub quartic: Option<FerrariIntermediates>,
}

/// How far a solution is from exact tangency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangencyResiduals {
    /// |r_c·𝔸₁r_c − 1|
    pub on_ellipse1: f64,
    /// |(r_c − d)·𝔸₂(r_c − d) − 1|
    pub on_ellipse2: f64,
    /// |n̂₁ × n̂₂| of the two outward normals at the contact point.
    pub normal_cross: f64,
    /// n̂₁·n̂₂, −1 at a proper external contact.
    pub normal_dot: f64,
}

impl TangencyResiduals {
    pub fn max(&self) -> f64 {
        self.on_ellipse1.max(self.on_ellipse2).max(self.normal_cross)
    }
}

impl ContactSolution {
    /// Vector from center 1 to center 2 at contact.
    pub fn center_separation(&self, cfg: &PairConfiguration) -> Vec2 {
        cfg.dhat.vec() * self.d
    }

    pub fn residuals(&self, cfg: &PairConfiguration) -> TangencyResiduals {
        let m1 = ellipse_matrix(cfg.shape1, cfg.k1);
        let m2 = ellipse_matrix(cfg.shape2, cfg.k2);
        let r1 = self.contact_point;
        let r2 = r1 - self.center_separation(cfg);
        let n1 = m1.apply(r1);
        let n2 = m2.apply(r2);
        let (l1, l2) = (n1.norm(), n2.norm());
        TangencyResiduals {
            on_ellipse1: (m1.quad_form(r1) - 1.0).abs(),
            on_ellipse2: (m2.quad_form(r2) - 1.0).abs(),
            normal_cross: (n1.cross(n2) / (l1 * l2)).abs(),
            normal_dot: n1.dot(n2) / (l1 * l2),
        }
    }
}

/// d′ and q for the unit circle against the transformed ellipse.
pub fn transformed_distance(tp: &TransformedPair) -> Result<TransformedDistance> {
    if tp.delta < CIRCLE_THRESHOLD {
        return Ok(TransformedDistance {
            d_prime: 1.0 + tp.b2p,
            q: 1.0,
            quartic: None,
        });
    }
    if tp.cos_phi.abs() < RIGHT_ANGLE_THRESHOLD {
        return Ok(TransformedDistance {
            d_prime: 1.0 + tp.a2p,
            q: (1.0 + tp.delta).sqrt(),
            quartic: None,
        });
    }
    let coeffs = quartic_coefficients(tp.b2p, tp.delta, tp.tan2_phi());
    let (q, inter) = solve_contact_quartic(&coeffs, tp.delta)?;
    Ok(TransformedDistance {
        d_prime: d_prime_from_components(q, tp),
        q,
        quartic: Some(inter),
    })
}

/// sin²ψ = (q² − 1)/δ, clamped into [0, 1].
pub fn sin2_psi(q: f64, delta: f64) -> f64 {
    ((q - 1.0) * (q + 1.0) / delta).clamp(0.0, 1.0)
}

/// d′ from the root q, by adding the squares of the two tangency components.
pub fn d_prime_from_q(q: f64, b2p: f64, delta: f64) -> f64 {
    let s2 = sin2_psi(q, delta);
    let along_minor = 1.0 + b2p / q;
    let along_major = 1.0 + b2p * (1.0 + delta) / q;
    (s2 * along_major * along_major + (1.0 - s2) * along_minor * along_minor).sqrt()
}

/// The same d′ with ψ eliminated between the two tangency components:
/// d′ = 1/|(sin φ/X, cos φ/Y)|, X = 1 + b′₂(1+δ)/q, Y = 1 + b′₂/q. Unlike
/// [`d_prime_from_q`] it never forms q² − 1, so it keeps full relative
/// accuracy when q is close to 1.
pub fn d_prime_from_components(q: f64, tp: &TransformedPair) -> f64 {
    let x = 1.0 + tp.b2p * (1.0 + tp.delta) / q;
    let y = 1.0 + tp.b2p / q;
    1.0 / (tp.sin_phi / x).hypot(tp.cos_phi / y)
}

/// (sin ψ, cos ψ) from q alone: magnitudes from (q² − 1)/δ, signs from φ.
/// Loses accuracy as δ → 0; [`closest_approach`] uses the ratio form instead.
pub fn psi_from_q(q: f64, delta: f64, cos_phi: f64, sin_phi: f64) -> (f64, f64) {
    let s2 = sin2_psi(q, delta);
    (sgn(sin_phi) * s2.sqrt(), sgn(cos_phi) * (1.0 - s2).sqrt())
}

/// sgn with sgn(0) = +1.
#[inline]
fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// (sin ψ, cos ψ) from the two tangency components
///   d′ sin φ = sin ψ (1 + b′₂(1+δ)/q),  d′ cos φ = cos ψ (1 + b′₂/q),
/// which stays well conditioned for small δ.
fn psi_from_components(q: f64, tp: &TransformedPair) -> (f64, f64) {
    let s = tp.sin_phi / (1.0 + tp.b2p * (1.0 + tp.delta) / q);
    let c = tp.cos_phi / (1.0 + tp.b2p / q);
    let n = s.hypot(c);
    (s / n, c / n)
}

fn branch_of(tp: &TransformedPair) -> ContactBranch {
    if tp.delta < CIRCLE_THRESHOLD {
        ContactBranch::CircleLike
    } else if tp.cos_phi.abs() < RIGHT_ANGLE_THRESHOLD {
        ContactBranch::PhiRightAngle
    } else {
        match tp.branch {
            TransformBranch::General => ContactBranch::General,
            TransformBranch::ParallelAxesCase2a => ContactBranch::ParallelAxes2a,
            TransformBranch::ParallelAxesCase2b => ContactBranch::ParallelAxes2b,
        }
    }
}

/// Distance of closest approach along `cfg.dhat`, with the contact point and
/// normals.
pub fn closest_approach(cfg: &PairConfiguration) -> Result<ContactSolution> {
    let tp = transformed_pair(cfg);
    let td = transformed_distance(&tp)?;
    let branch = branch_of(&tp);

    let (sin_psi, cos_psi) = match branch {
        // n̂′ = d̂′
        ContactBranch::CircleLike | ContactBranch::PhiRightAngle => (tp.sin_phi, tp.cos_phi),
        _ => psi_from_components(td.q, &tp),
    };
    let normal_prime = if matches!(branch, ContactBranch::CircleLike | ContactBranch::PhiRightAngle) {
        tp.dhat_prime
    } else {
        UnitVec2::new(tp.kplus.vec() * cos_psi + tp.kminus.vec() * sin_psi)?
    };
    let contact_point = tp.transform.inverse_apply(normal_prime.vec());
    // 𝔸₁ r_c = T² T⁻¹ n̂′ = T n̂′
    let contact_normal = UnitVec2::new(tp.transform.apply(normal_prime.vec()))?;

    Ok(ContactSolution {
        d: td.d_prime / tp.dhat_scale,
        d_prime: td.d_prime,
        q: td.q,
        sin_psi,
        cos_psi,
        sin_gamma: tp.kplus.dot(tp.frame.1),
        cos_gamma: tp.kplus.dot(tp.frame.0),
        contact_point,
        contact_normal,
        normal_prime,
        branch,
        transformed: tp,
        quartic: td.quartic,
    })
}

/// Contact point relative to the center of ellipse 1, with the full solution.
pub fn contact_point(cfg: &PairConfiguration) -> Result<(Vec2, ContactSolution)> {
    let sol = closest_approach(cfg)?;
    Ok((sol.contact_point, sol))
}

/// r_c written directly on k₁ and k₂ through the angle ψ + γ. Only defined
/// when A′ was evaluated in the (k₁ ± k₂) frame.
pub fn contact_point_via_gamma(cfg: &PairConfiguration, sol: &ContactSolution) -> Option<Vec2> {
    let tp = &sol.transformed;
    if tp.branch != TransformBranch::General {
        return None;
    }
    let (a1, b1) = (cfg.shape1.a(), cfg.shape1.b());
    let k1 = cfg.k1.vec();
    let k2 = if tp.k2_flipped { -cfg.k2.vec() } else { cfg.k2.vec() };
    let c = cfg.k1.vec().dot(k2);
    // √2·√(1 ± c) = |k₁ ± k₂|
    let np = (k1 + k2).norm();
    let nm = (k1 - k2).norm();
    // cos(ψ+γ), sin(ψ+γ)
    let cpg = sol.cos_psi * sol.cos_gamma - sol.sin_psi * sol.sin_gamma;
    let spg = sol.sin_psi * sol.cos_gamma + sol.cos_psi * sol.sin_gamma;
    let on_k1 = (a1 + (a1 - b1) * c) * cpg / np + (a1 - (a1 - b1) * c) * spg / nm;
    let on_k2 = b1 * cpg / np - b1 * spg / nm;
    Some(k1 * on_k1 + k2 * on_k2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OverlapVerdict {
    Disjoint,
    Tangent,
    Overlapping,
}

/// Overlap test for two ellipses with fixed orientations whose centers are
/// separated by `r12` (from center 1 to center 2).
pub fn overlap(
    shape1: EllipseShape,
    shape2: EllipseShape,
    k1: UnitVec2,
    k2: UnitVec2,
    r12: Vec2,
) -> Result<OverlapVerdict> {
    let dist = r12.norm();
    if dist < CONCENTRIC_TOL {
        return Err(Error::ConcentricCenters(dist));
    }
    let dhat = UnitVec2::new(r12)?;
    let d = closest_approach(&PairConfiguration::new(shape1, shape2, k1, k2, dhat))?.d;
    Ok(classify(dist, d))
}

#[inline]
pub(crate) fn classify(dist: f64, d: f64) -> OverlapVerdict {
    if (dist - d).abs() <= TANGENT_TOL * d {
        OverlapVerdict::Tangent
    } else if dist < d {
        OverlapVerdict::Overlapping
    } else {
        OverlapVerdict::Disjoint
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{oracle_circle_ellipse_distance, oracle_distance, OracleSettings};
    use crate::transform::PARALLEL_THRESHOLD;

    fn shape(a: f64, b: f64) -> EllipseShape {
        EllipseShape::new(a, b).unwrap()
    }

    fn cfg(s1: (f64, f64), s2: (f64, f64), t1: f64, t2: f64, td: f64) -> PairConfiguration {
        PairConfiguration::from_degrees(s1, s2, t1, t2, td).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn circles_sum_radii() {
        for (td, t1, t2) in [(0.0, 0.0, 0.0), (33.0, 120.0, -7.0), (271.0, 45.0, 45.0)] {
            let sol = closest_approach(&cfg((1.5, 1.5), (0.25, 0.25), t1, t2, td)).unwrap();
            assert!(rel(sol.d, 1.75) <= 1e-12, "{}", sol.d);
            assert_eq!(sol.branch, ContactBranch::CircleLike);
            let expected = UnitVec2::from_degrees(td).vec() * 1.5;
            assert!((sol.contact_point - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn identical_parallel_tip_and_side() {
        let tip = closest_approach(&cfg((2.0, 1.0), (2.0, 1.0), 0.0, 0.0, 0.0)).unwrap();
        assert!(rel(tip.d, 4.0) <= 1e-12);
        assert!((tip.contact_point - Vec2::new(2.0, 0.0)).norm() < 1e-12);
        let side = closest_approach(&cfg((2.0, 1.0), (2.0, 1.0), 0.0, 0.0, 90.0)).unwrap();
        assert!(rel(side.d, 2.0) <= 1e-12);
        // anti-parallel is the same ellipse
        let anti = closest_approach(&cfg((2.0, 1.0), (2.0, 1.0), 0.0, 180.0, 0.0)).unwrap();
        assert!(rel(anti.d, 4.0) <= 1e-12);
    }

    #[test]
    fn dissimilar_parallel_tip_to_tip() {
        for (s1, s2) in [((3.0, 1.0), (2.0, 0.3)), ((1.0, 0.9), (5.0, 0.2))] {
            let sol = closest_approach(&cfg(s1, s2, 40.0, 40.0, 40.0)).unwrap();
            assert!(rel(sol.d, s1.0 + s2.0) <= 1e-12, "{:?}", sol.branch);
            let sol = closest_approach(&cfg(s1, s2, 40.0, 220.0, 130.0)).unwrap();
            assert!(rel(sol.d, s1.1 + s2.1) <= 1e-12, "{:?}", sol.branch);
        }
    }

    #[test]
    fn transformed_special_cases() {
        let mut tp = transformed_pair(&cfg((1.0, 1.0), (0.5, 0.5), 0.0, 0.0, 0.0));
        let td = transformed_distance(&tp).unwrap();
        assert_eq!((td.d_prime, td.q), (1.5, 1.0));

        tp.delta = 3.0;
        tp.b2p = 0.5;
        tp.a2p = 1.0;
        tp.cos_phi = 0.0;
        tp.sin_phi = 1.0;
        let td = transformed_distance(&tp).unwrap();
        assert_eq!(td.d_prime, 2.0);
        assert_eq!(td.q, 2.0);
    }

    #[test]
    fn transformed_distance_matches_circle_ellipse_oracle() {
        let s = OracleSettings::default();
        for c in [
            cfg((2.0, 1.0), (2.0, 1.0), 0.0, 30.0, 10.0),
            cfg((5.0, 0.5), (1.0, 0.8), 12.0, 100.0, 250.0),
            cfg((1.0, 1.0), (3.0, 0.2), 0.0, 60.0, 71.0),
        ] {
            let tp = transformed_pair(&c);
            let td = transformed_distance(&tp).unwrap();
            let o = oracle_circle_ellipse_distance(tp.a2p, tp.b2p, tp.kminus, tp.dhat_prime, &s).unwrap();
            assert!(rel(td.d_prime, o) < 1e-8, "{} vs {}", td.d_prime, o);
        }
    }

    #[test]
    fn sweep_at_thirty_degrees_matches_oracle() {
        let s = OracleSettings::default();
        for i in 0..360 {
            let c = cfg((2.0, 1.0), (2.0, 1.0), 0.0, 30.0, i as f64);
            let d = closest_approach(&c).unwrap().d;
            let o = oracle_distance(&c, &s).unwrap();
            assert!(rel(d, o) < 1e-8, "theta_d={i}: {d} vs {o}");
        }
    }

    #[test]
    fn tangency_residuals_and_gamma_form() {
        let c = cfg((3.0, 0.7), (1.4, 0.9), 17.0, 81.0, 203.0);
        let sol = closest_approach(&c).unwrap();
        assert_eq!(sol.branch, ContactBranch::General);
        let r = sol.residuals(&c);
        assert!(
            r.on_ellipse1 < 1e-9 && r.on_ellipse2 < 1e-9 && r.normal_cross < 1e-8,
            "{r:?}"
        );
        assert!(r.normal_dot < 0.0);
        let alt = contact_point_via_gamma(&c, &sol).unwrap();
        assert!((alt - sol.contact_point).norm() < 1e-10);
        // the q-only ψ agrees when δ is not small
        let (s, co) = psi_from_q(
            sol.q,
            sol.transformed.delta,
            sol.transformed.cos_phi,
            sol.transformed.sin_phi,
        );
        assert!((s - sol.sin_psi).abs() < 1e-8 && (co - sol.cos_psi).abs() < 1e-8);
    }

    #[test]
    fn circle_like_contact_point() {
        // similar aligned shapes: r_c = d̂ b₁/√(1 − e₁²(k₁·d̂)²)
        let c = cfg((2.0, 1.0), (4.0, 2.0), 10.0, 10.0, 50.0);
        let sol = closest_approach(&c).unwrap();
        assert_eq!(sol.branch, ContactBranch::CircleLike);
        let kd = c.k1.dot(c.dhat);
        let expected = c.dhat.vec() * (1.0 / (1.0 - 0.75 * kd * kd).sqrt());
        assert!((sol.contact_point - expected).norm() < 1e-12);
    }

    #[test]
    fn parallel_threshold_straddle() {
        let s1 = (3.0, 0.8);
        let s2 = (1.7, 0.4);
        let theta = (PARALLEL_THRESHOLD).sqrt().asin();
        for td in [10.0, 75.0, 160.0, 300.0] {
            let k1 = UnitVec2::from_degrees(25.0);
            let below = PairConfiguration::new(
                shape(s1.0, s1.1),
                shape(s2.0, s2.1),
                k1,
                k1.rotated(theta * (1.0 - 1e-6)),
                UnitVec2::from_degrees(td),
            );
            let above = PairConfiguration::new(
                shape(s1.0, s1.1),
                shape(s2.0, s2.1),
                k1,
                k1.rotated(theta * (1.0 + 1e-6)),
                UnitVec2::from_degrees(td),
            );
            let a = closest_approach(&below).unwrap();
            let b = closest_approach(&above).unwrap();
            assert!(a.transformed.is_parallel() && !b.transformed.is_parallel());
            assert!(rel(a.d, b.d) < 1e-8, "{} vs {}", a.d, b.d);
        }
    }

    #[test]
    fn overlap_verdicts() {
        let c = shape(1.0, 1.0);
        let x = UnitVec2::X;
        assert_eq!(
            overlap(c, c, x, x, Vec2::new(1.5, 0.0)).unwrap(),
            OverlapVerdict::Overlapping
        );
        assert_eq!(
            overlap(c, c, x, x, Vec2::new(0.0, 2.5)).unwrap(),
            OverlapVerdict::Disjoint
        );
        let e = shape(2.0, 1.0);
        assert_eq!(
            overlap(e, e, x, x, Vec2::new(4.0, 0.0)).unwrap(),
            OverlapVerdict::Tangent
        );
        assert_eq!(
            overlap(e, e, x, x, Vec2::new(-4.0, 0.0)).unwrap(),
            OverlapVerdict::Tangent
        );
        assert!(matches!(
            overlap(e, e, x, x, Vec2::ZERO),
            Err(Error::ConcentricCenters(_))
        ));
    }

    #[test]
    fn deterministic() {
        let c = cfg((3.0, 0.7), (1.4, 0.9), 17.0, 81.0, 203.0);
        let a = closest_approach(&c).unwrap();
        let b = closest_approach(&c).unwrap();
        assert_eq!(a.d.to_bits(), b.d.to_bits());
        assert_eq!(a.contact_point, b.contact_point);
    }
}
