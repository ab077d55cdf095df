//! Planar value types shared by every other module: vectors, unit
//! directions, ellipse shapes, symmetric 2×2 forms and the validated input
//! of a single pair query.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on |v|² − 1 that a [`UnitVec2`] is guaranteed to satisfy.
pub const UNIT_TOL: f64 = 1e-12;

/// A plain 2D vector (a position, a displacement or an unnormalized direction).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Checked constructor for values arriving from outside the library.
    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Vec2 { x, y })
        } else {
            Err(Error::NonFinite("vector component"))
        }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise quarter turn.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn rotate(self, cos: f64, sin: f64) -> Vec2 {
        Vec2::new(cos * self.x - sin * self.y, sin * self.x + cos * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2::new(x, y)
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

/// A direction. Construction renormalizes its input, so |v| = 1 to within
/// [`UNIT_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec2(Vec2);

impl UnitVec2 {
    pub const X: UnitVec2 = UnitVec2(Vec2 { x: 1.0, y: 0.0 });
    pub const Y: UnitVec2 = UnitVec2(Vec2 { x: 0.0, y: 1.0 });

    pub fn new(v: Vec2) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::NonFinite("direction"));
        }
        let n = v.norm();
        if n == 0.0 || !n.is_normal() {
            return Err(Error::ZeroVector);
        }
        Ok(UnitVec2(v * (1.0 / n)))
    }

    /// Direction at `radians` from the x axis.
    pub fn from_angle(radians: f64) -> Self {
        let (s, c) = radians.sin_cos();
        UnitVec2(Vec2::new(c, s))
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Self::from_angle(degrees.to_radians())
    }

    /// Wraps a vector the caller knows is already unit length (rotations of
    /// unit vectors, products of orthonormal frames). Not renormalized.
    #[inline]
    pub(crate) fn new_unchecked(v: Vec2) -> Self {
        UnitVec2(v)
    }

    /// Renormalizes to undo rounding drift accumulated by repeated rotations.
    pub fn renormalized(self) -> Self {
        UnitVec2(self.0 * (1.0 / self.0.norm()))
    }

    #[inline]
    pub fn vec(self) -> Vec2 {
        self.0
    }

    #[inline]
    pub fn x(self) -> f64 {
        self.0.x
    }

    #[inline]
    pub fn y(self) -> f64 {
        self.0.y
    }

    #[inline]
    pub fn dot(self, o: UnitVec2) -> f64 {
        self.0.dot(o.0)
    }

    #[inline]
    pub fn perp(self) -> UnitVec2 {
        UnitVec2(self.0.perp())
    }

    /// Rotation by `radians` counter-clockwise.
    pub fn rotated(self, radians: f64) -> UnitVec2 {
        let (s, c) = radians.sin_cos();
        UnitVec2(self.0.rotate(c, s))
    }

    pub fn angle(self) -> f64 {
        self.0.y.atan2(self.0.x)
    }
}

impl Neg for UnitVec2 {
    type Output = UnitVec2;
    fn neg(self) -> UnitVec2 {
        UnitVec2(-self.0)
    }
}

impl From<UnitVec2> for Vec2 {
    fn from(u: UnitVec2) -> Vec2 {
        u.0
    }
}

/// Semi-axis lengths of an ellipse, `a >= b > 0`. A circle (`a == b`) is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawShape", into = "RawShape")]
pub struct EllipseShape {
    a: f64,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct RawShape {
    a: f64,
    b: f64,
}

impl TryFrom<RawShape> for EllipseShape {
    type Error = Error;
    fn try_from(r: RawShape) -> Result<Self> {
        EllipseShape::new(r.a, r.b)
    }
}

impl From<EllipseShape> for RawShape {
    fn from(s: EllipseShape) -> Self {
        RawShape { a: s.a, b: s.b }
    }
}

impl EllipseShape {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite("semi-axis"));
        }
        if !(b > 0.0 && a >= b) {
            return Err(Error::DegenerateShape { a, b });
        }
        Ok(EllipseShape { a, b })
    }

    pub fn circle(r: f64) -> Result<Self> {
        Self::new(r, r)
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// e² = 1 − b²/a².
    #[inline]
    pub fn eccentricity_sq(&self) -> f64 {
        let r = self.b / self.a;
        1.0 - r * r
    }

    pub fn eccentricity(&self) -> f64 {
        self.eccentricity_sq().sqrt()
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.a * self.b
    }

    pub fn is_circle(&self) -> bool {
        self.a == self.b
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.a * s, self.b * s)
    }

    /// Boundary point at parameter `t` for an ellipse with major axis `k`.
    #[inline]
    pub fn boundary_point(&self, k: UnitVec2, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        k.vec() * (self.a * c) + k.perp().vec() * (self.b * s)
    }
}

/// Symmetric 2×2 matrix stored as its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat2 {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl SymMat2 {
    pub const IDENTITY: SymMat2 = SymMat2 {
        m11: 1.0,
        m12: 0.0,
        m22: 1.0,
    };

    pub const fn new(m11: f64, m12: f64, m22: f64) -> Self {
        SymMat2 { m11, m12, m22 }
    }

    /// s·I + t·kkᵀ.
    pub fn identity_plus_dyad(s: f64, t: f64, k: Vec2) -> Self {
        SymMat2::new(s + t * k.x * k.x, t * k.x * k.y, s + t * k.y * k.y)
    }

    #[inline]
    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.m11 * v.x + self.m12 * v.y, self.m12 * v.x + self.m22 * v.y)
    }

    /// vᵀ M v.
    #[inline]
    pub fn quad_form(&self, v: Vec2) -> f64 {
        self.m11 * v.x * v.x + 2.0 * self.m12 * v.x * v.y + self.m22 * v.y * v.y
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m12
    }

    /// M in the orthonormal basis (e1, e1⊥).
    pub fn in_basis(&self, e1: UnitVec2) -> SymMat2 {
        let u = e1.vec();
        let v = e1.perp().vec();
        SymMat2::new(self.quad_form(u), u.dot(self.apply(v)), self.quad_form(v))
    }
}

/// Quadratic form of an ellipse centered at the origin: boundary points `r`
/// satisfy `r·M r = 1`, with M = (1/b²)(I − e² k kᵀ).
pub fn ellipse_matrix(shape: EllipseShape, k: UnitVec2) -> SymMat2 {
    let inv_b2 = 1.0 / (shape.b() * shape.b());
    SymMat2::identity_plus_dyad(inv_b2, -inv_b2 * shape.eccentricity_sq(), k.vec())
}

/// Validated input of a single contact query: two shapes, their major-axis
/// directions and the direction of the line from center 1 to center 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairConfiguration {
    pub shape1: EllipseShape,
    pub shape2: EllipseShape,
    pub k1: UnitVec2,
    pub k2: UnitVec2,
    pub dhat: UnitVec2,
}

impl PairConfiguration {
    pub fn new(shape1: EllipseShape, shape2: EllipseShape, k1: UnitVec2, k2: UnitVec2, dhat: UnitVec2) -> Self {
        PairConfiguration {
            shape1,
            shape2,
            k1,
            k2,
            dhat,
        }
    }

    /// Configuration from semi-axes and angles in degrees (the CLI convention).
    pub fn from_degrees(
        (a1, b1): (f64, f64),
        (a2, b2): (f64, f64),
        theta1: f64,
        theta2: f64,
        theta_d: f64,
    ) -> Result<Self> {
        for v in [theta1, theta2, theta_d] {
            if !v.is_finite() {
                return Err(Error::NonFinite("angle"));
            }
        }
        Ok(PairConfiguration::new(
            EllipseShape::new(a1, b1)?,
            EllipseShape::new(a2, b2)?,
            UnitVec2::from_degrees(theta1),
            UnitVec2::from_degrees(theta2),
            UnitVec2::from_degrees(theta_d),
        ))
    }

    /// The same pair with the roles of the two ellipses exchanged.
    pub fn swapped(&self) -> Self {
        PairConfiguration::new(self.shape2, self.shape1, self.k2, self.k1, self.dhat)
    }
}

/// Validates raw input into a [`PairConfiguration`], renormalizing the three
/// direction vectors.
pub fn make_pair_configuration(
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
    k1: Vec2,
    k2: Vec2,
    dhat: Vec2,
) -> Result<PairConfiguration> {
    Ok(PairConfiguration::new(
        EllipseShape::new(a1, b1)?,
        EllipseShape::new(a2, b2)?,
        UnitVec2::new(k1)?,
        UnitVec2::new(k2)?,
        UnitVec2::new(dhat)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// R M Rᵀ by explicit 2×2 products.
    fn rotate_matrix(m: SymMat2, theta: f64) -> SymMat2 {
        let (s, c) = theta.sin_cos();
        let r = [[c, -s], [s, c]];
        let full = [[m.m11, m.m12], [m.m12, m.m22]];
        let mut rm = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    rm[i][j] += r[i][k] * full[k][j];
                }
            }
        }
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[i][j] += rm[i][k] * r[j][k];
                }
            }
        }
        SymMat2::new(out[0][0], out[0][1], out[1][1])
    }

    #[test]
    fn reference_shapes_are_valid() {
        let cfg = make_pair_configuration(
            2.0,
            1.0,
            2.0,
            1.0,
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 0.0),
        )
        .unwrap();
        let e = 3f64.sqrt() / 2.0;
        assert!(close(cfg.shape1.eccentricity(), e, 1e-15));
        assert!(close(cfg.shape2.eccentricity(), e, 1e-15));
    }

    #[test]
    fn directions_are_renormalized() {
        let cfg = make_pair_configuration(
            1.0,
            1.0,
            1.0,
            1.0,
            Vec2::new(0.0, 3.0),
            Vec2::new(5.0, 0.0),
            Vec2::new(1.0, 1.0),
        )
        .unwrap();
        assert_eq!(cfg.k1.vec(), Vec2::new(0.0, 1.0));
        assert_eq!(cfg.k2.vec(), Vec2::new(1.0, 0.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(cfg.dhat.x(), h, 1e-15) && close(cfg.dhat.y(), h, 1e-15));
    }

    #[test]
    fn rejects_bad_input() {
        let x = Vec2::new(1.0, 0.0);
        assert!(matches!(
            make_pair_configuration(1.0, 2.0, 1.0, 1.0, x, x, x),
            Err(Error::DegenerateShape { .. })
        ));
        assert!(matches!(
            make_pair_configuration(1.0, 0.0, 1.0, 1.0, x, x, x),
            Err(Error::DegenerateShape { .. })
        ));
        assert!(matches!(
            make_pair_configuration(1.0, 1.0, 1.0, 1.0, Vec2::ZERO, x, x),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            make_pair_configuration(f64::NAN, 1.0, 1.0, 1.0, x, x, x),
            Err(Error::NonFinite(_))
        ));
        assert!(Vec2::try_new(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn circle_matrix_is_isotropic() {
        let m = ellipse_matrix(EllipseShape::circle(2.0).unwrap(), UnitVec2::from_angle(0.7));
        assert!(close(m.m11, 0.25, 1e-16));
        assert!(close(m.m22, 0.25, 1e-16));
        assert!(close(m.m12, 0.0, 1e-16));
    }

    #[test]
    fn axis_aligned_matrix() {
        let m = ellipse_matrix(EllipseShape::new(2.0, 1.0).unwrap(), UnitVec2::X);
        assert_eq!(m, SymMat2::new(0.25, 0.0, 1.0));
    }

    #[test]
    fn rotated_matrix_matches_explicit_rotation() {
        let shape = EllipseShape::new(2.0, 1.0).unwrap();
        let m = ellipse_matrix(shape, UnitVec2::from_degrees(45.0));
        let oracle = rotate_matrix(SymMat2::new(0.25, 0.0, 1.0), std::f64::consts::FRAC_PI_4);
        // frozen from the rotation oracle above
        assert!(close(oracle.m11, 0.625, 1e-15));
        assert!(close(oracle.m22, 0.625, 1e-15));
        assert!(close(oracle.m12, -0.375, 1e-15));
        assert!(close(m.m11, 0.625, 1e-15));
        assert!(close(m.m22, 0.625, 1e-15));
        assert!(close(m.m12, -0.375, 1e-15));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tip_lies_on_boundary(b in 0.01f64..10.0, ratio in 1.0f64..30.0, th in -7.0f64..7.0) {
                let shape = EllipseShape::new(b * ratio, b).unwrap();
                let k = UnitVec2::from_angle(th);
                let m = ellipse_matrix(shape, k);
                prop_assert!((m.quad_form(k.vec() * shape.a()) - 1.0).abs() < 1e-12);
                prop_assert!((m.quad_form(k.perp().vec() * shape.b()) - 1.0).abs() < 1e-12);
            }

            #[test]
            fn rotation_equivariance(b in 0.1f64..5.0, ratio in 1.0f64..20.0, th in -4.0f64..4.0, rot in -4.0f64..4.0) {
                let shape = EllipseShape::new(b * ratio, b).unwrap();
                let scale = 1.0 / (b * b);
                let m = ellipse_matrix(shape, UnitVec2::from_angle(th));
                let expected = rotate_matrix(m, rot);
                let got = ellipse_matrix(shape, UnitVec2::from_angle(th + rot));
                prop_assert!((got.m11 - expected.m11).abs() < 1e-12 * scale);
                prop_assert!((got.m12 - expected.m12).abs() < 1e-12 * scale);
                prop_assert!((got.m22 - expected.m22).abs() < 1e-12 * scale);
            }

            #[test]
            fn unit_vectors_are_unit(x in -1e6f64..1e6, y in -1e6f64..1e6) {
                prop_assume!(x != 0.0 || y != 0.0);
                let u = UnitVec2::new(Vec2::new(x, y)).unwrap();
                prop_assert!((u.vec().norm_sq() - 1.0).abs() < UNIT_TOL);
            }
        }
    }
}
