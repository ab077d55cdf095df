//! The anisotropic scaling that turns ellipse 1 into the unit circle, and
//! the transformed ellipse 2 it produces.
//!
//! [`transformed_pair`] evaluates the components of A′ = T⁻¹𝔸₂T⁻¹ in the
//! orthonormal frame `u = (k₁+k₂)/|k₁+k₂|`, `v = (k₁−k₂)/|k₁−k₂|`,
//! diagonalizes it in closed form and projects the transformed center line
//! onto the eigenvectors. When the two major axes are (nearly) parallel that
//! frame is undefined and the same quantities are evaluated in the frame
//! `(k₁, k₁⊥)` instead.

use crate::types::{EllipseShape, PairConfiguration, UnitVec2, Vec2};

/// `1 − (k₁·k₂)²` below which the parallel-axes frame is used.
pub const PARALLEL_THRESHOLD: f64 = 1e-9;

/// Spectral radius (relative to λ₊) below which A′ is treated as isotropic.
pub const ISOTROPY_THRESHOLD: f64 = 1e-14;

/// The map T: scale by 1/a₁ along k₁ and by 1/b₁ across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingTransform {
    b1: f64,
    eta: f64,
    k1: UnitVec2,
}

impl ScalingTransform {
    pub fn new(shape1: EllipseShape, k1: UnitVec2) -> Self {
        ScalingTransform {
            b1: shape1.b(),
            eta: shape1.a() / shape1.b() - 1.0,
            k1,
        }
    }

    /// η = a₁/b₁ − 1.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn k1(&self) -> UnitVec2 {
        self.k1
    }

    /// T v = (1/b₁)(v + (b₁/a₁ − 1)(k₁·v)k₁).
    #[inline]
    pub fn apply(&self, v: Vec2) -> Vec2 {
        let k = self.k1.vec();
        let shrink = 1.0 / (1.0 + self.eta) - 1.0;
        (v + k * (shrink * k.dot(v))) * (1.0 / self.b1)
    }

    /// T⁻¹ v = b₁(v + η(k₁·v)k₁).
    #[inline]
    pub fn inverse_apply(&self, v: Vec2) -> Vec2 {
        let k = self.k1.vec();
        (v + k * (self.eta * k.dot(v))) * self.b1
    }
}

pub fn scaling_transform(shape1: EllipseShape, k1: UnitVec2) -> ScalingTransform {
    ScalingTransform::new(shape1, k1)
}

/// Which frame A′ was evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum TransformBranch {
    /// Frame `((k₁+k₂)/|·|, (k₁−k₂)/|·|)`.
    General,
    /// Axes parallel, A′₁₁ ≥ A′₂₂: the minor axis of E′₂ lies along k₁.
    ParallelAxesCase2a,
    /// Axes parallel, A′₁₁ < A′₂₂: the minor axis of E′₂ lies across k₁.
    ParallelAxesCase2b,
}

/// Everything the scaling step produces for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedPair {
    /// A′ components in `frame`.
    pub a11: f64,
    pub a22: f64,
    pub a12: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Eigenvector of λ₊ (minor axis of E′₂), original coordinates.
    pub kplus: UnitVec2,
    /// Eigenvector of λ₋ (major axis of E′₂), original coordinates.
    pub kminus: UnitVec2,
    pub a2p: f64,
    pub b2p: f64,
    /// δ = a′₂²/b′₂² − 1.
    pub delta: f64,
    /// k′₊·d̂′.
    pub cos_phi: f64,
    /// k′₋·d̂′.
    pub sin_phi: f64,
    /// |T d̂|.
    pub dhat_scale: f64,
    pub dhat_prime: UnitVec2,
    /// Orthonormal frame the A′ components are expressed in.
    pub frame: (UnitVec2, UnitVec2),
    /// k₂ was negated because k₁·k₂ < 0.
    pub k2_flipped: bool,
    pub transform: ScalingTransform,
    pub branch: TransformBranch,
}

impl TransformedPair {
    /// tan²φ, computed as sin²φ/cos²φ.
    pub fn tan2_phi(&self) -> f64 {
        (self.sin_phi * self.sin_phi) / (self.cos_phi * self.cos_phi)
    }

    pub fn is_parallel(&self) -> bool {
        self.branch != TransformBranch::General
    }
}

/// Eigen-decomposition of A′ given in some orthonormal frame.
struct Spectrum {
    lambda_plus: f64,
    lambda_minus: f64,
    delta: f64,
    /// Frame components of the λ₊ eigenvector, unnormalized; `None` when A′
    /// is isotropic.
    column: Option<(f64, f64)>,
}

fn spectrum(a11: f64, a22: f64, a12: f64, det: f64) -> Spectrum {
    let h = 0.5 * (a11 - a22);
    let r = h.hypot(a12);
    let lambda_plus = 0.5 * (a11 + a22) + r;
    // λ₊λ₋ = det A′ is known exactly, which avoids cancellation in λ₋.
    let lambda_minus = det / lambda_plus;
    let delta = 2.0 * r / lambda_minus;
    // Of the two columns of adj(A′ − λ₊I), take the one without cancellation:
    // (A′₁₂, λ₊ − A′₁₁) and (λ₊ − A′₂₂, A′₁₂) are parallel.
    let column = if r <= ISOTROPY_THRESHOLD * lambda_plus {
        None
    } else if h >= 0.0 {
        Some((r + h, a12))
    } else {
        Some((a12, r - h))
    };
    Spectrum {
        lambda_plus,
        lambda_minus,
        delta,
        column,
    }
}

/// Scaling step for one configuration: A′, its spectrum, E′₂'s semi-axes,
/// δ and the angle φ of the transformed center line.
pub fn transformed_pair(cfg: &PairConfiguration) -> TransformedPair {
    let s1 = cfg.shape1;
    let s2 = cfg.shape2;
    let t = ScalingTransform::new(s1, cfg.k1);
    let eta = t.eta();
    let e1sq = s1.eccentricity_sq();
    let e2sq = s2.eccentricity_sq();
    let ratio = s1.b() / s1.a();

    let k1 = cfg.k1;
    let mut k2 = cfg.k2;
    let k2_flipped = k1.dot(k2) < 0.0;
    if k2_flipped {
        k2 = -k2;
    }
    let c = k1.dot(k2);
    let kd1 = k1.dot(cfg.dhat);
    let kd2 = k2.dot(cfg.dhat);

    let scale_root = (1.0 - e1sq * kd1 * kd1).sqrt();
    let dhat_scale = scale_root / s1.b();
    let dhat_prime = UnitVec2::new_unchecked((cfg.dhat.vec() + k1.vec() * ((ratio - 1.0) * kd1)) * (1.0 / scale_root));

    let pref = (s1.b() / s2.b()).powi(2);
    let det = ((s1.a() * s1.b()) / (s2.a() * s2.b())).powi(2);

    let sum = k1.vec() + k2.vec();
    let diff = k1.vec() - k2.vec();
    let ns = sum.norm();
    let nd = diff.norm();
    let cross = k1.vec().cross(k2.vec());

    let (a11, a22, a12, frame, du, dv, branch);
    if cross * cross >= PARALLEL_THRESHOLD {
        let g = eta * (2.0 + eta);
        // ½(1 ± c) = |k₁ ± k₂|²/4
        let half_plus = 0.25 * ns * ns;
        let half_minus = 0.25 * nd * nd;
        a11 = pref * (1.0 + half_plus * (g - e2sq * (1.0 + eta * c).powi(2)));
        a22 = pref * (1.0 + half_minus * (g - e2sq * (1.0 - eta * c).powi(2)));
        a12 = pref * 0.5 * cross.abs() * (g + e2sq * (1.0 - eta * eta * c * c));
        frame = (
            UnitVec2::new_unchecked(sum * (1.0 / ns)),
            UnitVec2::new_unchecked(diff * (1.0 / nd)),
        );
        // (T d̂)·(k₁ ± k₂) scaled by b₁; 1 ± c = |k₁ ± k₂|²/2.
        let p = (kd1 + kd2) + (ratio - 1.0) * kd1 * (0.5 * ns * ns);
        let m = cfg.dhat.vec().dot(diff) + (ratio - 1.0) * kd1 * (0.5 * nd * nd);
        du = p / (ns * scale_root);
        dv = m / (nd * scale_root);
        branch = TransformBranch::General;
    } else {
        // k₂ = c k₁ + s k₁⊥ with |s| tiny; M k₂ = ((1+η)c, s).
        let s = k2.dot(k1.perp());
        let ratio2 = s2.b() / s2.a();
        a11 = pref * (1.0 + eta).powi(2) * (ratio2 * ratio2 + e2sq * s * s);
        a22 = pref * (1.0 - e2sq * s * s);
        a12 = -pref * e2sq * (1.0 + eta) * c * s;
        frame = (k1, k1.perp());
        du = ratio * kd1 / scale_root;
        dv = k1.perp().dot(cfg.dhat) / scale_root;
        branch = if a11 >= a22 {
            TransformBranch::ParallelAxesCase2a
        } else {
            TransformBranch::ParallelAxesCase2b
        };
    }

    let sp = spectrum(a11, a22, a12, det);
    let (kplus, kminus, cos_phi, sin_phi) = match sp.column {
        Some((x1, x2)) => {
            let n = x1.hypot(x2);
            let (x1, x2) = (x1 / n, x2 / n);
            let (u, v) = (frame.0.vec(), frame.1.vec());
            let kp = UnitVec2::new_unchecked(u * x1 + v * x2);
            let km = UnitVec2::new_unchecked(u * (-x2) + v * x1);
            (kp, km, x1 * du + x2 * dv, -x2 * du + x1 * dv)
        }
        // E′₂ is a circle: any frame works, pick the one with φ = 0.
        None => (dhat_prime, dhat_prime.perp(), 1.0, 0.0),
    };

    TransformedPair {
        a11,
        a22,
        a12,
        lambda_plus: sp.lambda_plus,
        lambda_minus: sp.lambda_minus,
        kplus,
        kminus,
        a2p: 1.0 / sp.lambda_minus.sqrt(),
        b2p: 1.0 / sp.lambda_plus.sqrt(),
        delta: sp.delta,
        cos_phi,
        sin_phi,
        dhat_scale,
        dhat_prime,
        frame,
        k2_flipped,
        transform: t,
        branch,
    }
}
