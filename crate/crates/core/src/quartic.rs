//! The tangency quartic for q = √(1 + δ sin²ψ) and its closed-form root by
//! Ferrari's method.
//!
//! The resolvent is evaluated in complex arithmetic with principal roots, so
//! the three-real-root case (which is the common one here) needs no special
//! handling; the assembled resolvent root `y` must come out real. If the
//! closed form ever yields something that is not a root inside
//! `[1, √(1+δ)]`, the all-roots solver from [`crate::oracle`] is consulted
//! and its unique in-bracket root is used instead.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle::oracle_quartic_roots;

/// Slack on the bracket `[1, √(1+δ)]` before a root is rejected.
pub const BRACKET_SLACK: f64 = 1e-9;
/// Relative residual a root must achieve: |f(q)| ≤ tol·max(|A|q⁴, |E|).
pub const RESIDUAL_TOL: f64 = 1e-8;

/// `A q⁴ + B q³ + C q² + D q + E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    /// The same polynomial in x = q − 1, constant term first. Near q = 1 the
    /// terms above cancel to rounding noise; these do not.
    at_one: [f64; 5],
}

impl QuarticCoeffs {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64) -> Self {
        let mut t = [e, d, c, b, a];
        for k in 0..4 {
            for j in (k..4).rev() {
                t[j] += t[j + 1];
            }
        }
        QuarticCoeffs {
            a,
            b,
            c,
            d,
            e,
            at_one: t,
        }
    }

    #[inline]
    pub fn eval(&self, q: f64) -> f64 {
        (((self.a * q + self.b) * q + self.c) * q + self.d) * q + self.e
    }

    /// f and f′ at q = 1 + x, evaluated in the shifted basis.
    fn eval_shifted(&self, x: f64) -> (f64, f64) {
        let t = &self.at_one;
        let f = (((t[4] * x + t[3]) * x + t[2]) * x + t[1]) * x + t[0];
        let df = ((4.0 * t[4] * x + 3.0 * t[3]) * x + 2.0 * t[2]) * x + t[1];
        (f, df)
    }

    #[inline]
    pub fn eval_derivative(&self, q: f64) -> f64 {
        ((4.0 * self.a * q + 3.0 * self.b) * q + 2.0 * self.c) * q + self.d
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        (((z * self.a + self.b) * z + self.c) * z + self.d) * z + self.e
    }

    /// Scale against which residuals are judged.
    pub fn residual_scale(&self, q: f64) -> f64 {
        (self.a.abs() * q.powi(4)).max(self.e.abs())
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.a, self.b, self.c, self.d, self.e]
    }
}

/// Which closed-form expression produced the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum FerrariBranch {
    GeneralU,
    UZero,
    BetaZero,
}

/// Where the returned root finally came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RootSource {
    Ferrari,
    /// The closed form failed validation; the all-roots solver supplied it.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FerrariIntermediates {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub p: f64,
    pub q: f64,
    pub u_re: f64,
    pub u_im: f64,
    pub y: f64,
    /// |Im y| / max(1, |y|) before truncation to real.
    pub y_imag_residue: f64,
    pub branch: FerrariBranch,
    pub source: RootSource,
}

/// Coefficients of the tangency quartic for a unit circle against an ellipse
/// with minor semi-axis `b2p` and anisotropy `delta`, along a center line at
/// angle φ (given as tan²φ) from the ellipse's minor axis.
pub fn quartic_coefficients(b2p: f64, delta: f64, tan2phi: f64) -> QuarticCoeffs {
    let inv_b = 1.0 / b2p;
    let one_d = 1.0 + delta;
    let (ib2, t, d) = (inv_b * inv_b, tan2phi, delta);
    let at_one = [
        d * t * (1.0 + inv_b) * (1.0 + inv_b),
        2.0 * (d * t * (ib2 + inv_b) - d * d - 2.0 * d * (1.0 + inv_b) - (1.0 + t) * (1.0 + inv_b) * (1.0 + inv_b)),
        d * ib2 * t - d * d - 2.0 * d - 6.0 * d * inv_b - (1.0 + t) * (1.0 + 6.0 * inv_b + 5.0 * ib2),
        -2.0 * inv_b * (d + (1.0 + t) * (1.0 + 2.0 * inv_b)),
        -ib2 * (1.0 + t),
    ];
    QuarticCoeffs {
        a: -ib2 * (1.0 + t),
        b: -2.0 * inv_b * (1.0 + t + d),
        c: -t - one_d * one_d + ib2 * (1.0 + one_d * t),
        d: 2.0 * inv_b * (1.0 + t) * one_d,
        e: (1.0 + t + d) * one_d,
        at_one,
    }
}

/// The closed-form Ferrari root and its intermediates, unvalidated. `None`
/// as the root means the expression produced a non-real value.
pub fn ferrari_root(c: &QuarticCoeffs) -> (Option<f64>, FerrariIntermediates) {
    let (roots, inter) = ferrari_candidates(c, true);
    (roots.first().copied(), inter)
}

/// Every real root the two factor quadratics give, the closed-form one first.
fn ferrari_candidates(c: &QuarticCoeffs, allow_biquadratic: bool) -> (Vec<f64>, FerrariIntermediates) {
    let (a, b, cc, d, e) = (c.a, c.b, c.c, c.d, c.e);
    let ba = b / a;
    let alpha = -3.0 * ba * ba / 8.0 + cc / a;
    let beta = ba * ba * ba / 8.0 - ba * cc / (2.0 * a) + d / a;
    let gamma = -3.0 * ba.powi(4) / 256.0 + cc * ba * ba / (16.0 * a) - ba * d / (4.0 * a) + e / a;
    let shift = -ba / 4.0;

    let mut inter = FerrariIntermediates {
        alpha,
        beta,
        gamma,
        p: f64::NAN,
        q: f64::NAN,
        u_re: f64::NAN,
        u_im: f64::NAN,
        y: f64::NAN,
        y_imag_residue: 0.0,
        branch: FerrariBranch::GeneralU,
        source: RootSource::Ferrari,
    };

    if allow_biquadratic && beta.abs() < 1e-11 * 1f64.max(ba.abs().powi(3)) {
        // Biquadratic: the depressed quartic has no linear term.
        inter.branch = FerrariBranch::BetaZero;
        let disc = alpha * alpha - 4.0 * gamma;
        if disc < 0.0 {
            return (Vec::new(), inter);
        }
        let mut roots = Vec::new();
        for z in [0.5 * (-alpha + disc.sqrt()), 0.5 * (-alpha - disc.sqrt())] {
            if z >= 0.0 {
                roots.extend([shift + z.sqrt(), shift - z.sqrt()]);
            }
        }
        return (roots, inter);
    }

    let p = -alpha * alpha / 12.0 - gamma;
    let q = -alpha.powi(3) / 108.0 + alpha * gamma / 3.0 - beta * beta / 8.0;
    inter.p = p;
    inter.q = q;

    let disc = q * q / 4.0 + p * p * p / 27.0;
    let u = if disc >= 0.0 {
        // One real resolvent root. Take the square root with the sign of −Q
        // so nothing cancels, and the real cube root; U and −P/(3U) merely
        // trade places, y is unchanged.
        let r = -q / 2.0 - q.signum() * disc.sqrt();
        Complex64::new(r.cbrt(), 0.0)
    } else {
        (Complex64::new(-q / 2.0, 0.0) + Complex64::new(disc, 0.0).sqrt()).powf(1.0 / 3.0)
    };
    inter.u_re = u.re;
    inter.u_im = u.im;

    let y = if u.norm() < 1e-12 * 1f64.max(q.abs().cbrt()) {
        inter.branch = FerrariBranch::UZero;
        Complex64::new(-5.0 / 6.0 * alpha - q.cbrt(), 0.0)
    } else {
        Complex64::new(-5.0 / 6.0 * alpha, 0.0) + u - p / (3.0 * u)
    };
    inter.y_imag_residue = y.im.abs() / 1f64.max(y.re.abs());
    inter.y = y.re;
    if inter.y_imag_residue > 1e-9 {
        return (Vec::new(), inter);
    }
    let y = y.re;

    let mut s = alpha + 2.0 * y;
    if s < 0.0 && s > -1e-12 * (1.0 + alpha.abs()) {
        s = 0.0;
    }
    if s <= 0.0 {
        return (Vec::new(), inter);
    }
    // α + 2y cancels badly when the pair is very elongated; tidy it on the
    // resolvent written in s itself.
    let k1 = alpha * alpha - 4.0 * gamma;
    let f = |s: f64| ((s + 2.0 * alpha) * s + k1) * s - beta * beta;
    for _ in 0..4 {
        let fs = f(s);
        let df = (3.0 * s + 4.0 * alpha) * s + k1;
        let next = s - fs / df;
        if next.is_nan() || next <= 0.0 || f(next).abs() >= fs.abs() {
            break;
        }
        s = next;
    }
    let w = s.sqrt();
    let inner = |sign: f64| {
        let t = -(3.0 * alpha + 2.0 * y + sign * 2.0 * beta / w);
        let scale = 3.0 * alpha.abs() + 2.0 * y.abs() + 2.0 * (beta / w).abs();
        if t < 0.0 && t > -1e-10 * scale {
            Some(0.0)
        } else if t < 0.0 {
            None
        } else {
            Some(t.sqrt())
        }
    };
    // Rounding can push the expected pair complex when it is nearly double,
    // or clamp a complex pair onto its real part; the other pair then
    // carries the root.
    let mut roots = Vec::new();
    for sign in [1.0, -1.0] {
        if let Some(r) = inner(sign) {
            roots.extend([shift + 0.5 * (sign * w + r), shift + 0.5 * (sign * w - r)]);
        }
    }
    (roots, inter)
}

fn is_acceptable(c: &QuarticCoeffs, q: f64, upper: f64) -> bool {
    q.is_finite()
        && q >= 1.0 - BRACKET_SLACK
        && q <= upper + BRACKET_SLACK
        && c.eval(q).abs() <= RESIDUAL_TOL * c.residual_scale(q)
}

/// Newton steps, each kept only if it lowers the residual; in x = q − 1
/// when q is near 1.
fn polish(c: &QuarticCoeffs, mut q: f64) -> f64 {
    if (q - 1.0).abs() < 1.0 {
        let mut x = q - 1.0;
        for _ in 0..16 {
            let (f, df) = c.eval_shifted(x);
            if f == 0.0 || df == 0.0 {
                break;
            }
            let next = x - f / df;
            if !next.is_finite() || c.eval_shifted(next).0.abs() >= f.abs() {
                break;
            }
            x = next;
        }
        return 1.0 + x;
    }
    for _ in 0..3 {
        let f = c.eval(q);
        let df = c.eval_derivative(q);
        if f == 0.0 || df == 0.0 {
            break;
        }
        let next = q - f / df;
        if !next.is_finite() || c.eval(next).abs() >= f.abs() {
            break;
        }
        q = next;
    }
    q
}

/// The physical root q ∈ [1, √(1+δ)] of the contact quartic.
pub fn solve_contact_quartic(c: &QuarticCoeffs, delta: f64) -> Result<(f64, FerrariIntermediates)> {
    let upper = (1.0 + delta).sqrt();
    let pick = |roots: &[f64]| {
        roots
            .iter()
            .map(|&r| polish(c, r))
            .find(|&q| is_acceptable(c, q, upper))
    };
    let (roots, mut inter) = ferrari_candidates(c, true);
    let ferrari = roots.first().copied().unwrap_or(f64::NAN);
    let mut found = pick(&roots);
    if found.is_none() && inter.branch == FerrariBranch::BetaZero {
        // The β test scales with |B/A|³ and fires spuriously when δ is large.
        let (roots, general) = ferrari_candidates(c, false);
        inter = general;
        found = pick(&roots);
    }
    let q = if let Some(q) = found {
        q
    } else {
        inter.source = RootSource::Fallback;
        let roots = oracle_quartic_roots(c).map_err(|_| Error::NoPhysicalRoot {
            upper,
            ferrari,
            in_bracket: 0,
        })?;
        let candidates: Vec<f64> = roots
            .iter()
            .filter(|z| z.im.abs() <= 1e-7 * 1f64.max(z.norm()))
            .map(|z| polish(c, z.re))
            .filter(|&q| is_acceptable(c, q, upper))
            .collect();
        if candidates.len() != 1 {
            return Err(Error::NoPhysicalRoot {
                upper,
                ferrari,
                in_bracket: candidates.len(),
            });
        }
        candidates[0]
    };
    Ok((q.clamp(1.0, upper), inter))
}
