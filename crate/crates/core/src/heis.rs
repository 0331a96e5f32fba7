//! The Heisenberg group `ℂ × ℝ`: group law, Korányi gauge and metric,
//! similarities, and the contact structure at a point.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// A point `(z, t)` of the Heisenberg group.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HPoint {
    pub z: Complex64,
    pub t: f64,
}

impl HPoint {
    pub const ORIGIN: HPoint = HPoint {
        z: Complex64::new(0.0, 0.0),
        t: 0.0,
    };

    pub fn new(z: Complex64, t: f64) -> Self {
        Self { z, t }
    }

    pub fn from_xyt(x: f64, y: f64, t: f64) -> Self {
        Self::new(Complex64::new(x, y), t)
    }

    pub fn x(&self) -> f64 {
        self.z.re
    }

    pub fn y(&self) -> f64 {
        self.z.im
    }

    pub fn is_finite(&self) -> bool {
        self.z.re.is_finite() && self.z.im.is_finite() && self.t.is_finite()
    }
}

/// Group product `(z,t)*(w,s) = (z+w, t+s+2 Im(z w̄))`.
pub fn mul(p: HPoint, q: HPoint) -> HPoint {
    HPoint::new(p.z + q.z, p.t + q.t + 2.0 * (p.z * q.z.conj()).im)
}

pub fn inverse(p: HPoint) -> HPoint {
    HPoint::new(-p.z, -p.t)
}

/// Korányi map `α(z,t) = −|z|² + it`, valued in the closed left half-plane.
pub fn koranyi_map(p: HPoint) -> Complex64 {
    Complex64::new(-p.z.norm_sqr(), p.t)
}

/// Korányi gauge `(|z|⁴ + t²)^{1/4}`.
pub fn gauge(p: HPoint) -> f64 {
    koranyi_map(p).norm().sqrt()
}

/// Korányi–Cygan distance `|p⁻¹ * q|`.
pub fn dist(p: HPoint, q: HPoint) -> f64 {
    gauge(mul(inverse(p), q))
}

pub fn dilate(delta: f64, p: HPoint) -> Result<HPoint> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "dilation factor must be positive, got {delta}"
        )));
    }
    Ok(HPoint::new(p.z * delta, p.t * delta * delta))
}

/// Argument of a point of the closed left half-plane, continuous in `[π/2, 3π/2]`.
pub fn arg_left(w: Complex64) -> f64 {
    let a = w.im.atan2(w.re);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Argument of `z` in `[0, 2π)`.
pub fn arg_2pi(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a < 0.0 {
        (a + TAU).min(TAU.next_down())
    } else {
        a
    }
}

/// Elements of the similarity group and their compositions.
#[derive(Debug, Clone, PartialEq)]
pub enum Similarity {
    /// Left translation `p ↦ g * p`.
    Translate(HPoint),
    /// Rotation `R_θ(z,t) = (z e^{iθ}, t)` about the vertical axis.
    Rotate(f64),
    Dilate(f64),
    /// Korányi inversion; undefined at the origin.
    Inversion,
    /// Conjugation `j(z,t) = (z̄, −t)`.
    Conjugation,
    /// Applies the elements left to right.
    Compose(Vec<Similarity>),
}

impl Similarity {
    pub fn apply(&self, p: HPoint) -> Result<HPoint> {
        match self {
            Similarity::Translate(g) => Ok(mul(*g, p)),
            Similarity::Rotate(theta) => Ok(HPoint::new(p.z * Complex64::cis(*theta), p.t)),
            Similarity::Dilate(d) => dilate(*d, p),
            Similarity::Inversion => {
                let a = koranyi_map(p);
                if a.norm_sqr() == 0.0 {
                    return Err(Error::OutOfDomain {
                        what: "inversion argument",
                        value: 0.0,
                        domain: "H \\ {(0,0)}".into(),
                    });
                }
                Ok(HPoint::new(p.z / a, -p.t / a.norm_sqr()))
            }
            Similarity::Conjugation => Ok(HPoint::new(p.z.conj(), -p.t)),
            Similarity::Compose(items) => items.iter().try_fold(p, |q, g| g.apply(q)),
        }
    }
}

/// A tangent vector `a ∂x + b ∂y + c ∂t` at `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: HPoint,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TangentVector {
    pub fn new(base: HPoint, a: f64, b: f64, c: f64) -> Self {
        Self { base, a, b, c }
    }

    /// `X_p = ∂x + 2y ∂t`.
    pub fn x_field(p: HPoint) -> Self {
        Self::new(p, 1.0, 0.0, 2.0 * p.y())
    }

    /// `Y_p = ∂y − 2x ∂t`.
    pub fn y_field(p: HPoint) -> Self {
        Self::new(p, 0.0, 1.0, -2.0 * p.x())
    }

    pub fn t_field(p: HPoint) -> Self {
        Self::new(p, 0.0, 0.0, 1.0)
    }

    /// Components on the left-invariant frame `(X, Y, T)`.
    pub fn frame_components(&self) -> [f64; 3] {
        [self.a, self.b, contact_eval(self)]
    }

    /// Horizontal projection `a X + b Y`.
    pub fn horizontal(&self) -> HorVector {
        HorVector::new(self.base, self.a, self.b)
    }
}

/// Contact form `ω = dt + 2(x dy − y dx)` evaluated on `v`.
pub fn contact_eval(v: &TangentVector) -> f64 {
    let (x, y) = (v.base.x(), v.base.y());
    v.c + 2.0 * (x * v.b - y * v.a)
}

/// A horizontal vector `ν₁ X + ν₂ Y` at `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorVector {
    pub base: HPoint,
    pub nu1: f64,
    pub nu2: f64,
}

impl HorVector {
    pub fn new(base: HPoint, nu1: f64, nu2: f64) -> Self {
        Self { base, nu1, nu2 }
    }

    pub fn norm(&self) -> f64 {
        self.nu1.hypot(self.nu2)
    }

    /// Sub-Riemannian inner product; the frame `X, Y` is orthonormal.
    pub fn dot(&self, other: &HorVector) -> f64 {
        self.nu1 * other.nu1 + self.nu2 * other.nu2
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.nu1, self.nu2)
    }

    pub fn unit(&self) -> Option<HorVector> {
        let n = self.norm();
        (n > 0.0).then(|| HorVector::new(self.base, self.nu1 / n, self.nu2 / n))
    }

    /// Signed angle from `self` to `other` in `(−π, π]`.
    pub fn angle_to(&self, other: &HorVector) -> f64 {
        let cross = self.nu1 * other.nu2 - self.nu2 * other.nu1;
        cross.atan2(self.dot(other))
    }

    pub fn to_tangent(&self) -> TangentVector {
        let p = self.base;
        TangentVector::new(p, self.nu1, self.nu2, 2.0 * (p.y() * self.nu1 - p.x() * self.nu2))
    }
}

/// The complex structure `𝕁X = Y`, `𝕁Y = −X`.
pub fn apply_j(v: HorVector) -> HorVector {
    HorVector::new(v.base, -v.nu2, v.nu1)
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}
