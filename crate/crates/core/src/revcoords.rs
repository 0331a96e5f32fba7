//! Revolution coordinates `(ξ, β, φ)` attached to an argument-parametrised
//! profile:
//!
//! `Φ(ξ, β, φ) = (e^{ξ+iφ} √(−Re p*(β)), e^{2ξ} Im p*(β))`.
//!
//! `ξ` is the log-dilation, `β` the Korányi argument and `φ` the rotation
//! angle. The leaves `ξ = const` are the dilates `D_{e^ξ}(S)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heis::{arg_2pi, arg_left, koranyi_map, HPoint};
use crate::profile::{ProfileCurve, ProfileJet};
use crate::quad::{integrate_2d, integrate_fallible, QuadOptions, QuadResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevPoint {
    pub xi: f64,
    pub beta: f64,
    pub phi: f64,
}

impl RevPoint {
    pub fn new(xi: f64, beta: f64, phi: f64) -> Self {
        Self { xi, beta, phi }
    }
}

/// The coordinate box `(log a, log b) × (π/2, 3π/2) × (0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevBox {
    pub xi: (f64, f64),
    pub beta: (f64, f64),
    pub phi: (f64, f64),
}

impl RevBox {
    pub fn ring(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a < b && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("need 0 < a < b, got a = {a}, b = {b}")));
        }
        Ok(Self {
            xi: (a.ln(), b.ln()),
            beta: (FRAC_PI_2, 1.5 * PI),
            phi: (0.0, TAU),
        })
    }
}

/// Distance kept from the band edges `β = π/2, 3π/2` by box quadrature.
pub const BAND_OFFSET: f64 = 1e-9;

fn check_band(beta: f64) -> Result<()> {
    if (FRAC_PI_2..=1.5 * PI).contains(&beta) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            what: "β",
            value: beta,
            domain: "[π/2, 3π/2]".into(),
        })
    }
}

fn check_open_band(beta: f64) -> Result<()> {
    if FRAC_PI_2 < beta && beta < 1.5 * PI {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            what: "β",
            value: beta,
            domain: "(π/2, 3π/2)".into(),
        })
    }
}

/// `p*`, `ṗ*` at `β` in the open band.
pub fn profile_jet(c: &ProfileCurve, beta: f64) -> Result<ProfileJet> {
    c.require_argument()?;
    check_open_band(beta)?;
    c.jet(beta)
}

pub fn phi_map(c: &ProfileCurve, q: RevPoint) -> Result<HPoint> {
    c.require_argument()?;
    check_band(q.beta)?;
    let p = c.p_star_closed(q.beta)?;
    let e = q.xi.exp();
    let z = Complex64::from_polar(e * (-p.re).max(0.0).sqrt(), q.phi);
    Ok(HPoint::new(z, e * e * p.im))
}

pub fn phi_inv(c: &ProfileCurve, p: HPoint) -> Result<RevPoint> {
    c.require_argument()?;
    if p.z.norm_sqr() == 0.0 {
        return Err(Error::OutOfDomain {
            what: "|z|",
            value: 0.0,
            domain: "z ≠ 0 (off the vertical axis)".into(),
        });
    }
    let alpha = koranyi_map(p);
    let beta = arg_left(alpha);
    let r = c.p_star_closed(beta)?.norm();
    Ok(RevPoint::new(0.5 * (alpha.norm() / r).ln(), beta, arg_2pi(p.z)))
}

/// `J_Φ = e^{4ξ} |p*(β)|²`.
pub fn jacobian(c: &ProfileCurve, xi: f64, beta: f64) -> Result<f64> {
    c.require_argument()?;
    check_band(beta)?;
    Ok((4.0 * xi).exp() * c.p_star_closed(beta)?.norm_sqr())
}

/// The contact form in revolution coordinates evaluated on `(ξ̇, β̇, φ̇)`:
/// `2e^{2ξ}(Im p* dξ − Re p* dφ) + e^{2ξ} Im ṗ* dβ`.
pub fn contact_form_rev(c: &ProfileCurve, q: RevPoint, dq: [f64; 3]) -> Result<f64> {
    let j = profile_jet(c, q.beta)?;
    let (p, dp) = (j.p_star(), j.dp_star());
    let e2 = (2.0 * q.xi).exp();
    Ok(2.0 * e2 * (p.im * dq[0] - p.re * dq[2]) + e2 * dp.im * dq[1])
}

/// The `φ̇` that makes `(ξ̇, β̇, φ̇)` horizontal at `β`.
pub fn horizontal_phi_rate(c: &ProfileCurve, beta: f64, dxi: f64, dbeta: f64) -> Result<f64> {
    let j = profile_jet(c, beta)?;
    let (p, dp) = (j.p_star(), j.dp_star());
    Ok(beta.tan() * dxi + dp.im / (2.0 * p.re) * dbeta)
}

/// Largest violation of `φ̇ = tan β ξ̇ + Im ṗ*/(2 Re p*) β̇` along a sampled path.
pub fn horizontality_residual(c: &ProfileCurve, path: &[(RevPoint, [f64; 3])]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (q, dq) in path {
        if dq.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "path derivative",
                at: q.beta,
            });
        }
        let want = horizontal_phi_rate(c, q.beta, dq[0], dq[1])?;
        worst = worst.max((dq[2] - want).abs());
    }
    Ok(worst)
}

/// `‖γ̇_h‖ = e^ξ (−Re p*)^{−1/2} |p* ξ̇ + ½ ṗ* β̇|` for a horizontal tilde path.
pub fn horizontal_speed(c: &ProfileCurve, q: RevPoint, dq: [f64; 3]) -> Result<f64> {
    let j = profile_jet(c, q.beta)?;
    let (p, dp) = (j.p_star(), j.dp_star());
    Ok(q.xi.exp() / (-p.re).sqrt() * (p * dq[0] + dp * (0.5 * dq[1])).norm())
}

/// Ambient velocity `(ẋ, ẏ, ṫ) = DΦ(q)·(ξ̇, β̇, φ̇)`.
pub fn ambient_velocity(c: &ProfileCurve, q: RevPoint, dq: [f64; 3]) -> Result<[f64; 3]> {
    let cols = phi_differential(c, q)?;
    let mut v = [0.0; 3];
    for (col, d) in cols.iter().zip(dq) {
        for i in 0..3 {
            v[i] += col[i] * d;
        }
    }
    Ok(v)
}

/// Columns `∂Φ/∂ξ, ∂Φ/∂β, ∂Φ/∂φ` as `(x, y, t)` triples.
pub fn phi_differential(c: &ProfileCurve, q: RevPoint) -> Result<[[f64; 3]; 3]> {
    let j = profile_jet(c, q.beta)?;
    let (p, dp) = (j.p_star(), j.dp_star());
    let e = q.xi.exp();
    let f = (-p.re).sqrt();
    let df = -dp.re / (2.0 * f);
    let w = Complex64::cis(q.phi);
    let z = w * (e * f);
    let dz_beta = w * (e * df);
    let iz = Complex64::i() * z;
    Ok([
        [z.re, z.im, 2.0 * e * e * p.im],
        [dz_beta.re, dz_beta.im, e * e * dp.im],
        [iz.re, iz.im, 0.0],
    ])
}

/// Solves `DΦ(q)·(ξ̇, β̇, φ̇) = v` for the coordinate velocity.
pub fn lift_velocity(c: &ProfileCurve, q: RevPoint, v: [f64; 3]) -> Result<[f64; 3]> {
    let m = phi_differential(c, q)?;
    let det = det3(m[0], m[1], m[2]);
    if det == 0.0 || !det.is_finite() {
        return Err(Error::NonFinite {
            what: "revolution-coordinate lift",
            at: q.beta,
        });
    }
    Ok([
        det3(v, m[1], m[2]) / det,
        det3(m[0], v, m[2]) / det,
        det3(m[0], m[1], v) / det,
    ])
}

/// Determinant of the matrix with the given columns.
pub(crate) fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1]) + c[0] * (a[1] * b[2] - a[2] * b[1])
}

/// `∭_B f(q) J_Φ(q) dξ dβ dφ`, nested adaptive quadrature with `ξ` outermost.
///
/// With `phi_independent` the `φ` integral is the factor `2π`; `f` is then
/// sampled at `φ = 0`.
pub fn integrate_over_box<F>(c: &ProfileCurve, f: F, b: &RevBox, tol: f64, phi_independent: bool) -> Result<QuadResult>
where
    F: Fn(RevPoint) -> Result<f64>,
{
    c.require_argument()?;
    let opts = QuadOptions::rel(tol);
    let (b0, b1) = (b.beta.0.max(FRAC_PI_2 + BAND_OFFSET), b.beta.1.min(1.5 * PI - BAND_OFFSET));
    let weighted = |q: RevPoint| -> Result<f64> { Ok(f(q)? * jacobian(c, q.xi, q.beta)?) };
    if phi_independent {
        let r = integrate_2d(|xi, beta| weighted(RevPoint::new(xi, beta, 0.0)), b.xi, (b0, b1), &opts)?;
        let width = b.phi.1 - b.phi.0;
        return Ok(QuadResult {
            value: r.value * width,
            error: r.error * width,
            panels: r.panels,
        });
    }
    let mut inner_rel = 0.0f64;
    let mut r = integrate_fallible(
        |xi| {
            let inner = integrate_2d(|beta, phi| weighted(RevPoint::new(xi, beta, phi)), (b0, b1), b.phi, &opts)?;
            if inner.value != 0.0 {
                inner_rel = inner_rel.max(inner.error / inner.value.abs());
            }
            Ok(inner.value)
        },
        b.xi.0,
        b.xi.1,
        &opts,
    )?;
    r.error += inner_rel * r.value.abs();
    Ok(r)
}
