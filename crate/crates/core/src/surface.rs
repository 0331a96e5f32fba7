//! Surfaces of revolution `σ(s, φ) = (f(s) e^{iφ}, g(s))`, optionally dilated.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::curves::{check_resolution, uniform_nodes, HorizontalCurve};
use crate::error::{Error, Result};
use crate::heis::{HPoint, HorVector, TangentVector};
use crate::ode::{integrate_to_nodes, OdeOptions};
use crate::profile::{ProfileCurve, ProfileJet};
use crate::quad::{integrate_fallible, QuadOptions, QuadResult};
use crate::revcoords::RevPoint;

/// Tolerance of the horizontal area quadrature.
pub const AREA_TOL: f64 = 1e-10;
/// `|ḟ| ≤ FLAT_RATIO · |(ḟ, ġ)|` switches the curvature to one-sided limits.
pub const FLAT_RATIO: f64 = 1e-6;
pub const CURVATURE_OFFSET: f64 = 1e-5;
pub const CURVATURE_AGREEMENT: f64 = 1e-3;
pub const FLOW_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SurfacePatch {
    profile: ProfileCurve,
    scale: f64,
}

impl SurfacePatch {
    pub fn new(profile: ProfileCurve, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        Ok(Self { profile, scale })
    }

    pub fn profile(&self) -> &ProfileCurve {
        &self.profile
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn jet(&self, s: f64) -> Result<ProfileJet> {
        self.profile.jet(s)
    }

    pub fn patch_eval(&self, s: f64, phi: f64) -> Result<HPoint> {
        let j = self.jet(s)?;
        let d = self.scale;
        Ok(HPoint::new(Complex64::from_polar(d * j.f, phi), d * d * j.g))
    }

    /// `N^h = f (−Im(e^{iφ}ṗ*) X + Re(e^{iφ}ṗ*) Y)`, times `scale³`.
    pub fn horizontal_normal(&self, s: f64, phi: f64) -> Result<HorVector> {
        let j = self.jet(s)?;
        let n = Complex64::i() * Complex64::cis(phi) * j.dp_star() * (j.f * self.scale.powi(3));
        Ok(HorVector::new(self.patch_eval(s, phi)?, n.re, n.im))
    }

    pub fn unit_normal(&self, s: f64, phi: f64) -> Result<HorVector> {
        self.horizontal_normal(s, phi)?.unit().ok_or(Error::NonFinite {
            what: "unit horizontal normal (characteristic point)",
            at: s,
        })
    }

    /// Euclidean normal `σ_s × σ_φ` in `(x, y, t)` coordinates.
    pub fn euclidean_normal(&self, s: f64, phi: f64) -> Result<[f64; 3]> {
        let (a, b) = (self.sigma_s(s, phi)?, self.sigma_phi(s, phi)?);
        Ok([a.b * b.c - a.c * b.b, a.c * b.a - a.a * b.c, a.a * b.b - a.b * b.a])
    }

    pub fn sigma_s(&self, s: f64, phi: f64) -> Result<TangentVector> {
        let j = self.jet(s)?;
        let d = self.scale;
        let v = Complex64::from_polar(d * j.df, phi);
        Ok(TangentVector::new(self.patch_eval(s, phi)?, v.re, v.im, d * d * j.dg))
    }

    pub fn sigma_phi(&self, s: f64, phi: f64) -> Result<TangentVector> {
        let j = self.jet(s)?;
        let v = Complex64::i() * Complex64::from_polar(self.scale * j.f, phi);
        Ok(TangentVector::new(self.patch_eval(s, phi)?, v.re, v.im, 0.0))
    }

    /// Induced form `ω_S = Im ṗ* ds − 2 Re p* dφ` (times `scale²`) on `(ds, dφ)`.
    pub fn omega_s(&self, s: f64, ds: f64, dphi: f64) -> Result<f64> {
        let j = self.jet(s)?;
        Ok(self.scale.powi(2) * (j.dp_star().im * ds - 2.0 * j.p_star().re * dphi))
    }

    /// `A^h = 2π ∫ f |ṗ*| ds`, times `scale³`. The domain is split into
    /// `quad_n` panels, each integrated adaptively on open nodes.
    pub fn horizontal_area(&self, quad_n: usize) -> Result<QuadResult> {
        if quad_n < 8 {
            return Err(Error::InvalidArgument(format!("quad_n must be at least 8, got {quad_n}")));
        }
        let (lo, hi) = self.profile.domain();
        let opts = QuadOptions::rel(AREA_TOL);
        let (mut value, mut error, mut panels) = (0.0, 0.0, 0);
        for k in 0..quad_n {
            let a = lo + (hi - lo) * k as f64 / quad_n as f64;
            let b = if k + 1 == quad_n { hi } else { lo + (hi - lo) * (k + 1) as f64 / quad_n as f64 };
            let r = integrate_fallible(
                |s| {
                    let j = self.jet(s)?;
                    Ok(j.f * j.dp_star().norm())
                },
                a,
                b,
                &opts,
            )?;
            value += r.value;
            error += r.error;
            panels += r.panels;
        }
        if error > AREA_TOL * value.abs() {
            return Err(Error::NotConverged {
                what: "horizontal area",
                estimate: value,
                error,
            });
        }
        let w = TAU * self.scale.powi(3);
        Ok(QuadResult {
            value: w * value,
            error: w * error,
            panels,
        })
    }

    /// `dφ/ds = ½ Im ṗ* / Re p*` along the Legendrian flow.
    pub fn flow_rate(&self, s: f64) -> Result<f64> {
        let j = self.jet(s)?;
        let re = j.p_star().re;
        let r = 0.5 * j.dp_star().im / re;
        if re == 0.0 || !r.is_finite() {
            return Err(Error::NonFinite {
                what: "flow rate (Re p* = 0)",
                at: s,
            });
        }
        Ok(r)
    }

    /// The horizontal curve `s ↦ σ(s, φ(s))` through `σ(s0, φ0)` sampled on
    /// `intervals + 1` uniform nodes of `span`.
    pub fn flow_curve(&self, s0: f64, phi0: f64, span: (f64, f64), intervals: usize) -> Result<HorizontalCurve> {
        check_resolution(intervals)?;
        let (lo, hi) = span;
        if !(lo <= s0 && s0 <= hi) {
            return Err(Error::InvalidArgument(format!("s0 = {s0} is not in the span ({lo}, {hi})")));
        }
        for e in [lo, hi] {
            if !self.profile.contains(e) {
                let (a, b) = self.profile.domain();
                return Err(Error::OutOfDomain {
                    what: "flow span",
                    value: e,
                    domain: format!("({a}, {b})"),
                });
            }
        }
        let nodes = uniform_nodes(lo, hi, intervals);
        let split = nodes.partition_point(|&s| s < s0);
        let opts = OdeOptions::default();
        let rhs = |s: f64, _: &[f64; 1]| Ok([self.flow_rate(s)?]);
        let mut fwd = vec![s0];
        fwd.extend_from_slice(&nodes[split..]);
        let mut bwd = vec![s0];
        bwd.extend(nodes[..split].iter().rev());
        let ahead = integrate_to_nodes(rhs, &fwd, [phi0], &opts)?;
        let behind = integrate_to_nodes(rhs, &bwd, [phi0], &opts)?;
        let phis: Vec<f64> = behind[1..].iter().rev().chain(&ahead[1..]).map(|y| y[0]).collect();

        let mut points = Vec::with_capacity(nodes.len());
        let mut velocities = Vec::with_capacity(nodes.len());
        let mut tilde = self.profile.is_argument_parametrised().then(Vec::new);
        let xi = self.scale.ln();
        for (&s, &phi) in nodes.iter().zip(&phis) {
            let rate = self.flow_rate(s)?;
            let (a, b) = (self.sigma_s(s, phi)?, self.sigma_phi(s, phi)?);
            points.push(a.base);
            velocities.push([a.a + rate * b.a, a.b + rate * b.b, a.c + rate * b.c]);
            if let Some(t) = tilde.as_mut() {
                t.push((RevPoint::new(xi, s, phi), [0.0, 1.0, rate]));
            }
        }
        HorizontalCurve::new(format!("flow s0={s0} φ0={phi0}"), span, points, velocities, tilde, FLOW_TOLERANCE)
    }

    /// `−Im(u)/f − Im(u̇)/ḟ` with `u = ṗ*/|ṗ*|`, evaluated directly.
    fn curvature_formula(&self, s: f64) -> Result<f64> {
        let j = self.jet(s)?;
        let (dp, ddp) = (j.dp_star(), j.ddp_star());
        let n = dp.norm();
        let du_im = (ddp.im * n * n - dp.im * (dp.conj() * ddp).re) / (n * n * n);
        let h = (-dp.im / n / j.f - du_im / j.df) / self.scale;
        if !h.is_finite() {
            return Err(Error::NonFinite {
                what: "horizontal mean curvature",
                at: s,
            });
        }
        Ok(h)
    }

    /// Horizontal mean curvature `H^h(s)`. Where `ḟ` vanishes the value is
    /// the average of the two one-sided values at `s ± 1e-5`.
    pub fn mean_curvature(&self, s: f64) -> Result<f64> {
        let j = self.jet(s)?;
        if j.df.abs() > FLAT_RATIO * j.df.hypot(j.dg) {
            return self.curvature_formula(s);
        }
        let left = self.curvature_formula(s - CURVATURE_OFFSET)?;
        let right = self.curvature_formula(s + CURVATURE_OFFSET)?;
        let mid = 0.5 * (left + right);
        if (left - right).abs() > CURVATURE_AGREEMENT * mid.abs().max(1.0) {
            return Err(Error::IndeterminateCurvature { s, left, right });
        }
        Ok(mid)
    }

    /// Interior grid `s_i = lo + (hi − lo)(i + 1)/(n + 1)`.
    pub fn s_grid(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.profile.domain();
        (0..n).map(|i| lo + (hi - lo) * (i + 1) as f64 / (n + 1) as f64).collect()
    }

    /// Minimum of `‖N^h‖` over an `n_s × n_φ` grid.
    pub fn characteristic_min(&self, n_s: usize, n_phi: usize) -> Result<f64> {
        let mut m = f64::INFINITY;
        for s in self.s_grid(n_s) {
            for k in 0..n_phi {
                m = m.min(self.horizontal_normal(s, TAU * k as f64 / n_phi as f64)?.norm());
            }
        }
        Ok(m)
    }

    pub fn mesh(&self, n_s: usize, n_phi: usize) -> Result<Mesh> {
        if n_s < 2 || n_phi < 3 {
            return Err(Error::InvalidArgument(format!("mesh needs n_s ≥ 2 and n_φ ≥ 3, got {n_s} × {n_phi}")));
        }
        let mut vertices = Vec::with_capacity(n_s * n_phi);
        for s in self.s_grid(n_s) {
            let (nh, hh) = (self.horizontal_normal(s, 0.0)?.norm(), self.mean_curvature(s));
            for k in 0..n_phi {
                let phi = TAU * k as f64 / n_phi as f64;
                vertices.push(MeshVertex {
                    s,
                    phi,
                    point: self.patch_eval(s, phi)?,
                    nh_norm: nh,
                    hh: hh.as_ref().ok().copied(),
                });
            }
        }
        let mut faces = Vec::with_capacity(2 * (n_s - 1) * n_phi);
        for i in 0..n_s - 1 {
            for k in 0..n_phi {
                let a = i * n_phi + k;
                let b = i * n_phi + (k + 1) % n_phi;
                let (c, d) = (a + n_phi, b + n_phi);
                faces.push([a, c, d]);
                faces.push([a, d, b]);
            }
        }
        Ok(Mesh { vertices, faces })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshVertex {
    pub s: f64,
    pub phi: f64,
    #[serde(skip)]
    pub point: HPoint,
    pub nh_norm: f64,
    /// `None` where the curvature is indeterminate.
    pub hh: Option<f64>,
}

/// Triangulated `(s, φ)` grid, periodic in `φ` and open at the poles.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<MeshVertex>,
    pub faces: Vec<[usize; 3]>,
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

impl Mesh {
    /// Wavefront OBJ with `v x y t` and 1-based `f i j k` lines.
    pub fn write_obj<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {:.17e} {:.17e} {:.17e}", v.point.x(), v.point.y(), v.point.t).map_err(io)?;
        }
        for f in &self.faces {
            writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).map_err(io)?;
        }
        Ok(())
    }

    /// Per-vertex CSV `index,s,phi,nh_norm,hh,status`.
    pub fn write_vertex_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,s,phi,nh_norm,hh,status").map_err(io)?;
        for (i, v) in self.vertices.iter().enumerate() {
            let (hh, status) = match v.hh {
                Some(h) => (format!("{h:.17e}"), "ok"),
                None => ("nan".to_string(), "indeterminate"),
            };
            writeln!(w, "{i},{:.17e},{:.17e},{:.17e},{hh},{status}", v.s, v.phi, v.nh_norm).map_err(io)?;
        }
        Ok(())
    }
}
